use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, Estimator, FittedState};
use crate::linalg::{fix_sign, squared_distance};
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType, ParamValue};
use crate::transformers::dense_only;

/// Eigenvalues at or below this fraction of the largest one are dropped.
const RELATIVE_CUTOFF: f64 = 1e-10;
/// A centered kernel whose largest eigenvalue is below this is degenerate.
const DEGENERATE_CUTOFF: f64 = 1e-12;

/// Kernel PCA with the RBF kernel `exp(-gamma * |x - z|^2)`.
///
/// `gamma = null` resolves to `1 / n_features` at fit time and
/// `n_components = null` keeps every positive eigenvalue.
pub struct KernelPca {
    schema: ParamSchema,
}

impl KernelPca {
    pub const KIND: &'static str = "KernelPCA";

    pub fn new() -> Self {
        KernelPca {
            schema: ParamSchema::new()
                .param(
                    "n_components",
                    ParamType::nullable(ParamType::Int),
                    ParamValue::Null,
                )
                .param("kernel", ParamType::Str, "rbf")
                .param(
                    "gamma",
                    ParamType::nullable(ParamType::Float),
                    ParamValue::Null,
                ),
        }
    }
}

impl Default for KernelPca {
    fn default() -> Self {
        Self::new()
    }
}

fn rbf(a: &Matrix, b: &Matrix, gamma: f64) -> Matrix {
    let mut k = Matrix::zeros(a.n_rows(), b.n_rows());
    for i in 0..a.n_rows() {
        for j in 0..b.n_rows() {
            k.set(i, j, (-gamma * squared_distance(a.row(i), b.row(j))).exp());
        }
    }
    k
}

impl Estimator for KernelPca {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            transformer: true,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, _: Option<&[f64]>) -> Result<FittedState> {
        let x = dense_only(Self::KIND, x)?;
        let n = x.n_rows();
        if params.string("kernel") != "rbf" {
            return Err(Error::invalid_param(
                "kernel",
                format!(
                    "unsupported kernel `{}` (only `rbf`)",
                    params.string("kernel")
                ),
            ));
        }
        let gamma = params
            .opt_float("gamma")
            .unwrap_or(1.0 / x.n_cols().max(1) as f64);
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid_param("gamma", "must be positive"));
        }
        let limit = match params.opt_int("n_components") {
            None => n,
            Some(c) if c >= 1 && c as usize <= n => c as usize,
            Some(c) => {
                return Err(Error::invalid_param(
                    "n_components",
                    format!("{c} not in 1..={n}"),
                ))
            }
        };

        let k = rbf(&x, &x, gamma);
        let col_means: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| k.get(i, j)).sum::<f64>() / n as f64)
            .collect();
        let grand = col_means.iter().sum::<f64>() / n as f64;
        let centered = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            k.get(i, j) - col_means[i] - col_means[j] + grand
        });

        let eig = nalgebra::linalg::SymmetricEigen::new(centered);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .total_cmp(&eig.eigenvalues[a])
                .then(a.cmp(&b))
        });
        let top = eig.eigenvalues[order[0]];
        if top <= DEGENERATE_CUTOFF {
            return Err(Error::fit(
                Self::KIND,
                "degenerate kernel: centered kernel matrix has no positive eigenvalue",
            ));
        }
        let kept: Vec<usize> = order
            .into_iter()
            .filter(|&i| eig.eigenvalues[i] > RELATIVE_CUTOFF * top)
            .take(limit)
            .collect();

        let mut alphas = Matrix::zeros(n, kept.len());
        let mut lambdas = Vec::with_capacity(kept.len());
        for (c, &idx) in kept.iter().enumerate() {
            let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            fix_sign(&mut v);
            for (i, val) in v.into_iter().enumerate() {
                alphas.set(i, c, val);
            }
            lambdas.push(eig.eigenvalues[idx]);
        }

        Ok(FittedState::new()
            .with("X_fit_", Array::matrix(&x))
            .with("gamma_", Array::scalar(gamma))
            .with("alphas_", Array::matrix(&alphas))
            .with("lambdas_", Array::vector(lambdas))
            .with("kernel_col_means_", Array::vector(col_means))
            .with("kernel_mean_", Array::scalar(grand)))
    }

    fn transform(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Features> {
        let z = dense_only(Self::KIND, x)?;
        let fit_x = state.matrix("X_fit_")?;
        let gamma = state.scalar("gamma_")?;
        let alphas = state.matrix("alphas_")?;
        let lambdas = state.vector("lambdas_")?;
        let col_means = state.vector("kernel_col_means_")?;
        let grand = state.scalar("kernel_mean_")?;

        let mut k = rbf(&z, &fit_x, gamma);
        let n = fit_x.n_rows() as f64;
        for i in 0..k.n_rows() {
            let row_mean = k.row(i).iter().sum::<f64>() / n;
            for (v, cm) in k.row_mut(i).iter_mut().zip(col_means) {
                *v = *v - cm - row_mean + grand;
            }
        }
        let mut out = k.matmul(&alphas)?;
        for i in 0..out.n_rows() {
            for (v, l) in out.row_mut(i).iter_mut().zip(lambdas) {
                *v /= l.sqrt();
            }
        }
        Ok(Features::Dense(out))
    }
}
