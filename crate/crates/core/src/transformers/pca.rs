use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, Estimator, FittedState};
use crate::linalg::{column_means, fix_sign, jacobi_svd};
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType, ParamValue};
use crate::transformers::dense_only;

/// Principal component analysis via a Jacobi SVD of the centered data.
///
/// `n_components = null` keeps `min(n_samples, n_features)` components.
/// Each component is signed so that its largest-magnitude entry is positive.
pub struct Pca {
    schema: ParamSchema,
}

impl Pca {
    pub const KIND: &'static str = "PCA";

    pub fn new() -> Self {
        Pca {
            schema: ParamSchema::new().param(
                "n_components",
                ParamType::nullable(ParamType::Int),
                ParamValue::Null,
            ),
        }
    }
}

impl Default for Pca {
    fn default() -> Self {
        Self::new()
    }
}

impl Estimator for Pca {
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
        let (n, p) = x.shape();
        if n < 2 {
            return Err(Error::fit(Self::KIND, "needs at least two samples"));
        }
        let max_components = n.min(p);
        let n_components = match params.opt_int("n_components") {
            None => max_components,
            Some(c) if c >= 1 && c as usize <= max_components => c as usize,
            Some(c) => {
                return Err(Error::invalid_param(
                    "n_components",
                    format!("{c} not in 1..={max_components}"),
                ))
            }
        };

        let mean = column_means(&x);
        let mut centered = x.into_owned();
        for i in 0..n {
            for (v, mu) in centered.row_mut(i).iter_mut().zip(&mean) {
                *v -= mu;
            }
        }
        let (sv, v) = jacobi_svd(&centered);
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

        let mut components = Matrix::zeros(n_components, p);
        let mut variance = Vec::with_capacity(n_components);
        let mut singular = Vec::with_capacity(n_components);
        for (k, &idx) in order.iter().take(n_components).enumerate() {
            let row = components.row_mut(k);
            row.copy_from_slice(&v[idx]);
            fix_sign(row);
            singular.push(sv[idx]);
            variance.push(sv[idx] * sv[idx] / (n - 1) as f64);
        }

        Ok(FittedState::new()
            .with("mean_", Array::vector(mean))
            .with("components_", Array::matrix(&components))
            .with("explained_variance_", Array::vector(variance))
            .with("singular_values_", Array::vector(singular)))
    }

    fn transform(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Features> {
        let x = dense_only(Self::KIND, x)?;
        let mean = state.vector("mean_")?;
        let components = state.matrix("components_")?;
        let mut out = Matrix::zeros(x.n_rows(), components.n_rows());
        let mut centered = vec![0.0; x.n_cols()];
        for i in 0..x.n_rows() {
            for ((c, v), mu) in centered.iter_mut().zip(x.row(i)).zip(mean) {
                *c = v - mu;
            }
            for k in 0..components.n_rows() {
                out.set(i, k, crate::linalg::dot(&centered, components.row(k)));
            }
        }
        Ok(Features::Dense(out))
    }
}
