use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, Estimator, FittedState};
use crate::linalg::column_means;
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType};

/// Standardizes features to zero mean and unit population variance.
///
/// Learns `mean_` and `scale_`; a zero-variance feature gets `scale_ = 1`.
pub struct StandardScaler {
    schema: ParamSchema,
}

impl StandardScaler {
    pub const KIND: &'static str = "StandardScaler";

    pub fn new() -> Self {
        StandardScaler {
            schema: ParamSchema::new()
                .param("with_mean", ParamType::Bool, true)
                .param("with_std", ParamType::Bool, true),
        }
    }
}

impl Default for StandardScaler {
    fn default() -> Self {
        Self::new()
    }
}

impl Estimator for StandardScaler {
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
        x.check_numeric()?;
        let with_mean = params.boolean("with_mean");
        let with_std = params.boolean("with_std");
        if x.is_sparse() && with_mean {
            return Err(Error::InvalidInput(
                "centering sparse input would make it dense; use with_mean=false".into(),
            ));
        }
        let (mean, var) = match x {
            Features::Dense(m) => dense_moments(m),
            Features::Sparse(m) => {
                let n = m.n_rows() as f64;
                let mut sum = vec![0.0; m.n_cols()];
                for (_, c, v) in m.iter() {
                    sum[c] += v;
                }
                let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
                let mut sq = vec![0.0; m.n_cols()];
                let mut stored = vec![0usize; m.n_cols()];
                for (_, c, v) in m.iter() {
                    sq[c] += (v - mean[c]) * (v - mean[c]);
                    stored[c] += 1;
                }
                let var = (0..m.n_cols())
                    .map(|c| (sq[c] + (m.n_rows() - stored[c]) as f64 * mean[c] * mean[c]) / n)
                    .collect();
                (mean, var)
            }
            Features::Documents(_) => unreachable!("rejected by check_numeric"),
        };
        let scale: Vec<f64> = mean
            .iter()
            .zip(&var)
            .map(|(&mu, &v)| {
                let sd = v.sqrt();
                if !with_std || sd == 0.0 || sd <= 16.0 * f64::EPSILON * mu.abs() {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(FittedState::new()
            .with("mean_", Array::vector(mean))
            .with("var_", Array::vector(var))
            .with("scale_", Array::vector(scale)))
    }

    fn transform(&self, params: &ParamMap, state: &FittedState, x: &Features) -> Result<Features> {
        x.check_numeric()?;
        let mean = state.vector("mean_")?;
        let scale = state.vector("scale_")?;
        let with_mean = params.boolean("with_mean");
        match x {
            Features::Dense(m) => {
                let mut out = m.clone();
                for i in 0..out.n_rows() {
                    for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                        let centered = if with_mean { *v - mean[j] } else { *v };
                        *v = centered / scale[j];
                    }
                }
                Ok(Features::Dense(out))
            }
            Features::Sparse(m) => {
                if with_mean {
                    return Err(Error::InvalidInput(
                        "centering sparse input would make it dense; use with_mean=false".into(),
                    ));
                }
                Ok(Features::Sparse(m.map_values(|_, c, v| v / scale[c])))
            }
            Features::Documents(_) => unreachable!("rejected by check_numeric"),
        }
    }
}

/// Column means and population variances (two-pass).
fn dense_moments(m: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let mean = column_means(m);
    let mut var = vec![0.0; m.n_cols()];
    for row in m.rows() {
        for ((s, v), mu) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - mu) * (v - mu);
        }
    }
    let n = m.n_rows() as f64;
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}
