//! Soft-margin support vector classifier trained by sequential minimal
//! optimization on the dual problem.

use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, DefaultScore, Estimator, FittedState};
use crate::labels;
use crate::linalg::{dot, squared_distance};
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType, ParamValue};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
        }
    }
}

/// Dual solution of one binary problem.
#[derive(Debug, Clone)]
pub struct DualSolution {
    /// One multiplier per training sample, each in `[0, C]`.
    pub alpha: Vec<f64>,
    pub intercept: f64,
    pub n_iter: usize,
}

/// Solves `min 1/2 a'Qa - e'a  s.t.  y'a = 0, 0 <= a <= C` with
/// `Q_ij = y_i y_j K(x_i, x_j)`, `y` in {-1, +1}.
///
/// Each step picks the maximal KKT violator `i` and a partner `j` by the
/// second-order gain rule, then solves the two-variable subproblem in closed
/// form. Stops once the violation gap `max_up(-y G) - min_low(-y G)` is below
/// `tol`, which bounds every sample's KKT residual by `tol`.
pub fn solve_dual(
    x: &Matrix,
    y: &[f64],
    kernel: Kernel,
    c: f64,
    tol: f64,
    max_iter: usize,
) -> DualSolution {
    let n = x.n_rows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(x.row(i), x.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let kij = |i: usize, j: usize| k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut n_iter = 0;
    while n_iter < max_iter {
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > g_max {
                g_max = -y[t] * grad[t];
                i_sel = t;
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_gain = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            if i_sel != usize::MAX && v < g_max {
                let b = g_max - v;
                let mut a = kij(i_sel, i_sel) + kij(t, t) - 2.0 * kij(i_sel, t);
                if a <= 0.0 {
                    a = TAU;
                }
                let gain = -(b * b) / a;
                if gain < best_gain {
                    best_gain = gain;
                    j_sel = t;
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || g_max - g_min < tol {
            break;
        }
        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = kij(i, i) + kij(j, j) - 2.0 * kij(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kij(i, i) + kij(j, j) - 2.0 * kij(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kij(t, i) * di + y[j] * kij(t, j) * dj);
        }
        n_iter += 1;
    }

    // Threshold: average over free vectors, else midpoint of the feasible range.
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut n_free = 0;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    DualSolution {
        alpha,
        intercept: -rho,
        n_iter,
    }
}

/// Support vector classifier with `linear` or `rbf` kernel. Binary only;
/// wrap in a one-vs-one or one-vs-rest meta-estimator for more classes.
///
/// `gamma = null` resolves to `1 / n_features`; the linear kernel ignores it.
pub struct Svc {
    schema: ParamSchema,
}

impl Svc {
    pub const KIND: &'static str = "SVC";

    pub fn new() -> Self {
        Svc {
            schema: ParamSchema::new()
                .param("kernel", ParamType::Str, "rbf")
                .param("C", ParamType::Float, 1.0)
                .param(
                    "gamma",
                    ParamType::nullable(ParamType::Float),
                    ParamValue::Null,
                )
                .param("tol", ParamType::Float, 1e-3)
                .param("max_iter", ParamType::Int, 1_000_000),
        }
    }
}

impl Default for Svc {
    fn default() -> Self {
        Self::new()
    }
}

fn kernel_from(params: &ParamMap, n_features: usize) -> Result<Kernel> {
    match params.string("kernel") {
        "linear" => Ok(Kernel::Linear),
        "rbf" => {
            let gamma = params
                .opt_float("gamma")
                .unwrap_or(1.0 / n_features.max(1) as f64);
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::invalid_param(
                    "gamma",
                    "must be positive for the rbf kernel",
                ));
            }
            Ok(Kernel::Rbf { gamma })
        }
        other => Err(Error::invalid_param(
            "kernel",
            format!("unsupported kernel `{other}`"),
        )),
    }
}

fn stored_kernel(state: &FittedState) -> Result<Kernel> {
    let gamma = state.scalar("gamma_")?;
    Ok(if gamma > 0.0 {
        Kernel::Rbf { gamma }
    } else {
        Kernel::Linear
    })
}

fn decision_values(state: &FittedState, x: &Features) -> Result<Vec<f64>> {
    x.check_numeric()?;
    let x = x.dense()?;
    let sv = state.matrix("support_vectors_")?;
    let coef = state.vector("dual_coef_")?;
    let b = state.scalar("intercept_")?;
    let kernel = stored_kernel(state)?;
    Ok(x.rows()
        .map(|z| {
            sv.rows()
                .zip(coef)
                .map(|(s, a)| a * kernel.eval(s, z))
                .sum::<f64>()
                + b
        })
        .collect())
}

impl Estimator for Svc {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            supervised: true,
            predictor: true,
            decision_function: true,
            score: DefaultScore::Accuracy,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let c = params.float("C");
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid_param("C", "must be positive"));
        }
        let tol = params.float("tol");
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::invalid_param("tol", "must be positive"));
        }
        let max_iter = params.int("max_iter").max(1) as usize;
        let kernel = kernel_from(params, x.n_cols())?;
        x.check_numeric()?;
        let y = y.ok_or_else(|| Error::fit(Self::KIND, "needs targets"))?;
        let classes = labels::classes(Self::KIND, y)?;
        if classes.len() > 2 {
            return Err(Error::fit(
                Self::KIND,
                format!(
                    "{} classes found; SVC is binary, use a multiclass wrapper",
                    classes.len()
                ),
            ));
        }
        let signed: Vec<f64> = y
            .iter()
            .map(|&v| if v == classes[1] { 1.0 } else { -1.0 })
            .collect();
        let x = x.dense()?;
        let sol = solve_dual(&x, &signed, kernel, c, tol, max_iter);

        let support: Vec<usize> = (0..x.n_rows()).filter(|&i| sol.alpha[i] > 0.0).collect();
        let sv = x.take_rows(&support)?;
        let dual_coef: Vec<f64> = support.iter().map(|&i| signed[i] * sol.alpha[i]).collect();
        let gamma = match kernel {
            Kernel::Linear => 0.0,
            Kernel::Rbf { gamma } => gamma,
        };
        Ok(FittedState::new()
            .with("classes_", Array::vector(classes))
            .with(
                "support_",
                Array::vector(support.iter().map(|&i| i as f64).collect()),
            )
            .with("support_vectors_", Array::matrix(&sv))
            .with("dual_coef_", Array::vector(dual_coef))
            .with("intercept_", Array::scalar(sol.intercept))
            .with("gamma_", Array::scalar(gamma))
            .with("n_iter_", Array::scalar(sol.n_iter as f64)))
    }

    fn decision_function(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Matrix> {
        Ok(Matrix::column_vector(decision_values(state, x)?))
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        let classes = state.vector("classes_")?;
        Ok(decision_values(state, x)?
            .into_iter()
            .map(|d| if d > 0.0 { classes[1] } else { classes[0] })
            .collect())
    }
}
