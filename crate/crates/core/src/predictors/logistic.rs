//! L1/L2-penalized logistic regression.
//!
//! Each binary problem minimizes `penalty(w) + C * sum_i log(1 + exp(-y_i (w.x_i + b)))`
//! with `y_i` in {-1, +1} and an unpenalized intercept. More than two classes
//! are handled one-vs-rest.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, DefaultScore, Estimator, FittedState};
use crate::labels;
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType};
use crate::predictors::{argmax, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    L1,
    L2,
}

impl Penalty {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Penalty::L1),
            "l2" => Ok(Penalty::L2),
            other => Err(Error::invalid_param(
                "penalty",
                format!("`{other}` is not l1 or l2"),
            )),
        }
    }

    fn value(self, w: &[f64]) -> f64 {
        match self {
            Penalty::L1 => w.iter().map(|v| v.abs()).sum(),
            Penalty::L2 => 0.5 * w.iter().map(|v| v * v).sum::<f64>(),
        }
    }
}

/// `log(1 + exp(-m))` without overflow.
fn log_loss(margin: f64) -> f64 {
    if margin > 0.0 {
        (-margin).exp().ln_1p()
    } else {
        -margin + margin.exp().ln_1p()
    }
}

/// Summed logistic loss over samples and its gradient with respect to
/// `theta = [w..., b]`. `y` holds ±1.
fn loss_and_gradient(x: &Features, y: &[f64], theta: &[f64]) -> (f64, Vec<f64>) {
    let p = theta.len() - 1;
    let (w, b) = (&theta[..p], theta[p]);
    let mut loss = 0.0;
    let mut grad = vec![0.0; p + 1];
    for (i, &yi) in y.iter().enumerate() {
        let m = yi * (x.dot_row(i, w) + b);
        loss += log_loss(m);
        // d/dm log(1 + e^-m) = -sigmoid(-m)
        let coeff = -yi * sigmoid(-m);
        x.axpy_row(i, coeff, &mut grad[..p]);
        grad[p] += coeff;
    }
    (loss, grad)
}

/// `penalty(w) + C * loss` at `theta = [w..., b]`.
pub fn objective(x: &Features, y: &[f64], c: f64, penalty: Penalty, theta: &[f64]) -> f64 {
    let p = theta.len() - 1;
    let (loss, _) = loss_and_gradient(x, y, theta);
    penalty.value(&theta[..p]) + c * loss
}

/// Gradient of [`objective`]; the L1 term contributes `sign(w_j)` (0 at 0).
pub fn gradient(x: &Features, y: &[f64], c: f64, penalty: Penalty, theta: &[f64]) -> Vec<f64> {
    let p = theta.len() - 1;
    let (_, mut g) = loss_and_gradient(x, y, theta);
    g.iter_mut().for_each(|v| *v *= c);
    for j in 0..p {
        g[j] += match penalty {
            Penalty::L2 => theta[j],
            Penalty::L1 => {
                if theta[j] > 0.0 {
                    1.0
                } else if theta[j] < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        };
    }
    g
}

/// Result of one binary fit.
#[derive(Debug, Clone)]
pub struct BinaryFit {
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub n_iter: usize,
    /// [`objective`] at the start and after every accepted iterate.
    pub objective_history: Vec<f64>,
}

/// Fits one binary problem. `y` holds ±1.
///
/// The solver works on `loss + penalty / C` (same minimizer, better scaled
/// for small `C`) and stops when the largest gradient (L2) or proximal
/// gradient-mapping (L1) component drops below `tol`.
pub fn fit_binary(
    x: &Features,
    y: &[f64],
    c: f64,
    penalty: Penalty,
    tol: f64,
    max_iter: usize,
) -> BinaryFit {
    let dim = x.n_cols() + 1;
    let theta0 = vec![0.0; dim];
    let (theta, n_iter, scaled_history) = match penalty {
        Penalty::L2 => lbfgs(x, y, c, theta0, tol, max_iter),
        Penalty::L1 => proximal_gradient(x, y, c, theta0, tol, max_iter),
    };
    let p = dim - 1;
    BinaryFit {
        coef: theta[..p].to_vec(),
        intercept: theta[p],
        n_iter,
        objective_history: scaled_history.into_iter().map(|v| v * c).collect(),
    }
}

/// `loss + |w|^2 / (2C)` and its gradient.
fn l2_scaled(x: &Features, y: &[f64], c: f64, theta: &[f64]) -> (f64, Vec<f64>) {
    let p = theta.len() - 1;
    let (loss, mut g) = loss_and_gradient(x, y, theta);
    let mut reg = 0.0;
    for j in 0..p {
        reg += theta[j] * theta[j];
        g[j] += theta[j] / c;
    }
    (loss + 0.5 * reg / c, g)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn lbfgs(
    x: &Features,
    y: &[f64],
    c: f64,
    mut theta: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, Vec<f64>) {
    const MEMORY: usize = 10;
    let (mut f, mut g) = l2_scaled(x, y, c, &theta);
    let mut history = vec![f];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut n_iter = 0;
    while n_iter < max_iter && inf_norm(&g) > tol {
        // Two-loop recursion for d = -H g.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, yv, rho) in pairs.iter().rev() {
            let a = rho * crate::linalg::dot(s, &q);
            q.iter_mut().zip(yv).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, yv, _)) = pairs.back() {
            let gamma = crate::linalg::dot(s, yv) / crate::linalg::dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let scale = 1.0 / inf_norm(&g).max(1.0);
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, yv, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * crate::linalg::dot(yv, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = crate::linalg::dot(&g, &d);
        if slope >= 0.0 {
            pairs.clear();
            let scale = 1.0 / inf_norm(&g).max(1.0);
            d = g.iter().map(|v| -v * scale).collect();
            slope = crate::linalg::dot(&g, &d);
        }

        // Backtracking Armijo search; only strictly improving steps are accepted.
        let mut step = 1.0;
        let accepted = loop {
            let cand: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t + step * di).collect();
            let (fc, gc) = l2_scaled(x, y, c, &cand);
            if fc <= f + 1e-4 * step * slope && fc < f {
                break Some((cand, fc, gc));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((cand, fc, gc)) = accepted else {
            break;
        };
        let s: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = crate::linalg::dot(&s, &yv);
        if sy > 1e-12 * crate::linalg::dot(&yv, &yv).sqrt() * crate::linalg::dot(&s, &s).sqrt() {
            if pairs.len() == MEMORY {
                pairs.pop_front();
            }
            pairs.push_back((s, yv, 1.0 / sy));
        }
        theta = cand;
        f = fc;
        g = gc;
        history.push(f);
        n_iter += 1;
    }
    (theta, n_iter, history)
}

fn proximal_gradient(
    x: &Features,
    y: &[f64],
    c: f64,
    mut theta: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, Vec<f64>) {
    let p = theta.len() - 1;
    let weight = 1.0 / c;
    let composite = |t: &[f64], smooth: f64| smooth + weight * Penalty::L1.value(&t[..p]);
    let (mut f_smooth, mut g) = loss_and_gradient(x, y, &theta);
    let mut history = vec![composite(&theta, f_smooth)];
    let mut step = 1.0;
    let mut n_iter = 0;
    while n_iter < max_iter {
        let current = composite(&theta, f_smooth);
        let accepted = loop {
            let mut cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let thresh = step * weight;
            for v in &mut cand[..p] {
                *v = v.signum() * (v.abs() - thresh).max(0.0);
            }
            let diff: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
            let (fc, gc) = loss_and_gradient(x, y, &cand);
            let model = f_smooth
                + crate::linalg::dot(&g, &diff)
                + crate::linalg::dot(&diff, &diff) / (2.0 * step);
            if fc <= model {
                break Some((cand, diff, fc, gc));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((cand, diff, fc, gc)) = accepted else {
            break;
        };
        let mapping = inf_norm(&diff) / step;
        let next = composite(&cand, fc);
        if next > current {
            break;
        }
        theta = cand;
        f_smooth = fc;
        g = gc;
        history.push(next);
        n_iter += 1;
        if mapping <= tol {
            break;
        }
        step *= 2.0;
    }
    (theta, n_iter, history)
}

pub struct LogisticRegression {
    schema: ParamSchema,
}

impl LogisticRegression {
    pub const KIND: &'static str = "LogisticRegression";

    pub fn new() -> Self {
        LogisticRegression {
            schema: ParamSchema::new()
                .param("penalty", ParamType::Str, "l2")
                .param("C", ParamType::Float, 1.0)
                .param("tol", ParamType::Float, 1e-6)
                .param("max_iter", ParamType::Int, 1000),
        }
    }
}

impl Default for LogisticRegression {
    fn default() -> Self {
        Self::new()
    }
}

fn margins(state: &FittedState, x: &Features) -> Result<Matrix> {
    x.check_numeric()?;
    let coef = state.matrix("coef_")?;
    let intercept = state.vector("intercept_")?;
    let mut out = Matrix::zeros(x.n_rows(), coef.n_rows());
    for i in 0..x.n_rows() {
        for (k, b) in intercept.iter().enumerate() {
            out.set(i, k, x.dot_row(i, coef.row(k)) + b);
        }
    }
    Ok(out)
}

impl Estimator for LogisticRegression {
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
            probabilistic: true,
            decision_function: true,
            score: DefaultScore::Accuracy,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let penalty = Penalty::parse(params.string("penalty"))?;
        let c = params.float("C");
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid_param("C", "must be positive"));
        }
        let tol = params.float("tol");
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::invalid_param("tol", "must be positive"));
        }
        let max_iter = params.int("max_iter");
        if max_iter < 1 {
            return Err(Error::invalid_param("max_iter", "must be at least 1"));
        }
        x.check_numeric()?;
        let y = y.ok_or_else(|| Error::fit(Self::KIND, "needs targets"))?;
        let classes = labels::classes(Self::KIND, y)?;

        let positives: Vec<f64> = if classes.len() == 2 {
            vec![classes[1]]
        } else {
            classes.clone()
        };
        let mut coef = Matrix::zeros(positives.len(), x.n_cols());
        let mut intercept = Vec::with_capacity(positives.len());
        let mut n_iter = Vec::with_capacity(positives.len());
        for (k, &pos) in positives.iter().enumerate() {
            let signed: Vec<f64> = y
                .iter()
                .map(|&v| if v == pos { 1.0 } else { -1.0 })
                .collect();
            let fit = fit_binary(x, &signed, c, penalty, tol, max_iter as usize);
            coef.row_mut(k).copy_from_slice(&fit.coef);
            intercept.push(fit.intercept);
            n_iter.push(fit.n_iter as f64);
        }
        Ok(FittedState::new()
            .with("classes_", Array::vector(classes))
            .with("coef_", Array::matrix(&coef))
            .with("intercept_", Array::vector(intercept))
            .with("n_iter_", Array::vector(n_iter)))
    }

    fn decision_function(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Matrix> {
        margins(state, x)
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        let classes = state.vector("classes_")?;
        let m = margins(state, x)?;
        Ok(m.rows()
            .map(|r| {
                if r.len() == 1 {
                    if r[0] > 0.0 {
                        classes[1]
                    } else {
                        classes[0]
                    }
                } else {
                    classes[argmax(r)]
                }
            })
            .collect())
    }

    fn predict_proba(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Matrix> {
        let classes = state.vector("classes_")?;
        let m = margins(state, x)?;
        let mut out = Matrix::zeros(m.n_rows(), classes.len());
        for (i, r) in m.rows().enumerate() {
            if r.len() == 1 {
                let p1 = sigmoid(r[0]);
                out.set(i, 0, 1.0 - p1);
                out.set(i, 1, p1);
            } else {
                let probs: Vec<f64> = r.iter().map(|&v| sigmoid(v)).collect();
                let total: f64 = probs.iter().sum();
                for (k, p) in probs.iter().enumerate() {
                    out.set(i, k, p / total);
                }
            }
        }
        Ok(out)
    }
}
