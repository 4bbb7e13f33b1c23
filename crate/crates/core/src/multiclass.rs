//! Meta-estimators that build a multiclass classifier from clones of a
//! binary one: one-vs-rest and one-vs-one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{
    capability, Array, Capabilities, DefaultScore, Estimator, EstimatorHandle, FittedState,
};
use crate::labels;
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamSchema, ParamType, ParamValue};
use crate::predictors::argmax;

fn base_of<'a>(kind: &str, params: &'a ParamMap) -> Result<&'a EstimatorHandle> {
    params
        .get("estimator")
        .and_then(ParamValue::as_estimator)
        .ok_or_else(|| Error::invalid_param("estimator", format!("{kind} needs a base estimator")))
}

fn base_caps(params: &ParamMap) -> Capabilities {
    params
        .get("estimator")
        .and_then(ParamValue::as_estimator)
        .map(EstimatorHandle::capabilities)
        .unwrap_or_default()
}

fn schema() -> ParamSchema {
    ParamSchema::new().param(
        "estimator",
        ParamType::nullable(ParamType::Estimator),
        ParamValue::Null,
    )
}

fn child_name(k: usize) -> String {
    format!("estimators_{k}")
}

/// Fits `jobs` in parallel; the first failure by position wins.
fn fit_all(
    base: &EstimatorHandle,
    x: &Features,
    jobs: Vec<(Vec<usize>, Vec<f64>)>,
) -> Result<Vec<EstimatorHandle>> {
    jobs.into_par_iter()
        .enumerate()
        .map(|(k, (rows, targets))| {
            let mut est = base.clone_unfitted();
            let sub = if rows.len() == x.n_rows() {
                x.clone()
            } else {
                x.take_rows(&rows)?
            };
            est.fit(&sub, Some(&targets))
                .map_err(|e| e.in_step(&child_name(k)))?;
            Ok(est)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// One clone per class, trained on "this class" (1) against the rest (0).
pub struct OneVsRestClassifier {
    schema: ParamSchema,
}

impl OneVsRestClassifier {
    pub const KIND: &'static str = "OneVsRestClassifier";

    pub fn new() -> Self {
        OneVsRestClassifier { schema: schema() }
    }

    /// Per-class confidence: the clone's decision value when available,
    /// else its positive-class probability.
    fn confidences(state: &FittedState, x: &Features) -> Result<Matrix> {
        let children = state.children();
        let mut out = Matrix::zeros(x.n_rows(), children.len());
        for (k, (_, est)) in children.iter().enumerate() {
            let col: Vec<f64> = if est.capabilities().decision_function {
                est.decision_function(x)?.column(0)
            } else {
                est.predict_proba(x)?.column(1)
            };
            for (i, v) in col.into_iter().enumerate() {
                out.set(i, k, v);
            }
        }
        Ok(out)
    }
}

impl Default for OneVsRestClassifier {
    fn default() -> Self {
        Self::new()
    }
}

impl Estimator for OneVsRestClassifier {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, params: &ParamMap) -> Capabilities {
        let base = base_caps(params);
        Capabilities {
            supervised: true,
            predictor: true,
            probabilistic: base.probabilistic,
            decision_function: base.decision_function,
            score: DefaultScore::Accuracy,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let base = base_of(Self::KIND, params)?;
        let caps = base.capabilities();
        if !caps.predictor || !(caps.decision_function || caps.probabilistic) {
            return Err(capability(
                base.kind(),
                "decision_function or predict_proba",
            ));
        }
        let y = y.ok_or_else(|| Error::fit(Self::KIND, "needs targets"))?;
        let classes = labels::classes(Self::KIND, y)?;
        let all: Vec<usize> = (0..y.len()).collect();
        let jobs = classes
            .iter()
            .map(|&c| {
                let t = y.iter().map(|&v| if v == c { 1.0 } else { 0.0 }).collect();
                (all.clone(), t)
            })
            .collect();
        let fitted = fit_all(base, x, jobs)?;
        let mut state = FittedState::new().with("classes_", Array::vector(classes));
        for (k, est) in fitted.into_iter().enumerate() {
            state.push_child(child_name(k), est);
        }
        Ok(state)
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        let classes = state.vector("classes_")?;
        let conf = Self::confidences(state, x)?;
        Ok(conf.rows().map(|r| classes[argmax(r)]).collect())
    }

    fn decision_function(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Matrix> {
        let children = state.children();
        let mut out = Matrix::zeros(x.n_rows(), children.len());
        for (k, (_, est)) in children.iter().enumerate() {
            for (i, v) in est.decision_function(x)?.column(0).into_iter().enumerate() {
                out.set(i, k, v);
            }
        }
        Ok(out)
    }

    fn predict_proba(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Matrix> {
        let children = state.children();
        let mut out = Matrix::zeros(x.n_rows(), children.len());
        for (k, (_, est)) in children.iter().enumerate() {
            for (i, v) in est.predict_proba(x)?.column(1).into_iter().enumerate() {
                out.set(i, k, v);
            }
        }
        for i in 0..out.n_rows() {
            let total: f64 = out.row(i).iter().sum();
            if total > 0.0 {
                out.row_mut(i).iter_mut().for_each(|v| *v /= total);
            } else {
                let k = out.n_cols() as f64;
                out.row_mut(i).iter_mut().for_each(|v| *v = 1.0 / k);
            }
        }
        Ok(out)
    }
}

/// One clone per unordered class pair `(i, j)`, `i < j`, trained on that
/// pair's samples with class `i` mapped to 0 and class `j` to 1. Prediction
/// is by majority vote; ties go to the larger summed decision confidence,
/// then to the lowest class.
pub struct OneVsOneClassifier {
    schema: ParamSchema,
}

impl OneVsOneClassifier {
    pub const KIND: &'static str = "OneVsOneClassifier";

    pub fn new() -> Self {
        OneVsOneClassifier { schema: schema() }
    }
}

impl Default for OneVsOneClassifier {
    fn default() -> Self {
        Self::new()
    }
}

/// Class pairs in fitting order.
pub fn class_pairs(n_classes: usize) -> Vec<(usize, usize)> {
    (0..n_classes)
        .flat_map(|i| (i + 1..n_classes).map(move |j| (i, j)))
        .collect()
}

impl Estimator for OneVsOneClassifier {
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
            score: DefaultScore::Accuracy,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let base = base_of(Self::KIND, params)?;
        if !base.capabilities().predictor {
            return Err(capability(base.kind(), "predict"));
        }
        let y = y.ok_or_else(|| Error::fit(Self::KIND, "needs targets"))?;
        let classes = labels::classes(Self::KIND, y)?;
        let jobs = class_pairs(classes.len())
            .into_iter()
            .map(|(i, j)| {
                let (ci, cj) = (classes[i], classes[j]);
                let rows: Vec<usize> = (0..y.len()).filter(|&r| y[r] == ci || y[r] == cj).collect();
                let t = rows
                    .iter()
                    .map(|&r| if y[r] == ci { 0.0 } else { 1.0 })
                    .collect();
                (rows, t)
            })
            .collect();
        let fitted = fit_all(base, x, jobs)?;
        let mut state = FittedState::new().with("classes_", Array::vector(classes));
        for (k, est) in fitted.into_iter().enumerate() {
            state.push_child(child_name(k), est);
        }
        Ok(state)
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        let classes = state.vector("classes_")?;
        let k = classes.len();
        let n = x.n_rows();
        let mut votes = vec![0usize; n * k];
        let mut confidence = vec![0.0; n * k];
        for ((i, j), (_, est)) in class_pairs(k).into_iter().zip(state.children()) {
            let pred = est.predict(x)?;
            for (r, &p) in pred.iter().enumerate() {
                votes[r * k + if p == 1.0 { j } else { i }] += 1;
            }
            if est.capabilities().decision_function {
                let d = est.decision_function(x)?.column(0);
                for (r, v) in d.into_iter().enumerate() {
                    confidence[r * k + j] += v;
                    confidence[r * k + i] -= v;
                }
            }
        }
        Ok((0..n)
            .map(|r| {
                let v = &votes[r * k..(r + 1) * k];
                let c = &confidence[r * k..(r + 1) * k];
                let mut best = 0;
                for cls in 1..k {
                    if v[cls] > v[best] || (v[cls] == v[best] && c[cls] > c[best]) {
                        best = cls;
                    }
                }
                classes[best]
            })
            .collect())
    }
}
