use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::matrix::Features;
use crate::metrics;

/// Greater-is-better evaluation of a fitted estimator on held-out data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scorer {
    Accuracy,
    F1,
    Precision,
    Recall,
    RocAuc,
    R2,
    NegMeanSquaredError,
    /// The estimator's own `score`.
    #[default]
    EstimatorDefault,
}

impl Scorer {
    pub const ALL: [Scorer; 8] = [
        Scorer::Accuracy,
        Scorer::F1,
        Scorer::Precision,
        Scorer::Recall,
        Scorer::RocAuc,
        Scorer::R2,
        Scorer::NegMeanSquaredError,
        Scorer::EstimatorDefault,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scorer::Accuracy => "accuracy",
            Scorer::F1 => "f1",
            Scorer::Precision => "precision",
            Scorer::Recall => "recall",
            Scorer::RocAuc => "roc_auc",
            Scorer::R2 => "r2",
            Scorer::NegMeanSquaredError => "neg_mean_squared_error",
            Scorer::EstimatorDefault => "estimator_default",
        }
    }

    /// Scores a fitted estimator. `roc_auc` ranks by the decision function
    /// when available, otherwise by the positive-class probability.
    pub fn score(
        self,
        estimator: &EstimatorHandle,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<f64> {
        if self == Scorer::EstimatorDefault {
            return estimator.score(x, y);
        }
        let y = y.ok_or_else(|| Error::InvalidInput(format!("scorer {self} needs targets")))?;
        if self == Scorer::RocAuc {
            return metrics::roc_auc(y, &positive_scores(estimator, x)?);
        }
        score_metric(self, y, &estimator.predict(x)?)
    }
}

/// Applies a label- or value-based metric directly. For `roc_auc`,
/// `y_pred_or_scores` holds real-valued scores.
pub fn score_metric(scorer: Scorer, y_true: &[f64], y_pred_or_scores: &[f64]) -> Result<f64> {
    let (y, p) = (y_true, y_pred_or_scores);
    match scorer {
        Scorer::Accuracy => metrics::accuracy(y, p),
        Scorer::F1 => metrics::f1(y, p),
        Scorer::Precision => metrics::precision(y, p),
        Scorer::Recall => metrics::recall(y, p),
        Scorer::RocAuc => metrics::roc_auc(y, p),
        Scorer::R2 => metrics::r2(y, p),
        Scorer::NegMeanSquaredError => metrics::mean_squared_error(y, p).map(|e| -e),
        Scorer::EstimatorDefault => Err(Error::InvalidInput(
            "estimator_default needs an estimator, not predictions".into(),
        )),
    }
}

fn positive_scores(estimator: &EstimatorHandle, x: &Features) -> Result<Vec<f64>> {
    let caps = estimator.capabilities();
    let (m, col) = if caps.decision_function {
        (estimator.decision_function(x)?, 0)
    } else if caps.probabilistic {
        (estimator.predict_proba(x)?, 1)
    } else {
        return Err(Error::Capability {
            kind: estimator.kind().to_string(),
            method: "decision_function",
        });
    };
    let expected = if col == 0 { 1 } else { 2 };
    if m.n_cols() != expected {
        return Err(Error::InvalidInput(format!(
            "roc_auc needs a binary problem, {} has {} score columns",
            estimator.kind(),
            m.n_cols()
        )));
    }
    Ok(m.column(col))
}

impl fmt::Display for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scorer::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scorer `{s}`")))
    }
}
