use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{Capabilities, EstimatorHandle};
use crate::matrix::{Features, Matrix};
use crate::params::ParamMap;

use super::{CvSplitter, ParamDistributions, ParamGrid, Scorer};

#[derive(Debug, Clone, PartialEq)]
pub enum SearchSpace {
    Grid(ParamGrid),
    Randomized {
        distributions: ParamDistributions,
        n_iter: usize,
        random_seed: u64,
    },
}

impl SearchSpace {
    pub fn candidates(&self) -> Result<Vec<ParamMap>> {
        match self {
            SearchSpace::Grid(g) => g.expand(),
            SearchSpace::Randomized {
                distributions,
                n_iter,
                random_seed,
            } => distributions.sample(*n_iter, *random_seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub candidates: Vec<ParamMap>,
    /// `fold_scores[candidate][fold]`.
    pub fold_scores: Vec<Vec<f64>>,
    pub mean_scores: Vec<f64>,
    pub best_index_: usize,
    pub best_params_: ParamMap,
    pub best_score_: f64,
    /// Present when refit is enabled.
    pub best_estimator_: Option<EstimatorHandle>,
}

/// Cross-validated hyper-parameter search over a grid or sampled
/// candidates. After `fit` with refit enabled, prediction methods forward to
/// the best estimator.
#[derive(Debug, Clone)]
pub struct SearchCv {
    pub base: EstimatorHandle,
    pub space: SearchSpace,
    pub cv: CvSplitter,
    pub scoring: Scorer,
    pub refit: bool,
    result: Option<SearchResult>,
}

impl SearchCv {
    pub fn new(base: EstimatorHandle, space: SearchSpace) -> Self {
        SearchCv {
            base,
            space,
            cv: CvSplitter::default(),
            scoring: Scorer::EstimatorDefault,
            refit: true,
            result: None,
        }
    }

    pub fn grid(base: EstimatorHandle, grid: ParamGrid) -> Self {
        Self::new(base, SearchSpace::Grid(grid))
    }

    pub fn randomized(
        base: EstimatorHandle,
        distributions: ParamDistributions,
        n_iter: usize,
        random_seed: u64,
    ) -> Self {
        Self::new(
            base,
            SearchSpace::Randomized {
                distributions,
                n_iter,
                random_seed,
            },
        )
    }

    pub fn with_cv(mut self, cv: CvSplitter) -> Self {
        self.cv = cv;
        self
    }

    pub fn with_scoring(mut self, scoring: Scorer) -> Self {
        self.scoring = scoring;
        self
    }

    pub fn with_refit(mut self, refit: bool) -> Self {
        self.refit = refit;
        self
    }

    /// Scores every candidate on every fold, then refits the best one on all
    /// of `(x, y)` if enabled. The first failing evaluation, in candidate
    /// then fold order, aborts the search.
    pub fn fit(&mut self, x: &Features, y: Option<&[f64]>) -> Result<&mut Self> {
        self.result = None;
        let candidates = self.space.candidates()?;
        let templates = candidates
            .iter()
            .enumerate()
            .map(|(c, params)| {
                self.base.set_params(params).map_err(|e| Error::Candidate {
                    candidate: c,
                    fold: None,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(y) = y {
            if y.len() != x.n_rows() {
                return Err(Error::Shape(format!(
                    "X has {} rows but y has {} entries",
                    x.n_rows(),
                    y.len()
                )));
            }
        }
        let splits = self.cv.split(x.n_rows(), y)?;
        let n_folds = splits.len();

        let jobs: Vec<(usize, usize)> = (0..templates.len())
            .flat_map(|c| (0..n_folds).map(move |f| (c, f)))
            .collect();
        let outcomes: Vec<Result<f64>> = jobs
            .par_iter()
            .map(|&(c, f)| {
                let split = &splits[f];
                let mut est = templates[c].clone_unfitted();
                let y_train = y.map(|y| pick(y, &split.train));
                let y_test = y.map(|y| pick(y, &split.test));
                est.fit(&x.take_rows(&split.train)?, y_train.as_deref())?;
                self.scoring
                    .score(&est, &x.take_rows(&split.test)?, y_test.as_deref())
            })
            .collect();

        let mut fold_scores = vec![Vec::with_capacity(n_folds); templates.len()];
        for (&(c, f), outcome) in jobs.iter().zip(outcomes) {
            let s = outcome.map_err(|e| Error::Candidate {
                candidate: c,
                fold: Some(f),
                source: Box::new(e),
            })?;
            fold_scores[c].push(s);
        }
        let mean_scores: Vec<f64> = fold_scores
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .collect();
        let best_index_ = best_index(&mean_scores);

        let best_estimator_ = if self.refit {
            let mut best = templates[best_index_].clone_unfitted();
            best.fit(x, y)?;
            Some(best)
        } else {
            None
        };
        self.result = Some(SearchResult {
            best_params_: candidates[best_index_].clone(),
            best_score_: mean_scores[best_index_],
            candidates,
            fold_scores,
            mean_scores,
            best_index_,
            best_estimator_,
        });
        Ok(self)
    }

    pub fn result(&self) -> Result<&SearchResult> {
        self.result.as_ref().ok_or_else(|| Error::NotFitted {
            kind: "search".into(),
        })
    }

    pub fn best_estimator(&self) -> Result<&EstimatorHandle> {
        self.result()?
            .best_estimator_
            .as_ref()
            .ok_or_else(|| Error::NotFitted {
                kind: "search (refit disabled)".into(),
            })
    }

    /// Capabilities of the refit best estimator, else of the base.
    pub fn capabilities(&self) -> Capabilities {
        self.best_estimator()
            .map(EstimatorHandle::capabilities)
            .unwrap_or_else(|_| self.base.capabilities())
    }

    pub fn predict(&self, x: &Features) -> Result<Vec<f64>> {
        self.best_estimator()?.predict(x)
    }

    pub fn decision_function(&self, x: &Features) -> Result<Matrix> {
        self.best_estimator()?.decision_function(x)
    }

    pub fn predict_proba(&self, x: &Features) -> Result<Matrix> {
        self.best_estimator()?.predict_proba(x)
    }

    pub fn transform(&self, x: &Features) -> Result<Features> {
        self.best_estimator()?.transform(x)
    }

    /// Scores the best estimator with the search's scorer.
    pub fn score(&self, x: &Features, y: Option<&[f64]>) -> Result<f64> {
        self.scoring.score(self.best_estimator()?, x, y)
    }
}

fn pick(v: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| v[i]).collect()
}

/// Index of the largest mean; ties and NaN resolve to the earliest candidate.
fn best_index(means: &[f64]) -> usize {
    let mut best = 0;
    for (i, &m) in means.iter().enumerate().skip(1) {
        if m > means[best] || (means[best].is_nan() && !m.is_nan()) {
            best = i;
        }
    }
    best
}
