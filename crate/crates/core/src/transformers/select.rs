use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, Estimator, FittedState};
use crate::labels;
use crate::matrix::Features;
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType};

/// Keeps the `k` features with the highest one-way ANOVA F statistic.
///
/// A feature whose classes have zero spread but different means scores
/// `+inf`; a feature with no between-class spread scores 0.
pub struct SelectKBest {
    schema: ParamSchema,
}

impl SelectKBest {
    pub const KIND: &'static str = "SelectKBest";

    pub fn new() -> Self {
        SelectKBest {
            schema: ParamSchema::new().param("k", ParamType::Int, 10),
        }
    }
}

impl Default for SelectKBest {
    fn default() -> Self {
        Self::new()
    }
}

/// One-way ANOVA F statistic per column of `x` for the class labels `y`.
pub fn anova_f(x: &Features, y: &[f64]) -> Result<Vec<f64>> {
    x.check_numeric()?;
    let classes = labels::classes(SelectKBest::KIND, y)?;
    let codes = labels::encode(&classes, y);
    let n_classes = classes.len();
    let n = y.len();
    let p = x.n_cols();

    let mut counts = vec![0usize; n_classes];
    for &c in &codes {
        counts[c] += 1;
    }

    // First pass: per-class sums.
    let mut sums = vec![vec![0.0; p]; n_classes];
    let mut stored = vec![vec![0usize; p]; n_classes];
    for_each_entry(x, |i, j, v| {
        sums[codes[i]][j] += v;
        stored[codes[i]][j] += 1;
    });
    let class_means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &nc)| s.iter().map(|v| v / nc as f64).collect())
        .collect();
    let grand: Vec<f64> = (0..p)
        .map(|j| sums.iter().map(|s| s[j]).sum::<f64>() / n as f64)
        .collect();

    // Second pass: within-class squared deviations. Entries a sparse matrix
    // does not store are zeros and contribute mean² each.
    let mut within = vec![0.0; p];
    for_each_entry(x, |i, j, v| {
        let d = v - class_means[codes[i]][j];
        within[j] += d * d;
    });
    if x.is_sparse() {
        for c in 0..n_classes {
            for j in 0..p {
                let implicit = (counts[c] - stored[c][j]) as f64;
                within[j] += implicit * class_means[c][j] * class_means[c][j];
            }
        }
    }

    let df_between = (n_classes - 1) as f64;
    let df_within = (n - n_classes) as f64;
    Ok((0..p)
        .map(|j| {
            let between: f64 = (0..n_classes)
                .map(|c| {
                    let d = class_means[c][j] - grand[j];
                    counts[c] as f64 * d * d
                })
                .sum();
            if between <= 0.0 {
                0.0
            } else if within[j] <= 0.0 || df_within == 0.0 {
                f64::INFINITY
            } else {
                (between / df_between) / (within[j] / df_within)
            }
        })
        .collect())
}

fn for_each_entry(x: &Features, mut f: impl FnMut(usize, usize, f64)) {
    match x {
        Features::Dense(m) => {
            for (i, row) in m.rows().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    f(i, j, v);
                }
            }
        }
        Features::Sparse(m) => {
            for (i, j, v) in m.iter() {
                f(i, j, v);
            }
        }
        Features::Documents(_) => {}
    }
}

/// Indices of the `k` best scores (ties to the lower index), ascending.
pub(crate) fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match scores[b].total_cmp(&scores[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let mut keep: Vec<usize> = order.into_iter().take(k).collect();
    keep.sort_unstable();
    keep
}

impl Estimator for SelectKBest {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            supervised: true,
            transformer: true,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let k = params.int("k");
        if k <= 0 {
            return Err(Error::invalid_param("k", "must be positive"));
        }
        let y = y.ok_or_else(|| Error::fit(Self::KIND, "needs targets"))?;
        let scores = anova_f(x, y)?;
        let selected = top_k(&scores, k as usize);
        Ok(FittedState::new()
            .with("scores_", Array::vector(scores))
            .with(
                "selected_",
                Array::vector(selected.iter().map(|&j| j as f64).collect()),
            ))
    }

    fn transform(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Features> {
        x.check_numeric()?;
        let cols: Vec<usize> = state
            .vector("selected_")?
            .iter()
            .map(|&j| j as usize)
            .collect();
        x.select_columns(&cols)
    }
}
