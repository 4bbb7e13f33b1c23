//! Class-label bookkeeping shared by classifiers.

use crate::error::{Error, Result};

/// Distinct labels in ascending order.
pub(crate) fn unique_sorted(y: &[f64]) -> Vec<f64> {
    let mut c = y.to_vec();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// Distinct labels; fails when fewer than two classes are present.
pub(crate) fn classes(kind: &str, y: &[f64]) -> Result<Vec<f64>> {
    let c = unique_sorted(y);
    if c.len() < 2 {
        return Err(Error::fit(kind, "needs at least two classes in y"));
    }
    Ok(c)
}

/// Position of each label in `classes`.
pub(crate) fn encode(classes: &[f64], y: &[f64]) -> Vec<usize> {
    y.iter()
        .map(|v| {
            classes
                .binary_search_by(|c| c.total_cmp(v))
                .expect("label drawn from classes")
        })
        .collect()
}
