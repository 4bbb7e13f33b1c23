//! Classification and regression metrics. Binary metrics treat the label
//! `1` as the positive class.

use crate::error::{Error, Result};

fn check_lengths(y_true: &[f64], y_other: &[f64]) -> Result<()> {
    if y_true.len() != y_other.len() {
        return Err(Error::Shape(format!(
            "metric inputs have lengths {} and {}",
            y_true.len(),
            y_other.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::InvalidInput("metric of an empty sample".into()));
    }
    Ok(())
}

pub fn accuracy(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// `(true positives, false positives, false negatives)`
fn confusion(y_true: &[f64], y_pred: &[f64]) -> Result<(usize, usize, usize)> {
    check_lengths(y_true, y_pred)?;
    let mut tp = 0;
    let mut fp = 0;
    let mut fne = 0;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == 1.0, p == 1.0) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fne += 1,
            (false, false) => {}
        }
    }
    Ok((tp, fp, fne))
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn precision(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    let (tp, fp, _) = confusion(y_true, y_pred)?;
    Ok(ratio(tp, tp + fp))
}

pub fn recall(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    let (tp, _, fne) = confusion(y_true, y_pred)?;
    Ok(ratio(tp, tp + fne))
}

pub fn f1(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    let (tp, fp, fne) = confusion(y_true, y_pred)?;
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + fne);
    Ok(if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    })
}

/// Area under the ROC curve as the Mann–Whitney statistic: the fraction of
/// (positive, negative) pairs ranked correctly, ties counting one half.
pub fn roc_auc(y_true: &[f64], scores: &[f64]) -> Result<f64> {
    check_lengths(y_true, scores)?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("roc_auc scores contain NaN".into()));
    }
    let n_pos = y_true.iter().filter(|&&t| t == 1.0).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidInput(
            "roc_auc needs both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the statistic's numerator, kept integral: 2·(correct) + ties.
    let mut doubled: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let group = &order[start..end];
        let pos = group.iter().filter(|&&i| y_true[i] == 1.0).count() as u128;
        let neg = group.len() as u128 - pos;
        doubled += pos * (2 * neg_below + neg);
        neg_below += neg;
        start = end;
    }
    Ok(doubled as f64 / (2 * n_pos as u128 * n_neg as u128) as f64)
}

pub fn mean_squared_error(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let sse: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sse / y_true.len() as f64)
}

/// Coefficient of determination `1 - SS_res / SS_tot`. A constant target is
/// scored 0 when predicted exactly and is an error otherwise.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InvalidInput(
            "r2 is undefined for a constant target with inexact predictions".into(),
        ));
    }
    Ok(1.0 - ss_res / ss_tot)
}
