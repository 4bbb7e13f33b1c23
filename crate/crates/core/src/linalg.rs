//! Small dense helpers shared by estimators.

use crate::matrix::Matrix;

const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn column_means(m: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; m.n_cols()];
    for row in m.rows() {
        for (a, v) in mean.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = m.n_rows() as f64;
    mean.iter_mut().for_each(|a| *a /= n);
    mean
}

/// Thin singular value decomposition `a = U diag(sigma) V'` by one-sided
/// Jacobi rotations on the columns of `a`.
///
/// Returns `sigma` (one entry per column of `a`, unsorted) and `V` as its
/// `p` columns. `V` is orthogonal even when `a` is rank deficient or wider
/// than tall; directions with zero singular value complete the basis.
pub(crate) fn jacobi_svd(a: &Matrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = a.n_cols();
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..p).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    (sigma, v)
}

/// Applies the plane rotation `(x_i, x_j) <- (c x_i - s x_j, s x_i + c x_j)`.
fn rotate(vectors: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (head, tail) = vectors.split_at_mut(j);
    for (x, y) in head[i].iter_mut().zip(tail[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}
