//! k-means clustering: k-means++ seeding followed by Lloyd iterations,
//! best of `n_init` seeded restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, DefaultScore, Estimator, FittedState};
use crate::linalg::squared_distance;
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType};

/// Outcome of one seeded k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub centers: Matrix,
    pub inertia: f64,
    pub n_iter: usize,
    /// Inertia of the seeding, then after each Lloyd update.
    pub inertia_history: Vec<f64>,
}

/// Nearest center per row (ties to the lowest index) and the summed squared distance.
pub fn assign(x: &Matrix, centers: &Matrix) -> (Vec<usize>, f64) {
    let mut labels = Vec::with_capacity(x.n_rows());
    let mut inertia = 0.0;
    for row in x.rows() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.rows().enumerate() {
            let d = squared_distance(row, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels.push(best);
        inertia += best_d;
    }
    (labels, inertia)
}

/// k-means++ seeding: first center uniform, then D²-weighted sampling.
pub fn kmeans_plus_plus(x: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = x.n_rows();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = x
        .rows()
        .map(|r| squared_distance(r, x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        chosen.push(next);
        for (i, r) in x.rows().enumerate() {
            d2[i] = d2[i].min(squared_distance(r, x.row(next)));
        }
    }
    x.take_rows(&chosen).expect("indices drawn from 0..n")
}

/// One seeded run of seeding plus Lloyd iterations. Stops once no center
/// moves by `tol` or more (Euclidean), or after `max_iter` updates.
pub fn run(x: &Matrix, k: usize, seed: u64, max_iter: usize, tol: f64) -> KMeansRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = kmeans_plus_plus(x, k, &mut rng);
    let (mut labels, init_inertia) = assign(x, &centers);
    let mut history = vec![init_inertia];
    let mut n_iter = 0;
    while n_iter < max_iter {
        let mut sums = Matrix::zeros(k, x.n_cols());
        let mut counts = vec![0usize; k];
        for (row, &l) in x.rows().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums.row_mut(l).iter_mut().zip(row) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for (c, &count) in counts.iter().enumerate() {
            // An empty cluster keeps its previous center.
            if count == 0 {
                continue;
            }
            let inv = 1.0 / count as f64;
            let new: Vec<f64> = sums.row(c).iter().map(|s| s * inv).collect();
            shift = shift.max(squared_distance(&new, centers.row(c)).sqrt());
            centers.row_mut(c).copy_from_slice(&new);
        }
        n_iter += 1;
        let (l, inertia) = assign(x, &centers);
        labels = l;
        history.push(inertia);
        if shift < tol {
            break;
        }
    }
    let inertia = *history.last().expect("history starts non-empty");
    KMeansRun {
        centers,
        inertia,
        n_iter,
        inertia_history: history,
    }
}

pub struct KMeans {
    schema: ParamSchema,
}

impl KMeans {
    pub const KIND: &'static str = "KMeans";

    pub fn new() -> Self {
        KMeans {
            schema: ParamSchema::new()
                .param("n_clusters", ParamType::Int, 8)
                .param("n_init", ParamType::Int, 10)
                .param("max_iter", ParamType::Int, 300)
                .param("tol", ParamType::Float, 1e-6)
                .param("random_seed", ParamType::Int, 0),
        }
    }
}

impl Default for KMeans {
    fn default() -> Self {
        Self::new()
    }
}

impl Estimator for KMeans {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            predictor: true,
            score: DefaultScore::Custom,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, _: Option<&[f64]>) -> Result<FittedState> {
        x.check_numeric()?;
        let x = x.dense()?;
        let k = params.int("n_clusters");
        if k < 1 {
            return Err(Error::invalid_param("n_clusters", "must be at least 1"));
        }
        if k as usize > x.n_rows() {
            return Err(Error::fit(
                Self::KIND,
                format!("n_clusters={k} exceeds the {} samples", x.n_rows()),
            ));
        }
        let n_init = params.int("n_init");
        if n_init < 1 {
            return Err(Error::invalid_param("n_init", "must be at least 1"));
        }
        let max_iter = params.int("max_iter").max(0) as usize;
        let tol = params.float("tol");

        let mut master = ChaCha8Rng::seed_from_u64(params.int("random_seed") as u64);
        let seeds: Vec<u64> = (0..n_init).map(|_| master.gen()).collect();
        let runs: Vec<KMeansRun> = seeds
            .par_iter()
            .map(|&s| run(&x, k as usize, s, max_iter, tol))
            .collect();
        // Lowest inertia wins; earlier restart on ties.
        let best = runs
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.inertia.total_cmp(&b.inertia).then(i.cmp(j)))
            .map(|(_, r)| r)
            .expect("n_init >= 1");
        let (labels, _) = assign(&x, &best.centers);
        Ok(FittedState::new()
            .with("cluster_centers_", Array::matrix(&best.centers))
            .with(
                "labels_",
                Array::vector(labels.iter().map(|&l| l as f64).collect()),
            )
            .with("inertia_", Array::scalar(best.inertia))
            .with("n_iter_", Array::scalar(best.n_iter as f64)))
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        x.check_numeric()?;
        let centers = state.matrix("cluster_centers_")?;
        let (labels, _) = assign(&*x.dense()?, &centers);
        Ok(labels.into_iter().map(|l| l as f64).collect())
    }

    /// Negated inertia of `x` against the fitted centers; `y` is ignored.
    fn score(
        &self,
        _: &ParamMap,
        state: &FittedState,
        x: &Features,
        _: Option<&[f64]>,
    ) -> Result<f64> {
        x.check_numeric()?;
        let centers = state.matrix("cluster_centers_")?;
        let (_, inertia) = assign(&*x.dense()?, &centers);
        Ok(-inertia)
    }
}
