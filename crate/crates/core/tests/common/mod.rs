//! Data generators and brute-force reference computations shared by the
//! integration suites.
#![allow(dead_code)]

pub mod contract;

use estk::compose::{feature_union, pipeline};
use std::sync::{Arc, Mutex};

use estk::predictors::svc::{DualSolution, Kernel};
use estk::{
    params, Array, Capabilities, DefaultScore, Estimator, EstimatorHandle, Features, FittedState,
    Matrix, ParamMap, ParamSchema, Registry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn features(rows: &[&[f64]]) -> Features {
    Features::Dense(matrix(rows))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::new(n, p, (0..n * p).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

/// Points scattered uniformly within `spread` of each center; label = center index.
pub fn blobs(
    centers: &[Vec<f64>],
    per_center: usize,
    spread: f64,
    seed: u64,
) -> (Matrix, Vec<f64>) {
    let mut r = rng(seed);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for _ in 0..per_center {
        for (c, center) in centers.iter().enumerate() {
            rows.push(
                center
                    .iter()
                    .map(|v| v + r.gen_range(-spread..spread))
                    .collect(),
            );
            y.push(c as f64);
        }
    }
    (Matrix::from_rows(&rows).unwrap(), y)
}

/// Two noisy classes: the first `informative` features shift with the
/// label, the rest are pure noise.
pub fn classification(n: usize, p: usize, informative: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut r = rng(seed);
    let y: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    let mut data = Vec::with_capacity(n * p);
    for &label in &y {
        for j in 0..p {
            let shift = if j < informative {
                2.0 * label - 1.0
            } else {
                0.0
            };
            data.push(shift + r.gen_range(-1.5..1.5));
        }
    }
    (Matrix::new(n, p, data).unwrap(), y)
}

/// Labels `0..k` dealt round-robin then shuffled, so every class has
/// `n / k` or one more members.
pub fn balanced_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
    use rand::seq::SliceRandom;
    let mut y: Vec<f64> = (0..n).map(|i| (i % k) as f64).collect();
    y.shuffle(rng);
    y
}

pub fn rows_of(m: &Matrix, idx: &[usize]) -> Matrix {
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| m.row(i).to_vec()).collect();
    Matrix::new(idx.len(), m.n_cols(), rows.concat()).unwrap()
}

pub fn pick(v: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| v[i]).collect()
}

/// Contiguous k-fold test blocks, computed from the size rule directly.
pub fn kfold_blocks(n: usize, k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut start = 0;
    for f in 0..k {
        let size = n / k + if f < n % k { 1 } else { 0 };
        let test: Vec<usize> = (start..start + size).collect();
        let train: Vec<usize> = (0..n).filter(|i| !test.contains(i)).collect();
        out.push((train, test));
        start += size;
    }
    out
}

/// Mann–Whitney statistic by enumerating every (positive, negative) pair.
pub fn auc_by_pairs(y: &[f64], s: &[f64]) -> f64 {
    let (mut correct, mut ties, mut pairs) = (0u64, 0u64, 0u64);
    for i in 0..y.len() {
        for j in 0..y.len() {
            if y[i] == 1.0 && y[j] != 1.0 {
                pairs += 1;
                if s[i] > s[j] {
                    correct += 1;
                } else if s[i] == s[j] {
                    ties += 1;
                }
            }
        }
    }
    (correct as f64 + 0.5 * ties as f64) / pairs as f64
}

pub fn f1_by_counts(y: &[f64], p: &[f64]) -> f64 {
    let tp = y
        .iter()
        .zip(p)
        .filter(|(a, b)| **a == 1.0 && **b == 1.0)
        .count() as f64;
    let fp = y
        .iter()
        .zip(p)
        .filter(|(a, b)| **a != 1.0 && **b == 1.0)
        .count() as f64;
    let fneg = y
        .iter()
        .zip(p)
        .filter(|(a, b)| **a == 1.0 && **b != 1.0)
        .count() as f64;
    let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
    let recall = if tp + fneg == 0.0 {
        0.0
    } else {
        tp / (tp + fneg)
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn accuracy_by_counts(y: &[f64], p: &[f64]) -> f64 {
    y.iter().zip(p).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

/// Evaluates every candidate on every fold with explicit loops: configure,
/// fit on the training rows, score the held-out rows. Returns per-candidate
/// fold scores.
pub fn nested_loop_scores(
    base: &EstimatorHandle,
    candidates: &[ParamMap],
    folds: &[(Vec<usize>, Vec<usize>)],
    metric: &str,
    x: &Matrix,
    y: &[f64],
) -> Vec<Vec<f64>> {
    let mut all = Vec::new();
    for candidate in candidates {
        let mut scores = Vec::new();
        for (train, test) in folds {
            let mut est = base.set_params(candidate).unwrap();
            est.fit(&Features::Dense(rows_of(x, train)), Some(&pick(y, train)))
                .unwrap();
            let xt = Features::Dense(rows_of(x, test));
            let yt = pick(y, test);
            let pred = est.predict(&xt).unwrap();
            scores.push(match metric {
                "f1" => f1_by_counts(&yt, &pred),
                "accuracy" => accuracy_by_counts(&yt, &pred),
                other => panic!("no oracle for {other}"),
            });
        }
        all.push(scores);
    }
    all
}

pub fn mean_in_order(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

/// Bit patterns of every array in a fitted state, children included, in order.
pub fn state_bits(state: &FittedState) -> Vec<(String, Vec<usize>, Vec<u64>)> {
    let mut out: Vec<(String, Vec<usize>, Vec<u64>)> = state
        .arrays()
        .iter()
        .map(|(n, a)| {
            (
                n.clone(),
                a.shape.clone(),
                a.data.iter().map(|v| v.to_bits()).collect(),
            )
        })
        .collect();
    for (name, child) in state.children() {
        for (n, s, d) in state_bits(child.fitted().expect("fitted child")) {
            out.push((format!("{name}/{n}"), s, d));
        }
    }
    out
}

pub fn feature_bits(f: &Features) -> (bool, usize, usize, Vec<u64>) {
    let dense = f.to_dense().unwrap();
    (
        f.is_sparse(),
        dense.n_rows(),
        dense.n_cols(),
        dense.as_slice().iter().map(|v| v.to_bits()).collect(),
    )
}

pub fn vec_bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Gradient of `f` by central differences with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|j| {
            let mut plus = at.to_vec();
            let mut minus = at.to_vec();
            plus[j] += h;
            minus[j] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

/// The 2-partition of `x` with least within-cluster sum of squares, by
/// enumerating every labelling with point 0 in cluster 0.
pub fn best_two_partition(x: &Matrix) -> (Vec<usize>, f64) {
    let n = x.n_rows();
    let mut best = (vec![0; n], f64::INFINITY);
    for mask in 0u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| {
                if i == 0 {
                    0
                } else {
                    ((mask >> (i - 1)) & 1) as usize
                }
            })
            .collect();
        if !labels.contains(&1) {
            continue;
        }
        let mut inertia = 0.0;
        for c in 0..2 {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            for j in 0..x.n_cols() {
                let mean = members.iter().map(|&i| x.get(i, j)).sum::<f64>() / members.len() as f64;
                inertia += members
                    .iter()
                    .map(|&i| (x.get(i, j) - mean).powi(2))
                    .sum::<f64>();
            }
        }
        if inertia < best.1 {
            best = (labels, inertia);
        }
    }
    best
}

/// Same partition up to renaming of cluster labels.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len()
        && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// One-way ANOVA F per feature, straight from the textbook formula.
pub fn anova_by_formula(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let mut classes: Vec<f64> = y.to_vec();
    classes.sort_by(f64::total_cmp);
    classes.dedup();
    let n = y.len() as f64;
    let k = classes.len() as f64;
    (0..x.n_cols())
        .map(|j| {
            let col: Vec<f64> = (0..x.n_rows()).map(|i| x.get(i, j)).collect();
            let grand = col.iter().sum::<f64>() / n;
            let mut between = 0.0;
            let mut within = 0.0;
            for &c in &classes {
                let members: Vec<f64> = col
                    .iter()
                    .zip(y)
                    .filter(|(_, l)| **l == c)
                    .map(|(v, _)| *v)
                    .collect();
                let mean = members.iter().sum::<f64>() / members.len() as f64;
                between += members.len() as f64 * (mean - grand).powi(2);
                within += members.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            }
            let (between, within) = (between / (k - 1.0), within / (n - k));
            if within == 0.0 {
                if between == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                between / within
            }
        })
        .collect()
}

/// The pipeline from the composition walkthrough: a PCA + RBF kernel PCA
/// union feeding a 10-best ANOVA selector and an L2 logistic regression.
pub fn paper_pipeline() -> EstimatorHandle {
    let union = feature_union(vec![
        ("pca", EstimatorHandle::new("PCA", ParamMap::new()).unwrap()),
        (
            "kpca",
            EstimatorHandle::new("KernelPCA", params! { "kernel" => "rbf" }).unwrap(),
        ),
    ])
    .unwrap();
    pipeline(vec![
        ("feat_union", union),
        (
            "feat_sel",
            EstimatorHandle::new("SelectKBest", params! { "k" => 10 }).unwrap(),
        ),
        (
            "log_reg",
            EstimatorHandle::new("LogisticRegression", params! { "penalty" => "l2" }).unwrap(),
        ),
    ])
    .unwrap()
}

/// The two-sub-grid SVC search space from the model-selection walkthrough.
pub fn paper_svc_grid() -> estk::ParamGrid {
    use estk::ParamValue;
    let cs = || vec![ParamValue::from(1), 10.into(), 100.into(), 1000.into()];
    estk::ParamGrid::new()
        .sub_grid([("kernel", vec![ParamValue::from("linear")]), ("C", cs())])
        .sub_grid([
            ("kernel", vec![ParamValue::from("rbf")]),
            ("C", cs()),
            (
                "gamma",
                vec![ParamValue::from(0.001), ParamValue::from(0.0001)],
            ),
        ])
}

pub struct Case {
    pub estimator: EstimatorHandle,
    pub x: Features,
    pub y: Option<Vec<f64>>,
}

pub fn new(kind: &str, p: ParamMap) -> EstimatorHandle {
    EstimatorHandle::new(kind, p).unwrap()
}

/// A valid configuration of `kind` with training data drawn from `seed`.
pub fn case(kind: &str, seed: u64, n: usize, p: usize) -> Case {
    let mut r = rng(seed);
    let x = Features::Dense(random_matrix(&mut r, n, p, -5.0, 5.0));
    let binary = Some(balanced_labels(&mut r, n, 2));
    let three = Some(balanced_labels(&mut r, n, 3));
    let (estimator, x, y) = match kind {
        "StandardScaler" => (new(kind, params! {}), x, None),
        "SelectKBest" => (new(kind, params! { "k" => 2 }), x, binary),
        "PCA" => (new(kind, params! { "n_components" => 2 }), x, None),
        "KernelPCA" => (
            new(kind, params! { "n_components" => 2, "gamma" => 0.1 }),
            x,
            None,
        ),
        "HashingVectorizer" => {
            let vocab = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta"];
            let docs = (0..n)
                .map(|_| {
                    let len = r.gen_range(0..6);
                    (0..len)
                        .map(|_| vocab[r.gen_range(0..vocab.len())].to_string())
                        .collect()
                })
                .collect();
            (
                new(kind, params! { "n_features" => 64 }),
                Features::Documents(docs),
                None,
            )
        }
        "LogisticRegression" => (
            new(kind, params! {}),
            x,
            if seed.is_multiple_of(2) {
                binary
            } else {
                three
            },
        ),
        "SVC" => (new(kind, params! { "C" => 2.0 }), x, binary),
        "KMeans" => (
            new(
                kind,
                params! { "n_clusters" => 3, "n_init" => 3, "random_seed" => seed as i64 },
            ),
            x,
            None,
        ),
        "DummyRegressor" => {
            let y = (0..n).map(|_| r.gen_range(-3.0..3.0)).collect();
            (new(kind, params! {}), x, Some(y))
        }
        "Pipeline" => (
            pipeline(vec![
                ("scale", new("StandardScaler", params! {})),
                ("clf", new("LogisticRegression", params! { "C" => 0.5 })),
            ])
            .unwrap(),
            x,
            binary,
        ),
        "FeatureUnion" => (
            feature_union(vec![
                ("pca", new("PCA", params! { "n_components" => 1 })),
                ("scale", new("StandardScaler", params! {})),
            ])
            .unwrap(),
            x,
            None,
        ),
        "OneVsRestClassifier" => (
            new(
                kind,
                params! { "estimator" => new("LogisticRegression", params! {}) },
            ),
            x,
            three,
        ),
        "OneVsOneClassifier" => (
            new(
                kind,
                params! { "estimator" => new("SVC", params! { "kernel" => "linear" }) },
            ),
            x,
            three,
        ),
        other => panic!("no contract fixture for registered kind {other}"),
    };
    Case { estimator, x, y }
}

/// Well-typed parameters that only fail once data arrives.
pub fn absurd(kind: &str) -> ParamMap {
    match kind {
        "StandardScaler" => params! { "with_mean" => true, "with_std" => true },
        "SelectKBest" => params! { "k" => -3 },
        "PCA" => params! { "n_components" => 10_000 },
        "KernelPCA" => params! { "gamma" => -1.0 },
        "HashingVectorizer" => params! { "n_features" => 3 },
        "LogisticRegression" => params! { "C" => -1.0, "penalty" => "l7" },
        "SVC" => params! { "C" => 0.0, "kernel" => "sigmoid" },
        "KMeans" => params! { "n_clusters" => 0 },
        "DummyRegressor" => params! {},
        "Pipeline" => params! { "steps" => Vec::<(String, EstimatorHandle)>::new() },
        "FeatureUnion" => params! { "transformer_list" => Vec::<(String, EstimatorHandle)>::new() },
        "OneVsRestClassifier" | "OneVsOneClassifier" => {
            params! { "estimator" => estk::ParamValue::Null }
        }
        other => panic!("no absurd parameters for {other}"),
    }
}

/// Whether `absurd(kind)` must make `fit` fail. The scaler and dummy have no
/// invalid well-typed settings.
pub fn absurd_fails(kind: &str) -> bool {
    !matches!(kind, "StandardScaler" | "DummyRegressor")
}

/// Predictor that records the row ids (column 0) of every training set it
/// sees and predicts the majority training label.
pub struct RowRecorder {
    pub schema: ParamSchema,
    pub seen: Arc<Mutex<Vec<Vec<usize>>>>,
}

impl Estimator for RowRecorder {
    fn kind(&self) -> &str {
        "RowRecorder"
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

    fn fit(&self, _: &ParamMap, x: &Features, y: Option<&[f64]>) -> estk::Result<FittedState> {
        let x = x.to_dense()?;
        let mut ids: Vec<usize> = x.column(0).iter().map(|v| *v as usize).collect();
        ids.sort_unstable();
        self.seen.lock().unwrap().push(ids);
        let y = y.unwrap();
        let ones = y.iter().filter(|v| **v == 1.0).count();
        let majority = if 2 * ones > y.len() { 1.0 } else { 0.0 };
        Ok(FittedState::new().with("majority_", Array::scalar(majority)))
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> estk::Result<Vec<f64>> {
        Ok(vec![state.scalar("majority_")?; x.n_rows()])
    }
}

/// Every output the handle can produce on `x`, as bit patterns.
pub fn outputs(e: &EstimatorHandle, x: &Features) -> Vec<Vec<u64>> {
    let caps = e.capabilities();
    let mut out = Vec::new();
    if caps.predictor {
        out.push(vec_bits(&e.predict(x).unwrap()));
    }
    if caps.decision_function {
        out.push(vec_bits(e.decision_function(x).unwrap().as_slice()));
    }
    if caps.probabilistic {
        out.push(vec_bits(e.predict_proba(x).unwrap().as_slice()));
    }
    if caps.transformer {
        let (sparse, rows, cols, bits) = feature_bits(&e.transform(x).unwrap());
        out.push([vec![sparse as u64, rows as u64, cols as u64], bits].concat());
    }
    out
}

/// A builtin registry plus a registered `RowRecorder` (one Int parameter,
/// `tag`) and the shared log of training row ids it fills.
pub fn recorder_registry() -> (Registry, Arc<Mutex<Vec<Vec<usize>>>>) {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let registry = Registry::with_builtins();
    registry
        .register(Arc::new(RowRecorder {
            schema: ParamSchema::new().param("tag", estk::ParamType::Int, 0),
            seen: seen.clone(),
        }))
        .unwrap();
    (registry, seen)
}

pub fn kernel_value(kernel: Kernel, a: &[f64], b: &[f64]) -> f64 {
    match kernel {
        Kernel::Linear => a.iter().zip(b).map(|(u, v)| u * v).sum(),
        Kernel::Rbf { gamma } => {
            (-gamma * a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>()).exp()
        }
    }
}

/// Largest violation of the soft-margin optimality conditions by a dual
/// solution: margin `>= 1` at `alpha = 0`, `<= 1` at `alpha = C`, `= 1` in between.
pub fn kkt_residual(x: &Matrix, y: &[f64], kernel: Kernel, c: f64, sol: &DualSolution) -> f64 {
    let n = x.n_rows();
    (0..n)
        .map(|i| {
            let f: f64 = (0..n)
                .map(|j| sol.alpha[j] * y[j] * kernel_value(kernel, x.row(j), x.row(i)))
                .sum::<f64>()
                + sol.intercept;
            let m = y[i] * f;
            let a = sol.alpha[i];
            if a <= 0.0 {
                (1.0 - m).max(0.0)
            } else if a >= c {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Identity transformer known to no registry.
pub struct Evil {
    pub schema: ParamSchema,
}

impl Estimator for Evil {
    fn kind(&self) -> &str {
        "EvilEstimator"
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            transformer: true,
            ..Default::default()
        }
    }

    fn fit(&self, _: &ParamMap, _: &Features, _: Option<&[f64]>) -> estk::Result<FittedState> {
        Ok(FittedState::new())
    }

    fn transform(&self, _: &ParamMap, _: &FittedState, x: &Features) -> estk::Result<Features> {
        Ok(x.clone())
    }
}

/// A fitted `EvilEstimator`.
pub fn fitted_evil() -> EstimatorHandle {
    let mut evil = EstimatorHandle::from_impl(
        Arc::new(Evil {
            schema: ParamSchema::new(),
        }),
        ParamMap::new(),
    )
    .unwrap();
    evil.fit(&Features::Dense(Matrix::zeros(2, 1)), None)
        .unwrap();
    evil
}
