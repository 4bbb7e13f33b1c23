mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{
    auc_by_pairs, classification, kfold_blocks, mean_in_order, nested_loop_scores, paper_svc_grid,
    recorder_registry, rng, state_bits, vec_bits,
};
use estk::compose::pipeline;
use estk::{
    params, Capabilities, CvSplitter, DefaultScore, Distribution, Error, Estimator,
    EstimatorHandle, Features, FittedState, Matrix, ParamDistributions, ParamGrid, ParamMap,
    ParamSchema, ParamValue, Scorer, SearchCv, Split,
};
use rand::Rng;

fn handle(kind: &str, p: ParamMap) -> EstimatorHandle {
    EstimatorHandle::new(kind, p).unwrap()
}

fn check_partition(splits: &[Split], n: usize) {
    let mut seen = vec![0usize; n];
    for s in splits {
        let test: BTreeSet<usize> = s.test.iter().copied().collect();
        let train: BTreeSet<usize> = s.train.iter().copied().collect();
        assert_eq!(test.len(), s.test.len());
        assert!(test.is_disjoint(&train));
        assert_eq!(test.len() + train.len(), n);
        assert!(test.iter().chain(&train).all(|&i| i < n));
        for &i in &s.test {
            seen[i] += 1;
        }
    }
    assert!(
        seen.iter().all(|&c| c == 1),
        "test sets do not cover 0..{n} exactly once"
    );
}

#[test]
fn splitters_partition_indices() {
    let mut r = rng(1);
    for n in 2..=50 {
        for k in 2..=10usize.min(n) {
            let plain = CvSplitter::kfold(k).split(n, None).unwrap();
            check_partition(&plain, n);
            let blocks = kfold_blocks(n, k);
            for (s, (train, test)) in plain.iter().zip(&blocks) {
                assert_eq!((&s.train, &s.test), (train, test));
            }
            check_partition(
                &CvSplitter::kfold(k)
                    .shuffled(n as u64)
                    .split(n, None)
                    .unwrap(),
                n,
            );

            // Two or three classes, each with at least k members.
            let n_classes = if n >= 3 * k { 3 } else { 2 };
            if n >= n_classes * k {
                let y = common::balanced_labels(&mut r, n, n_classes);
                for cv in [
                    CvSplitter::stratified(k),
                    CvSplitter::stratified(k).shuffled(7),
                ] {
                    let splits = cv.split(n, Some(&y)).unwrap();
                    check_partition(&splits, n);
                    for c in 0..n_classes {
                        let total = y.iter().filter(|&&v| v == c as f64).count() as f64;
                        for s in &splits {
                            let in_fold =
                                s.test.iter().filter(|&&i| y[i] == c as f64).count() as f64;
                            assert!((in_fold - total / k as f64).abs() <= 1.0);
                        }
                    }
                }
            }
        }
        let loo = CvSplitter::leave_one_out().split(n, None).unwrap();
        check_partition(&loo, n);
        assert!(loo.iter().enumerate().all(|(i, s)| s.test == [i]));
    }
}

#[test]
fn splitter_examples() {
    let sizes: Vec<usize> = CvSplitter::kfold(3)
        .split(10, None)
        .unwrap()
        .iter()
        .map(|s| s.test.len())
        .collect();
    assert_eq!(sizes, [4, 3, 3]);
    let y = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
    for s in CvSplitter::stratified(2).split(8, Some(&y)).unwrap() {
        let a = s.test.iter().filter(|&&i| y[i] == 0.0).count();
        assert_eq!((a, s.test.len() - a), (2, 2));
    }
    assert!(CvSplitter::kfold(11).split(10, None).is_err());
    assert!(CvSplitter::kfold(1).split(10, None).is_err());
    assert!(CvSplitter::stratified(3)
        .split(8, Some(&[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]))
        .is_err());
    assert!(CvSplitter::leave_one_out().split(1, None).is_err());
}

#[test]
fn candidate_fits_never_see_test_rows() {
    let (registry, seen) = recorder_registry();
    let base = registry.construct("RowRecorder", ParamMap::new()).unwrap();

    let n = 37;
    let x = Matrix::new(
        n,
        2,
        (0..n).flat_map(|i| [i as f64, (i % 5) as f64]).collect(),
    )
    .unwrap();
    let y: Vec<f64> = (0..n).map(|i| (i % 3 == 0) as u8 as f64).collect();
    for cv in [
        CvSplitter::kfold(5),
        CvSplitter::stratified(4).shuffled(3),
        CvSplitter::leave_one_out(),
    ] {
        seen.lock().unwrap().clear();
        let grid =
            ParamGrid::new().sub_grid([("tag", vec![ParamValue::from(1), 2.into(), 3.into()])]);
        let mut search = SearchCv::grid(base.clone(), grid).with_cv(cv);
        search.fit(&Features::Dense(x.clone()), Some(&y)).unwrap();
        let splits = cv.split(n, Some(&y)).unwrap();
        let records = seen.lock().unwrap().clone();
        // Three candidates per fold, then one refit on everything.
        assert_eq!(records.len(), 3 * splits.len() + 1);
        let refits: Vec<&Vec<usize>> = records.iter().filter(|r| r.len() == n).collect();
        assert_eq!(refits.len(), 1);
        for rec in records.iter().filter(|r| r.len() < n) {
            let split = splits
                .iter()
                .find(|s| &s.train == rec)
                .expect("fit on a non-training row set");
            assert!(rec.iter().all(|i| !split.test.contains(i)));
        }
        for s in &splits {
            assert_eq!(records.iter().filter(|r| **r == s.train).count(), 3);
        }
    }
}

#[test]
fn grid_search_equals_the_nested_loop() {
    let (x, y) = classification(60, 4, 2, 5);
    let base = handle("LogisticRegression", params! {});
    let grid = ParamGrid::new().sub_grid([
        (
            "C",
            vec![ParamValue::from(0.01), 0.1.into(), 1.0.into(), 10.0.into()],
        ),
        ("penalty", vec![ParamValue::from("l1"), "l2".into()]),
    ]);
    for (scorer, metric, k) in [(Scorer::F1, "f1", 5), (Scorer::Accuracy, "accuracy", 3)] {
        let mut search = SearchCv::grid(base.clone(), grid.clone())
            .with_cv(CvSplitter::kfold(k))
            .with_scoring(scorer);
        search.fit(&Features::Dense(x.clone()), Some(&y)).unwrap();
        let res = search.result().unwrap();
        let oracle =
            nested_loop_scores(&base, &res.candidates, &kfold_blocks(60, k), metric, &x, &y);
        assert_eq!(res.candidates, grid.expand().unwrap());
        for (got, want) in res.fold_scores.iter().zip(&oracle) {
            assert_eq!(vec_bits(got), vec_bits(want));
        }
        let means: Vec<f64> = oracle.iter().map(|s| mean_in_order(s)).collect();
        assert_eq!(vec_bits(&res.mean_scores), vec_bits(&means));
        let best = (0..means.len()).fold(0, |b, i| if means[i] > means[b] { i } else { b });
        assert_eq!(res.best_index_, best);
        assert_eq!(res.best_params_, res.candidates[best]);
    }
}

#[test]
fn grid_expansion() {
    let grid = paper_svc_grid();
    let candidates = grid.expand().unwrap();
    let product: usize = grid
        .sub_grids()
        .iter()
        .map(|g| g.iter().map(|(_, v)| v.len()).product::<usize>())
        .sum();
    assert_eq!(product, 12);
    assert_eq!(candidates.len(), 12);

    let one = ParamGrid::new().sub_grid([("C", vec![ParamValue::from(1.0)])]);
    assert_eq!(one.expand().unwrap().len(), 1);

    let two = ParamGrid::new().sub_grid([
        ("a", vec![ParamValue::from(1), 2.into()]),
        ("b", vec![ParamValue::from("x"), "y".into()]),
    ]);
    let order: Vec<(i64, String)> = two
        .expand()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c.get("a").unwrap().as_i64().unwrap(),
                c.get("b").unwrap().as_str().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(
        order,
        [
            (1, "x".into()),
            (1, "y".into()),
            (2, "x".into()),
            (2, "y".into())
        ]
    );
}

#[test]
fn sampled_candidates() {
    let dists = ParamDistributions::new()
        .with("C", Distribution::LogUniform(1e-4, 1e-1))
        .with("u", Distribution::Uniform(0.0, 1.0))
        .with("k", Distribution::IntegerUniform(1, 3))
        .with(
            "kernel",
            Distribution::Choice(vec!["linear".into(), "rbf".into()]),
        );
    let draws = dists.sample(10_000, 42).unwrap();
    assert_eq!(draws, dists.sample(10_000, 42).unwrap());
    assert_ne!(draws, dists.sample(10_000, 43).unwrap());

    let mut decades = [0usize; 3];
    for d in &draws {
        let c = d.get("C").unwrap().as_f64().unwrap();
        assert!((1e-4..=1e-1).contains(&c));
        decades[((c.log10() + 4.0).floor() as usize).min(2)] += 1;
        let u = d.get("u").unwrap().as_f64().unwrap();
        assert!((0.0..1.0).contains(&u));
        assert!((1..=3).contains(&d.get("k").unwrap().as_i64().unwrap()));
    }
    for count in decades {
        let share = count as f64 / draws.len() as f64;
        assert!((share - 1.0 / 3.0).abs() <= 0.05, "{decades:?}");
    }
}

#[test]
fn roc_auc_equals_pair_counting() {
    let mut r = rng(77);
    for _ in 0..200 {
        let n = r.gen_range(2..=50);
        let mut y: Vec<f64> = (0..n).map(|_| r.gen_range(0..2) as f64).collect();
        y[0] = 1.0;
        y[1] = 0.0;
        // Coarse scores so ties are common.
        let s: Vec<f64> = (0..n).map(|_| r.gen_range(0..8) as f64 * 0.25).collect();
        let got = estk::model_selection::score_metric(Scorer::RocAuc, &y, &s).unwrap();
        assert_eq!(got, auc_by_pairs(&y, &s));
    }
}

#[test]
fn search_picks_the_informative_feature_count() {
    // Feature 0 carries the label; features 1 and 2 are noise large enough
    // to swamp an RBF kernel.
    let mut r = rng(9);
    let n = 40;
    let y: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    let data: Vec<f64> = y
        .iter()
        .flat_map(|&l| {
            [
                2.0 * l - 1.0 + r.gen_range(-0.8..0.8),
                r.gen_range(-20.0..20.0),
                r.gen_range(-20.0..20.0),
            ]
        })
        .collect();
    let x = Matrix::new(n, 3, data).unwrap();
    let base = pipeline(vec![
        ("sel", handle("SelectKBest", params! { "k" => 1 })),
        (
            "clf",
            handle("SVC", params! { "kernel" => "rbf", "gamma" => 1.0 }),
        ),
    ])
    .unwrap();
    let grid =
        ParamGrid::new().sub_grid([("sel__k", vec![ParamValue::from(1), 2.into(), 3.into()])]);
    let mut search = SearchCv::grid(base.clone(), grid)
        .with_cv(CvSplitter::kfold(5))
        .with_scoring(Scorer::Accuracy);
    search.fit(&Features::Dense(x.clone()), Some(&y)).unwrap();
    let res = search.result().unwrap();
    let oracle = nested_loop_scores(
        &base,
        &res.candidates,
        &kfold_blocks(n, 5),
        "accuracy",
        &x,
        &y,
    );
    let means: Vec<f64> = oracle.iter().map(|s| mean_in_order(s)).collect();
    assert!(means[0] > means[1] && means[0] > means[2], "{means:?}");
    assert_eq!(res.best_params_.get("sel__k"), Some(&ParamValue::Int(1)));
    assert_eq!(vec_bits(&res.mean_scores), vec_bits(&means));
}

#[test]
fn single_candidate_search() {
    let (x, y) = classification(40, 3, 2, 3);
    let x = Features::Dense(x);
    let grid = ParamGrid::new().sub_grid([("C", vec![ParamValue::from(0.5)])]);
    let mut search = SearchCv::grid(handle("LogisticRegression", params! {}), grid);
    search.fit(&x, Some(&y)).unwrap();
    let res = search.result().unwrap();
    assert_eq!(res.best_params_, params! { "C" => 0.5 });
    assert_eq!(res.fold_scores[0].len(), 5);
    assert_eq!(res.best_score_, mean_in_order(&res.fold_scores[0]));

    let mut plain = handle("LogisticRegression", params! { "C" => 0.5 });
    plain.fit(&x, Some(&y)).unwrap();
    assert_eq!(
        state_bits(search.best_estimator().unwrap().fitted_state().unwrap()),
        state_bits(plain.fitted_state().unwrap())
    );
}

#[test]
fn search_delegates_to_the_best_estimator() {
    let (x, y) = classification(50, 3, 2, 4);
    let x = Features::Dense(x);
    let probe = Features::Dense(common::random_matrix(&mut rng(4), 20, 3, -3.0, 3.0));
    let grid = ParamGrid::new().sub_grid([("C", vec![ParamValue::from(0.1), 1.0.into()])]);
    let mut search = SearchCv::grid(handle("LogisticRegression", params! {}), grid.clone());
    search.fit(&x, Some(&y)).unwrap();
    let best = search.best_estimator().unwrap();
    assert_eq!(
        vec_bits(&search.predict(&probe).unwrap()),
        vec_bits(&best.predict(&probe).unwrap())
    );
    assert_eq!(
        vec_bits(search.predict_proba(&probe).unwrap().as_slice()),
        vec_bits(best.predict_proba(&probe).unwrap().as_slice())
    );
    assert_eq!(
        search.score(&x, Some(&y)).unwrap(),
        best.score(&x, Some(&y)).unwrap()
    );

    let mut no_refit =
        SearchCv::grid(handle("LogisticRegression", params! {}), grid).with_refit(false);
    no_refit.fit(&x, Some(&y)).unwrap();
    assert!(no_refit.result().unwrap().best_estimator_.is_none());
    assert!(matches!(
        no_refit.predict(&probe).unwrap_err(),
        Error::NotFitted { .. }
    ));
}

/// Transformer that subtracts `offset`; scored by how close the output mean is to zero.
struct Shift {
    schema: ParamSchema,
}

impl Estimator for Shift {
    fn kind(&self) -> &str {
        "Shift"
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            transformer: true,
            score: DefaultScore::Custom,
            ..Default::default()
        }
    }

    fn fit(&self, _: &ParamMap, _: &Features, _: Option<&[f64]>) -> estk::Result<FittedState> {
        Ok(FittedState::new())
    }

    fn transform(
        &self,
        params: &ParamMap,
        _: &FittedState,
        x: &Features,
    ) -> estk::Result<Features> {
        let offset = params.get("offset").unwrap().as_f64().unwrap();
        let m = x.to_dense()?;
        Ok(Features::Dense(Matrix::new(
            m.n_rows(),
            m.n_cols(),
            m.as_slice().iter().map(|v| v - offset).collect(),
        )?))
    }

    fn score(
        &self,
        params: &ParamMap,
        state: &FittedState,
        x: &Features,
        _: Option<&[f64]>,
    ) -> estk::Result<f64> {
        let out = self.transform(params, state, x)?.to_dense()?;
        let mean = out.as_slice().iter().sum::<f64>() / out.as_slice().len() as f64;
        Ok(-mean.abs())
    }
}

#[test]
fn search_over_a_transformer_exposes_transform_only() {
    let base = EstimatorHandle::from_impl(
        Arc::new(Shift {
            schema: ParamSchema::new().param("offset", estk::ParamType::Float, 0.0),
        }),
        ParamMap::new(),
    )
    .unwrap();
    let x = Features::Dense(
        Matrix::new(10, 1, (0..10).map(|i| 3.0 + i as f64 * 0.1).collect()).unwrap(),
    );
    let grid = ParamGrid::new().sub_grid([(
        "offset",
        vec![ParamValue::from(0.0), 3.45.into(), 10.0.into()],
    )]);
    let mut search = SearchCv::grid(base, grid);
    search.fit(&x, None).unwrap();
    assert_eq!(search.result().unwrap().best_index_, 1);
    let caps = search.capabilities();
    assert!(caps.transformer && !caps.predictor);
    assert!(search.transform(&x).is_ok());
    assert!(matches!(
        search.predict(&x).unwrap_err(),
        Error::Capability { .. }
    ));
}

#[test]
fn candidate_errors_name_the_candidate() {
    let (x, y) = classification(20, 2, 1, 1);
    let grid = ParamGrid::new().sub_grid([("C", vec![ParamValue::from(1.0), (-1.0).into()])]);
    let err = SearchCv::grid(handle("LogisticRegression", params! {}), grid)
        .fit(&Features::Dense(x.clone()), Some(&y))
        .map(|_| ())
        .unwrap_err();
    assert!(
        matches!(
            err,
            Error::Candidate {
                candidate: 1,
                fold: Some(0),
                ..
            }
        ),
        "{err}"
    );

    let grid = ParamGrid::new().sub_grid([("nope", vec![ParamValue::from(1.0)])]);
    let err = SearchCv::grid(handle("LogisticRegression", params! {}), grid)
        .fit(&Features::Dense(x), Some(&y))
        .map(|_| ())
        .unwrap_err();
    assert!(
        matches!(
            err,
            Error::Candidate {
                candidate: 0,
                fold: None,
                ..
            }
        ),
        "{err}"
    );
}

fn run_search(seed: u64) -> String {
    let (x, y) = classification(40, 3, 2, 6);
    let dists = ParamDistributions::new()
        .with("C", Distribution::LogUniform(1e-2, 1e2))
        .with(
            "penalty",
            Distribution::Choice(vec!["l1".into(), "l2".into()]),
        );
    let mut search = SearchCv::randomized(handle("LogisticRegression", params! {}), dists, 6, seed)
        .with_cv(CvSplitter::stratified(4).shuffled(seed));
    search.fit(&Features::Dense(x), Some(&y)).unwrap();
    let res = search.result().unwrap();
    format!(
        "{:?} {:?} {:?} {:?}",
        res.candidates,
        res.fold_scores
            .iter()
            .map(|s| vec_bits(s))
            .collect::<Vec<_>>(),
        res.best_index_,
        state_bits(
            res.best_estimator_
                .as_ref()
                .unwrap()
                .fitted_state()
                .unwrap()
        )
    )
}

#[test]
fn searches_are_deterministic() {
    assert_eq!(run_search(3), run_search(3));
    assert_ne!(run_search(3), run_search(4));
}

#[test]
fn paper_svc_grid_search() {
    let (x, y) = classification(100, 4, 2, 12);
    let base = handle("SVC", params! {});
    let mut search = SearchCv::grid(base.clone(), paper_svc_grid())
        .with_scoring(Scorer::F1)
        .with_cv(CvSplitter::kfold(10));
    search.fit(&Features::Dense(x.clone()), Some(&y)).unwrap();
    let res = search.result().unwrap();
    assert_eq!(res.mean_scores.len(), 12);
    assert!(res.fold_scores.iter().all(|s| s.len() == 10));
    assert!(res.mean_scores.iter().all(|m| (0.0..=1.0).contains(m)));
    let oracle = nested_loop_scores(&base, &res.candidates, &kfold_blocks(100, 10), "f1", &x, &y);
    assert_eq!(res.fold_scores, oracle);
}
