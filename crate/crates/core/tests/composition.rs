mod common;

use common::{
    blobs, classification, feature_bits, paper_pipeline, random_matrix, rng, state_bits, vec_bits,
};
use estk::compose::{feature_union, pipeline};
use estk::{params, Error, EstimatorHandle, Features, ParamMap, ParamValue};
use proptest::prelude::*;

fn handle(kind: &str, p: ParamMap) -> EstimatorHandle {
    EstimatorHandle::new(kind, p).unwrap()
}

fn dense_data(n: usize, p: usize, seed: u64) -> (Features, Vec<f64>) {
    let (x, y) = classification(n, p, 2, seed);
    (Features::Dense(x), y)
}

#[test]
fn pipeline_equals_the_hand_rolled_sequence() {
    let (x, y) = dense_data(40, 4, 1);
    let xt = Features::Dense(random_matrix(&mut rng(2), 15, 4, -3.0, 3.0));
    let mut pipe = pipeline(vec![
        ("scale", handle("StandardScaler", params! {})),
        ("clf", handle("LogisticRegression", params! {})),
    ])
    .unwrap();
    pipe.fit(&x, Some(&y)).unwrap();

    let mut scaler = handle("StandardScaler", params! {});
    let z = scaler.fit_transform(&x, None).unwrap();
    let mut clf = handle("LogisticRegression", params! {});
    clf.fit(&z, Some(&y)).unwrap();
    let zt = scaler.transform(&xt).unwrap();

    assert_eq!(
        vec_bits(&pipe.predict(&xt).unwrap()),
        vec_bits(&clf.predict(&zt).unwrap())
    );
    assert_eq!(
        vec_bits(pipe.predict_proba(&xt).unwrap().as_slice()),
        vec_bits(clf.predict_proba(&zt).unwrap().as_slice())
    );
    assert_eq!(
        pipe.score(&xt, Some(&y[..15])).unwrap().to_bits(),
        clf.score(&zt, Some(&y[..15])).unwrap().to_bits()
    );
}

fn head_step(choice: u8) -> EstimatorHandle {
    match choice {
        0 => handle("StandardScaler", params! {}),
        1 => handle("PCA", params! { "n_components" => 3 }),
        _ => handle("SelectKBest", params! { "k" => 3 }),
    }
}

fn last_step(choice: u8) -> EstimatorHandle {
    match choice {
        0 => handle("LogisticRegression", params! {}),
        1 => handle("SVC", params! { "kernel" => "linear" }),
        _ => handle("KMeans", params! { "n_clusters" => 2, "n_init" => 2 }),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_pipelines_equal_their_manual_runs(
        seed in any::<u64>(),
        heads in prop::collection::vec(0u8..3, 1..3),
        last in 0u8..3,
    ) {
        let (x, y) = dense_data(30, 5, seed);
        let mut steps: Vec<(String, EstimatorHandle)> = heads
            .iter()
            .enumerate()
            .map(|(i, &c)| (format!("t{i}"), head_step(c)))
            .collect();
        steps.push(("last".into(), last_step(last)));
        let mut pipe = pipeline(steps.clone()).unwrap();
        pipe.fit(&x, Some(&y)).unwrap();

        let mut z = x.clone();
        let mut fitted = Vec::new();
        for (_, step) in &steps[..steps.len() - 1] {
            let mut s = step.clone_unfitted();
            z = s.fit_transform(&z, Some(&y)).unwrap();
            fitted.push(s);
        }
        let mut end = steps.last().unwrap().1.clone_unfitted();
        end.fit(&z, Some(&y)).unwrap();

        let probe = Features::Dense(random_matrix(&mut rng(seed ^ 7), 10, 5, -2.0, 2.0));
        let mut zp = probe.clone();
        for s in &fitted {
            zp = s.transform(&zp).unwrap();
        }
        prop_assert_eq!(vec_bits(&pipe.predict(&probe).unwrap()), vec_bits(&end.predict(&zp).unwrap()));
        for ((_, inner), manual) in pipe.fitted_state().unwrap().children().iter().zip(fitted.iter().chain([&end])) {
            prop_assert_eq!(state_bits(inner.fitted_state().unwrap()), state_bits(manual.fitted_state().unwrap()));
        }
    }
}

#[test]
fn transformer_tail_exposes_transform_only() {
    let (x, _) = dense_data(20, 4, 3);
    let mut pipe = pipeline(vec![
        ("scale", handle("StandardScaler", params! {})),
        ("pca", handle("PCA", params! { "n_components" => 2 })),
    ])
    .unwrap();
    pipe.fit(&x, None).unwrap();
    assert_eq!(pipe.transform(&x).unwrap().n_cols(), 2);
    assert!(matches!(
        pipe.predict(&x).unwrap_err().root(),
        Error::Capability { .. }
    ));
    assert!(!pipe.capabilities().predictor);
}

#[test]
fn the_walkthrough_pipeline_runs_end_to_end() {
    let (x, y) = dense_data(60, 5, 4);
    let mut pipe = paper_pipeline();
    pipe.fit(&x, Some(&y)).unwrap();
    let pred = pipe.predict(&x).unwrap();
    assert_eq!(pred.len(), 60);
    assert!(pred.iter().all(|p| *p == 0.0 || *p == 1.0));
    let st = pipe.fitted_state().unwrap();
    let names: Vec<&str> = st.children().iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["feat_union", "feat_sel", "log_reg"]);
    // PCA keeps min(n, p) = 5 columns, the RBF kernel PCA at most n.
    let union_out = st.child("feat_union").unwrap().transform(&x).unwrap();
    assert!(union_out.n_cols() > 10);
    assert_eq!(
        st.child("feat_sel")
            .unwrap()
            .transform(&union_out)
            .unwrap()
            .n_cols(),
        10
    );
    assert!(pipe.score(&x, Some(&y)).unwrap() > 0.8);
}

#[test]
fn single_step_pipeline_is_its_step() {
    let (x, y) = dense_data(30, 3, 5);
    let mut pipe = pipeline(vec![("only", handle("LogisticRegression", params! {}))]).unwrap();
    pipe.fit(&x, Some(&y)).unwrap();
    let mut inner = handle("LogisticRegression", params! {});
    inner.fit(&x, Some(&y)).unwrap();
    assert_eq!(
        vec_bits(&pipe.predict(&x).unwrap()),
        vec_bits(&inner.predict(&x).unwrap())
    );
    assert_eq!(
        vec_bits(pipe.decision_function(&x).unwrap().as_slice()),
        vec_bits(inner.decision_function(&x).unwrap().as_slice())
    );
    assert_eq!(
        vec_bits(pipe.predict_proba(&x).unwrap().as_slice()),
        vec_bits(inner.predict_proba(&x).unwrap().as_slice())
    );
    assert_eq!(
        pipe.score(&x, Some(&y)).unwrap(),
        inner.score(&x, Some(&y)).unwrap()
    );
    assert_eq!(pipe.capabilities(), inner.capabilities());

    let mut scaler_pipe = pipeline(vec![("s", handle("StandardScaler", params! {}))]).unwrap();
    let mut scaler = handle("StandardScaler", params! {});
    assert_eq!(
        feature_bits(&scaler_pipe.fit_transform(&x, None).unwrap()),
        feature_bits(&scaler.fit_transform(&x, None).unwrap())
    );
}

#[test]
fn transform_leaves_fitted_state_untouched() {
    let (x, y) = dense_data(40, 5, 6);
    let mut pipe = paper_pipeline();
    pipe.fit(&x, Some(&y)).unwrap();
    let before = format!("{:?}", pipe.fitted_state().unwrap());
    let probe = Features::Dense(random_matrix(&mut rng(6), 12, 5, -5.0, 5.0));
    pipe.predict(&probe).unwrap();
    pipe.predict_proba(&probe).unwrap();
    pipe.score(&probe, Some(&y[..12])).unwrap();
    assert_eq!(before, format!("{:?}", pipe.fitted_state().unwrap()));
}

#[test]
fn union_widths_add_up() {
    let x = Features::Dense(random_matrix(&mut rng(7), 20, 4, -1.0, 1.0));
    let mut union = feature_union(vec![
        ("pca", handle("PCA", params! { "n_components" => 2 })),
        (
            "kpca",
            handle("KernelPCA", params! { "n_components" => 3, "gamma" => 0.5 }),
        ),
    ])
    .unwrap();
    assert_eq!(union.fit_transform(&x, None).unwrap().n_cols(), 5);
    assert_eq!(union.transform(&x).unwrap().n_cols(), 5);
}

#[test]
fn one_member_union_is_that_member() {
    let x = Features::Dense(random_matrix(&mut rng(8), 15, 3, -1.0, 1.0));
    let mut union = feature_union(vec![("pca", handle("PCA", params! {}))]).unwrap();
    let mut pca = handle("PCA", params! {});
    assert_eq!(
        feature_bits(&union.fit_transform(&x, None).unwrap()),
        feature_bits(&pca.fit_transform(&x, None).unwrap())
    );
}

#[test]
fn permuting_members_permutes_column_blocks() {
    let x = Features::Dense(random_matrix(&mut rng(9), 15, 3, -1.0, 1.0));
    let a = || handle("StandardScaler", params! {});
    let b = || handle("PCA", params! { "n_components" => 2 });
    let mut ab = feature_union(vec![("a", a()), ("b", b())]).unwrap();
    let mut ba = feature_union(vec![("b", b()), ("a", a())]).unwrap();
    let ab = ab.fit_transform(&x, None).unwrap().to_dense().unwrap();
    let ba = ba.fit_transform(&x, None).unwrap().to_dense().unwrap();
    for j in 0..3 {
        assert_eq!(vec_bits(&ab.column(j)), vec_bits(&ba.column(j + 2)));
    }
    for j in 0..2 {
        assert_eq!(vec_bits(&ab.column(j + 3)), vec_bits(&ba.column(j)));
    }
}

#[test]
fn nested_parameter_paths() {
    let pipe = paper_pipeline();
    let deep = pipe.get_params(true);
    for key in [
        "log_reg__C",
        "feat_union__pca__n_components",
        "feat_union__kpca__gamma",
        "feat_sel__k",
    ] {
        assert!(deep.contains(key), "missing {key}");
    }

    let tuned = pipe
        .set_params(&params! { "log_reg__C" => 10.0, "feat_union__kpca__gamma" => 0.5 })
        .unwrap();
    let deep = tuned.get_params(true);
    assert_eq!(deep.get("log_reg__C"), Some(&ParamValue::Float(10.0)));
    assert_eq!(
        deep.get("feat_union__kpca__gamma"),
        Some(&ParamValue::Float(0.5))
    );
    // The original is untouched.
    assert_eq!(
        pipe.get_params(true).get("log_reg__C"),
        Some(&ParamValue::Float(1.0))
    );

    match pipe.set_params(&params! { "nope__C" => 1.0 }).unwrap_err() {
        Error::ParamPath { segment, .. } => assert_eq!(segment, "nope"),
        other => panic!("unexpected error {other}"),
    }
}

fn labelled_blobs(k: usize, per: usize, seed: u64) -> (Features, Vec<f64>) {
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let angle = c as f64 * std::f64::consts::TAU / k as f64;
            vec![10.0 * angle.cos(), 10.0 * angle.sin()]
        })
        .collect();
    let (x, y) = blobs(&centers, per, 1.0, seed);
    (Features::Dense(x), y)
}

#[test]
fn one_vs_one_fits_one_estimator_per_pair() {
    for (k, expected) in [(2, 1), (3, 3), (10, 45)] {
        let (x, y) = labelled_blobs(k, 6, k as u64);
        let mut ovo = handle(
            "OneVsOneClassifier",
            params! { "estimator" => handle("LogisticRegression", params! {}) },
        );
        ovo.fit(&x, Some(&y)).unwrap();
        assert_eq!(
            ovo.fitted_state().unwrap().children().len(),
            expected,
            "K={k}"
        );
    }
}

#[test]
fn one_vs_one_with_two_classes_is_the_base() {
    let (x, y) = dense_data(30, 3, 10);
    let mut ovo = handle(
        "OneVsOneClassifier",
        params! { "estimator" => handle("SVC", params! {}) },
    );
    ovo.fit(&x, Some(&y)).unwrap();
    let mut base = handle("SVC", params! {});
    base.fit(&x, Some(&y)).unwrap();
    let probe = Features::Dense(random_matrix(&mut rng(10), 20, 3, -3.0, 3.0));
    assert_eq!(ovo.predict(&probe).unwrap(), base.predict(&probe).unwrap());
}

#[test]
fn one_vs_one_separates_three_blobs() {
    let (x, y) = labelled_blobs(3, 10, 11);
    let mut ovo = handle(
        "OneVsOneClassifier",
        params! { "estimator" => handle("LogisticRegression", params! {}) },
    );
    ovo.fit(&x, Some(&y)).unwrap();
    // Every pairwise classifier separates its own pair perfectly.
    let st = ovo.fitted_state().unwrap();
    let pairs = [(0.0, 1.0), (0.0, 2.0), (1.0, 2.0)];
    for ((ci, cj), (_, est)) in pairs.iter().zip(st.children()) {
        let rows: Vec<usize> = (0..y.len())
            .filter(|&r| y[r] == *ci || y[r] == *cj)
            .collect();
        let pred = est.predict(&x.take_rows(&rows).unwrap()).unwrap();
        for (r, p) in rows.iter().zip(&pred) {
            assert_eq!(*p, if y[*r] == *cj { 1.0 } else { 0.0 });
        }
    }
    assert_eq!(ovo.predict(&x).unwrap(), y);
    assert_eq!(ovo.score(&x, Some(&y)).unwrap(), 1.0);
}

#[test]
fn one_vs_rest_with_two_classes_matches_the_base() {
    let (x, y) = dense_data(30, 3, 12);
    let mut ovr = handle(
        "OneVsRestClassifier",
        params! { "estimator" => handle("LogisticRegression", params! {}) },
    );
    ovr.fit(&x, Some(&y)).unwrap();
    let mut base = handle("LogisticRegression", params! {});
    base.fit(&x, Some(&y)).unwrap();
    let d = ovr.decision_function(&x).unwrap();
    assert_eq!(
        vec_bits(&d.column(1)),
        vec_bits(&base.decision_function(&x).unwrap().column(0))
    );
    assert_eq!(ovr.predict(&x).unwrap(), base.predict(&x).unwrap());
    for row in ovr.predict_proba(&x).unwrap().rows() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn explicit_one_vs_rest_equals_internal_multiclass_logistic() {
    let (x, y) = labelled_blobs(4, 8, 13);
    let mut ovr = handle(
        "OneVsRestClassifier",
        params! { "estimator" => handle("LogisticRegression", params! {}) },
    );
    ovr.fit(&x, Some(&y)).unwrap();
    let mut internal = handle("LogisticRegression", params! {});
    internal.fit(&x, Some(&y)).unwrap();
    let probe = Features::Dense(random_matrix(&mut rng(13), 30, 2, -12.0, 12.0));
    assert_eq!(
        ovr.predict(&probe).unwrap(),
        internal.predict(&probe).unwrap()
    );
    assert_eq!(
        vec_bits(ovr.decision_function(&probe).unwrap().as_slice()),
        vec_bits(internal.decision_function(&probe).unwrap().as_slice())
    );
}

#[test]
fn meta_estimators_do_not_touch_their_template() {
    let (x, y) = labelled_blobs(3, 6, 14);
    let template = handle("LogisticRegression", params! { "C" => 2.0 });
    let mut ovr = handle(
        "OneVsRestClassifier",
        params! { "estimator" => template.clone() },
    );
    ovr.fit(&x, Some(&y)).unwrap();
    assert!(!template.is_fitted());
    let inner = ovr
        .params()
        .get("estimator")
        .and_then(ParamValue::as_estimator)
        .unwrap();
    assert!(!inner.is_fitted());

    let mut copy = estk::clone(&ovr);
    copy.fit(&x, Some(&y[..])).unwrap();
    let retuned = copy.set_params(&params! { "estimator__C" => 0.1 }).unwrap();
    assert_eq!(
        ovr.get_params(true).get("estimator__C"),
        Some(&ParamValue::Float(2.0))
    );
    assert_eq!(
        retuned.get_params(true).get("estimator__C"),
        Some(&ParamValue::Float(0.1))
    );
    assert!(ovr.is_fitted());
}

#[test]
fn pipelines_can_be_multiclass_bases() {
    let (x, y) = labelled_blobs(3, 8, 15);
    let base = pipeline(vec![
        ("scale", handle("StandardScaler", params! {})),
        ("svc", handle("SVC", params! { "kernel" => "linear" })),
    ])
    .unwrap();
    let mut ovo = handle("OneVsOneClassifier", params! { "estimator" => base });
    ovo.fit(&x, Some(&y)).unwrap();
    assert_eq!(ovo.fitted_state().unwrap().children().len(), 3);
    assert_eq!(ovo.score(&x, Some(&y)).unwrap(), 1.0);
}
