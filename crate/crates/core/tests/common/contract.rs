//! The estimator contract as reusable property bodies, each checked over
//! every registered kind for one generated `(seed, n, p)` case.

use estk::{clone, Error, EstimatorHandle, Registry};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use super::{absurd, absurd_fails, case, feature_bits, state_bits, vec_bits, Case};

pub type Property = fn(u64, usize, usize) -> Result<(), TestCaseError>;

fn kinds() -> Vec<String> {
    Registry::global().kinds()
}

/// Sample sizes and widths the properties are drawn from.
pub fn inputs() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 9usize..20, 2usize..5)
}

/// Runs `property` on `cases` generated inputs.
pub fn check(property: Property, cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&inputs(), |(seed, n, p)| property(seed, n, p))
        .map_err(|e| e.to_string())
}

pub const ALL: [(&str, Property); 5] = [
    ("fit_returns_its_receiver", fit_returns_its_receiver),
    (
        "fit_transform_equals_fit_then_transform",
        fit_transform_equals_fit_then_transform,
    ),
    (
        "fit_predict_equals_fit_then_predict",
        fit_predict_equals_fit_then_predict,
    ),
    (
        "clones_are_unfitted_and_refit_identically",
        clones_are_unfitted_and_refit_identically,
    ),
    ("construction_touches_no_data", construction_touches_no_data),
];

pub fn fit_returns_its_receiver(seed: u64, n: usize, p: usize) -> Result<(), TestCaseError> {
    for kind in kinds() {
        let Case {
            mut estimator,
            x,
            y,
        } = case(&kind, seed, n, p);
        let addr: *const EstimatorHandle = &estimator;
        let returned = estimator.fit(&x, y.as_deref()).unwrap();
        prop_assert!(std::ptr::eq(returned, addr), "{kind}");
        prop_assert!(returned.is_fitted());
    }
    Ok(())
}

pub fn fit_transform_equals_fit_then_transform(
    seed: u64,
    n: usize,
    p: usize,
) -> Result<(), TestCaseError> {
    for kind in kinds() {
        let Case {
            mut estimator,
            x,
            y,
        } = case(&kind, seed, n, p);
        if !estimator.capabilities().transformer {
            continue;
        }
        let mut other = clone(&estimator);
        let once = estimator.fit_transform(&x, y.as_deref()).unwrap();
        other.fit(&x, y.as_deref()).unwrap();
        let twice = other.transform(&x).unwrap();
        prop_assert_eq!(feature_bits(&once), feature_bits(&twice), "{}", kind);
    }
    Ok(())
}

pub fn fit_predict_equals_fit_then_predict(
    seed: u64,
    n: usize,
    p: usize,
) -> Result<(), TestCaseError> {
    for kind in kinds() {
        let Case {
            mut estimator,
            x,
            y,
        } = case(&kind, seed, n, p);
        if !estimator.capabilities().predictor {
            continue;
        }
        let mut other = clone(&estimator);
        let once = estimator.fit_predict(&x, y.as_deref()).unwrap();
        other.fit(&x, y.as_deref()).unwrap();
        prop_assert_eq!(
            vec_bits(&once),
            vec_bits(&other.predict(&x).unwrap()),
            "{}",
            kind
        );
    }
    Ok(())
}

pub fn clones_are_unfitted_and_refit_identically(
    seed: u64,
    n: usize,
    p: usize,
) -> Result<(), TestCaseError> {
    for kind in kinds() {
        let Case {
            mut estimator,
            x,
            y,
        } = case(&kind, seed, n, p);
        estimator.fit(&x, y.as_deref()).unwrap();
        let mut copy = clone(&estimator);
        prop_assert!(!copy.is_fitted(), "{kind}");
        prop_assert_eq!(copy.get_params(true), estimator.get_params(true));
        copy.fit(&x, y.as_deref()).unwrap();
        let a = state_bits(estimator.fitted_state().unwrap());
        prop_assert_eq!(&a, &state_bits(copy.fitted_state().unwrap()), "{}", kind);
        for (name, _, _) in &a {
            prop_assert!(name.ends_with('_'), "{kind}: attribute {name}");
        }
    }
    Ok(())
}

pub fn construction_touches_no_data(seed: u64, n: usize, p: usize) -> Result<(), TestCaseError> {
    for kind in kinds() {
        let overrides = absurd(&kind);
        let mut estimator = EstimatorHandle::new(&kind, overrides.clone()).unwrap();
        prop_assert!(!estimator.is_fitted());
        let own = estimator.get_params(false);
        for (k, v) in overrides.iter() {
            prop_assert_eq!(own.get(k), Some(v), "{}", kind);
        }
        let Case { x, y, .. } = case(&kind, seed, n, p);
        let caps = estimator.capabilities();
        if caps.predictor || caps.transformer {
            let method_err = if caps.predictor {
                estimator.predict(&x).unwrap_err()
            } else {
                estimator.transform(&x).unwrap_err()
            };
            prop_assert!(
                matches!(method_err, Error::NotFitted { .. }),
                "{kind}: {method_err}"
            );
        }
        if absurd_fails(&kind) {
            prop_assert!(estimator.fit(&x, y.as_deref()).is_err(), "{kind}");
            prop_assert!(!estimator.is_fitted());
        }
    }
    Ok(())
}
