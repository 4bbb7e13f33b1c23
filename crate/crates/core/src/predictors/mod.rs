//! Predictors: linear and kernel classifiers, k-means clustering and a
//! constant baseline regressor.

pub mod dummy;
pub mod kmeans;
pub mod logistic;
pub mod svc;

pub use dummy::DummyRegressor;
pub use kmeans::KMeans;
pub use logistic::LogisticRegression;
pub use svc::Svc;

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
