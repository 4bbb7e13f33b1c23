//! A composable machine-learning toolkit: estimators, transformers and
//! predictors behind one registry-driven contract, pipelines and feature
//! unions, multiclass meta-estimators, cross-validated search, and a
//! versioned archive format.
//!
//! ```
//! use estk::{params, EstimatorHandle, Features, Matrix};
//!
//! let x = Features::from(Matrix::from_rows(&[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]).unwrap());
//! let y = [0.0, 0.0, 1.0, 1.0];
//! let mut clf = EstimatorHandle::new("LogisticRegression", params! { "C" => 1.0 }).unwrap();
//! clf.fit(&x, Some(&y)).unwrap();
//! assert_eq!(clf.predict(&x).unwrap(), y);
//! ```

use std::sync::Arc;

pub mod compose;
pub mod error;
pub mod estimator;
pub mod labels;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod model_selection;
pub mod multiclass;
pub mod params;
pub mod persistence;
pub mod predictors;
pub mod registry;
pub mod transformers;

pub use error::{Error, Result};
pub use estimator::{
    clone, Array, Capabilities, DefaultScore, Estimator, EstimatorHandle, FittedState,
    N_FEATURES_ATTR,
};
pub use matrix::{
    decode_label, hstack, load_csv, load_svmlight, Dataset, Features, Matrix, SparseMatrix,
    TargetColumn,
};
pub use model_selection::{
    CvScheme, CvSplitter, Distribution, ParamDistributions, ParamGrid, Scorer, SearchCv,
    SearchResult, SearchSpace, Split,
};
pub use params::{ParamMap, ParamSchema, ParamType, ParamValue};
pub use registry::{AuditLog, Registry};

/// Every kind shipped with the library.
pub(crate) fn builtin_kinds() -> Vec<Arc<dyn Estimator>> {
    vec![
        Arc::new(transformers::StandardScaler::new()),
        Arc::new(transformers::SelectKBest::new()),
        Arc::new(transformers::Pca::new()),
        Arc::new(transformers::KernelPca::new()),
        Arc::new(transformers::HashingVectorizer::new()),
        Arc::new(predictors::LogisticRegression::new()),
        Arc::new(predictors::Svc::new()),
        Arc::new(predictors::KMeans::new()),
        Arc::new(predictors::DummyRegressor::new()),
        Arc::new(compose::Pipeline::new()),
        Arc::new(compose::FeatureUnion::new()),
        Arc::new(multiclass::OneVsRestClassifier::new()),
        Arc::new(multiclass::OneVsOneClassifier::new()),
    ]
}
