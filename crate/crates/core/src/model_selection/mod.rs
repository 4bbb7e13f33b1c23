//! Cross-validation splitters, scorers, parameter spaces and
//! cross-validated hyper-parameter search.

mod scorer;
mod search;
mod space;
mod split;

pub use scorer::{score_metric, Scorer};
pub use search::{SearchCv, SearchResult, SearchSpace};
pub use space::{Distribution, ParamDistributions, ParamGrid};
pub use split::{CvScheme, CvSplitter, Split};
