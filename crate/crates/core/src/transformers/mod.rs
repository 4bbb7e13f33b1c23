//! Feature transformers: scaling, univariate selection, linear and kernel
//! PCA, and the hashing vectorizer.

pub mod hashing;
pub mod kernel_pca;
pub mod pca;
pub mod scaler;
pub mod select;

pub use hashing::HashingVectorizer;
pub use kernel_pca::KernelPca;
pub use pca::Pca;
pub use scaler::StandardScaler;
pub use select::SelectKBest;

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::matrix::{Features, Matrix};

/// Numeric dense view of `x`; sparse input is rejected with a message naming `kind`.
pub(crate) fn dense_only<'a>(kind: &str, x: &'a Features) -> Result<Cow<'a, Matrix>> {
    x.check_numeric()?;
    match x {
        Features::Dense(m) => Ok(Cow::Borrowed(m)),
        _ => Err(Error::InvalidInput(format!("{kind} requires dense input"))),
    }
}
