//! Sequential (`Pipeline`) and parallel (`FeatureUnion`) composition. Both
//! are ordinary registered kinds, so they nest and can be searched, cloned
//! and persisted like any other estimator.

mod pipeline;
mod union;

pub use pipeline::Pipeline;
pub use union::FeatureUnion;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::params::{ParamMap, ParamValue, PATH_SEPARATOR};

/// `Pipeline` over named steps.
pub fn pipeline<S: Into<String>>(steps: Vec<(S, EstimatorHandle)>) -> Result<EstimatorHandle> {
    EstimatorHandle::new(
        Pipeline::KIND,
        ParamMap::new().with("steps", ParamValue::from(steps)),
    )
}

/// `FeatureUnion` over named transformers.
pub fn feature_union<S: Into<String>>(
    members: Vec<(S, EstimatorHandle)>,
) -> Result<EstimatorHandle> {
    EstimatorHandle::new(
        FeatureUnion::KIND,
        ParamMap::new().with("transformer_list", ParamValue::from(members)),
    )
}

pub(crate) fn named<'a>(params: &'a ParamMap, key: &str) -> &'a [(String, EstimatorHandle)] {
    params
        .get(key)
        .and_then(ParamValue::as_named)
        .unwrap_or(&[])
}

fn check_names(kind: &str, members: &[(String, EstimatorHandle)]) -> Result<()> {
    if members.is_empty() {
        return Err(Error::fit(kind, "needs at least one component"));
    }
    let mut seen = HashSet::new();
    for (name, _) in members {
        if name.is_empty() || name.contains(PATH_SEPARATOR) {
            return Err(Error::fit(
                kind,
                format!("component name `{name}` must be non-empty and free of `{PATH_SEPARATOR}`"),
            ));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::fit(
                kind,
                format!("duplicate component name `{name}`"),
            ));
        }
    }
    Ok(())
}
