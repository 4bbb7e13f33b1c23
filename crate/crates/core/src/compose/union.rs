use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{Capabilities, Estimator, EstimatorHandle, FittedState};
use crate::matrix::{hstack, Features};
use crate::params::{ParamMap, ParamSchema, ParamType, ParamValue};

use super::{check_names, named};

/// Applies each member transformer to the same input and concatenates
/// their outputs column-wise, in member order.
pub struct FeatureUnion {
    schema: ParamSchema,
}

impl FeatureUnion {
    pub const KIND: &'static str = "FeatureUnion";

    pub fn new() -> Self {
        FeatureUnion {
            schema: ParamSchema::new().param(
                "transformer_list",
                ParamType::Named,
                ParamValue::Named(vec![]),
            ),
        }
    }

    fn validate(params: &ParamMap) -> Result<&[(String, EstimatorHandle)]> {
        let members = named(params, "transformer_list");
        check_names(Self::KIND, members)?;
        for (name, m) in members {
            if !m.capabilities().transformer {
                return Err(Error::fit(
                    Self::KIND,
                    format!("member `{name}` ({}) is not a transformer", m.kind()),
                ));
            }
        }
        Ok(members)
    }
}

impl Default for FeatureUnion {
    fn default() -> Self {
        Self::new()
    }
}

impl Estimator for FeatureUnion {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, params: &ParamMap) -> Capabilities {
        Capabilities {
            supervised: named(params, "transformer_list")
                .iter()
                .any(|(_, m)| m.capabilities().supervised),
            transformer: true,
            ..Default::default()
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let members = Self::validate(params)?;
        let fitted: Vec<Result<EstimatorHandle>> = members
            .par_iter()
            .map(|(name, template)| {
                let mut m = template.clone_unfitted();
                m.fit(x, y).map_err(|e| e.in_step(name))?;
                Ok(m)
            })
            .collect();
        let mut state = FittedState::new();
        for ((name, _), m) in members.iter().zip(fitted) {
            state.push_child(name.clone(), m?);
        }
        Ok(state)
    }

    fn fit_transform(
        &self,
        params: &ParamMap,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<(FittedState, Features)> {
        let members = Self::validate(params)?;
        let fitted: Vec<Result<(EstimatorHandle, Features)>> = members
            .par_iter()
            .map(|(name, template)| {
                let mut m = template.clone_unfitted();
                let out = m.fit_transform(x, y).map_err(|e| e.in_step(name))?;
                Ok((m, out))
            })
            .collect();
        let mut state = FittedState::new();
        let mut blocks = Vec::with_capacity(members.len());
        for ((name, _), r) in members.iter().zip(fitted) {
            let (m, out) = r?;
            state.push_child(name.clone(), m);
            blocks.push(out);
        }
        Ok((state, hstack(&blocks)?))
    }

    fn transform(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Features> {
        let blocks: Vec<Result<Features>> = state
            .children()
            .par_iter()
            .map(|(name, m)| m.transform(x).map_err(|e| e.in_step(name)))
            .collect();
        hstack(&blocks.into_iter().collect::<Result<Vec<_>>>()?)
    }
}
