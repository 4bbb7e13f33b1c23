use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::estimator::{
    capability, Capabilities, DefaultScore, Estimator, EstimatorHandle, FittedState,
};
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamSchema, ParamType, ParamValue};

use super::{check_names, named};

/// Chains steps: every step but the last is a transformer whose output
/// feeds the next step. The pipeline exposes the last step's methods.
pub struct Pipeline {
    schema: ParamSchema,
}

impl Pipeline {
    pub const KIND: &'static str = "Pipeline";

    pub fn new() -> Self {
        Pipeline {
            schema: ParamSchema::new().param("steps", ParamType::Named, ParamValue::Named(vec![])),
        }
    }

    fn validate(params: &ParamMap) -> Result<&[(String, EstimatorHandle)]> {
        let steps = named(params, "steps");
        check_names(Self::KIND, steps)?;
        for (name, step) in &steps[..steps.len() - 1] {
            if !step.capabilities().transformer {
                return Err(Error::fit(
                    Self::KIND,
                    format!(
                        "intermediate step `{name}` ({}) is not a transformer",
                        step.kind()
                    ),
                ));
            }
        }
        Ok(steps)
    }

    /// Fits all steps but the last, returning them and the final representation.
    fn fit_head<'a>(
        steps: &[(String, EstimatorHandle)],
        x: &'a Features,
        y: Option<&[f64]>,
    ) -> Result<(FittedState, Cow<'a, Features>)> {
        let mut state = FittedState::new();
        let mut current = Cow::Borrowed(x);
        for (name, template) in &steps[..steps.len() - 1] {
            let mut step = template.clone_unfitted();
            let out = step
                .fit_transform(&current, y)
                .map_err(|e| e.in_step(name))?;
            state.push_child(name.clone(), step);
            current = Cow::Owned(out);
        }
        Ok((state, current))
    }

    /// Runs `x` through the fitted transformers and returns the last step.
    fn through<'a>(
        state: &'a FittedState,
        x: &Features,
    ) -> Result<(&'a EstimatorHandle, Features)> {
        let children = state.children();
        let (_, last) = children
            .last()
            .ok_or_else(|| Error::Format("pipeline state has no steps".into()))?;
        let mut current = x.clone();
        for (name, step) in &children[..children.len() - 1] {
            current = step.transform(&current).map_err(|e| e.in_step(name))?;
        }
        Ok((last, current))
    }
}

impl Default for Pipeline {
    fn default() -> Self {
        Self::new()
    }
}

fn last_name(state: &FittedState) -> &str {
    state.children().last().map_or("", |(n, _)| n.as_str())
}

impl Estimator for Pipeline {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, params: &ParamMap) -> Capabilities {
        let steps = named(params, "steps");
        match steps.last() {
            None => Capabilities::default(),
            Some((_, last)) => Capabilities {
                supervised: steps.iter().any(|(_, s)| s.capabilities().supervised),
                ..last.capabilities()
            },
        }
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let steps = Self::validate(params)?;
        let (mut state, current) = Self::fit_head(steps, x, y)?;
        let (name, template) = steps.last().expect("validated non-empty");
        let mut last = template.clone_unfitted();
        last.fit(&current, y).map_err(|e| e.in_step(name))?;
        state.push_child(name.clone(), last);
        Ok(state)
    }

    fn fit_transform(
        &self,
        params: &ParamMap,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<(FittedState, Features)> {
        let steps = Self::validate(params)?;
        let (mut state, current) = Self::fit_head(steps, x, y)?;
        let (name, template) = steps.last().expect("validated non-empty");
        let mut last = template.clone_unfitted();
        let out = last
            .fit_transform(&current, y)
            .map_err(|e| e.in_step(name))?;
        state.push_child(name.clone(), last);
        Ok((state, out))
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        let (last, z) = Self::through(state, x)?;
        last.predict(&z).map_err(|e| e.in_step(last_name(state)))
    }

    fn decision_function(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Matrix> {
        let (last, z) = Self::through(state, x)?;
        last.decision_function(&z)
            .map_err(|e| e.in_step(last_name(state)))
    }

    fn predict_proba(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Matrix> {
        let (last, z) = Self::through(state, x)?;
        last.predict_proba(&z)
            .map_err(|e| e.in_step(last_name(state)))
    }

    fn transform(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Features> {
        let (last, z) = Self::through(state, x)?;
        last.transform(&z).map_err(|e| e.in_step(last_name(state)))
    }

    fn score(
        &self,
        params: &ParamMap,
        state: &FittedState,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<f64> {
        if self.capabilities(params).score == DefaultScore::None {
            return Err(capability(Self::KIND, "score"));
        }
        let (last, z) = Self::through(state, x)?;
        last.score(&z, y).map_err(|e| e.in_step(last_name(state)))
    }
}
