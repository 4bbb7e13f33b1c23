use crate::error::{Error, Result};
use crate::estimator::{Array, Capabilities, DefaultScore, Estimator, FittedState};
use crate::matrix::Features;
use crate::params::{ParamMap, ParamSchema};

/// Regressor that always predicts the training-target mean.
pub struct DummyRegressor {
    schema: ParamSchema,
}

impl DummyRegressor {
    pub const KIND: &'static str = "DummyRegressor";

    pub fn new() -> Self {
        DummyRegressor {
            schema: ParamSchema::new(),
        }
    }
}

impl Default for DummyRegressor {
    fn default() -> Self {
        Self::new()
    }
}

impl Estimator for DummyRegressor {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            supervised: true,
            predictor: true,
            score: DefaultScore::R2,
            ..Default::default()
        }
    }

    fn fit(&self, _: &ParamMap, _: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        let y = y.ok_or_else(|| Error::fit(Self::KIND, "needs targets"))?;
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        Ok(FittedState::new().with("constant_", Array::scalar(mean)))
    }

    fn predict(&self, _: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        Ok(vec![state.scalar("constant_")?; x.n_rows()])
    }
}
