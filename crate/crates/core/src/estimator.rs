//! The estimator contract: a registered kind supplies behaviour, an
//! [`EstimatorHandle`] carries hyper-parameters and, after `fit`, the learned
//! state.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{Features, Matrix};
use crate::metrics;
use crate::params::{ParamMap, ParamValue, PATH_SEPARATOR};
use crate::registry::Registry;

/// What `score` means for a kind when no explicit scorer is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DefaultScore {
    #[default]
    None,
    /// Mean accuracy of `predict`.
    Accuracy,
    /// Coefficient of determination of `predict`.
    R2,
    /// The kind implements [`Estimator::score`] itself.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capabilities {
    pub supervised: bool,
    pub predictor: bool,
    pub transformer: bool,
    pub probabilistic: bool,
    pub decision_function: bool,
    pub score: DefaultScore,
}

/// A learned numeric attribute: flat `f64` data with an explicit shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Array {
    pub fn scalar(v: f64) -> Self {
        Array {
            shape: vec![],
            data: vec![v],
        }
    }

    pub fn vector(v: Vec<f64>) -> Self {
        Array {
            shape: vec![v.len()],
            data: v,
        }
    }

    pub fn matrix(m: &Matrix) -> Self {
        Array {
            shape: vec![m.n_rows(), m.n_cols()],
            data: m.as_slice().to_vec(),
        }
    }
}

/// Learned attributes of a fitted estimator, plus fitted sub-estimators for
/// composites. Attribute names end with `_`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FittedState {
    arrays: Vec<(String, Array)>,
    children: Vec<(String, EstimatorHandle)>,
}

impl FittedState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, array: Array) {
        let name = name.into();
        match self.arrays.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = array,
            None => self.arrays.push((name, array)),
        }
    }

    pub fn with(mut self, name: impl Into<String>, array: Array) -> Self {
        self.insert(name, array);
        self
    }

    pub fn push_child(&mut self, name: impl Into<String>, child: EstimatorHandle) {
        self.children.push((name.into(), child));
    }

    pub fn arrays(&self) -> &[(String, Array)] {
        &self.arrays
    }

    pub fn children(&self) -> &[(String, EstimatorHandle)] {
        &self.children
    }

    pub fn array(&self, name: &str) -> Result<&Array> {
        self.arrays
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| Error::Format(format!("fitted state has no attribute `{name}`")))
    }

    pub fn vector(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.array(name)?.data)
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        let a = self.array(name)?;
        a.data
            .first()
            .copied()
            .ok_or_else(|| Error::Format(format!("attribute `{name}` is empty")))
    }

    pub fn matrix(&self, name: &str) -> Result<Matrix> {
        let a = self.array(name)?;
        match a.shape[..] {
            [r, c] => Matrix::new(r, c, a.data.clone()),
            _ => Err(Error::Format(format!("attribute `{name}` is not 2-D"))),
        }
    }

    pub fn child(&self, name: &str) -> Result<&EstimatorHandle> {
        self.children
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::Format(format!("fitted state has no component `{name}`")))
    }
}

pub(crate) fn capability(kind: &str, method: &'static str) -> Error {
    Error::Capability {
        kind: kind.to_string(),
        method,
    }
}

/// Behaviour of one estimator kind. Implementations are stateless: all
/// configuration arrives through `params`, all learned values through `state`.
///
/// Every method except `kind`, `schema`, `capabilities` and `fit` has a
/// default that reports a capability error, so a kind implements only what
/// it supports and advertises it through [`Capabilities`].
pub trait Estimator: Send + Sync {
    fn kind(&self) -> &str;

    fn schema(&self) -> &crate::params::ParamSchema;

    fn capabilities(&self, params: &ParamMap) -> Capabilities;

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState>;

    fn fit_transform(
        &self,
        params: &ParamMap,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<(FittedState, Features)> {
        let state = self.fit(params, x, y)?;
        let out = self.transform(params, &state, x)?;
        Ok((state, out))
    }

    fn predict(&self, _params: &ParamMap, _state: &FittedState, _x: &Features) -> Result<Vec<f64>> {
        Err(capability(self.kind(), "predict"))
    }

    fn decision_function(
        &self,
        _params: &ParamMap,
        _state: &FittedState,
        _x: &Features,
    ) -> Result<Matrix> {
        Err(capability(self.kind(), "decision_function"))
    }

    fn predict_proba(
        &self,
        _params: &ParamMap,
        _state: &FittedState,
        _x: &Features,
    ) -> Result<Matrix> {
        Err(capability(self.kind(), "predict_proba"))
    }

    fn transform(
        &self,
        _params: &ParamMap,
        _state: &FittedState,
        _x: &Features,
    ) -> Result<Features> {
        Err(capability(self.kind(), "transform"))
    }

    /// Greater is better. The default follows [`Capabilities::score`].
    fn score(
        &self,
        params: &ParamMap,
        state: &FittedState,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<f64> {
        let needs_y = || y.ok_or_else(|| Error::InvalidInput("score needs targets".into()));
        match self.capabilities(params).score {
            DefaultScore::Accuracy => {
                metrics::accuracy(needs_y()?, &self.predict(params, state, x)?)
            }
            DefaultScore::R2 => metrics::r2(needs_y()?, &self.predict(params, state, x)?),
            DefaultScore::None | DefaultScore::Custom => Err(capability(self.kind(), "score")),
        }
    }
}

/// An estimator instance: a registered kind, its hyper-parameters, and the
/// fitted state once `fit` has succeeded.
///
/// `Clone` copies everything including fitted state; use
/// [`EstimatorHandle::clone_unfitted`] for a fresh estimator with equal
/// parameters. Equality compares kind and parameters only.
#[derive(Clone)]
pub struct EstimatorHandle {
    imp: Arc<dyn Estimator>,
    params: ParamMap,
    fitted: Option<FittedState>,
}

impl fmt::Debug for EstimatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorHandle")
            .field("kind", &self.kind())
            .field("params", &self.params)
            .field("fitted", &self.fitted.is_some())
            .finish()
    }
}

impl fmt::Display for EstimatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind())?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

impl PartialEq for EstimatorHandle {
    fn eq(&self, other: &Self) -> bool {
        self.kind() == other.kind() && self.params == other.params
    }
}

impl EstimatorHandle {
    /// Constructs a kind from the global registry, e.g.
    /// `EstimatorHandle::new("KMeans", params! { "n_clusters" => 10 })`.
    pub fn new(kind: &str, overrides: ParamMap) -> Result<Self> {
        Registry::global().construct(kind, overrides)
    }

    /// Defaults of `imp` overridden by type-checked `overrides`. Touches no data.
    pub fn from_impl(imp: Arc<dyn Estimator>, overrides: ParamMap) -> Result<Self> {
        let schema = imp.schema();
        let mut params = schema.defaults();
        for (name, value) in overrides.iter() {
            let v = schema.check(imp.kind(), name, value)?;
            params.insert(name, v);
        }
        Ok(EstimatorHandle {
            imp,
            params,
            fitted: None,
        })
    }

    pub fn kind(&self) -> &str {
        self.imp.kind()
    }

    pub fn implementation(&self) -> &Arc<dyn Estimator> {
        &self.imp
    }

    pub fn params(&self) -> &ParamMap {
        &self.params
    }

    pub fn capabilities(&self) -> Capabilities {
        self.imp.capabilities(&self.params)
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    pub fn fitted(&self) -> Option<&FittedState> {
        self.fitted.as_ref()
    }

    pub fn fitted_state(&self) -> Result<&FittedState> {
        self.fitted.as_ref().ok_or_else(|| Error::NotFitted {
            kind: self.kind().to_string(),
        })
    }

    /// Installs previously learned state (used when loading archives).
    pub(crate) fn with_state(mut self, state: FittedState) -> Self {
        self.fitted = Some(state);
        self
    }

    /// Fresh unfitted estimator with deep-copied parameters.
    pub fn clone_unfitted(&self) -> Self {
        EstimatorHandle {
            imp: Arc::clone(&self.imp),
            params: self
                .params
                .iter()
                .map(|(k, v)| (k.to_string(), v.unfitted()))
                .collect(),
            fitted: None,
        }
    }

    /// Own parameters; with `deep`, nested estimators' parameters too, under
    /// `component__param` keys.
    pub fn get_params(&self, deep: bool) -> ParamMap {
        let mut out = ParamMap::new();
        for (name, value) in self.params.iter() {
            out.insert(name, value.clone());
            if !deep {
                continue;
            }
            match value {
                ParamValue::Estimator(inner) => {
                    for (k, v) in inner.get_params(true).iter() {
                        out.insert(format!("{name}{PATH_SEPARATOR}{k}"), v.clone());
                    }
                }
                ParamValue::Named(members) => {
                    for (member, inner) in members {
                        out.insert(
                            member.clone(),
                            ParamValue::Estimator(Box::new(inner.clone())),
                        );
                        for (k, v) in inner.get_params(true).iter() {
                            out.insert(format!("{member}{PATH_SEPARATOR}{k}"), v.clone());
                        }
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Returns an unfitted copy with `updates` applied in order. Keys may
    /// address nested estimators (`feat_union__kpca__gamma`).
    pub fn set_params(&self, updates: &ParamMap) -> Result<Self> {
        let mut out = self.clone_unfitted();
        for (key, value) in updates.iter() {
            out.set_one(key, value)?;
        }
        Ok(out)
    }

    fn set_one(&mut self, key: &str, value: &ParamValue) -> Result<()> {
        let kind = self.kind().to_string();
        let (head, rest) = match key.split_once(PATH_SEPARATOR) {
            Some((h, r)) => (h, Some(r)),
            None => (key, None),
        };
        if self.imp.schema().get(head).is_some() {
            match rest {
                None => {
                    let v = self.imp.schema().check(&kind, head, value)?;
                    self.params.insert(head, v);
                    return Ok(());
                }
                Some(rest) => {
                    if let Some(ParamValue::Estimator(inner)) = self.params.get_mut(head) {
                        **inner = inner.set_params(&ParamMap::new().with(rest, value.clone()))?;
                        return Ok(());
                    }
                    return Err(Error::ParamPath {
                        kind,
                        segment: head.to_string(),
                    });
                }
            }
        }
        // Member of a named estimator list.
        for (_, pv) in self.params.entries_mut().iter_mut() {
            if let ParamValue::Named(members) = pv {
                if let Some((_, inner)) = members.iter_mut().find(|(n, _)| n == head) {
                    match rest {
                        None => match value {
                            ParamValue::Estimator(e) => *inner = e.clone_unfitted(),
                            other => {
                                return Err(Error::ParamType {
                                    kind,
                                    param: head.to_string(),
                                    expected: "estimator".into(),
                                    got: other.type_name().into(),
                                })
                            }
                        },
                        Some(rest) => {
                            *inner = inner.set_params(&ParamMap::new().with(rest, value.clone()))?
                        }
                    }
                    return Ok(());
                }
            }
        }
        if rest.is_none() {
            Err(Error::UnknownParam {
                kind,
                param: head.to_string(),
            })
        } else {
            Err(Error::ParamPath {
                kind,
                segment: head.to_string(),
            })
        }
    }

    /// Learns from `x` (and `y` for supervised kinds), replacing any previous
    /// state, and returns `self` for chaining.
    pub fn fit(&mut self, x: &Features, y: Option<&[f64]>) -> Result<&mut Self> {
        self.fitted = None;
        self.check_fit_input(x, y)?;
        let mut state = self.imp.fit(&self.params, x, y)?;
        record_width(&mut state, x);
        self.fitted = Some(state);
        Ok(self)
    }

    /// Equivalent to `fit` followed by `transform` on the same input.
    pub fn fit_transform(&mut self, x: &Features, y: Option<&[f64]>) -> Result<Features> {
        self.fitted = None;
        if !self.capabilities().transformer {
            return Err(capability(self.kind(), "transform"));
        }
        self.check_fit_input(x, y)?;
        let (mut state, out) = self.imp.fit_transform(&self.params, x, y)?;
        record_width(&mut state, x);
        self.fitted = Some(state);
        Ok(out)
    }

    /// `fit` then `predict` on the training input.
    pub fn fit_predict(&mut self, x: &Features, y: Option<&[f64]>) -> Result<Vec<f64>> {
        if !self.capabilities().predictor {
            return Err(capability(self.kind(), "predict"));
        }
        self.fit(x, y)?;
        self.predict(x)
    }

    pub fn predict(&self, x: &Features) -> Result<Vec<f64>> {
        let state = self.ready(self.capabilities().predictor, "predict", x)?;
        self.imp.predict(&self.params, state, x)
    }

    pub fn decision_function(&self, x: &Features) -> Result<Matrix> {
        let state = self.ready(
            self.capabilities().decision_function,
            "decision_function",
            x,
        )?;
        self.imp.decision_function(&self.params, state, x)
    }

    pub fn predict_proba(&self, x: &Features) -> Result<Matrix> {
        let state = self.ready(self.capabilities().probabilistic, "predict_proba", x)?;
        self.imp.predict_proba(&self.params, state, x)
    }

    pub fn transform(&self, x: &Features) -> Result<Features> {
        let state = self.ready(self.capabilities().transformer, "transform", x)?;
        self.imp.transform(&self.params, state, x)
    }

    /// Default score of the kind: accuracy for classifiers, R² for
    /// regressors, negated inertia for k-means.
    pub fn score(&self, x: &Features, y: Option<&[f64]>) -> Result<f64> {
        let caps = self.capabilities();
        let state = self.ready(caps.score != DefaultScore::None, "score", x)?;
        if let Some(y) = y {
            if y.len() != x.n_rows() {
                return Err(Error::Shape(format!(
                    "X has {} rows but y has {} entries",
                    x.n_rows(),
                    y.len()
                )));
            }
        }
        self.imp.score(&self.params, state, x, y)
    }

    fn ready(&self, capable: bool, method: &'static str, x: &Features) -> Result<&FittedState> {
        if !capable {
            return Err(capability(self.kind(), method));
        }
        let state = self.fitted_state()?;
        if let Ok(width) = state.scalar(N_FEATURES_ATTR) {
            if !matches!(x, Features::Documents(_)) && x.n_cols() != width as usize {
                return Err(Error::Shape(format!(
                    "{} was fitted with {} features but got {}",
                    self.kind(),
                    width,
                    x.n_cols()
                )));
            }
        }
        Ok(state)
    }

    fn check_fit_input(&self, x: &Features, y: Option<&[f64]>) -> Result<()> {
        if x.n_rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "{}: empty training set",
                self.kind()
            )));
        }
        match y {
            None if self.capabilities().supervised => Err(Error::InvalidInput(format!(
                "{} is supervised and needs targets",
                self.kind()
            ))),
            Some(y) if y.len() != x.n_rows() => Err(Error::Shape(format!(
                "X has {} rows but y has {} entries",
                x.n_rows(),
                y.len()
            ))),
            Some(y) if y.iter().any(|v| !v.is_finite()) => Err(Error::InvalidInput(
                "targets contain NaN or infinity".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Width of the training input, recorded on every numeric fit.
pub const N_FEATURES_ATTR: &str = "n_features_in_";

fn record_width(state: &mut FittedState, x: &Features) {
    if !matches!(x, Features::Documents(_)) {
        state.insert(N_FEATURES_ATTR, Array::scalar(x.n_cols() as f64));
    }
}

/// Fresh unfitted estimator with equal parameters.
pub fn clone(e: &EstimatorHandle) -> EstimatorHandle {
    e.clone_unfitted()
}
