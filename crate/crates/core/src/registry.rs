//! Kind-name → implementation lookup. Built-in and third-party estimators
//! register the same way and are interchangeable everywhere.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::estimator::{Capabilities, Estimator, EstimatorHandle, FittedState};
use crate::matrix::{Features, Matrix};
use crate::params::{ParamMap, ParamSchema};

/// Shared log of calls made through an audited registry.
pub type AuditLog = Arc<Mutex<Vec<String>>>;

pub struct Registry {
    kinds: RwLock<BTreeMap<String, Arc<dyn Estimator>>>,
    audit: Option<AuditLog>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            kinds: RwLock::new(BTreeMap::new()),
            audit: None,
        }
    }

    /// A registry holding every built-in kind.
    pub fn with_builtins() -> Self {
        let r = Registry::empty();
        for imp in crate::builtin_kinds() {
            r.register(imp).expect("built-in kind names are unique");
        }
        r
    }

    /// Process-wide registry used by [`EstimatorHandle::new`].
    pub fn global() -> &'static Registry {
        static GLOBAL: OnceLock<Registry> = OnceLock::new();
        GLOBAL.get_or_init(Registry::with_builtins)
    }

    /// Adds a kind. Names must be unique within a registry.
    pub fn register(&self, imp: Arc<dyn Estimator>) -> Result<()> {
        let mut kinds = self.kinds.write().expect("registry lock poisoned");
        let name = imp.kind().to_string();
        if kinds.contains_key(&name) {
            return Err(Error::InvalidInput(format!(
                "kind `{name}` is already registered"
            )));
        }
        let imp = match &self.audit {
            Some(log) => Arc::new(Audited {
                inner: imp,
                log: Arc::clone(log),
            }) as Arc<dyn Estimator>,
            None => imp,
        };
        kinds.insert(name, imp);
        Ok(())
    }

    pub fn get(&self, kind: &str) -> Result<Arc<dyn Estimator>> {
        self.kinds
            .read()
            .expect("registry lock poisoned")
            .get(kind)
            .cloned()
            .ok_or_else(|| Error::UnknownKind(kind.to_string()))
    }

    pub fn contains(&self, kind: &str) -> bool {
        self.kinds
            .read()
            .expect("registry lock poisoned")
            .contains_key(kind)
    }

    pub fn kinds(&self) -> Vec<String> {
        self.kinds
            .read()
            .expect("registry lock poisoned")
            .keys()
            .cloned()
            .collect()
    }

    /// Defaults of `kind` overridden by `overrides`; no data is touched.
    pub fn construct(&self, kind: &str, overrides: ParamMap) -> Result<EstimatorHandle> {
        let imp = self.get(kind)?;
        if let Some(log) = &self.audit {
            log.lock()
                .expect("audit lock poisoned")
                .push(format!("construct {kind}"));
        }
        EstimatorHandle::from_impl(imp, overrides)
    }

    /// A copy of this registry whose kinds record every behavioural call
    /// (construct, fit, predict, transform, ...) in the returned log.
    pub fn audited(&self) -> (Registry, AuditLog) {
        let log: AuditLog = Arc::new(Mutex::new(Vec::new()));
        let r = Registry {
            kinds: RwLock::new(BTreeMap::new()),
            audit: Some(Arc::clone(&log)),
        };
        for imp in self.kinds.read().expect("registry lock poisoned").values() {
            r.register(Arc::clone(imp)).expect("names are unique");
        }
        (r, log)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::with_builtins()
    }
}

struct Audited {
    inner: Arc<dyn Estimator>,
    log: AuditLog,
}

impl Audited {
    fn note(&self, call: &str) {
        self.log
            .lock()
            .expect("audit lock poisoned")
            .push(format!("{call} {}", self.inner.kind()));
    }
}

impl Estimator for Audited {
    fn kind(&self) -> &str {
        self.inner.kind()
    }

    fn schema(&self) -> &ParamSchema {
        self.inner.schema()
    }

    fn capabilities(&self, params: &ParamMap) -> Capabilities {
        self.inner.capabilities(params)
    }

    fn fit(&self, params: &ParamMap, x: &Features, y: Option<&[f64]>) -> Result<FittedState> {
        self.note("fit");
        self.inner.fit(params, x, y)
    }

    fn fit_transform(
        &self,
        params: &ParamMap,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<(FittedState, Features)> {
        self.note("fit_transform");
        self.inner.fit_transform(params, x, y)
    }

    fn predict(&self, params: &ParamMap, state: &FittedState, x: &Features) -> Result<Vec<f64>> {
        self.note("predict");
        self.inner.predict(params, state, x)
    }

    fn decision_function(
        &self,
        params: &ParamMap,
        state: &FittedState,
        x: &Features,
    ) -> Result<Matrix> {
        self.note("decision_function");
        self.inner.decision_function(params, state, x)
    }

    fn predict_proba(
        &self,
        params: &ParamMap,
        state: &FittedState,
        x: &Features,
    ) -> Result<Matrix> {
        self.note("predict_proba");
        self.inner.predict_proba(params, state, x)
    }

    fn transform(&self, params: &ParamMap, state: &FittedState, x: &Features) -> Result<Features> {
        self.note("transform");
        self.inner.transform(params, state, x)
    }

    fn score(
        &self,
        params: &ParamMap,
        state: &FittedState,
        x: &Features,
        y: Option<&[f64]>,
    ) -> Result<f64> {
        self.note("score");
        self.inner.score(params, state, x, y)
    }
}
