//! JSON pipeline specs: an estimator tree plus an optional search block.

use estk::params::ParamValue;
use estk::{
    CvSplitter, Distribution, Error, EstimatorHandle, ParamDistributions, ParamGrid, ParamMap,
    Registry, Result, Scorer, SearchCv, SearchSpace,
};
use serde_json::{Map, Value};

#[derive(Debug, Clone)]
pub struct PipelineSpec {
    pub estimator: EstimatorHandle,
    pub search: Option<SearchSpec>,
}

#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub space: SearchSpace,
    pub cv: CvSplitter,
    pub scoring: Scorer,
    pub refit: bool,
}

impl PipelineSpec {
    pub fn from_json(text: &str, registry: &Registry) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| invalid(format!("spec is not valid JSON: {e}")))?;
        let root = object(&root, "spec")?;
        check_keys(root, "spec", &["estimator", "search"])?;
        let estimator = estimator(
            root.get("estimator")
                .ok_or_else(|| invalid("spec needs an `estimator` object"))?,
            registry,
        )?;
        let search = root.get("search").map(search).transpose()?;
        let spec = PipelineSpec { estimator, search };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks every search candidate resolves against the estimator.
    fn validate(&self) -> Result<()> {
        if let Some(s) = &self.search {
            for candidate in s.space.candidates()? {
                self.estimator.set_params(&candidate)?;
            }
        }
        Ok(())
    }

    /// Replaces every `random_seed` in the estimator tree and search block.
    pub fn reseed(&mut self, seed: u64) -> Result<()> {
        let seed_value = ParamValue::Int(seed as i64);
        let updates: ParamMap = self
            .estimator
            .get_params(true)
            .keys()
            .filter(|k| *k == "random_seed" || k.ends_with("__random_seed"))
            .map(|k| (k.to_string(), seed_value.clone()))
            .collect();
        self.estimator = self.estimator.set_params(&updates)?;
        if let Some(s) = &mut self.search {
            s.cv.random_seed = seed;
            if let SearchSpace::Randomized { random_seed, .. } = &mut s.space {
                *random_seed = seed;
            }
        }
        Ok(())
    }

    pub fn search_cv(&self) -> Option<SearchCv> {
        self.search.as_ref().map(|s| {
            SearchCv::new(self.estimator.clone_unfitted(), s.space.clone())
                .with_cv(s.cv)
                .with_scoring(s.scoring)
                .with_refit(s.refit)
        })
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| invalid(format!("{what} must be a JSON object")))
}

fn check_keys(map: &Map<String, Value>, what: &str, allowed: &[&str]) -> Result<()> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(invalid(format!("unexpected key `{k}` in {what}"))),
        None => Ok(()),
    }
}

fn estimator(v: &Value, registry: &Registry) -> Result<EstimatorHandle> {
    let map = object(v, "estimator")?;
    check_keys(map, "estimator", &["kind", "params", "name"])?;
    let kind = map
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid("estimator needs a string `kind`"))?;
    let mut params = ParamMap::new();
    if let Some(p) = map.get("params") {
        for (name, value) in object(p, "params")? {
            params.insert(name.as_str(), param_value(value, registry)?);
        }
    }
    registry.construct(kind, params)
}

fn is_named_member(v: &Value) -> bool {
    v.as_object()
        .is_some_and(|m| m.contains_key("name") && m.contains_key("kind"))
}

fn param_value(v: &Value, registry: &Registry) -> Result<ParamValue> {
    Ok(match v {
        Value::Null => ParamValue::Null,
        Value::Bool(b) => ParamValue::Bool(*b),
        Value::Number(n) => match n.as_i64() {
            Some(i) => ParamValue::Int(i),
            None => ParamValue::Float(
                n.as_f64()
                    .ok_or_else(|| invalid(format!("number {n} out of range")))?,
            ),
        },
        Value::String(s) => ParamValue::Str(s.clone()),
        Value::Object(m) if m.contains_key("kind") => {
            ParamValue::Estimator(Box::new(estimator(v, registry)?))
        }
        Value::Object(_) => {
            return Err(invalid(
                "nested objects must describe an estimator with a `kind`",
            ))
        }
        Value::Array(items) if !items.is_empty() && items.iter().all(is_named_member) => {
            ParamValue::Named(
                items
                    .iter()
                    .map(|item| {
                        let name = item["name"]
                            .as_str()
                            .ok_or_else(|| invalid("component `name` must be a string"))?;
                        Ok((name.to_string(), estimator(item, registry)?))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        Value::Array(items) => ParamValue::List(
            items
                .iter()
                .map(|i| param_value(i, registry))
                .collect::<Result<Vec<_>>>()?,
        ),
    })
}

fn search(v: &Value) -> Result<SearchSpec> {
    let map = object(v, "search")?;
    check_keys(
        map,
        "search",
        &[
            "kind",
            "param_grid",
            "param_distributions",
            "n_iter",
            "random_seed",
            "cv",
            "scoring",
            "refit",
        ],
    )?;
    let kind = map.get("kind").and_then(Value::as_str).unwrap_or("grid");
    let space = match kind {
        "grid" => {
            let grid = map
                .get("param_grid")
                .ok_or_else(|| invalid("grid search needs `param_grid`"))?;
            let sub_grids = match grid {
                Value::Array(items) => items.iter().collect::<Vec<_>>(),
                other => vec![other],
            };
            let mut out = ParamGrid::new();
            for g in sub_grids {
                let entries = object(g, "param_grid entry")?
                    .iter()
                    .map(|(k, vs)| {
                        let vs = vs.as_array().ok_or_else(|| {
                            invalid(format!("grid values for `{k}` must be a list"))
                        })?;
                        Ok((
                            k.clone(),
                            vs.iter().map(plain_value).collect::<Result<Vec<_>>>()?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out = out.sub_grid(entries);
            }
            SearchSpace::Grid(out)
        }
        "randomized" => {
            let dists = object(
                map.get("param_distributions")
                    .ok_or_else(|| invalid("randomized search needs `param_distributions`"))?,
                "param_distributions",
            )?;
            let mut out = ParamDistributions::new();
            for (k, d) in dists {
                out = out.with(k.as_str(), distribution(k, d)?);
            }
            SearchSpace::Randomized {
                distributions: out,
                n_iter: uint(map, "n_iter", 10)? as usize,
                random_seed: uint(map, "random_seed", 0)?,
            }
        }
        other => {
            return Err(invalid(format!(
                "unknown search kind `{other}` (grid or randomized)"
            )))
        }
    };
    let cv = match map.get("cv") {
        None => CvSplitter::default(),
        Some(Value::Number(n)) => CvSplitter::kfold(
            n.as_u64()
                .ok_or_else(|| invalid("`cv` must be a positive integer"))? as usize,
        ),
        Some(v) => splitter(object(v, "cv")?)?,
    };
    let scoring = match map.get("scoring") {
        None => Scorer::EstimatorDefault,
        Some(v) => v
            .as_str()
            .ok_or_else(|| invalid("`scoring` must be a string"))?
            .parse()?,
    };
    let refit = match map.get("refit") {
        None => true,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| invalid("`refit` must be a boolean"))?,
    };
    Ok(SearchSpec {
        space,
        cv,
        scoring,
        refit,
    })
}

fn uint(map: &Map<String, Value>, key: &str, default: u64) -> Result<u64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .ok_or_else(|| invalid(format!("`{key}` must be a non-negative integer"))),
    }
}

fn splitter(map: &Map<String, Value>) -> Result<CvSplitter> {
    check_keys(map, "cv", &["kind", "k", "shuffle", "random_seed"])?;
    let k = uint(map, "k", 5)? as usize;
    let mut cv = match map.get("kind").and_then(Value::as_str).unwrap_or("kfold") {
        "kfold" => CvSplitter::kfold(k),
        "stratified_kfold" => CvSplitter::stratified(k),
        "leave_one_out" => CvSplitter::leave_one_out(),
        other => return Err(invalid(format!("unknown cv kind `{other}`"))),
    };
    cv.shuffle = match map.get("shuffle") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| invalid("`shuffle` must be a boolean"))?,
    };
    cv.random_seed = uint(map, "random_seed", 0)?;
    Ok(cv)
}

/// Search values are scalars or lists, never estimators.
fn plain_value(v: &Value) -> Result<ParamValue> {
    match v {
        Value::Object(_) => Err(invalid("search values cannot be estimators")),
        other => param_value(other, Registry::global()),
    }
}

fn distribution(key: &str, v: &Value) -> Result<Distribution> {
    let map = object(v, "distribution")?;
    let (name, args) = match map.iter().next() {
        Some(entry) if map.len() == 1 => entry,
        _ => {
            return Err(invalid(format!(
                "distribution for `{key}` must have exactly one key"
            )))
        }
    };
    let pair = |args: &Value| -> Result<(f64, f64)> {
        match args.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok((
                a.as_f64()
                    .ok_or_else(|| invalid("bounds must be numbers"))?,
                b.as_f64()
                    .ok_or_else(|| invalid("bounds must be numbers"))?,
            )),
            _ => Err(invalid(format!("`{name}` for `{key}` needs [a, b]"))),
        }
    };
    Ok(match name.as_str() {
        "choice" => Distribution::Choice(
            args.as_array()
                .ok_or_else(|| invalid("`choice` needs a list"))?
                .iter()
                .map(plain_value)
                .collect::<Result<Vec<_>>>()?,
        ),
        "uniform" => {
            let (a, b) = pair(args)?;
            Distribution::Uniform(a, b)
        }
        "log_uniform" => {
            let (a, b) = pair(args)?;
            Distribution::LogUniform(a, b)
        }
        "integer_uniform" => match args.as_array().map(Vec::as_slice) {
            Some([a, b]) => Distribution::IntegerUniform(
                a.as_i64()
                    .ok_or_else(|| invalid("integer bounds must be integers"))?,
                b.as_i64()
                    .ok_or_else(|| invalid("integer bounds must be integers"))?,
            ),
            _ => {
                return Err(invalid(format!(
                    "`integer_uniform` for `{key}` needs [a, b]"
                )))
            }
        },
        other => {
            return Err(invalid(format!(
                "unknown distribution `{other}` for `{key}`"
            )))
        }
    })
}
