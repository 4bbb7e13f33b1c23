//! Hyper-parameter values, ordered parameter maps and per-kind schemas.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;

/// Separator for addressing parameters of nested estimators, e.g. `log_reg__C`.
pub const PATH_SEPARATOR: &str = "__";

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Null,
    Float(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    List(Vec<ParamValue>),
    /// A nested estimator, e.g. the base of a meta-estimator.
    Estimator(Box<EstimatorHandle>),
    /// Named estimators, e.g. pipeline steps or union members.
    Named(Vec<(String, EstimatorHandle)>),
}

impl ParamValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            ParamValue::Null => "null",
            ParamValue::Float(_) => "float",
            ParamValue::Int(_) => "integer",
            ParamValue::Str(_) => "string",
            ParamValue::Bool(_) => "boolean",
            ParamValue::List(_) => "list",
            ParamValue::Estimator(_) => "estimator",
            ParamValue::Named(_) => "named estimator list",
        }
    }

    /// Numeric value; integers are widened.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            ParamValue::Float(v) => Some(v),
            ParamValue::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            ParamValue::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            ParamValue::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_estimator(&self) -> Option<&EstimatorHandle> {
        match self {
            ParamValue::Estimator(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_named(&self) -> Option<&[(String, EstimatorHandle)]> {
        match self {
            ParamValue::Named(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, ParamValue::Null)
    }

    /// Same value with every nested estimator reset to its unfitted form.
    pub(crate) fn unfitted(&self) -> ParamValue {
        match self {
            ParamValue::Estimator(e) => ParamValue::Estimator(Box::new(e.clone_unfitted())),
            ParamValue::Named(v) => ParamValue::Named(
                v.iter()
                    .map(|(n, e)| (n.clone(), e.clone_unfitted()))
                    .collect(),
            ),
            ParamValue::List(v) => ParamValue::List(v.iter().map(ParamValue::unfitted).collect()),
            other => other.clone(),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Null => f.write_str("null"),
            ParamValue::Float(v) => write!(f, "{v:?}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Str(s) => f.write_str(s),
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::List(v) => {
                f.write_str("[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            ParamValue::Estimator(e) => write!(f, "{e}"),
            ParamValue::Named(v) => {
                f.write_str("[")?;
                for (i, (n, e)) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({n}, {e})")?;
                }
                f.write_str("]")
            }
        }
    }
}

macro_rules! from_impl {
    ($t:ty, $var:ident, $conv:expr) => {
        impl From<$t> for ParamValue {
            fn from(v: $t) -> Self {
                ParamValue::$var($conv(v))
            }
        }
    };
}

from_impl!(f64, Float, |v| v);
from_impl!(i64, Int, |v| v);
from_impl!(i32, Int, i64::from);
from_impl!(usize, Int, |v: usize| v as i64);
from_impl!(bool, Bool, |v| v);
from_impl!(String, Str, |v| v);
from_impl!(&str, Str, |v: &str| v.to_string());
from_impl!(Vec<ParamValue>, List, |v| v);

impl From<EstimatorHandle> for ParamValue {
    fn from(e: EstimatorHandle) -> Self {
        ParamValue::Estimator(Box::new(e))
    }
}

impl<S: Into<String>> From<Vec<(S, EstimatorHandle)>> for ParamValue {
    fn from(v: Vec<(S, EstimatorHandle)>) -> Self {
        ParamValue::Named(v.into_iter().map(|(n, e)| (n.into(), e)).collect())
    }
}

/// Insertion-ordered map from parameter name to value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamMap {
    entries: Vec<(String, ParamValue)>,
}

impl ParamMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.entries.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Replaces an existing entry in place or appends a new one.
    pub fn insert(&mut self, name: impl Into<String>, value: impl Into<ParamValue>) {
        let name = name.into();
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| *k == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name, value)),
        }
    }

    pub fn with(mut self, name: impl Into<String>, value: impl Into<ParamValue>) -> Self {
        self.insert(name, value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub(crate) fn entries_mut(&mut self) -> &mut Vec<(String, ParamValue)> {
        &mut self.entries
    }

    pub(crate) fn get_mut(&mut self, name: &str) -> Option<&mut ParamValue> {
        self.entries
            .iter_mut()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v)
    }
}

impl<K: Into<String>, V: Into<ParamValue>> FromIterator<(K, V)> for ParamMap {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut m = ParamMap::new();
        for (k, v) in iter {
            m.insert(k, v);
        }
        m
    }
}

impl<'a> IntoIterator for &'a ParamMap {
    type Item = (&'a str, &'a ParamValue);
    type IntoIter = Box<dyn Iterator<Item = (&'a str, &'a ParamValue)> + 'a>;

    fn into_iter(self) -> Self::IntoIter {
        Box::new(self.iter())
    }
}

/// Builds a [`ParamMap`]: `params! { "penalty" => "l1", "C" => 10.0 }`.
#[macro_export]
macro_rules! params {
    () => { $crate::params::ParamMap::new() };
    ($($k:expr => $v:expr),+ $(,)?) => {{
        let mut m = $crate::params::ParamMap::new();
        $( m.insert($k, $v); )+
        m
    }};
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamType {
    Float,
    Int,
    Str,
    Bool,
    List,
    Estimator,
    Named,
    Nullable(Box<ParamType>),
    Any,
}

impl ParamType {
    pub fn nullable(inner: ParamType) -> Self {
        ParamType::Nullable(Box::new(inner))
    }

    fn describe(&self) -> String {
        match self {
            ParamType::Float => "float".into(),
            ParamType::Int => "integer".into(),
            ParamType::Str => "string".into(),
            ParamType::Bool => "boolean".into(),
            ParamType::List => "list".into(),
            ParamType::Estimator => "estimator".into(),
            ParamType::Named => "named estimator list".into(),
            ParamType::Nullable(t) => format!("{} or null", t.describe()),
            ParamType::Any => "any".into(),
        }
    }

    /// Returns the value coerced to this type (integers widen to floats),
    /// or `None` when it does not type-check.
    fn coerce(&self, v: &ParamValue) -> Option<ParamValue> {
        match (self, v) {
            (ParamType::Any, v) => Some(v.clone()),
            (ParamType::Nullable(_), ParamValue::Null) => Some(ParamValue::Null),
            (ParamType::Nullable(t), v) => t.coerce(v),
            (ParamType::Float, ParamValue::Float(_)) => Some(v.clone()),
            (ParamType::Float, ParamValue::Int(i)) => Some(ParamValue::Float(*i as f64)),
            (ParamType::Int, ParamValue::Int(_))
            | (ParamType::Str, ParamValue::Str(_))
            | (ParamType::Bool, ParamValue::Bool(_))
            | (ParamType::List, ParamValue::List(_)) => Some(v.clone()),
            (ParamType::Estimator, ParamValue::Estimator(_))
            | (ParamType::Named, ParamValue::Named(_)) => Some(v.unfitted()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub ty: ParamType,
    pub default: ParamValue,
}

/// Ordered parameter declarations of an estimator kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSchema {
    specs: Vec<ParamSpec>,
}

impl ParamSchema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn param(mut self, name: &str, ty: ParamType, default: impl Into<ParamValue>) -> Self {
        self.specs.push(ParamSpec {
            name: name.to_string(),
            ty,
            default: default.into(),
        });
        self
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn get(&self, name: &str) -> Option<&ParamSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn defaults(&self) -> ParamMap {
        self.specs
            .iter()
            .map(|s| (s.name.clone(), s.default.clone()))
            .collect()
    }

    /// Type-checks one value against the declaration of `name`.
    pub fn check(&self, kind: &str, name: &str, value: &ParamValue) -> Result<ParamValue> {
        let spec = self.get(name).ok_or_else(|| Error::UnknownParam {
            kind: kind.to_string(),
            param: name.to_string(),
        })?;
        spec.ty.coerce(value).ok_or_else(|| Error::ParamType {
            kind: kind.to_string(),
            param: name.to_string(),
            expected: spec.ty.describe(),
            got: value.type_name().to_string(),
        })
    }
}

/// Typed reads of parameters that the schema has already validated.
pub(crate) trait ParamRead {
    fn float(&self, name: &str) -> f64;
    fn int(&self, name: &str) -> i64;
    fn string(&self, name: &str) -> &str;
    fn boolean(&self, name: &str) -> bool;
    fn opt_float(&self, name: &str) -> Option<f64>;
    fn opt_int(&self, name: &str) -> Option<i64>;
}

impl ParamRead for ParamMap {
    fn float(&self, name: &str) -> f64 {
        self.get(name)
            .and_then(ParamValue::as_f64)
            .unwrap_or(f64::NAN)
    }

    fn int(&self, name: &str) -> i64 {
        self.get(name)
            .and_then(ParamValue::as_i64)
            .unwrap_or_default()
    }

    fn string(&self, name: &str) -> &str {
        self.get(name)
            .and_then(ParamValue::as_str)
            .unwrap_or_default()
    }

    fn boolean(&self, name: &str) -> bool {
        self.get(name)
            .and_then(ParamValue::as_bool)
            .unwrap_or_default()
    }

    fn opt_float(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(ParamValue::as_f64)
    }

    fn opt_int(&self, name: &str) -> Option<i64> {
        self.get(name).and_then(ParamValue::as_i64)
    }
}
