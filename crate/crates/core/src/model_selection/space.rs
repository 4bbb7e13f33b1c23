use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::params::{ParamMap, ParamValue};

/// Candidate values per parameter path, as one or more sub-grids. Each
/// sub-grid contributes its full cartesian product.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamGrid {
    sub_grids: Vec<Vec<(String, Vec<ParamValue>)>>,
}

impl ParamGrid {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sub-grid; keys keep the given order.
    pub fn sub_grid<K, I, V>(mut self, entries: I) -> Self
    where
        K: Into<String>,
        I: IntoIterator<Item = (K, Vec<V>)>,
        V: Into<ParamValue>,
    {
        self.sub_grids.push(
            entries
                .into_iter()
                .map(|(k, vs)| (k.into(), vs.into_iter().map(Into::into).collect()))
                .collect(),
        );
        self
    }

    pub fn sub_grids(&self) -> &[Vec<(String, Vec<ParamValue>)>] {
        &self.sub_grids
    }

    /// All candidates: sub-grids in order, each expanded with the last key
    /// varying fastest, exact duplicates dropped after their first
    /// occurrence.
    pub fn expand(&self) -> Result<Vec<ParamMap>> {
        if self.sub_grids.is_empty() {
            return Err(Error::InvalidInput(
                "parameter grid has no sub-grids".into(),
            ));
        }
        let mut out: Vec<ParamMap> = Vec::new();
        for grid in &self.sub_grids {
            if grid.is_empty() {
                return Err(Error::InvalidInput(
                    "parameter grid has an empty sub-grid".into(),
                ));
            }
            if let Some((key, _)) = grid.iter().find(|(_, vs)| vs.is_empty()) {
                return Err(Error::InvalidInput(format!(
                    "parameter grid lists no values for `{key}`"
                )));
            }
            let mut counter = vec![0usize; grid.len()];
            loop {
                let candidate: ParamMap = grid
                    .iter()
                    .zip(&counter)
                    .map(|((k, vs), &i)| (k.clone(), vs[i].clone()))
                    .collect();
                if !out.iter().any(|c| same_assignment(c, &candidate)) {
                    out.push(candidate);
                }
                let mut pos = grid.len();
                let exhausted = loop {
                    if pos == 0 {
                        break true;
                    }
                    pos -= 1;
                    counter[pos] += 1;
                    if counter[pos] < grid[pos].1.len() {
                        break false;
                    }
                    counter[pos] = 0;
                };
                if exhausted {
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// Same keys bound to equal values, regardless of key order.
fn same_assignment(a: &ParamMap, b: &ParamMap) -> bool {
    a.len() == b.len() && a.iter().all(|(k, v)| b.get(k) == Some(v))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Choice(Vec<ParamValue>),
    /// Continuous on `[a, b)`.
    Uniform(f64, f64),
    /// `exp(U(ln a, ln b))`.
    LogUniform(f64, f64),
    /// Integers in `[a, b]`.
    IntegerUniform(i64, i64),
}

impl Distribution {
    fn validate(&self, key: &str) -> Result<()> {
        let bad = |why: &str| {
            Err(Error::InvalidInput(format!(
                "distribution for `{key}`: {why}"
            )))
        };
        match *self {
            Distribution::Choice(ref vs) if vs.is_empty() => bad("empty choice list"),
            Distribution::Uniform(a, b) if !(a < b && a.is_finite() && b.is_finite()) => {
                bad("needs finite a < b")
            }
            Distribution::LogUniform(a, b) if !(a > 0.0 && a < b && b.is_finite()) => {
                bad("needs 0 < a < b")
            }
            Distribution::IntegerUniform(a, b) if a >= b => bad("needs a < b"),
            _ => Ok(()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> ParamValue {
        match *self {
            Distribution::Choice(ref vs) => vs[rng.gen_range(0..vs.len())].clone(),
            Distribution::Uniform(a, b) => ParamValue::Float(rng.gen_range(a..b)),
            Distribution::LogUniform(a, b) => {
                ParamValue::Float(rng.gen_range(a.ln()..b.ln()).exp())
            }
            Distribution::IntegerUniform(a, b) => ParamValue::Int(rng.gen_range(a..=b)),
        }
    }
}

/// Parameter path → distribution, sampled in declaration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamDistributions {
    entries: Vec<(String, Distribution)>,
}

impl ParamDistributions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, dist: Distribution) -> Self {
        self.entries.push((key.into(), dist));
        self
    }

    pub fn entries(&self) -> &[(String, Distribution)] {
        &self.entries
    }

    /// `n_iter` independent candidates from a generator seeded with `seed`.
    pub fn sample(&self, n_iter: usize, seed: u64) -> Result<Vec<ParamMap>> {
        if n_iter == 0 {
            return Err(Error::InvalidInput("n_iter must be at least 1".into()));
        }
        if self.entries.is_empty() {
            return Err(Error::InvalidInput(
                "no parameter distributions given".into(),
            ));
        }
        for (k, d) in &self.entries {
            d.validate(k)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n_iter)
            .map(|_| {
                self.entries
                    .iter()
                    .map(|(k, d)| (k.clone(), d.draw(&mut rng)))
                    .collect()
            })
            .collect())
    }
}
