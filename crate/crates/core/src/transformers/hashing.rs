use crate::error::{Error, Result};
use crate::estimator::{Capabilities, Estimator, FittedState};
use crate::matrix::{Features, SparseMatrix};
use crate::params::{ParamMap, ParamRead, ParamSchema, ParamType, ParamValue};

/// 32-bit FNV-1a.
pub fn fnv1a_32(bytes: &[u8]) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in bytes {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Column and sign of `token` in an `n_features`-wide (power of two) space.
/// The bucket is the low bits of the hash; the sign comes from the next bit.
pub fn bucket_and_sign(token: &str, n_features: usize) -> (usize, f64) {
    let h = fnv1a_32(token.as_bytes());
    let bits = n_features.trailing_zeros();
    let bucket = (h as usize) & (n_features - 1);
    let sign = if (h >> bits) & 1 == 0 { 1.0 } else { -1.0 };
    (bucket, sign)
}

/// Stateless token-document vectorizer using the hashing trick.
///
/// `norm` is `"l2"` (default) or null for raw signed counts.
pub struct HashingVectorizer {
    schema: ParamSchema,
}

impl HashingVectorizer {
    pub const KIND: &'static str = "HashingVectorizer";

    pub fn new() -> Self {
        HashingVectorizer {
            schema: ParamSchema::new()
                .param("n_features", ParamType::Int, 1i64 << 20)
                .param("norm", ParamType::nullable(ParamType::Str), "l2"),
        }
    }
}

impl Default for HashingVectorizer {
    fn default() -> Self {
        Self::new()
    }
}

fn settings(params: &ParamMap) -> Result<(usize, bool)> {
    let n = params.int("n_features");
    if !(2..=(1i64 << 31)).contains(&n) || (n & (n - 1)) != 0 {
        return Err(Error::invalid_param(
            "n_features",
            format!("{n} is not a power of two in 2..=2^31"),
        ));
    }
    let normalize = match params.get("norm") {
        Some(ParamValue::Null) => false,
        Some(ParamValue::Str(s)) if s == "l2" => true,
        other => {
            return Err(Error::invalid_param(
                "norm",
                format!("expected \"l2\" or null, got {other:?}"),
            ))
        }
    };
    Ok((n as usize, normalize))
}

/// Hashes token documents into a `docs.len() x n_features` CSR matrix.
pub fn hash_documents(
    docs: &[Vec<String>],
    n_features: usize,
    normalize: bool,
) -> Result<SparseMatrix> {
    let mut triplets = Vec::new();
    for (row, doc) in docs.iter().enumerate() {
        for token in doc {
            let (col, sign) = bucket_and_sign(token, n_features);
            triplets.push((row, col, sign));
        }
    }
    let counts = SparseMatrix::from_triplets(&triplets, docs.len(), n_features)?;
    if !normalize {
        return Ok(counts);
    }
    let norms: Vec<f64> = (0..counts.n_rows())
        .map(|r| counts.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    Ok(counts.map_values(|r, _, v| v / norms[r]))
}

impl Estimator for HashingVectorizer {
    fn kind(&self) -> &str {
        Self::KIND
    }

    fn schema(&self) -> &ParamSchema {
        &self.schema
    }

    fn capabilities(&self, _: &ParamMap) -> Capabilities {
        Capabilities {
            transformer: true,
            ..Default::default()
        }
    }

    /// No learning; validates parameters and input kind only.
    fn fit(&self, params: &ParamMap, x: &Features, _: Option<&[f64]>) -> Result<FittedState> {
        settings(params)?;
        if !matches!(x, Features::Documents(_)) {
            return Err(Error::InvalidInput(format!(
                "{} expects token documents",
                Self::KIND
            )));
        }
        Ok(FittedState::new())
    }

    fn transform(&self, params: &ParamMap, _: &FittedState, x: &Features) -> Result<Features> {
        let (n_features, normalize) = settings(params)?;
        match x {
            Features::Documents(docs) => Ok(Features::Sparse(hash_documents(
                docs, n_features, normalize,
            )?)),
            _ => Err(Error::InvalidInput(format!(
                "{} expects token documents",
                Self::KIND
            ))),
        }
    }
}
