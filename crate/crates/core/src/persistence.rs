//! Versioned binary archives of fitted estimators.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "ESTK" | format_version: u32 | metadata: u64 len + bytes | estimator: u64 len + bytes | checksum: u64
//! ```
//!
//! The checksum is 64-bit FNV-1a over every preceding byte. Metadata is an
//! encoded [`ParamMap`]. An estimator block is the kind name, its parameter
//! map, a fitted flag and, when fitted, the named arrays (shape then `f64`
//! data) followed by the named child estimator blocks. Loading only looks up
//! kinds in a [`Registry`] and installs the decoded state.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{Array, EstimatorHandle, FittedState, N_FEATURES_ATTR};
use crate::params::{ParamMap, ParamValue};
use crate::registry::Registry;

pub const MAGIC: &[u8; 4] = b"ESTK";
pub const FORMAT_VERSION: u32 = 1;

const TAG_NULL: u8 = 0;
const TAG_FLOAT: u8 = 1;
const TAG_INT: u8 = 2;
const TAG_STR: u8 = 3;
const TAG_BOOL: u8 = 4;
const TAG_LIST: u8 = 5;
const TAG_ESTIMATOR: u8 = 6;
const TAG_NAMED: u8 = 7;

/// Upper bound on nesting while decoding, so hostile archives cannot
/// overflow the stack.
const MAX_DEPTH: usize = 64;

/// Archive header information stored next to the estimator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub library_version: String,
    pub n_features: Option<usize>,
    /// Original class labels when targets were strings.
    pub target_names: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Archive {
    pub format_version: u32,
    pub metadata: Metadata,
    pub estimator: EstimatorHandle,
}

pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Encodes a fitted estimator. Identical state gives identical bytes.
pub fn to_bytes(handle: &EstimatorHandle, target_names: Option<&[String]>) -> Result<Vec<u8>> {
    if !handle.is_fitted() {
        return Err(Error::NotFitted {
            kind: handle.kind().to_string(),
        });
    }
    let metadata = Metadata {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        n_features: handle
            .fitted_state()?
            .scalar(N_FEATURES_ATTR)
            .ok()
            .map(|w| w as usize),
        target_names: target_names.map(<[String]>::to_vec),
    };

    let mut meta = Writer::default();
    meta.params(&metadata_map(&metadata));
    let mut body = Writer::default();
    body.estimator(handle);

    let mut out = Writer::default();
    out.buf.extend_from_slice(MAGIC);
    out.u32(FORMAT_VERSION);
    out.section(&meta.buf);
    out.section(&body.buf);
    let checksum = fnv1a_64(&out.buf);
    out.u64(checksum);
    Ok(out.buf)
}

/// Decodes an archive, constructing every kind through `registry`.
pub fn from_bytes(bytes: &[u8], registry: &Registry) -> Result<Archive> {
    if bytes.len() < MAGIC.len() + 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("not an estimator archive (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version > FORMAT_VERSION {
        return Err(Error::FutureVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    if version == 0 {
        return Err(Error::Format("format version 0 is invalid".into()));
    }
    if bytes.len() < 16 {
        return Err(Error::Format("archive truncated".into()));
    }
    let (payload, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    let computed = fnv1a_64(payload);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = Reader {
        buf: &payload[8..],
        registry,
        depth: 0,
    };
    let mut meta = Reader {
        buf: r.section()?,
        registry,
        depth: 0,
    };
    let metadata = metadata_from_map(&meta.params()?)?;
    meta.finish()?;
    let mut body = Reader {
        buf: r.section()?,
        registry,
        depth: 0,
    };
    let estimator = body.estimator()?;
    body.finish()?;
    r.finish()?;
    if !estimator.is_fitted() {
        return Err(Error::Format("archived estimator is not fitted".into()));
    }
    Ok(Archive {
        format_version: version,
        metadata,
        estimator,
    })
}

/// Writes a fitted estimator to `path`.
pub fn save(handle: &EstimatorHandle, path: impl AsRef<Path>) -> Result<()> {
    save_with_labels(handle, None, path)
}

/// Like [`save`], also recording the original class labels.
pub fn save_with_labels(
    handle: &EstimatorHandle,
    target_names: Option<&[String]>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let bytes = to_bytes(handle, target_names)?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads an estimator using the global registry.
pub fn load(path: impl AsRef<Path>) -> Result<EstimatorHandle> {
    Ok(load_archive(path, Registry::global())?.estimator)
}

pub fn load_archive(path: impl AsRef<Path>, registry: &Registry) -> Result<Archive> {
    from_bytes(&fs::read(path)?, registry)
}

fn metadata_map(m: &Metadata) -> ParamMap {
    let mut map = ParamMap::new();
    map.insert("library_version", m.library_version.as_str());
    map.insert(
        "n_features",
        m.n_features
            .map_or(ParamValue::Null, |n| ParamValue::Int(n as i64)),
    );
    map.insert(
        "target_names",
        m.target_names.as_ref().map_or(ParamValue::Null, |names| {
            ParamValue::List(names.iter().map(|s| ParamValue::from(s.as_str())).collect())
        }),
    );
    map
}

fn metadata_from_map(map: &ParamMap) -> Result<Metadata> {
    let bad = |what: &str| Error::Format(format!("metadata field `{what}` is malformed"));
    let library_version = map
        .get("library_version")
        .and_then(ParamValue::as_str)
        .ok_or_else(|| bad("library_version"))?
        .to_string();
    let n_features = match map.get("n_features") {
        None | Some(ParamValue::Null) => None,
        Some(ParamValue::Int(n)) if *n >= 0 => Some(*n as usize),
        Some(_) => return Err(bad("n_features")),
    };
    let target_names = match map.get("target_names") {
        None | Some(ParamValue::Null) => None,
        Some(ParamValue::List(vs)) => Some(
            vs.iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| bad("target_names"))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        Some(_) => return Err(bad("target_names")),
    };
    Ok(Metadata {
        library_version,
        n_features,
        target_names,
    })
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("collection too large to archive"));
    }

    fn str(&mut self, s: &str) {
        self.len(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn section(&mut self, bytes: &[u8]) {
        self.u64(bytes.len() as u64);
        self.buf.extend_from_slice(bytes);
    }

    fn params(&mut self, map: &ParamMap) {
        self.len(map.len());
        for (name, value) in map.iter() {
            self.str(name);
            self.value(value);
        }
    }

    fn value(&mut self, v: &ParamValue) {
        match v {
            ParamValue::Null => self.u8(TAG_NULL),
            ParamValue::Float(f) => {
                self.u8(TAG_FLOAT);
                self.u64(f.to_bits());
            }
            ParamValue::Int(i) => {
                self.u8(TAG_INT);
                self.u64(*i as u64);
            }
            ParamValue::Str(s) => {
                self.u8(TAG_STR);
                self.str(s);
            }
            ParamValue::Bool(b) => {
                self.u8(TAG_BOOL);
                self.u8(u8::from(*b));
            }
            ParamValue::List(vs) => {
                self.u8(TAG_LIST);
                self.len(vs.len());
                vs.iter().for_each(|v| self.value(v));
            }
            ParamValue::Estimator(e) => {
                self.u8(TAG_ESTIMATOR);
                self.estimator(e);
            }
            ParamValue::Named(members) => {
                self.u8(TAG_NAMED);
                self.named(members);
            }
        }
    }

    fn named(&mut self, members: &[(String, EstimatorHandle)]) {
        self.len(members.len());
        for (name, e) in members {
            self.str(name);
            self.estimator(e);
        }
    }

    fn estimator(&mut self, e: &EstimatorHandle) {
        self.str(e.kind());
        self.params(e.params());
        match e.fitted() {
            None => self.u8(0),
            Some(state) => {
                self.u8(1);
                self.len(state.arrays().len());
                for (name, a) in state.arrays() {
                    self.str(name);
                    self.len(a.shape.len());
                    a.shape.iter().for_each(|&d| self.u64(d as u64));
                    a.data.iter().for_each(|x| self.u64(x.to_bits()));
                }
                self.named(state.children());
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    registry: &'a Registry,
    depth: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.buf.len() {
            return Err(Error::Format("archive truncated".into()));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn finish(&self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::Format(format!("{} trailing bytes", self.buf.len())))
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn len(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }

    fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Format("invalid UTF-8 string".into()))
    }

    fn section(&mut self) -> Result<&'a [u8]> {
        let n =
            usize::try_from(self.u64()?).map_err(|_| Error::Format("section too large".into()))?;
        self.take(n)
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        if self.depth >= MAX_DEPTH {
            return Err(Error::Format("estimator nesting too deep".into()));
        }
        self.depth += 1;
        let out = f(self);
        self.depth -= 1;
        out
    }

    fn params(&mut self) -> Result<ParamMap> {
        let n = self.len()?;
        let mut map = ParamMap::new();
        for _ in 0..n {
            let name = self.str()?;
            if map.contains(&name) {
                return Err(Error::Format(format!("duplicate parameter `{name}`")));
            }
            let value = self.value()?;
            map.insert(name, value);
        }
        Ok(map)
    }

    fn value(&mut self) -> Result<ParamValue> {
        Ok(match self.u8()? {
            TAG_NULL => ParamValue::Null,
            TAG_FLOAT => ParamValue::Float(f64::from_bits(self.u64()?)),
            TAG_INT => ParamValue::Int(self.u64()? as i64),
            TAG_STR => ParamValue::Str(self.str()?),
            TAG_BOOL => match self.u8()? {
                0 => ParamValue::Bool(false),
                1 => ParamValue::Bool(true),
                b => return Err(Error::Format(format!("invalid boolean byte {b}"))),
            },
            TAG_LIST => {
                let n = self.len()?;
                let items =
                    self.nested(|r| (0..n).map(|_| r.value()).collect::<Result<Vec<_>>>())?;
                ParamValue::List(items)
            }
            TAG_ESTIMATOR => ParamValue::Estimator(Box::new(self.estimator()?)),
            TAG_NAMED => ParamValue::Named(self.named()?),
            tag => return Err(Error::Format(format!("unknown value tag {tag}"))),
        })
    }

    fn named(&mut self) -> Result<Vec<(String, EstimatorHandle)>> {
        let n = self.len()?;
        (0..n)
            .map(|_| Ok((self.str()?, self.estimator()?)))
            .collect()
    }

    fn estimator(&mut self) -> Result<EstimatorHandle> {
        self.nested(|r| {
            let kind = r.str()?;
            let params = r.params()?;
            let handle = r.registry.construct(&kind, params)?;
            match r.u8()? {
                0 => Ok(handle),
                1 => {
                    let mut state = FittedState::new();
                    for _ in 0..r.len()? {
                        let name = r.str()?;
                        let array = r.array()?;
                        state.insert(name, array);
                    }
                    for (name, child) in r.named()? {
                        state.push_child(name, child);
                    }
                    Ok(handle.with_state(state))
                }
                b => Err(Error::Format(format!("invalid fitted flag {b}"))),
            }
        })
    }

    fn array(&mut self) -> Result<Array> {
        let ndim = self.len()?;
        let shape = (0..ndim)
            .map(|_| {
                usize::try_from(self.u64()?)
                    .map_err(|_| Error::Format("dimension too large".into()))
            })
            .collect::<Result<Vec<usize>>>()?;
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n.checked_mul(8).is_some_and(|b| b <= self.buf.len()))
            .ok_or_else(|| Error::Format("array larger than the archive".into()))?;
        let data = (0..n)
            .map(|_| self.u64().map(f64::from_bits))
            .collect::<Result<Vec<_>>>()?;
        Ok(Array { shape, data })
    }
}
