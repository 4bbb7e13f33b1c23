use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{Features, Matrix, SparseMatrix};

/// Feature matrix plus optional targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Features,
    pub y: Option<Vec<f64>>,
    pub feature_names: Option<Vec<String>>,
    /// Original string labels when the target column was categorical;
    /// `y[i]` indexes into this list.
    pub target_names: Option<Vec<String>>,
}

impl Dataset {
    /// Maps encoded predictions back to the original labels when the target
    /// was categorical; numeric targets are formatted as-is.
    pub fn decode_label(&self, value: f64) -> String {
        decode_label(self.target_names.as_deref(), value)
    }
}

pub fn decode_label(names: Option<&[String]>, value: f64) -> String {
    match names {
        Some(names) if value >= 0.0 && value.fract() == 0.0 && (value as usize) < names.len() => {
            names[value as usize].clone()
        }
        _ => format!("{value}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl From<&str> for TargetColumn {
    fn from(s: &str) -> Self {
        TargetColumn::Name(s.to_string())
    }
}

impl From<usize> for TargetColumn {
    fn from(i: usize) -> Self {
        TargetColumn::Index(i)
    }
}

fn ingest(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a comma separated numeric table. String targets are label-encoded
/// to `0..K-1` in order of first appearance.
pub fn load_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    target: Option<TargetColumn>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| ingest(path, 0, e.to_string()))?;

    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ingest(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if has_header && header.is_none() {
            header = Some(rec.iter().map(|s| s.trim().to_string()).collect());
        } else {
            rows.push((line, rec));
        }
    }

    let width = match (&header, rows.first()) {
        (Some(h), _) => h.len(),
        (None, Some((_, r))) => r.len(),
        (None, None) => 0,
    };
    let target_idx = match &target {
        None => None,
        Some(TargetColumn::Index(i)) if *i < width => Some(*i),
        Some(TargetColumn::Index(i)) => {
            return Err(ingest(
                path,
                1,
                format!("target column {i} missing ({width} columns)"),
            ))
        }
        Some(TargetColumn::Name(name)) => {
            let found = header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .or_else(|| {
                    if header.is_none() {
                        name.parse().ok().filter(|&i| i < width)
                    } else {
                        None
                    }
                });
            Some(found.ok_or_else(|| ingest(path, 1, format!("target column `{name}` missing")))?)
        }
    };

    let n_features = width - usize::from(target_idx.is_some());
    let mut values = Vec::with_capacity(rows.len() * n_features);
    let mut raw_targets = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        if rec.len() != width {
            return Err(ingest(
                path,
                *line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == target_idx {
                raw_targets.push(cell.trim().to_string());
                continue;
            }
            let v = parse_finite(cell).ok_or_else(|| {
                ingest(
                    path,
                    *line,
                    format!("column {} is not a finite number: `{cell}`", j + 1),
                )
            })?;
            values.push(v);
        }
    }

    let (y, target_names) = if target_idx.is_some() {
        let numeric: Option<Vec<f64>> = raw_targets.iter().map(|c| parse_finite(c)).collect();
        match numeric {
            Some(y) => (Some(y), None),
            None => {
                let mut names: Vec<String> = Vec::new();
                let mut y = Vec::with_capacity(raw_targets.len());
                for (cell, (line, _)) in raw_targets.iter().zip(&rows) {
                    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
                        return Err(ingest(path, *line, "missing target value"));
                    }
                    let code = match names.iter().position(|n| n == cell) {
                        Some(k) => k,
                        None => {
                            names.push(cell.clone());
                            names.len() - 1
                        }
                    };
                    y.push(code as f64);
                }
                (Some(y), Some(names))
            }
        }
    } else {
        (None, None)
    };

    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != target_idx)
            .map(|(_, n)| n)
            .collect()
    });

    Ok(Dataset {
        x: Features::Dense(Matrix::new(rows.len(), n_features, values)?),
        y,
        feature_names,
        target_names,
    })
}

/// Reads `label idx:val idx:val ...` lines with 1-based ascending indices.
pub fn load_svmlight(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut triplets = Vec::new();
    let mut y = Vec::new();
    let mut n_cols = 0usize;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let label = parts.next().unwrap_or_default();
        let label = parse_finite(label)
            .ok_or_else(|| ingest(path, line_no, format!("invalid label `{label}`")))?;
        let row = y.len();
        y.push(label);
        let mut last: Option<usize> = None;
        for pair in parts {
            let (idx, val) = pair
                .split_once(':')
                .ok_or_else(|| ingest(path, line_no, format!("malformed pair `{pair}`")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| ingest(path, line_no, format!("invalid index in `{pair}`")))?;
            let val = parse_finite(val)
                .ok_or_else(|| ingest(path, line_no, format!("invalid value in `{pair}`")))?;
            if last.is_some_and(|l| idx <= l) {
                return Err(ingest(
                    path,
                    line_no,
                    "feature indices must be strictly ascending",
                ));
            }
            last = Some(idx);
            n_cols = n_cols.max(idx);
            triplets.push((row, idx - 1, val));
        }
    }
    let x = SparseMatrix::from_triplets(&triplets, y.len(), n_cols)?;
    Ok(Dataset {
        x: Features::Sparse(x),
        y: Some(y),
        feature_names: None,
        target_names: None,
    })
}
