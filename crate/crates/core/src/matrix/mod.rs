//! Sample-by-feature containers: dense row-major matrices, canonical CSR
//! matrices, token documents, and dataset ingestion.

mod dense;
mod io;
mod sparse;

pub use dense::Matrix;
pub use io::{decode_label, load_csv, load_svmlight, Dataset, TargetColumn};
pub use sparse::SparseMatrix;

use crate::error::{Error, Result};

/// Input handed to estimators: one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Dense(Matrix),
    Sparse(SparseMatrix),
    /// Pre-tokenized text documents, consumed by vectorizers.
    Documents(Vec<Vec<String>>),
}

impl From<Matrix> for Features {
    fn from(m: Matrix) -> Self {
        Features::Dense(m)
    }
}

impl From<SparseMatrix> for Features {
    fn from(m: SparseMatrix) -> Self {
        Features::Sparse(m)
    }
}

impl Features {
    pub fn n_rows(&self) -> usize {
        match self {
            Features::Dense(m) => m.n_rows(),
            Features::Sparse(m) => m.n_rows(),
            Features::Documents(d) => d.len(),
        }
    }

    /// Number of feature columns; documents have no fixed width and report 0.
    pub fn n_cols(&self) -> usize {
        match self {
            Features::Dense(m) => m.n_cols(),
            Features::Sparse(m) => m.n_cols(),
            Features::Documents(_) => 0,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Features::Sparse(_))
    }

    pub fn take_rows(&self, idx: &[usize]) -> Result<Features> {
        Ok(match self {
            Features::Dense(m) => Features::Dense(m.take_rows(idx)?),
            Features::Sparse(m) => Features::Sparse(m.take_rows(idx)?),
            Features::Documents(d) => {
                let mut out = Vec::with_capacity(idx.len());
                for &i in idx {
                    let doc = d.get(i).ok_or(Error::OutOfBounds {
                        index: i,
                        bound: d.len(),
                        axis: "rows",
                    })?;
                    out.push(doc.clone());
                }
                Features::Documents(out)
            }
        })
    }

    /// Dense copy of numeric input.
    pub fn to_dense(&self) -> Result<Matrix> {
        match self {
            Features::Dense(m) => Ok(m.clone()),
            Features::Sparse(m) => Ok(m.to_dense()),
            Features::Documents(_) => Err(Error::InvalidInput(
                "expected a numeric matrix, got token documents".into(),
            )),
        }
    }

    /// Borrows dense input, densifying sparse input on demand.
    pub fn dense(&self) -> Result<std::borrow::Cow<'_, Matrix>> {
        match self {
            Features::Dense(m) => Ok(std::borrow::Cow::Borrowed(m)),
            _ => self.to_dense().map(std::borrow::Cow::Owned),
        }
    }

    /// Fails unless the input is numeric with finite entries.
    pub fn check_numeric(&self) -> Result<()> {
        let finite = match self {
            Features::Dense(m) => m.is_finite(),
            Features::Sparse(m) => m.is_finite(),
            Features::Documents(_) => {
                return Err(Error::InvalidInput(
                    "expected a numeric matrix, got token documents".into(),
                ))
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidInput("input contains NaN or infinity".into()))
        }
    }

    /// `row_i · w`
    #[inline]
    pub fn dot_row(&self, i: usize, w: &[f64]) -> f64 {
        match self {
            Features::Dense(m) => m.row(i).iter().zip(w).map(|(a, b)| a * b).sum(),
            Features::Sparse(m) => {
                let (cols, vals) = m.row(i);
                cols.iter().zip(vals).map(|(&c, v)| v * w[c]).sum()
            }
            Features::Documents(_) => 0.0,
        }
    }

    /// `out += alpha * row_i`
    #[inline]
    pub fn axpy_row(&self, i: usize, alpha: f64, out: &mut [f64]) {
        match self {
            Features::Dense(m) => {
                for (o, v) in out.iter_mut().zip(m.row(i)) {
                    *o += alpha * v;
                }
            }
            Features::Sparse(m) => {
                let (cols, vals) = m.row(i);
                for (&c, v) in cols.iter().zip(vals) {
                    out[c] += alpha * v;
                }
            }
            Features::Documents(_) => {}
        }
    }

    /// Keeps the listed columns; `cols` must be strictly increasing.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Features> {
        match self {
            Features::Dense(m) => Ok(Features::Dense(m.select_columns(cols))),
            Features::Sparse(m) => Ok(Features::Sparse(m.select_columns(cols))),
            Features::Documents(_) => Err(Error::InvalidInput(
                "cannot select columns of token documents".into(),
            )),
        }
    }
}

/// Concatenates blocks column-wise. The result is sparse if any block is.
pub fn hstack(blocks: &[Features]) -> Result<Features> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::Shape("hstack needs at least one block".into()))?;
    let n_rows = first.n_rows();
    for b in blocks {
        if matches!(b, Features::Documents(_)) {
            return Err(Error::InvalidInput("cannot hstack token documents".into()));
        }
        if b.n_rows() != n_rows {
            return Err(Error::Shape(format!(
                "hstack blocks have {} and {} rows",
                n_rows,
                b.n_rows()
            )));
        }
    }
    if blocks.len() == 1 {
        return Ok(first.clone());
    }
    let n_cols: usize = blocks.iter().map(Features::n_cols).sum();
    if blocks.iter().any(Features::is_sparse) {
        let mut indptr = Vec::with_capacity(n_rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for r in 0..n_rows {
            let mut offset = 0;
            for b in blocks {
                match b {
                    Features::Dense(m) => {
                        for (j, &v) in m.row(r).iter().enumerate() {
                            if v != 0.0 {
                                indices.push(offset + j);
                                data.push(v);
                            }
                        }
                    }
                    Features::Sparse(m) => {
                        let (cols, vals) = m.row(r);
                        indices.extend(cols.iter().map(|c| c + offset));
                        data.extend_from_slice(vals);
                    }
                    Features::Documents(_) => unreachable!(),
                }
                offset += b.n_cols();
            }
            indptr.push(indices.len());
        }
        Ok(Features::Sparse(SparseMatrix::from_csr(
            n_rows, n_cols, indptr, indices, data,
        )?))
    } else {
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for r in 0..n_rows {
            for b in blocks {
                if let Features::Dense(m) = b {
                    values.extend_from_slice(m.row(r));
                }
            }
        }
        Ok(Features::Dense(Matrix::new(n_rows, n_cols, values)?))
    }
}
