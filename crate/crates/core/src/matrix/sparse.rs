use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Compressed sparse row matrix in canonical form: column indices strictly
/// increasing within each row and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a canonical CSR matrix from `(row, col, value)` triplets.
    /// Duplicate coordinates are summed and entries that sum to zero are dropped.
    pub fn from_triplets(
        triplets: &[(usize, usize, f64)],
        n_rows: usize,
        n_cols: usize,
    ) -> Result<Self> {
        let mut sorted = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n_rows {
                return Err(Error::OutOfBounds {
                    index: r,
                    bound: n_rows,
                    axis: "rows",
                });
            }
            if c >= n_cols {
                return Err(Error::OutOfBounds {
                    index: c,
                    bound: n_cols,
                    axis: "columns",
                });
            }
            sorted.push((r, c, v));
        }
        // Stable sort keeps the summation order of duplicates deterministic.
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut indptr = vec![0usize; n_rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut data = Vec::with_capacity(sorted.len());
        let mut k = 0;
        while k < sorted.len() {
            let (r, c, mut v) = sorted[k];
            k += 1;
            while k < sorted.len() && sorted[k].0 == r && sorted[k].1 == c {
                v += sorted[k].2;
                k += 1;
            }
            if v != 0.0 {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..n_rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            data,
        })
    }

    /// Validates raw CSR arrays. The arrays must already be canonical.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != n_rows + 1 || indptr[0] != 0 {
            return Err(Error::Shape(
                "indptr must have n_rows + 1 entries starting at 0".into(),
            ));
        }
        if indices.len() != data.len() || indptr[n_rows] != indices.len() {
            return Err(Error::Shape(
                "indptr, indices and data disagree on nnz".into(),
            ));
        }
        for r in 0..n_rows {
            if indptr[r] > indptr[r + 1] {
                return Err(Error::Shape(format!("indptr decreases at row {r}")));
            }
            let cols = &indices[indptr[r]..indptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Shape(format!(
                    "row {r} column indices not strictly increasing"
                )));
            }
            if let Some(&c) = cols.last() {
                if c >= n_cols {
                    return Err(Error::OutOfBounds {
                        index: c,
                        bound: n_cols,
                        axis: "columns",
                    });
                }
            }
        }
        if data.contains(&0.0) {
            return Err(Error::Shape("explicit zeros are not allowed".into()));
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            data,
        })
    }

    pub fn from_dense(m: &Matrix) -> Self {
        let mut indptr = Vec::with_capacity(m.n_rows() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for row in m.rows() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            indptr,
            indices,
            data,
        }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column indices and values stored in row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.data[span])
    }

    /// Stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            m.set(r, c, v);
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn take_rows(&self, idx: &[usize]) -> Result<SparseMatrix> {
        let mut indptr = Vec::with_capacity(idx.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for &i in idx {
            if i >= self.n_rows {
                return Err(Error::OutOfBounds {
                    index: i,
                    bound: self.n_rows,
                    axis: "rows",
                });
            }
            let (cols, vals) = self.row(i);
            indices.extend_from_slice(cols);
            data.extend_from_slice(vals);
            indptr.push(indices.len());
        }
        Ok(SparseMatrix {
            n_rows: idx.len(),
            n_cols: self.n_cols,
            indptr,
            indices,
            data,
        })
    }

    /// Keeps the listed columns; `cols` must be strictly increasing.
    pub fn select_columns(&self, cols: &[usize]) -> SparseMatrix {
        let mut remap = vec![usize::MAX; self.n_cols];
        for (new, &old) in cols.iter().enumerate() {
            remap[old] = new;
        }
        let mut indptr = Vec::with_capacity(self.n_rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for r in 0..self.n_rows {
            let (rc, rv) = self.row(r);
            for (&c, &v) in rc.iter().zip(rv) {
                if remap[c] != usize::MAX {
                    indices.push(remap[c]);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: cols.len(),
            indptr,
            indices,
            data,
        }
    }

    /// Applies `f` to every stored value, dropping results equal to zero.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> SparseMatrix {
        let mut indptr = Vec::with_capacity(self.n_rows + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(self.nnz());
        let mut data = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let (rc, rv) = self.row(r);
            for (&c, &v) in rc.iter().zip(rv) {
                let nv = f(r, c, v);
                if nv != 0.0 {
                    indices.push(c);
                    data.push(nv);
                }
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            indptr,
            indices,
            data,
        }
    }
}
