//! Design matrices with fast column access.
//!
//! Dense storage is column-major; sparse storage is compressed sparse column.
//! [`Design::from_dense_auto`] picks the representation from the fill ratio.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg;

/// Fill ratio at or below which [`Design::from_dense_auto`] stores CSC.
pub const SPARSE_DENSITY_THRESHOLD: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CscMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len("csc column pointer", cols + 1, col_ptr.len())?;
        check_len("csc values", row_idx.len(), values.len())?;
        if col_ptr[0] != 0 || col_ptr[cols] != values.len() {
            return Err(Error::InvalidParameter(
                "malformed csc column pointer".into(),
            ));
        }
        if col_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(
                "csc column pointer not monotone".into(),
            ));
        }
        if row_idx.iter().any(|&r| r >= rows) {
            return Err(Error::InvalidParameter("csc row index out of range".into()));
        }
        Ok(CscMatrix {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut cols_vec: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            cols_vec[c].push((r, v));
        }
        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in cols_vec {
            col.sort_by_key(|&(r, _)| r);
            let mut last: Option<usize> = None;
            for (r, v) in col {
                if last == Some(r) {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                    last = Some(r);
                }
            }
            col_ptr.push(values.len());
        }
        CscMatrix::new(rows, cols, col_ptr, row_idx, values)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[s..e], &self.values[s..e])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Design {
    /// Column-major dense storage.
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    Sparse(CscMatrix),
}

impl Design {
    /// Column-major data of length `rows * cols`.
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("dense matrix data", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Design::Dense { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            check_len("matrix row", n, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Design::dense(m, n, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Design::Dense {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Dense column-major input, stored sparse when the fill ratio is at most
    /// [`SPARSE_DENSITY_THRESHOLD`].
    pub fn from_dense_auto(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let dense = Design::dense(rows, cols, data)?;
        let total = rows * cols;
        let nnz = match &dense {
            Design::Dense { data, .. } => data.iter().filter(|v| **v != 0.0).count(),
            Design::Sparse(_) => unreachable!(),
        };
        if total > 0 && (nnz as f64) <= SPARSE_DENSITY_THRESHOLD * total as f64 {
            Ok(dense.to_sparse())
        } else {
            Ok(dense)
        }
    }

    /// Triplet input, stored dense when the fill ratio exceeds the threshold.
    pub fn from_triplets_auto(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let csc = CscMatrix::from_triplets(rows, cols, triplets)?;
        if csc.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        let total = rows * cols;
        let sparse = Design::Sparse(csc);
        if total > 0 && (sparse.nnz() as f64) > SPARSE_DENSITY_THRESHOLD * total as f64 {
            Ok(sparse.to_dense())
        } else {
            Ok(sparse)
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Design::Dense { rows, .. } => *rows,
            Design::Sparse(c) => c.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Design::Dense { cols, .. } => *cols,
            Design::Sparse(c) => c.cols,
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Design::Dense { data, .. } => data.iter().filter(|v| **v != 0.0).count(),
            Design::Sparse(c) => c.nnz(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Design::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Design::Dense { rows, data, .. } => data[j * rows + i],
            Design::Sparse(c) => {
                let (idx, vals) = c.column(j);
                idx.binary_search(&i).map_or(0.0, |k| vals[k])
            }
        }
    }

    pub fn to_dense(&self) -> Design {
        match self {
            Design::Dense { .. } => self.clone(),
            Design::Sparse(c) => {
                let mut data = vec![0.0; c.rows * c.cols];
                for j in 0..c.cols {
                    let (idx, vals) = c.column(j);
                    for (&i, &v) in idx.iter().zip(vals) {
                        data[j * c.rows + i] = v;
                    }
                }
                Design::Dense {
                    rows: c.rows,
                    cols: c.cols,
                    data,
                }
            }
        }
    }

    pub fn to_sparse(&self) -> Design {
        match self {
            Design::Sparse(_) => self.clone(),
            Design::Dense { rows, cols, data } => {
                let mut col_ptr = vec![0];
                let mut row_idx = Vec::new();
                let mut values = Vec::new();
                for j in 0..*cols {
                    for i in 0..*rows {
                        let v = data[j * rows + i];
                        if v != 0.0 {
                            row_idx.push(i);
                            values.push(v);
                        }
                    }
                    col_ptr.push(values.len());
                }
                Design::Sparse(CscMatrix {
                    rows: *rows,
                    cols: *cols,
                    col_ptr,
                    row_idx,
                    values,
                })
            }
        }
    }

    /// Dense rows (row-major view), mostly for I/O and tests.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let (m, n) = (self.rows(), self.cols());
        let mut out = vec![vec![0.0; n]; m];
        for j in 0..n {
            self.for_each_in_col(j, |i, v| out[i][j] = v);
        }
        out
    }

    fn for_each_in_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            Design::Dense { rows, data, .. } => {
                for (i, &v) in data[j * rows..(j + 1) * rows].iter().enumerate() {
                    f(i, v);
                }
            }
            Design::Sparse(c) => {
                let (idx, vals) = c.column(j);
                for (&i, &v) in idx.iter().zip(vals) {
                    f(i, v);
                }
            }
        }
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec input", self.cols(), x.len())?;
        let mut out = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.for_each_in_col(j, |i, v| out[i] += v * xj);
            }
        }
        Ok(out)
    }

    /// `Aᵀ u`
    pub fn rmatvec(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("rmatvec input", self.rows(), u.len())?;
        Ok((0..self.cols()).map(|j| self.col_dot(j, u)).collect())
    }

    /// `a_jᵀ v`
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        match self {
            Design::Dense { rows, data, .. } => linalg::dot(&data[j * rows..(j + 1) * rows], v),
            Design::Sparse(c) => {
                let (idx, vals) = c.column(j);
                idx.iter().zip(vals).map(|(&i, &a)| a * v[i]).sum()
            }
        }
    }

    pub fn col_norm(&self, j: usize) -> f64 {
        match self {
            Design::Dense { rows, data, .. } => linalg::norm(&data[j * rows..(j + 1) * rows]),
            Design::Sparse(c) => linalg::norm(c.column(j).1),
        }
    }

    pub fn col_norms(&self) -> Vec<f64> {
        (0..self.cols()).map(|j| self.col_norm(j)).collect()
    }

    /// Dense copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.for_each_in_col(j, |i, v| out[i] = v);
        out
    }

    /// Submatrix with the given columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Design {
        match self {
            Design::Dense { rows, data, .. } => {
                let mut out = Vec::with_capacity(rows * keep.len());
                for &j in keep {
                    out.extend_from_slice(&data[j * rows..(j + 1) * rows]);
                }
                Design::Dense {
                    rows: *rows,
                    cols: keep.len(),
                    data: out,
                }
            }
            Design::Sparse(c) => {
                let mut col_ptr = vec![0];
                let mut row_idx = Vec::new();
                let mut values = Vec::new();
                for &j in keep {
                    let (idx, vals) = c.column(j);
                    row_idx.extend_from_slice(idx);
                    values.extend_from_slice(vals);
                    col_ptr.push(values.len());
                }
                Design::Sparse(CscMatrix {
                    rows: c.rows,
                    cols: keep.len(),
                    col_ptr,
                    row_idx,
                    values,
                })
            }
        }
    }

    /// Multiplies row `i` by `factors[i]`.
    pub fn scale_rows(&mut self, factors: &[f64]) -> Result<()> {
        check_len("row factors", self.rows(), factors.len())?;
        match self {
            Design::Dense { rows, data, .. } => {
                let m = *rows;
                for (k, v) in data.iter_mut().enumerate() {
                    *v *= factors[k % m];
                }
            }
            Design::Sparse(c) => {
                for (v, &i) in c.values.iter_mut().zip(&c.row_idx) {
                    *v *= factors[i];
                }
            }
        }
        Ok(())
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_cols(&mut self, factors: &[f64]) -> Result<()> {
        check_len("column factors", self.cols(), factors.len())?;
        match self {
            Design::Dense { rows, data, .. } => {
                let m = *rows;
                for (k, v) in data.iter_mut().enumerate() {
                    *v *= factors[k / m];
                }
            }
            Design::Sparse(c) => {
                for j in 0..c.cols {
                    for v in &mut c.values[c.col_ptr[j]..c.col_ptr[j + 1]] {
                        *v *= factors[j];
                    }
                }
            }
        }
        Ok(())
    }

    /// Estimate of `σ_max(A)²` from `iters` power iterations on `AᵀA`,
    /// started from the all-ones vector.
    pub fn spectral_norm_sq(&self, iters: usize) -> f64 {
        let n = self.cols();
        if n == 0 || self.rows() == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut estimate = 0.0;
        for _ in 0..iters {
            let av = self.matvec(&v).expect("length checked");
            let w = self.rmatvec(&av).expect("length checked");
            let nw = linalg::norm(&w);
            if nw == 0.0 {
                // ones vector in the null space: restart from a coordinate vector
                // with a non-zero column, if any
                match (0..n).find(|&j| self.col_norm(j) > 0.0) {
                    Some(j) if estimate == 0.0 => {
                        v = vec![0.0; n];
                        v[j] = 1.0;
                        continue;
                    }
                    _ => return estimate,
                }
            }
            estimate = linalg::dot(&v, &w);
            v = linalg::scale(1.0 / nw, &w);
        }
        estimate.max(0.0)
    }
}
