//! Compressed sparse row storage and the kernels every solver shares.
//!
//! All row products go through [`SparseMatrix::row_dot`], which accumulates
//! in storage order starting from `0.0`. Keeping a single summation order is
//! what makes the synchronous solvers, the simulator and the threaded
//! runtime agree bit for bit on their reduction cases.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_start: Vec<usize>,
    col_index: Vec<usize>,
    value: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_start: Vec<usize>,
        col_index: Vec<usize>,
        value: Vec<f64>,
    ) -> Result<Self> {
        if row_start.len() != nrows + 1 {
            return Err(Error::DimensionMismatch {
                what: "row_start length",
                expected: nrows + 1,
                got: row_start.len(),
            });
        }
        if col_index.len() != value.len() {
            return Err(Error::DimensionMismatch {
                what: "value length",
                expected: col_index.len(),
                got: value.len(),
            });
        }
        if row_start[0] != 0 || row_start[nrows] != col_index.len() {
            return Err(Error::invalid("row_start must start at 0 and end at nnz"));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_start[i], row_start[i + 1]);
            if lo > hi {
                return Err(Error::invalid(format!("row_start decreases at row {i}")));
            }
            let cols = &col_index[lo..hi];
            if cols.iter().any(|&j| j >= ncols) {
                return Err(Error::invalid(format!(
                    "column index out of range in row {i}"
                )));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_start,
            col_index,
            value,
        })
    }

    /// Assembles from unordered `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<_> = entries.into_iter().collect();
        for &(i, j, _) in &entries {
            if i >= nrows || j >= ncols {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_start = vec![0usize; nrows + 1];
        let mut col_index = Vec::with_capacity(entries.len());
        let mut value: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *value.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_start[i + 1] += 1;
            col_index.push(j);
            value.push(v);
        }
        for i in 0..nrows {
            row_start[i + 1] += row_start[i];
        }
        Self::from_csr(nrows, ncols, row_start, col_index, value)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_start: (0..=n).collect(),
            col_index: (0..n).collect(),
            value: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.value.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_start(&self) -> &[usize] {
        &self.row_start
    }

    pub fn col_index(&self) -> &[usize] {
        &self.col_index
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_start[i], self.row_start[i + 1]);
        (&self.col_index[lo..hi], &self.value[lo..hi])
    }

    /// `(A x)_i`, accumulated in storage order.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.row_dot_by(i, |j| x[j])
    }

    /// [`row_dot`](Self::row_dot) with entries fetched through `x`, same
    /// summation order.
    #[inline]
    pub fn row_dot_by<F: FnMut(usize) -> f64>(&self, i: usize, mut x: F) -> f64 {
        let (cols, vals) = self.row(i);
        let mut s = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            s += v * x(j);
        }
        s
    }

    /// Stored value at `(i, j)`, or zero when the entry is not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Number of entries stored with value exactly zero.
    pub fn explicit_zeros(&self) -> usize {
        self.value.iter().filter(|&&v| v == 0.0).count()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                what: "matvec input",
                expected: self.ncols,
                got: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                what: "matvec output",
                expected: self.nrows,
                got: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
        Ok(())
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Self {
        SparseMatrix {
            value: self.value.iter().map(|v| v.abs()).collect(),
            ..self.clone()
        }
    }

    /// Scales row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate().take(self.nrows) {
            for p in self.row_start[i]..self.row_start[i + 1] {
                out.value[p] = self.value[p] * di;
            }
        }
        out
    }

    /// Assembles `I - alpha * A` (square matrices only), inserting the
    /// diagonal where it is not stored.
    pub fn identity_minus_scaled(&self, alpha: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::invalid("I - alpha*A requires a square matrix"));
        }
        let entries = self
            .triplets()
            .map(|(i, j, v)| (i, j, -alpha * v))
            .chain((0..self.nrows).map(|i| (i, i, 1.0)));
        Self::from_triplets(self.nrows, self.ncols, entries)
    }
}

/// Five-point finite-difference Laplacian on an `m x m` grid with Dirichlet
/// boundary, unknowns numbered row-major. Diagonal 4, neighbors -1.
pub fn laplacian_2d(m: usize) -> Result<SparseMatrix> {
    if m == 0 {
        return Err(Error::invalid("grid size m must be at least 1"));
    }
    let n = m * m;
    let mut row_start = Vec::with_capacity(n + 1);
    let mut col_index = Vec::with_capacity(5 * n);
    let mut value = Vec::with_capacity(5 * n);
    row_start.push(0);
    for gi in 0..m {
        for gj in 0..m {
            let r = gi * m + gj;
            if gi > 0 {
                col_index.push(r - m);
                value.push(-1.0);
            }
            if gj > 0 {
                col_index.push(r - 1);
                value.push(-1.0);
            }
            col_index.push(r);
            value.push(4.0);
            if gj + 1 < m {
                col_index.push(r + 1);
                value.push(-1.0);
            }
            if gi + 1 < m {
                col_index.push(r + m);
                value.push(-1.0);
            }
            row_start.push(col_index.len());
        }
    }
    Ok(SparseMatrix {
        nrows: n,
        ncols: n,
        row_start,
        col_index,
        value,
    })
}

/// Spectral radius of the Jacobi iteration matrix of [`laplacian_2d`]`(m)`.
pub fn laplacian_jacobi_rho(m: usize) -> f64 {
    (std::f64::consts::PI / (m as f64 + 1.0)).cos()
}
