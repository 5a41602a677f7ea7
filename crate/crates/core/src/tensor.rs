//! Sparse matrices, Kronecker algebra and the sup / logarithmic norms.
//!
//! Indices are zero-based. A word `(w_1, ..., w_i)` over `{0..n-1}` is flattened
//! row-major, i.e. to `Σ w_m n^{i-m}`, which is the index order of `x ⊗ ... ⊗ x`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::checked_pow;

/// Upper limit on the index space (`rows * cols`) of any matrix built by
/// Kronecker products, and on the length of Kronecker powers of vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeGuard(pub u64);

impl SizeGuard {
    pub const DEFAULT: SizeGuard = SizeGuard(1 << 26);

    pub fn check(self, rows: usize, cols: usize) -> Result<()> {
        let space = rows as u128 * cols as u128;
        if space > self.0 as u128 {
            return Err(Error::AssemblyLimitExceeded {
                rows: rows as u128,
                cols: cols as u128,
                limit: self.0,
            });
        }
        Ok(())
    }

    pub fn check_len(self, len: usize) -> Result<()> {
        self.check(len, 1)
    }
}

impl Default for SizeGuard {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Real matrix in compressed sparse row form.
///
/// Entries are unique per position, finite and never exactly zero.
#[derive(Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from coordinate triplets. Repeated positions are summed
    /// and entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: r,
                    col: c,
                    value: v,
                });
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from a dense row-major slice.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Self::from_triplets(
            rows,
            cols,
            data.iter()
                .enumerate()
                .map(|(p, &v)| (p / cols, p % cols, v)),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row >= self.rows {
            return 0.0;
        }
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    /// Nonzero entries of one row as `(col, value)`, in column order.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All nonzero entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.iter() {
            out[r * self.cols + c] = v;
        }
        out
    }

    /// `out += self * x`.
    pub fn mul_vec_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *o += acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        self.mul_vec_add(x, &mut out);
        Ok(out)
    }

    pub fn scale(&self, alpha: f64) -> SparseMatrix {
        if alpha == 0.0 {
            return SparseMatrix::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        SparseMatrix::from_triplets(self.rows, self.cols, self.iter().chain(other.iter()))
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut triplets = Vec::new();
        let mut acc = vec![0.0; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if acc[c] == 0.0 {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            for &c in &touched {
                triplets.push((r, c, acc[c]));
                acc[c] = 0.0;
            }
            touched.clear();
        }
        SparseMatrix::from_triplets(self.rows, other.cols, triplets)
    }

    /// Maximum absolute row sum, the norm induced by the sup norm.
    pub fn sup_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Logarithmic norm for the sup norm: `max_i (a_ii + Σ_{j≠i} |a_ij|)`.
    pub fn log_norm(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NonSquareMatrix {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .map(|(c, v)| if c == r { v } else { v.abs() })
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("entries", &self.iter().collect::<Vec<_>>())
            .finish()
    }
}

pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    kron_with(a, b, SizeGuard::DEFAULT)
}

/// Kronecker product; entry `(b.rows*r + v, b.cols*s + w)` equals `a[r,s] * b[v,w]`.
pub fn kron_with(a: &SparseMatrix, b: &SparseMatrix, guard: SizeGuard) -> Result<SparseMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        _ => {
            return Err(Error::AssemblyLimitExceeded {
                rows: a.rows as u128 * b.rows as u128,
                cols: a.cols as u128 * b.cols as u128,
                limit: guard.0,
            })
        }
    };
    guard.check(rows, cols)?;

    let nnz = a.nnz() * b.nnz();
    let mut row_ptr = Vec::with_capacity(rows + 1);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for r in 0..a.rows {
        for v in 0..b.rows {
            for (s, av) in a.row(r) {
                for (w, bv) in b.row(v) {
                    let p = av * bv;
                    // Underflow can still produce an exact zero.
                    if p != 0.0 {
                        col_idx.push(b.cols * s + w);
                        values.push(p);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
    }
    Ok(SparseMatrix {
        rows,
        cols,
        row_ptr,
        col_idx,
        values,
    })
}

/// `x^{[i]} = x ⊗ ... ⊗ x` (`i` factors).
pub fn kron_power_vec(x: &[f64], i: usize) -> Result<Vec<f64>> {
    kron_power_vec_with(x, i, SizeGuard::DEFAULT)
}

pub fn kron_power_vec_with(x: &[f64], i: usize, guard: SizeGuard) -> Result<Vec<f64>> {
    if i == 0 {
        return Err(Error::InvalidArgument(
            "Kronecker power order must be at least 1",
        ));
    }
    let len = checked_pow(x.len(), i).ok_or(Error::AssemblyLimitExceeded {
        rows: u128::MAX,
        cols: 1,
        limit: guard.0,
    })?;
    guard.check_len(len)?;
    let mut out = x.to_vec();
    for _ in 1..i {
        out = kron_vec(&out, x);
    }
    Ok(out)
}

/// `a ⊗ b` for vectors.
pub fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &u in a {
        out.extend(b.iter().map(|&v| u * v));
    }
    out
}

pub fn sup_norm_vec(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sup_norm_mat(a: &SparseMatrix) -> f64 {
    a.sup_norm()
}

pub fn log_norm(a: &SparseMatrix) -> Result<f64> {
    a.log_norm()
}

/// Row-major flat index of a word over the alphabet `{0..n-1}`.
pub fn flat_index(word: &[usize], n: usize) -> usize {
    word.iter().fold(0, |acc, &w| acc * n + w)
}

/// Inverse of [`flat_index`] for words of the given length.
pub fn word_of(mut index: usize, n: usize, len: usize) -> Vec<usize> {
    let mut word = vec![0; len];
    for slot in word.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    word
}

/// `I_n ⊗ ... ⊗ I_n` with `factors` factors, i.e. `I_{n^factors}`.
pub(crate) fn identity_power(n: usize, factors: usize, guard: SizeGuard) -> Result<SparseMatrix> {
    let dim = checked_pow(n, factors).ok_or(Error::AssemblyLimitExceeded {
        rows: u128::MAX,
        cols: u128::MAX,
        limit: guard.0,
    })?;
    guard.check(dim, dim)?;
    Ok(SparseMatrix::identity(dim))
}
