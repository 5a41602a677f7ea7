//! Transfer matrices, the truncated Carleman system and the reduction of a
//! degree-`k` system to a quadratic one.
//!
//! With `y_i = x^{[i]}` a solution of `x' = Σ F_j x^{[j]}` satisfies
//! `y_i' = Σ_{j=0}^{k-1} A^i_{i+j} y_{i+j}`, where the transfer matrix
//! `A^i_{i+j-1} = Σ_ν I ⊗ ... ⊗ F_j ⊗ ... ⊗ I` has `F_j` in position `ν`.
//! Truncating at order `N` drops every block `y_{i+j}` with `i + j > N`.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::math::checked_pow;
use crate::model::PolyOde;
use crate::tensor::{identity_power, kron_power_vec_with, kron_with, SizeGuard, SparseMatrix};

/// `A^i_{i+j-1}`, the map from block `y_{i+j-1}` into the derivative of `y_i`.
///
/// `j` past the degree of the system gives the zero matrix.
pub fn transfer_matrix(ode: &PolyOde, i: usize, j: usize) -> Result<SparseMatrix> {
    transfer_matrix_with(ode, i, j, SizeGuard::DEFAULT)
}

pub fn transfer_matrix_with(
    ode: &PolyOde,
    i: usize,
    j: usize,
    guard: SizeGuard,
) -> Result<SparseMatrix> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidArgument("transfer matrix indices start at 1"));
    }
    let n = ode.dim();
    let overflow = Error::AssemblyLimitExceeded {
        rows: u128::MAX,
        cols: u128::MAX,
        limit: guard.0,
    };
    let rows = checked_pow(n, i).ok_or(overflow.clone())?;
    let cols = checked_pow(n, i + j - 1).ok_or(overflow)?;
    guard.check(rows, cols)?;

    let f = match ode.coefficient(j) {
        Some(f) if !f.is_zero() => f,
        _ => return Ok(SparseMatrix::zeros(rows, cols)),
    };

    let mut triplets = Vec::with_capacity(i * f.nnz() * (rows / n));
    for position in 1..=i {
        let left = identity_power(n, position - 1, guard)?;
        let right = identity_power(n, i - position, guard)?;
        let term = kron_with(&kron_with(&left, f, guard)?, &right, guard)?;
        triplets.extend(term.iter());
    }
    SparseMatrix::from_triplets(rows, cols, triplets)
}

/// Concatenation `(x, x^{[2]}, ..., x^{[order]})`.
pub fn lift_state(x: &[f64], order: usize) -> Result<Vec<f64>> {
    lift_state_with(x, order, SizeGuard::DEFAULT)
}

pub fn lift_state_with(x: &[f64], order: usize, guard: SizeGuard) -> Result<Vec<f64>> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "truncation order must be at least 1",
        ));
    }
    let mut out = Vec::new();
    for i in 1..=order {
        out.extend(kron_power_vec_with(x, i, guard)?);
    }
    Ok(out)
}

/// Start offsets of blocks of sizes `n, n^2, ..., n^count`, plus the total.
fn block_layout(n: usize, count: usize, guard: SizeGuard) -> Result<(Vec<usize>, usize)> {
    let mut offsets = Vec::with_capacity(count);
    let mut total: usize = 0;
    for i in 1..=count {
        offsets.push(total);
        let size = checked_pow(n, i).and_then(|s| total.checked_add(s)).ok_or(
            Error::AssemblyLimitExceeded {
                rows: u128::MAX,
                cols: u128::MAX,
                limit: guard.0,
            },
        )?;
        total = size;
    }
    Ok((offsets, total))
}

/// Order-`N` truncation of the Carleman embedding, `ŷ' = A_N ŷ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanSystem {
    pub order: usize,
    pub n: usize,
    pub degree: usize,
    /// Block upper-triangular `A_N` of order `(n^{N+1} - n) / (n - 1)`.
    pub matrix: SparseMatrix,
    /// Start index of each block `ŷ_1, ..., ŷ_N`.
    pub block_offsets: Vec<usize>,
    /// `ŷ(0)`: block `i` is `x0^{[i]}`.
    pub initial_state: Vec<f64>,
}

impl CarlemanSystem {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Index range of block `ŷ_i`, `1 <= i <= N`.
    pub fn block(&self, i: usize) -> Range<usize> {
        let start = self.block_offsets[i - 1];
        let end = self.block_offsets.get(i).copied().unwrap_or(self.dim());
        start..end
    }
}

pub fn assemble(ode: &PolyOde, x0: &[f64], order: usize) -> Result<CarlemanSystem> {
    assemble_with(ode, x0, order, SizeGuard::DEFAULT)
}

/// Assembles `A_N` with null closure: block `(i, i+j)` is `A^i_{i+j}` for
/// `0 <= j <= min(k-1, N-i)`.
pub fn assemble_with(
    ode: &PolyOde,
    x0: &[f64],
    order: usize,
    guard: SizeGuard,
) -> Result<CarlemanSystem> {
    let n = ode.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    if order == 0 {
        return Err(Error::InvalidArgument(
            "truncation order must be at least 1",
        ));
    }
    let (block_offsets, dim) = block_layout(n, order, guard)?;
    guard.check(dim, dim)?;

    let k = ode.degree();
    let mut triplets = Vec::new();
    for i in 1..=order {
        for j in 0..k.min(order - i + 1) {
            let block = transfer_matrix_with(ode, i, j + 1, guard)?;
            let (r0, c0) = (block_offsets[i - 1], block_offsets[i + j - 1]);
            triplets.extend(block.iter().map(|(r, c, v)| (r0 + r, c0 + c, v)));
        }
    }
    let matrix = SparseMatrix::from_triplets(dim, dim, triplets)?;
    let initial_state = lift_state_with(x0, order, guard)?;
    Ok(CarlemanSystem {
        order,
        n,
        degree: k,
        matrix,
        block_offsets,
        initial_state,
    })
}

/// A degree-`k` system rewritten as `x̃' = F̃_1 x̃ + F̃_2 x̃^{[2]}` in the
/// variables `x̃ = (x, x^{[2]}, ..., x^{[k-1]})`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticReduction {
    pub system: PolyOde,
    /// Sizes `n, n^2, ..., n^{k-1}` of the blocks of `x̃` (just `[n]` for `k <= 2`).
    pub block_dims: Vec<usize>,
    /// `‖F̃_1‖`, computed on the assembled matrix.
    pub norm_f1: f64,
    /// `‖F̃_2‖`, computed on the assembled matrix.
    pub norm_f2: f64,
}

impl QuadraticReduction {
    /// Number of lifted blocks, `max(k - 1, 1)`.
    pub fn lift_order(&self) -> usize {
        self.block_dims.len()
    }

    pub fn linear_part(&self) -> SparseMatrix {
        self.system.coefficient_or_zero(1)
    }

    pub fn quadratic_part(&self) -> SparseMatrix {
        self.system.coefficient_or_zero(2)
    }

    /// `x̃(0)` for an initial state of the original system.
    pub fn lift_initial(&self, x0: &[f64]) -> Result<Vec<f64>> {
        lift_state(x0, self.lift_order())
    }
}

pub fn reduce_quadratic(ode: &PolyOde) -> Result<QuadraticReduction> {
    reduce_quadratic_with(ode, SizeGuard::DEFAULT)
}

pub fn reduce_quadratic_with(ode: &PolyOde, guard: SizeGuard) -> Result<QuadraticReduction> {
    let n = ode.dim();
    let k = ode.degree();
    if k <= 2 {
        let system = ode.clone();
        let norm_f1 = system.coefficient_or_zero(1).sup_norm();
        let norm_f2 = system.coefficient(2).map_or(0.0, SparseMatrix::sup_norm);
        return Ok(QuadraticReduction {
            system,
            block_dims: alloc::vec![n],
            norm_f1,
            norm_f2,
        });
    }

    let blocks = k - 1;
    let (offsets, dim) = block_layout(n, blocks, guard)?;
    let square = dim.checked_mul(dim).ok_or(Error::AssemblyLimitExceeded {
        rows: dim as u128,
        cols: (dim as u128).pow(2),
        limit: guard.0,
    })?;
    guard.check(dim, square)?;
    let block_dims: Vec<usize> = (1..=blocks).map(|i| n.pow(i as u32)).collect();

    let mut linear = Vec::new();
    let mut quadratic = Vec::new();
    let last_offset = offsets[blocks - 1];
    let last_dim = block_dims[blocks - 1];
    for i in 1..=blocks {
        let r0 = offsets[i - 1];
        // Linear part: A^i_{i+j} for i + j <= k - 1.
        for j in 0..=(blocks - i) {
            let block = transfer_matrix_with(ode, i, j + 1, guard)?;
            let c0 = offsets[i + j - 1];
            linear.extend(block.iter().map(|(r, c, v)| (r0 + r, c0 + c, v)));
        }
        // Quadratic part: A^i_{k-1+m} acting on x̃_m ⊗ x̃_{k-1}, 1 <= m <= i.
        for m in 1..=i {
            let block = transfer_matrix_with(ode, i, k - i + m, guard)?;
            let m_offset = offsets[m - 1];
            quadratic.extend(block.iter().map(|(r, c, v)| {
                let (u, w) = (c / last_dim, c % last_dim);
                (r0 + r, (m_offset + u) * dim + last_offset + w, v)
            }));
        }
    }
    let f1 = SparseMatrix::from_triplets(dim, dim, linear)?;
    let f2 = SparseMatrix::from_triplets(dim, square, quadratic)?;
    let norm_f1 = f1.sup_norm();
    let norm_f2 = f2.sup_norm();
    let system = PolyOde::new(dim, alloc::vec![f1, f2])?;
    Ok(QuadraticReduction {
        system,
        block_dims,
        norm_f1,
        norm_f2,
    })
}
