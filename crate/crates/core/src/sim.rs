//! Fixed-step RK4 integration of the nonlinear system and of its Carleman
//! truncations, and measurement of the truncation error `ε(t) = x(t) - x̂(t)`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::carleman::{assemble, CarlemanSystem};
use crate::error::{Error, Result};
use crate::math::powi;
use crate::model::{Monomial, PolyOde};
use crate::tensor::{SizeGuard, SparseMatrix};

/// Any state component beyond this magnitude counts as a blow-up.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;

pub const DEFAULT_STEP: f64 = 1e-3;

/// States sampled on a strictly increasing time grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }

    /// Sample closest to `t`.
    pub fn at(&self, t: f64) -> Option<&[f64]> {
        let idx = self.times.partition_point(|&s| s < t);
        let candidates = [idx.checked_sub(1), Some(idx)];
        candidates
            .into_iter()
            .flatten()
            .filter(|&i| i < self.len())
            .min_by(|&a, &b| {
                (self.times[a] - t)
                    .abs()
                    .total_cmp(&(self.times[b] - t).abs())
            })
            .map(|i| self.states[i].as_slice())
    }
}

/// `0, h, 2h, ...` up to `t_end`, with a final partial step when `h` does not
/// divide `t_end`.
pub fn time_grid(t_end: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument("step must be positive"));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument("end time must be positive"));
    }
    let ratio = t_end / h;
    // Absorb rounding in t_end / h so that e.g. 1.0 / 1e-3 gives 1000 steps.
    let steps = libm::ceil(ratio - 1e-9 * ratio.max(1.0)) as usize;
    let steps = steps.max(1);
    let mut grid: Vec<f64> = (0..steps).map(|k| k as f64 * h).collect();
    grid.push(t_end);
    Ok(grid)
}

fn blew_up(x: &[f64]) -> bool {
    x.iter().any(|v| !(v.abs() <= OVERFLOW_THRESHOLD))
}

/// Classical RK4 on `x' = rhs(x)` over [`time_grid`].
pub fn rk4<F>(x0: &[f64], t_end: f64, h: f64, mut rhs: F) -> Result<Trajectory>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let grid = time_grid(t_end, h)?;
    let dim = x0.len();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.len()),
        states: Vec::with_capacity(grid.len()),
    };
    traj.times.push(0.0);
    traj.states.push(x0.to_vec());
    let mut x = x0.to_vec();
    for w in grid.windows(2) {
        let dt = w[1] - w[0];
        rhs(&x, &mut k1);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = x[i] + dt * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..dim {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if blew_up(&x) {
            return Err(Error::BlowUp {
                time: w[1],
                trajectory: Box::new(traj),
            });
        }
        traj.times.push(w[1]);
        traj.states.push(x.clone());
    }
    Ok(traj)
}

/// RK4 on `x' = Σ F_j x^{[j]}`.
pub fn integrate_nonlinear(ode: &PolyOde, x0: &[f64], t_end: f64, h: f64) -> Result<Trajectory> {
    if x0.len() != ode.dim() {
        return Err(Error::DimensionMismatch {
            expected: ode.dim(),
            found: x0.len(),
        });
    }
    rk4(x0, t_end, h, |x, dx| ode.eval_into(x, dx))
}

/// RK4 on `ŷ' = A_N ŷ` from the lifted initial state; states are full lifted vectors.
pub fn integrate_truncated(sys: &CarlemanSystem, t_end: f64, h: f64) -> Result<Trajectory> {
    integrate_linear(&sys.matrix, &sys.initial_state, t_end, h)
}

pub fn integrate_linear(
    matrix: &SparseMatrix,
    y0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    if !matrix.is_square() || y0.len() != matrix.cols() {
        return Err(Error::DimensionMismatch {
            expected: matrix.cols(),
            found: y0.len(),
        });
    }
    rk4(y0, t_end, h, |y, dy| {
        dy.iter_mut().for_each(|v| *v = 0.0);
        matrix.mul_vec_add(y, dy);
    })
}

/// Components `0..n` of every state.
pub fn first_block(traj: &Trajectory, n: usize) -> Trajectory {
    Trajectory {
        times: traj.times.clone(),
        states: traj
            .states
            .iter()
            .map(|s| s[..n.min(s.len())].to_vec())
            .collect(),
    }
}

/// `(t, ‖x(t) - x̂(t)‖)` from separate integrations of the nonlinear system and
/// its order-`N` truncation on the same grid.
///
/// The subtraction loses all relative accuracy once the error drops to the
/// rounding level of the states; [`MonomialLift::truncation_error`] integrates
/// the error itself and does not.
pub fn measured_error(
    ode: &PolyOde,
    x0: &[f64],
    order: usize,
    t_end: f64,
    h: f64,
) -> Result<Vec<(f64, f64)>> {
    let sys = assemble(ode, x0, order)?;
    let exact = integrate_nonlinear(ode, x0, t_end, h)?;
    let truncated = integrate_truncated(&sys, t_end, h)?;
    let n = ode.dim();
    Ok(exact
        .times
        .iter()
        .zip(exact.states.iter().zip(&truncated.states))
        .map(|(&t, (x, y))| {
            let err = x
                .iter()
                .zip(&y[..n])
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            (t, err)
        })
        .collect())
}

/// The order-`N` Carleman truncation written over the distinct monomials of
/// degree `1..=N` instead of over Kronecker powers.
///
/// Kronecker powers repeat each monomial once per ordering of its factors; the
/// truncated Carleman flow keeps those copies equal, so tracking one coordinate
/// per monomial gives exactly the same first block with `C(N+n, n) - 1`
/// coordinates instead of `(n^{N+1} - n) / (n - 1)`.
#[derive(Debug, Clone)]
pub struct MonomialLift {
    n: usize,
    order: usize,
    basis: Vec<Vec<u32>>,
    matrix: SparseMatrix,
    /// Terms of degree above `N` dropped by the truncation: `(row, coeff, exponents)`.
    closure: Vec<(usize, f64, Vec<u32>)>,
    ode: PolyOde,
}

fn monomials_of_degree(n: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == n - 1 {
        prefix.push(degree);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=degree).rev() {
        prefix.push(e);
        monomials_of_degree(n, degree - e, prefix, out);
        prefix.pop();
    }
}

impl MonomialLift {
    pub fn new(ode: &PolyOde, order: usize) -> Result<Self> {
        Self::with_guard(ode, order, SizeGuard::DEFAULT)
    }

    pub fn with_guard(ode: &PolyOde, order: usize, guard: SizeGuard) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "truncation order must be at least 1",
            ));
        }
        let n = ode.dim();
        let mut basis = Vec::new();
        for d in 1..=order {
            monomials_of_degree(n, d as u32, &mut Vec::with_capacity(n), &mut basis);
            guard.check_len(basis.len())?;
        }
        let index: BTreeMap<&[u32], usize> = basis
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice(), i))
            .collect();
        let field: Vec<Vec<Monomial>> = ode.to_monomials();

        let mut triplets = Vec::new();
        let mut closure = Vec::new();
        let mut target = vec![0u32; n];
        for (row, m) in basis.iter().enumerate() {
            let degree: usize = m.iter().map(|&e| e as usize).sum();
            for (v, &mv) in m.iter().enumerate() {
                if mv == 0 {
                    continue;
                }
                for term in &field[v] {
                    for (slot, (&a, &b)) in target.iter_mut().zip(m.iter().zip(&term.exponents)) {
                        *slot = a + b;
                    }
                    target[v] -= 1;
                    let coeff = mv as f64 * term.coeff;
                    if degree - 1 + term.degree() <= order {
                        triplets.push((row, index[target.as_slice()], coeff));
                    } else {
                        closure.push((row, coeff, target.clone()));
                    }
                }
            }
        }
        let dim = basis.len();
        let matrix = SparseMatrix::from_triplets(dim, dim, triplets)?;
        Ok(MonomialLift {
            n,
            order,
            basis,
            matrix,
            closure,
            ode: ode.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Exponent vectors of the lifted coordinates; the first `n` are `x_1..x_n`.
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Values of all basis monomials at `x`.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|e| monomial_value(e, x)).collect()
    }

    /// RK4 on the truncated system from the lifted `x0`.
    pub fn integrate(&self, x0: &[f64], t_end: f64, h: f64) -> Result<Trajectory> {
        self.check_state(x0)?;
        integrate_linear(&self.matrix, &self.lift(x0), t_end, h)
    }

    /// `(t, ‖ε(t)‖)` obtained by integrating the error of the lifted state,
    /// `η' = A_N η + r(x(t))`, `η(0) = 0`, jointly with `x' = f(x)`. The forcing
    /// `r` collects the monomials of degree above `N` cut by the truncation.
    pub fn truncation_error(&self, x0: &[f64], t_end: f64, h: f64) -> Result<Vec<(f64, f64)>> {
        self.check_state(x0)?;
        let n = self.n;
        let mut z0 = vec![0.0; n + self.dim()];
        z0[..n].copy_from_slice(x0);
        let traj = rk4(&z0, t_end, h, |z, dz| {
            let (x, eta) = z.split_at(n);
            let (dx, deta) = dz.split_at_mut(n);
            self.ode.eval_into(x, dx);
            deta.iter_mut().for_each(|v| *v = 0.0);
            self.matrix.mul_vec_add(eta, deta);
            for (row, coeff, exps) in &self.closure {
                deta[*row] += coeff * monomial_value(exps, x);
            }
        })?;
        Ok(traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, z)| (t, z[n..2 * n].iter().fold(0.0f64, |m, v| m.max(v.abs()))))
            .collect())
    }

    fn check_state(&self, x0: &[f64]) -> Result<()> {
        if x0.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x0.len(),
            });
        }
        Ok(())
    }
}

fn monomial_value(exponents: &[u32], x: &[f64]) -> f64 {
    exponents.iter().zip(x).fold(
        1.0,
        |acc, (&e, &xi)| if e == 0 { acc } else { acc * powi(xi, e) },
    )
}
