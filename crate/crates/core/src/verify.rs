//! Brute-force reference implementations used to check the Carleman machinery:
//! path sums of transfer matrices, Taylor coefficients built from them, nested
//! exponential integrals by quadrature, and the closed-form coefficient bound.
//!
//! Everything here favours transparency over speed. Path sums enumerate every
//! path instead of using the recurrence they are meant to check.

use alloc::vec;
use alloc::vec::Vec;

use crate::carleman::transfer_matrix_with;
use crate::error::{Error, Result};
use crate::math::{exp, expm1, powi};
use crate::model::PolyOde;
use crate::tensor::{kron_power_vec_with, SizeGuard, SparseMatrix};

/// A monotone index sequence `α_1 <= ... <= α_m` with unit or zero steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub levels: Vec<usize>,
}

impl Path {
    pub fn start(&self) -> usize {
        self.levels[0]
    }

    pub fn end(&self) -> usize {
        *self.levels.last().expect("paths are never empty")
    }

    pub fn jumps(&self) -> usize {
        self.levels.len() - 1
    }
}

/// All paths from `i` to `i + j` with `nu` steps, in lexicographic order of
/// their step patterns (zero steps first). There are `C(nu, j)` of them.
pub fn paths(i: usize, nu: usize, j: usize) -> Vec<Path> {
    let mut out = Vec::new();
    if j > nu {
        return out;
    }
    let mut levels = vec![i];
    extend_paths(nu, j, &mut levels, &mut out);
    out
}

fn extend_paths(steps_left: usize, ups_left: usize, levels: &mut Vec<usize>, out: &mut Vec<Path>) {
    if steps_left == 0 {
        out.push(Path {
            levels: levels.clone(),
        });
        return;
    }
    let current = *levels.last().unwrap();
    if steps_left > ups_left {
        levels.push(current);
        extend_paths(steps_left - 1, ups_left, levels, out);
        levels.pop();
    }
    if ups_left > 0 {
        levels.push(current + 1);
        extend_paths(steps_left - 1, ups_left - 1, levels, out);
        levels.pop();
    }
}

fn require_quadratic(ode: &PolyOde) -> Result<()> {
    if ode.degree() > 2 {
        return Err(Error::NotQuadratic {
            degree: ode.degree(),
        });
    }
    Ok(())
}

/// `C^{(ν)}_{i,i+j}`: the sum over all paths of the products
/// `A^{α_1}_{α_2} A^{α_2}_{α_3} ...` of transfer matrices.
pub fn path_sum(ode: &PolyOde, i: usize, nu: usize, j: usize) -> Result<SparseMatrix> {
    path_sum_with(ode, i, nu, j, SizeGuard::DEFAULT)
}

pub fn path_sum_with(
    ode: &PolyOde,
    i: usize,
    nu: usize,
    j: usize,
    guard: SizeGuard,
) -> Result<SparseMatrix> {
    require_quadratic(ode)?;
    if i == 0 {
        return Err(Error::InvalidArgument("block index starts at 1"));
    }
    if j > nu {
        return Err(Error::InvalidArgument(
            "a path of nu steps rises at most nu levels",
        ));
    }
    if nu == 0 {
        let size = crate::math::checked_pow(ode.dim(), i).ok_or(Error::AssemblyLimitExceeded {
            rows: u128::MAX,
            cols: u128::MAX,
            limit: guard.0,
        })?;
        guard.check(size, size)?;
        return Ok(SparseMatrix::identity(size));
    }

    // stay[c] = A^{i+c}_{i+c}, rise[c] = A^{i+c}_{i+c+1}
    let mut stay = Vec::with_capacity(j + 1);
    let mut rise = Vec::with_capacity(j);
    for c in 0..=j {
        stay.push(transfer_matrix_with(ode, i + c, 1, guard)?);
        if c < j {
            rise.push(transfer_matrix_with(ode, i + c, 2, guard)?);
        }
    }

    let mut total: Option<SparseMatrix> = None;
    for path in paths(i, nu, j) {
        let mut product: Option<SparseMatrix> = None;
        for step in path.levels.windows(2) {
            let level = step[0] - i;
            let factor = if step[1] == step[0] {
                &stay[level]
            } else {
                &rise[level]
            };
            product = Some(match product {
                None => factor.clone(),
                Some(p) => {
                    guard.check(p.rows(), factor.cols())?;
                    p.matmul(factor)?
                }
            });
        }
        let product = product.expect("nu >= 1");
        total = Some(match total {
            None => product,
            Some(t) => t.add(&product)?,
        });
    }
    Ok(total.expect("at least one path"))
}

/// `χ_{i,ν} = Σ_{j=0}^{ν} C^{(ν)}_{i,i+j} x0^{[i+j]}`, the `ν`-th time
/// derivative of `x^{[i]}` at `t = 0`.
pub fn taylor_coefficient(ode: &PolyOde, x0: &[f64], i: usize, nu: usize) -> Result<Vec<f64>> {
    taylor_sum(ode, x0, i, nu, nu)
}

/// As [`taylor_coefficient`] for the order-`N` truncation: only blocks up to
/// `N` contribute, i.e. `j <= N - i`.
pub fn truncated_taylor_coefficient(
    ode: &PolyOde,
    x0: &[f64],
    i: usize,
    nu: usize,
    order: usize,
) -> Result<Vec<f64>> {
    if i > order {
        return Err(Error::InvalidArgument(
            "block index exceeds the truncation order",
        ));
    }
    taylor_sum(ode, x0, i, nu, nu.min(order - i))
}

fn taylor_sum(ode: &PolyOde, x0: &[f64], i: usize, nu: usize, max_j: usize) -> Result<Vec<f64>> {
    if x0.len() != ode.dim() {
        return Err(Error::DimensionMismatch {
            expected: ode.dim(),
            found: x0.len(),
        });
    }
    let guard = SizeGuard::DEFAULT;
    let mut out: Option<Vec<f64>> = None;
    for j in 0..=max_j {
        let c = path_sum_with(ode, i, nu, j, guard)?;
        let power = kron_power_vec_with(x0, i + j, guard)?;
        let acc = out.get_or_insert_with(|| vec![0.0; c.rows()]);
        c.mul_vec_add(&power, acc);
    }
    Ok(out.expect("j = 0 always contributes"))
}

/// Closed form of the nested integral, `(e^{at} - 1)^N / (N! a^N)`, with the
/// `a = 0` value `t^N / N!`.
pub fn nested_integral_closed_form(order: usize, a: f64, t: f64) -> f64 {
    let base = if a == 0.0 { t } else { expm1(a * t) / a };
    powi(base, order as u32) / factorial(order)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Simpson intervals per level so that the `N`-fold recursion stays near 10^7
/// integrand evaluations.
pub fn default_intervals(order: usize) -> usize {
    match order {
        0..=2 => 2000,
        3 => 200,
        _ => 50,
    }
}

/// The `N`-fold integral of `e^{a(-N s_0 + s_1 + ... + s_N)}` over
/// `0 <= s_0 <= s_1 <= ... <= s_{N-1} <= s_N = t`, by recursive composite
/// Simpson quadrature with one level per integration variable.
pub fn nested_integral_quadrature(order: usize, a: f64, t: f64) -> Result<f64> {
    nested_integral_quadrature_with(order, a, t, default_intervals(order))
}

pub fn nested_integral_quadrature_with(
    order: usize,
    a: f64,
    t: f64,
    intervals: usize,
) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidArgument(
            "nested quadrature supports 1 <= N <= 4",
        ));
    }
    if intervals == 0 || !a.is_finite() || !t.is_finite() {
        return Err(Error::InvalidArgument(
            "quadrature needs finite inputs and at least one interval",
        ));
    }
    let m = intervals + intervals % 2;
    let outer = if a == 0.0 { 1.0 } else { exp(a * t) };
    Ok(outer * inner_integral(order - 1, order, a, t, m))
}

// J_0(s) = ∫_0^s e^{-aN u} du and J_l(s) = ∫_0^s e^{au} J_{l-1}(u) du. With
// a = 0 every weight is 1 and the integrands are plain polynomials.
fn inner_integral(level: usize, order: usize, a: f64, s: f64, m: usize) -> f64 {
    let weight = |u: f64, rate: f64| if a == 0.0 { 1.0 } else { exp(rate * u) };
    if level == 0 {
        return simpson(|u| weight(u, -a * order as f64), s, m);
    }
    simpson(
        |u| weight(u, a) * inner_integral(level - 1, order, a, u, m),
        s,
        m,
    )
}

fn simpson<F: Fn(f64) -> f64>(f: F, s: f64, m: usize) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let h = s / m as f64;
    let mut sum = f(0.0) + f(s);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(k as f64 * h);
    }
    sum * h / 3.0
}

fn binomial(n: u64, k: u64) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, r| acc * (n - r) as i128 / (r + 1) as i128)
}

/// `binom(i+j-1, j) Σ_k binom(j,k) (-1)^{j-k} (i+k)^ν` in exact integers, or
/// `None` on overflow.
pub fn coefficient_bound_integer(i: usize, nu: usize, j: usize) -> Option<i128> {
    if i == 0 || j > nu {
        return None;
    }
    let mut sum = 0i128;
    for k in 0..=j {
        let term =
            binomial(j as u64, k as u64).checked_mul(((i + k) as i128).checked_pow(nu as u32)?)?;
        sum = if (j - k).is_multiple_of(2) {
            sum.checked_add(term)?
        } else {
            sum.checked_sub(term)?
        };
    }
    binomial((i + j - 1) as u64, j as u64).checked_mul(sum)
}

/// `‖F_1‖^{ν-j} ‖F_2‖^j binom(i+j-1, j) Σ_k binom(j,k) (-1)^{j-k} (i+k)^ν`,
/// an upper bound on `‖C^{(ν)}_{i,i+j}‖`. Panics if the integer factor
/// overflows `i128`, far beyond any size a path sum can be formed at.
pub fn coefficient_bound(i: usize, nu: usize, j: usize, norm_f1: f64, norm_f2: f64) -> f64 {
    let c = coefficient_bound_integer(i, nu, j).expect("coefficient bound arguments out of range");
    powi(norm_f1, (nu - j) as u32) * powi(norm_f2, j as u32) * c as f64
}
