//! Polynomial ODE model `x' = Σ_{j=1}^{k} F_j x^{[j]}`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::checked_pow;
use crate::tensor::{flat_index, kron_vec, word_of, SizeGuard, SparseMatrix};

/// One term `coeff * x_1^{e_1} ... x_n^{e_n}` of a right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: f64, exponents: Vec<u32>) -> Self {
        Monomial { coeff, exponents }
    }

    pub fn degree(&self) -> usize {
        self.exponents.iter().map(|&e| e as usize).sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .fold(self.coeff, |acc, (&e, &xi)| acc * crate::math::powi(xi, e))
    }
}

/// A polynomial vector field with `f(0) = 0`, stored as its coefficient
/// matrices `F_1, ..., F_k` (`F_j` is `n x n^j`).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyOde {
    n: usize,
    coefficients: Vec<SparseMatrix>,
}

impl PolyOde {
    /// Validates shapes and trims trailing zero coefficients so that the
    /// degree is the true degree. A system whose every coefficient is zero
    /// keeps `F_1 = 0` and has degree 1.
    pub fn new(n: usize, mut coefficients: Vec<SparseMatrix>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSystem("state dimension must be positive"));
        }
        if coefficients.is_empty() {
            return Err(Error::InvalidSystem(
                "at least the linear coefficient F_1 is required",
            ));
        }
        for (idx, f) in coefficients.iter().enumerate() {
            let cols = checked_pow(n, idx + 1)
                .ok_or(Error::InvalidSystem("coefficient shape overflows"))?;
            if f.rows() != n || f.cols() != cols {
                return Err(Error::DimensionMismatch {
                    expected: n * cols,
                    found: f.rows() * f.cols(),
                });
            }
        }
        while coefficients.len() > 1 && coefficients.last().is_some_and(SparseMatrix::is_zero) {
            coefficients.pop();
        }
        Ok(PolyOde { n, coefficients })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    /// `F_j` for `1 <= j <= k`.
    pub fn coefficient(&self, j: usize) -> Option<&SparseMatrix> {
        j.checked_sub(1).and_then(|idx| self.coefficients.get(idx))
    }

    pub fn coefficients(&self) -> &[SparseMatrix] {
        &self.coefficients
    }

    /// `F_j`, or the `n x n^j` zero matrix past the degree.
    pub fn coefficient_or_zero(&self, j: usize) -> SparseMatrix {
        match self.coefficient(j) {
            Some(f) => f.clone(),
            None => SparseMatrix::zeros(self.n, checked_pow(self.n, j).unwrap_or(usize::MAX)),
        }
    }

    /// `Σ F_j x^{[j]}`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut power = x.to_vec();
        for (idx, f) in self.coefficients.iter().enumerate() {
            if idx > 0 {
                power = kron_vec(&power, x);
            }
            if !f.is_zero() {
                f.mul_vec_add(&power, out);
            }
        }
    }

    /// Sup norms `(‖F_1‖, ..., ‖F_k‖)`.
    pub fn degree_norms(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(SparseMatrix::sup_norm)
            .collect()
    }

    /// Collapses every coefficient matrix back into monomials, merging all
    /// columns that represent the same monomial. Terms are ordered by degree,
    /// then by exponent vector.
    pub fn to_monomials(&self) -> Vec<Vec<Monomial>> {
        type Key = (usize, Vec<core::cmp::Reverse<u32>>);
        let mut rows: Vec<BTreeMap<Key, f64>> = vec![BTreeMap::new(); self.n];
        for (idx, f) in self.coefficients.iter().enumerate() {
            let degree = idx + 1;
            for (r, c, v) in f.iter() {
                let exps = exponents_of_column(c, self.n, degree);
                let key = (degree, exps.into_iter().map(core::cmp::Reverse).collect());
                *rows[r].entry(key).or_insert(0.0) += v;
            }
        }
        rows.into_iter()
            .map(|terms| {
                terms
                    .into_iter()
                    .filter(|(_, v)| *v != 0.0)
                    .map(|((_, exps), coeff)| {
                        Monomial::new(coeff, exps.into_iter().map(|e| e.0).collect())
                    })
                    .collect()
            })
            .collect()
    }
}

/// Exponent vector of the monomial sitting in column `col` of `x^{[degree]}`.
pub fn exponents_of_column(col: usize, n: usize, degree: usize) -> Vec<u32> {
    let mut exps = vec![0u32; n];
    for letter in word_of(col, n, degree) {
        exps[letter] += 1;
    }
    exps
}

/// Column of `x^{[degree]}` holding a monomial: the lexicographically smallest
/// word with the given letter multiset, i.e. the sorted word.
pub fn canonical_column(exponents: &[u32]) -> usize {
    let n = exponents.len();
    let word: Vec<usize> = exponents
        .iter()
        .enumerate()
        .flat_map(|(letter, &e)| core::iter::repeat_n(letter, e as usize))
        .collect();
    flat_index(&word, n)
}

/// Builds the coefficient matrices from per-equation monomial lists.
pub fn compile(rhs: &[Vec<Monomial>], n: usize) -> Result<PolyOde> {
    compile_with(rhs, n, SizeGuard::DEFAULT)
}

pub fn compile_with(rhs: &[Vec<Monomial>], n: usize, guard: SizeGuard) -> Result<PolyOde> {
    if n == 0 {
        return Err(Error::InvalidSystem("state dimension must be positive"));
    }
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    let mut per_degree: Vec<Vec<(usize, usize, f64)>> = Vec::new();
    for (equation, terms) in rhs.iter().enumerate() {
        for term in terms {
            if term.exponents.len() != n {
                return Err(Error::ExponentLengthMismatch {
                    equation,
                    expected: n,
                    found: term.exponents.len(),
                });
            }
            if !term.coeff.is_finite() {
                return Err(Error::NonFinite {
                    row: equation,
                    col: 0,
                    value: term.coeff,
                });
            }
            if term.coeff == 0.0 {
                continue;
            }
            let degree = term.degree();
            if degree == 0 {
                return Err(Error::DegreeZeroTerm { equation });
            }
            if per_degree.len() < degree {
                per_degree.resize(degree, Vec::new());
            }
            per_degree[degree - 1].push((equation, canonical_column(&term.exponents), term.coeff));
        }
    }
    if per_degree.is_empty() {
        per_degree.push(Vec::new());
    }
    let mut coefficients = Vec::with_capacity(per_degree.len());
    for (idx, triplets) in per_degree.into_iter().enumerate() {
        let cols = checked_pow(n, idx + 1).ok_or(Error::AssemblyLimitExceeded {
            rows: n as u128,
            cols: u128::MAX,
            limit: guard.0,
        })?;
        guard.check(n, cols)?;
        coefficients.push(SparseMatrix::from_triplets(n, cols, triplets)?);
    }
    PolyOde::new(n, coefficients)
}

/// The Van der Pol oscillator `x1' = x2, x2' = -ω² x1 + r (1 - x1²) x2`.
pub fn van_der_pol(omega: f64, damping: f64) -> PolyOde {
    let rhs = vec![
        vec![Monomial::new(1.0, vec![0, 1])],
        vec![
            Monomial::new(-omega * omega, vec![1, 0]),
            Monomial::new(damping, vec![0, 1]),
            Monomial::new(-damping, vec![2, 1]),
        ],
    ];
    compile(&rhs, 2).expect("van der pol is a valid cubic system")
}
