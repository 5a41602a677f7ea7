#![allow(dead_code)]

use carleman_core::{PolyOde, SparseMatrix};
use proptest::prelude::*;

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn entries(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => -2.0..2.0f64], len)
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
    entries(rows * cols).prop_map(move |v| SparseMatrix::from_dense(rows, cols, &v).unwrap())
}

pub fn any_matrix() -> impl Strategy<Value = SparseMatrix> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| matrix(r, c))
}

pub fn square(max: usize) -> impl Strategy<Value = SparseMatrix> {
    (1..=max).prop_flat_map(|n| matrix(n, n))
}

/// Multiples of 1/8 in [-4, 4]: every sum and product formed by the
/// assembly stays exactly representable.
pub fn dyadic_matrix(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec(-32i32..=32, rows * cols).prop_map(move |v| {
        let data: Vec<f64> = v.into_iter().map(|k| k as f64 / 8.0).collect();
        SparseMatrix::from_dense(rows, cols, &data).unwrap()
    })
}

/// Random `x' = F_1 x + ... + F_k x^{[k]}` with `1 <= n <= max_n`.
pub fn poly_ode(max_n: usize, degree: usize) -> impl Strategy<Value = PolyOde> {
    (1..=max_n).prop_flat_map(move |n| {
        let mats: Vec<_> = (1..=degree)
            .map(|j| matrix(n, n.pow(j as u32)).boxed())
            .collect();
        mats.prop_map(move |m| PolyOde::new(n, m).unwrap())
    })
}

pub fn quadratic(n: usize) -> impl Strategy<Value = PolyOde> {
    (matrix(n, n), matrix(n, n * n)).prop_map(move |(a, b)| PolyOde::new(n, vec![a, b]).unwrap())
}

pub fn state(n: usize, radius: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-radius..radius, n)
}

/// Uniform quadratic system on `n` variables drawn from a seeded generator.
pub fn random_quadratic<R: rand::Rng>(rng: &mut R, n: usize) -> PolyOde {
    let f1: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f2: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PolyOde::new(
        n,
        vec![
            SparseMatrix::from_dense(n, n, &f1).unwrap(),
            SparseMatrix::from_dense(n, n * n, &f2).unwrap(),
        ],
    )
    .unwrap()
}

/// `x' = -f(x)`.
pub fn reversed(ode: &PolyOde) -> PolyOde {
    PolyOde::new(
        ode.dim(),
        ode.coefficients().iter().map(|f| f.scale(-1.0)).collect(),
    )
    .unwrap()
}
