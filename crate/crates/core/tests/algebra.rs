mod common;

use carleman_core::tensor::{kron, kron_power_vec, kron_vec, log_norm, sup_norm_mat, sup_norm_vec};
use carleman_core::SparseMatrix;
use common::*;
use proptest::prelude::*;

const REL: f64 = 1e-12;

fn kron_sum(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let left = kron(a, &SparseMatrix::identity(b.rows())).unwrap();
    let right = kron(&SparseMatrix::identity(a.rows()), b).unwrap();
    left.add(&right).unwrap()
}

fn assert_matrices_close(a: &SparseMatrix, b: &SparseMatrix) {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    for (x, y) in a.to_dense().iter().zip(b.to_dense()) {
        assert!(
            (x - y).abs() <= REL * x.abs().max(y.abs()).max(1.0),
            "{x} vs {y}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn crossnorm(a in any_matrix(), b in any_matrix()) {
        let k = kron(&a, &b).unwrap();
        prop_assert!(close(sup_norm_mat(&k), sup_norm_mat(&a) * sup_norm_mat(&b), REL));
    }

    #[test]
    fn vector_crossnorm(x in prop::collection::vec(-3.0..3.0f64, 1..6), y in prop::collection::vec(-3.0..3.0f64, 1..6)) {
        prop_assert!(close(sup_norm_vec(&kron_vec(&x, &y)), sup_norm_vec(&x) * sup_norm_vec(&y), REL));
    }

    #[test]
    fn log_norm_of_kronecker_sum_is_additive(a in square(4), b in square(4)) {
        let sum = kron_sum(&a, &b);
        let expected = log_norm(&a).unwrap() + log_norm(&b).unwrap();
        prop_assert!((log_norm(&sum).unwrap() - expected).abs() <= REL * expected.abs().max(1.0));
    }

    #[test]
    fn log_norm_ignores_identity_factors(a in square(4), m in 1usize..4) {
        let id = SparseMatrix::identity(m);
        let mu = log_norm(&a).unwrap();
        prop_assert_eq!(log_norm(&kron(&a, &id).unwrap()).unwrap(), mu);
        prop_assert_eq!(log_norm(&kron(&id, &a).unwrap()).unwrap(), mu);
    }

    #[test]
    fn log_norm_bounded_by_norm(a in square(5)) {
        let mu = log_norm(&a).unwrap();
        prop_assert!(mu <= sup_norm_mat(&a));
        prop_assert!(-mu <= sup_norm_mat(&a));
    }

    #[test]
    fn log_norm_subadditive((a, b) in (1usize..5).prop_flat_map(|n| (matrix(n, n), matrix(n, n)))) {
        let lhs = log_norm(&a.add(&b).unwrap()).unwrap();
        let rhs = log_norm(&a).unwrap() + log_norm(&b).unwrap();
        prop_assert!(lhs <= rhs + REL * rhs.abs().max(1.0));
    }

    #[test]
    fn kron_is_bilinear(
        (a, b, c) in (1usize..4, 1usize..4).prop_flat_map(|(r, k)| (matrix(r, k), matrix(r, k), any_matrix())),
        s in -3.0..3.0f64,
    ) {
        let lhs = kron(&a.scale(s).add(&b).unwrap(), &c).unwrap();
        let rhs = kron(&a, &c).unwrap().scale(s).add(&kron(&b, &c).unwrap()).unwrap();
        assert_matrices_close(&lhs, &rhs);
    }

    #[test]
    fn mixed_product(
        (a, c) in (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(r, k, m)| (matrix(r, k), matrix(k, m))),
        (b, d) in (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(r, k, m)| (matrix(r, k), matrix(k, m))),
    ) {
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        assert_matrices_close(&lhs, &rhs);
    }

    #[test]
    fn kron_power_recurrence(x in prop::collection::vec(-1.5..1.5f64, 1..4), i in 1usize..5) {
        let next = kron_power_vec(&x, i + 1).unwrap();
        prop_assert_eq!(&next, &kron_vec(&kron_power_vec(&x, i).unwrap(), &x));
        prop_assert_eq!(next.len(), x.len().pow(i as u32 + 1));
        let norm = sup_norm_vec(&x);
        prop_assert!(close(sup_norm_vec(&next), norm.powi(i as i32 + 1), REL));
    }

    #[test]
    fn kron_matches_matrix_vector_action(
        (a, x) in (1usize..4, 1usize..4).prop_flat_map(|(r, c)| (matrix(r, c), state(c, 2.0))),
        (b, y) in (1usize..4, 1usize..4).prop_flat_map(|(r, c)| (matrix(r, c), state(c, 2.0))),
    ) {
        let lhs = kron(&a, &b).unwrap().mul_vec(&kron_vec(&x, &y)).unwrap();
        let rhs = kron_vec(&a.mul_vec(&x).unwrap(), &b.mul_vec(&y).unwrap());
        for (u, v) in lhs.iter().zip(&rhs) {
            prop_assert!((u - v).abs() <= REL * u.abs().max(v.abs()).max(1.0));
        }
    }
}
