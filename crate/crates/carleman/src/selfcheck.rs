//! The `verify` command: runs the brute-force oracles on random systems and
//! reports one outcome per check.

use carleman_core::carleman::transfer_matrix;
use carleman_core::tensor::{kron, log_norm, sup_norm_mat, SparseMatrix};
use carleman_core::verify::{
    coefficient_bound, nested_integral_closed_form, nested_integral_quadrature, path_sum,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::pipeline::random_quadratic;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest discrepancy seen, in the unit the check compares
    /// (absolute, relative or a ratio to the bound).
    pub worst: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCheckConfig {
    pub seed: u64,
    /// Random systems per randomized check.
    pub cases: usize,
}

impl Default for SelfCheckConfig {
    fn default() -> Self {
        SelfCheckConfig {
            seed: 0,
            cases: 100,
        }
    }
}

pub fn run(config: SelfCheckConfig) -> Vec<CheckOutcome> {
    vec![
        quadrature(),
        path_sum_recurrence(config),
        coefficient_domination(config),
        crossnorm(config),
        kronecker_sum_log_norm(config),
    ]
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn quadrature() -> CheckOutcome {
    let mut out = CheckOutcome {
        name: "nested-integral-quadrature",
        cases: 0,
        failures: 0,
        worst: 0.0,
    };
    for order in 1..=3 {
        for a in [-1.0, 0.0, 0.5, 2.0] {
            for t in [0.5, 1.0] {
                let q = nested_integral_quadrature(order, a, t).expect("order in range");
                let gap = (q - nested_integral_closed_form(order, a, t)).abs();
                out.cases += 1;
                out.worst = out.worst.max(gap);
                out.failures += usize::from(!(gap < 1e-6));
            }
        }
    }
    out
}

fn path_sum_recurrence(config: SelfCheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = CheckOutcome {
        name: "path-sum-recurrence",
        cases: 0,
        failures: 0,
        worst: 0.0,
    };
    for _ in 0..config.cases.div_ceil(10) {
        let ode = random_quadratic(&mut rng, 2);
        for i in 1..=3 {
            for nu in 1..=5 {
                for j in 0..=nu {
                    let lhs = path_sum(&ode, i, nu, j).expect("small path sum");
                    let mut rhs = SparseMatrix::zeros(lhs.rows(), lhs.cols());
                    if j >= 1 {
                        let prev = path_sum(&ode, i, nu - 1, j - 1).expect("small path sum");
                        let step = prev
                            .matmul(&transfer_matrix(&ode, i + j - 1, 2).expect("small"))
                            .expect("shapes");
                        rhs = rhs.add(&step).expect("shapes");
                    }
                    if j < nu {
                        let prev = path_sum(&ode, i, nu - 1, j).expect("small path sum");
                        let step = prev
                            .matmul(&transfer_matrix(&ode, i + j, 1).expect("small"))
                            .expect("shapes");
                        rhs = rhs.add(&step).expect("shapes");
                    }
                    let scale = sup_norm_mat(&lhs).max(1.0);
                    let gap = lhs
                        .to_dense()
                        .iter()
                        .zip(rhs.to_dense())
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                        / scale;
                    out.cases += 1;
                    out.worst = out.worst.max(gap);
                    out.failures += usize::from(!(gap <= 1e-12));
                }
            }
        }
    }
    out
}

fn coefficient_domination(config: SelfCheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut out = CheckOutcome {
        name: "coefficient-bound-domination",
        cases: 0,
        failures: 0,
        worst: 0.0,
    };
    for _ in 0..config.cases {
        let ode = random_quadratic(&mut rng, 2);
        let norms = ode.degree_norms();
        for i in 1..=3 {
            for nu in 0..=5 {
                for j in 0..=nu {
                    let c = sup_norm_mat(&path_sum(&ode, i, nu, j).expect("small path sum"));
                    let bound = coefficient_bound(i, nu, j, norms[0], norms[1]);
                    out.cases += 1;
                    if bound > 0.0 {
                        out.worst = out.worst.max(c / bound);
                    }
                    out.failures += usize::from(c > bound * (1.0 + 1e-12));
                }
            }
        }
    }
    out
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> SparseMatrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
    SparseMatrix::from_dense(rows, cols, &data).expect("finite entries")
}

fn crossnorm(config: SelfCheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(2));
    let mut out = CheckOutcome {
        name: "kronecker-crossnorm",
        cases: 0,
        failures: 0,
        worst: 0.0,
    };
    for _ in 0..config.cases {
        let (r1, c1, r2, c2) = (
            rng.gen_range(1..5),
            rng.gen_range(1..5),
            rng.gen_range(1..5),
            rng.gen_range(1..5),
        );
        let a = random_matrix(&mut rng, r1, c1);
        let b = random_matrix(&mut rng, r2, c2);
        let gap = relative_gap(
            sup_norm_mat(&kron(&a, &b).expect("small")),
            sup_norm_mat(&a) * sup_norm_mat(&b),
        );
        out.cases += 1;
        out.worst = out.worst.max(gap);
        out.failures += usize::from(!(gap <= 1e-12));
    }
    out
}

fn kronecker_sum_log_norm(config: SelfCheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(3));
    let mut out = CheckOutcome {
        name: "kronecker-sum-log-norm",
        cases: 0,
        failures: 0,
        worst: 0.0,
    };
    for _ in 0..config.cases {
        let (n, m) = (rng.gen_range(1..5), rng.gen_range(1..5));
        let a = random_matrix(&mut rng, n, n);
        let b = random_matrix(&mut rng, m, m);
        let sum = kron(&a, &SparseMatrix::identity(m))
            .and_then(|l| l.add(&kron(&SparseMatrix::identity(n), &b)?))
            .expect("small");
        let expected = log_norm(&a).expect("square") + log_norm(&b).expect("square");
        let got = log_norm(&sum).expect("square");
        let gap = (got - expected).abs() / expected.abs().max(1.0);
        out.cases += 1;
        out.worst = out.worst.max(gap);
        out.failures += usize::from(!(gap <= 1e-12));
    }
    out
}
