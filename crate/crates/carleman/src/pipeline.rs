//! End-to-end computations shared by the command-line tool and the test suites.

use carleman_core::bounds::{envelope_e1, envelope_e2, t_star, BoundParams};
use carleman_core::carleman::{reduce_quadratic, QuadraticReduction};
use carleman_core::sim::MonomialLift;
use carleman_core::{PolyOde, Result, SparseMatrix};
use rand::Rng;

use crate::formats::ComparisonRow;

/// Fraction of `T*` up to which measured errors must stay below `E_2`.
pub const SOUNDNESS_FRACTION: f64 = 0.9;

/// A system together with its quadratic reduction and the bound parameters
/// for one initial state.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub reduction: QuadraticReduction,
    pub params: BoundParams,
    /// `x̃(0)`, the initial state of the reduced system.
    pub lifted_x0: Vec<f64>,
    pub t_star: f64,
}

pub fn analyze(ode: &PolyOde, x0: &[f64], alpha: Option<f64>) -> Result<Analysis> {
    let reduction = reduce_quadratic(ode)?;
    let mut params = BoundParams::from_reduction(&reduction, x0)?;
    if let Some(a) = alpha {
        params = params.with_alpha(a)?;
    }
    let lifted_x0 = reduction.lift_initial(x0)?;
    let t_star = t_star(&params);
    Ok(Analysis {
        reduction,
        params,
        lifted_x0,
        t_star,
    })
}

/// Default end time: `0.9 T*`, or 1 when the horizon is infinite.
pub fn default_t_end(t_star: f64) -> f64 {
    if t_star.is_finite() {
        SOUNDNESS_FRACTION * t_star
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub err: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub order: usize,
    pub rows: Vec<ComparisonRow>,
    /// Largest `err / E_2` over samples with `0 < t <= 0.9 T*`.
    pub max_ratio: f64,
    pub violations: Vec<Violation>,
}

/// Measured truncation error of the order-`N` Carleman truncation of the
/// reduced system against both envelopes on the RK4 grid.
pub fn compare(analysis: &Analysis, order: usize, t_end: f64, h: f64) -> Result<Comparison> {
    let lift = MonomialLift::new(&analysis.reduction.system, order)?;
    let errors = lift.truncation_error(&analysis.lifted_x0, t_end, h)?;
    let times: Vec<f64> = errors.iter().map(|&(t, _)| t).collect();
    let e2 = envelope_e2(&analysis.params, order, &times);
    let e1 = envelope_e1(&analysis.params, order, &times);
    let limit = SOUNDNESS_FRACTION * analysis.t_star;

    let mut rows = Vec::with_capacity(times.len());
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for ((&(t, err), &(_, bound_e2)), &(_, bound_e1)) in
        errors.iter().zip(&e2.samples).zip(&e1.samples)
    {
        rows.push(ComparisonRow {
            t,
            err,
            bound_e2,
            bound_e1,
        });
        if t > limit {
            continue;
        }
        if err > bound_e2 {
            violations.push(Violation {
                t,
                err,
                bound: bound_e2,
            });
        }
        if t > 0.0 {
            max_ratio = max_ratio.max(err / bound_e2);
        }
    }
    Ok(Comparison {
        order,
        rows,
        max_ratio,
        violations,
    })
}

/// Quadratic system on `n` variables with every entry of `F_1` and `F_2`
/// drawn from `U(-1, 1)`.
pub fn random_quadratic<R: Rng>(rng: &mut R, n: usize) -> PolyOde {
    let mut draw = |rows: usize, cols: usize| {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SparseMatrix::from_dense(rows, cols, &data).expect("finite entries")
    };
    let f1 = draw(n, n);
    let f2 = draw(n, n * n);
    PolyOde::new(n, vec![f1, f2]).expect("shapes match")
}

/// State with components drawn from `U(-radius, radius)`.
pub fn random_state<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..radius)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use carleman_core::model::van_der_pol;
    use rand::SeedableRng;

    #[test]
    fn van_der_pol_analysis() {
        let a = analyze(&van_der_pol(1.0, 0.6), &[0.0, 0.5], None).unwrap();
        assert_eq!(a.lifted_x0.len(), 6);
        assert!((a.t_star - 0.5768).abs() < 1e-3);
        assert!((default_t_end(a.t_star) - 0.9 * a.t_star).abs() < 1e-15);
        assert_eq!(default_t_end(f64::INFINITY), 1.0);
    }

    #[test]
    fn comparison_is_sound_for_van_der_pol() {
        let a = analyze(&van_der_pol(1.0, 0.6), &[0.0, 0.5], None).unwrap();
        let c = compare(&a, 4, 0.5, 1e-2).unwrap();
        assert!(c.violations.is_empty());
        assert!(c.max_ratio > 0.0 && c.max_ratio < 1.0);
        assert_eq!(c.rows[0].err, 0.0);
        assert_eq!(c.rows.len(), 51);
    }

    #[test]
    fn linear_system_has_no_error() {
        let ode = PolyOde::new(
            2,
            vec![SparseMatrix::from_dense(2, 2, &[-1.0, 0.5, 0.0, -2.0]).unwrap()],
        )
        .unwrap();
        let a = analyze(&ode, &[0.3, -0.4], None).unwrap();
        assert_eq!(a.t_star, f64::INFINITY);
        let c = compare(&a, 3, 1.0, 1e-2).unwrap();
        assert!(c.rows.iter().all(|r| r.err == 0.0 && r.bound_e2 == 0.0));
    }

    #[test]
    fn random_systems_are_reproducible() {
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        assert_eq!(random_quadratic(&mut a, 2), random_quadratic(&mut b, 2));
        let x = random_state(&mut a, 2, 0.5);
        assert!(x.iter().all(|v| v.abs() < 0.5));
    }
}
