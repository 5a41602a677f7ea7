//! Explicit truncation-error envelopes for quadratic systems
//! `x' = F_1 x + F_2 x^{[2]}`.
//!
//! * `E_1(t) = α^{N+1} ‖F_2‖^N ((e^{μ t} - 1) / μ)^N` with `μ = μ(F_1)` and
//!   `α` an a-priori bound on `sup_{[0,t]} ‖x‖`.
//! * `E_2(t) = ‖x_0‖ e^{‖F_1‖ t} [β_0 (e^{‖F_1‖ t} - 1)]^N / ((1 + β_0) - β_0 e^{‖F_1‖ t})`
//!   with `β_0 = ‖x_0‖ ‖F_2‖ / ‖F_1‖`, finite for `t < T* = ln(1 + 1/β_0) / ‖F_1‖`.
//!
//! Both are evaluated through `g(t) = ‖x_0‖ ‖F_2‖ (e^{a t} - 1) / a`, which equals
//! `β_0 (e^{a t} - 1)` and has a clean limit as `a -> 0`. Whenever `‖F_1‖` or
//! `μ(F_1)` is below `1e-12` in magnitude the continuity limit is used.

use alloc::vec::Vec;

use crate::carleman::QuadraticReduction;
use crate::error::{Error, Result};
use crate::math::{exp, exp_growth, ln_1p, powi, LIMIT_THRESHOLD};
use crate::tensor::sup_norm_vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub norm_f1: f64,
    pub norm_f2: f64,
    pub mu_f1: f64,
    pub norm_x0: f64,
    /// `‖x_0‖ ‖F_2‖ / ‖F_1‖`; `+inf` when `‖F_1‖` vanishes and the numerator does not.
    pub beta0: f64,
    /// A-priori bound on the running sup norm of the exact solution.
    pub alpha: Option<f64>,
}

impl BoundParams {
    pub fn new(norm_f1: f64, norm_f2: f64, mu_f1: f64, norm_x0: f64) -> Result<Self> {
        let valid = |v: f64| v.is_finite() && v >= 0.0;
        if !(valid(norm_f1) && valid(norm_f2) && valid(norm_x0) && mu_f1.is_finite()) {
            return Err(Error::InvalidArgument(
                "norms must be finite and nonnegative",
            ));
        }
        let numerator = norm_x0 * norm_f2;
        let beta0 = if norm_f1 < LIMIT_THRESHOLD {
            if numerator == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            numerator / norm_f1
        };
        Ok(BoundParams {
            norm_f1,
            norm_f2,
            mu_f1,
            norm_x0,
            beta0,
            alpha: None,
        })
    }

    /// Parameters of a reduced system started from `x0` (a state of the original system).
    pub fn from_reduction(reduction: &QuadraticReduction, x0: &[f64]) -> Result<Self> {
        let lifted = reduction.lift_initial(x0)?;
        let mu = reduction.linear_part().log_norm()?;
        Self::new(
            reduction.norm_f1,
            reduction.norm_f2,
            mu,
            sup_norm_vec(&lifted),
        )
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || alpha < self.norm_x0 {
            return Err(Error::InvalidArgument(
                "alpha must be positive and at least ‖x0‖",
            ));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// `‖x_0‖ ‖F_2‖`.
    fn coupling(&self) -> f64 {
        self.norm_x0 * self.norm_f2
    }

    /// `β_0 (e^{‖F_1‖ t} - 1)`, the base of the `N`-th power in `E_2`.
    pub fn e2_base(&self, t: f64) -> f64 {
        self.coupling() * exp_growth(self.effective_norm_f1(), t)
    }

    fn effective_norm_f1(&self) -> f64 {
        if self.norm_f1 < LIMIT_THRESHOLD {
            0.0
        } else {
            self.norm_f1
        }
    }
}

/// `E_1` envelope with the supplied `α`.
pub fn error_bound_1(p: &BoundParams, order: usize, t: f64) -> Result<f64> {
    let alpha = p.alpha.ok_or(Error::MissingAlpha)?;
    Ok(error_bound_1_with_alpha(p, alpha, order, t))
}

pub(crate) fn error_bound_1_with_alpha(p: &BoundParams, alpha: f64, order: usize, t: f64) -> f64 {
    if !alpha.is_finite() {
        return f64::INFINITY;
    }
    let n = order as u32;
    powi(alpha, n + 1) * powi(p.norm_f2 * exp_growth(p.mu_f1, t), n)
}

/// Bracketed base `α ‖F_2‖ (e^{μ t} - 1) / μ` of the `E_1` envelope.
pub fn bound1_base(p: &BoundParams, alpha: f64, t: f64) -> f64 {
    alpha * p.norm_f2 * exp_growth(p.mu_f1, t)
}

/// End of the interval on which the `E_1` envelope converges as `N -> ∞`.
pub fn bound1_horizon(p: &BoundParams) -> Result<f64> {
    let alpha = p.alpha.ok_or(Error::MissingAlpha)?;
    Ok(bound1_horizon_with_alpha(p, alpha))
}

pub(crate) fn bound1_horizon_with_alpha(p: &BoundParams, alpha: f64) -> f64 {
    let b = alpha * p.norm_f2;
    if b == 0.0 {
        return f64::INFINITY;
    }
    let mu = p.mu_f1;
    if mu.abs() < LIMIT_THRESHOLD {
        return 1.0 / b;
    }
    // For μ < 0 the base increases to b / |μ| and never reaches 1 if b <= |μ|.
    if mu < 0.0 && b <= -mu {
        return f64::INFINITY;
    }
    ln_1p(mu / b) / mu
}

/// `E_2` envelope; `+inf` at and past `T*`.
pub fn error_bound_2(p: &BoundParams, order: usize, t: f64) -> f64 {
    let g = p.e2_base(t);
    let denom = 1.0 - g;
    if !(denom > 0.0) {
        return f64::INFINITY;
    }
    p.norm_x0 * exp(p.effective_norm_f1() * t) * powi(g, order as u32) / denom
}

/// `T* = ln(1 + 1/β_0) / ‖F_1‖`; `1 / (‖x_0‖ ‖F_2‖)` in the `‖F_1‖ -> 0` limit
/// and `+inf` when `β_0 = 0`.
pub fn t_star(p: &BoundParams) -> f64 {
    let c = p.coupling();
    if c == 0.0 {
        return f64::INFINITY;
    }
    let a = p.effective_norm_f1();
    if a == 0.0 {
        return 1.0 / c;
    }
    ln_1p(a / c) / a
}

/// A-priori bound on `‖x(t)‖` from the comparison equation `u' = ‖F_1‖ u + ‖F_2‖ u²`.
pub fn growth_bound(p: &BoundParams, t: f64) -> f64 {
    let denom = 1.0 - p.e2_base(t);
    if !(denom > 0.0) {
        return f64::INFINITY;
    }
    p.norm_x0 * exp(p.effective_norm_f1() * t) / denom
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComparison {
    /// `E_1` envelope evaluated with `α = growth_bound(p, t)`.
    pub e1_worst: f64,
    pub e2: f64,
    /// `(e^{‖F_1‖ t} / ((1 + β_0) - β_0 e^{‖F_1‖ t}))^N`; `e1_worst <= factor * e2`.
    pub factor: f64,
}

pub fn compare_bounds(p: &BoundParams, order: usize, t: f64) -> Result<BoundComparison> {
    let horizon = t_star(p);
    if !(t < horizon) {
        return Err(Error::HorizonExceeded { t, horizon });
    }
    let alpha = growth_bound(p, t);
    let e1_worst = error_bound_1_with_alpha(p, alpha, order, t);
    let e2 = error_bound_2(p, order, t);
    let ratio = exp(p.effective_norm_f1() * t) / (1.0 - p.e2_base(t));
    Ok(BoundComparison {
        e1_worst,
        e2,
        factor: powi(ratio, order as u32),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    E1,
    E2,
}

/// Sampled envelope. Values are `+inf` past the horizon of the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEnvelope {
    pub kind: BoundKind,
    pub order: usize,
    pub t_star: f64,
    pub samples: Vec<(f64, f64)>,
}

/// `E_2` sampled at the given times.
pub fn envelope_e2(p: &BoundParams, order: usize, times: &[f64]) -> BoundEnvelope {
    let horizon = t_star(p);
    let samples = times
        .iter()
        .map(|&t| {
            (
                t,
                if t < horizon {
                    error_bound_2(p, order, t)
                } else {
                    f64::INFINITY
                },
            )
        })
        .collect();
    BoundEnvelope {
        kind: BoundKind::E2,
        order,
        t_star: horizon,
        samples,
    }
}

/// `E_1` sampled at the given times, using `p.alpha` when present and the
/// growth bound at each `t` otherwise. For `μ(F_1) >= 0` samples past the
/// convergence interval are `+inf`.
pub fn envelope_e1(p: &BoundParams, order: usize, times: &[f64]) -> BoundEnvelope {
    let fixed_horizon = p.alpha.map(|a| bound1_horizon_with_alpha(p, a));
    let samples = times
        .iter()
        .map(|&t| {
            let alpha = p.alpha.unwrap_or_else(|| growth_bound(p, t));
            let horizon = fixed_horizon.unwrap_or_else(|| bound1_horizon_with_alpha(p, alpha));
            let inside = p.mu_f1 < 0.0 || t < horizon;
            let value = if alpha.is_finite() && inside {
                error_bound_1_with_alpha(p, alpha, order, t)
            } else {
                f64::INFINITY
            };
            (t, value)
        })
        .collect();
    let t_star = match fixed_horizon {
        Some(h) => h,
        None => t_star(p),
    };
    BoundEnvelope {
        kind: BoundKind::E1,
        order,
        t_star,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleman::reduce_quadratic;
    use crate::model::van_der_pol;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn bound1_examples() {
        let p = BoundParams::new(2.0, 1.0, 0.0, 0.5)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        assert_eq!(error_bound_1(&p, 3, 0.0).unwrap(), 0.0);
        assert!(close(error_bound_1(&p, 2, 0.5).unwrap(), 0.25, 1e-15));
        let p = BoundParams::new(2.0, 1.0, 1.0, 0.5)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        assert!(close(
            error_bound_1(&p, 1, 1.0).unwrap(),
            core::f64::consts::E - 1.0,
            1e-15
        ));
        let missing = BoundParams::new(2.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(error_bound_1(&missing, 1, 1.0), Err(Error::MissingAlpha));
        assert_eq!(bound1_horizon(&missing), Err(Error::MissingAlpha));
    }

    #[test]
    fn bound1_horizon_examples() {
        let p = BoundParams::new(1.0, 2.0, 0.0, 0.5)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        assert_eq!(bound1_horizon(&p).unwrap(), 0.5);
        let p = BoundParams::new(1.0, 1.0, 1.0, 0.5)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        assert!(close(
            bound1_horizon(&p).unwrap(),
            core::f64::consts::LN_2,
            1e-15
        ));
        let p = BoundParams::new(1.0, 0.0, 1.0, 0.5)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        assert_eq!(bound1_horizon(&p).unwrap(), f64::INFINITY);
        // Strongly contracting linear part: the base stays below 1 forever.
        let p = BoundParams::new(3.0, 1.0, -2.0, 0.5)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        assert_eq!(bound1_horizon(&p).unwrap(), f64::INFINITY);
        let p = BoundParams::new(3.0, 4.0, -2.0, 0.5)
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        let h = bound1_horizon(&p).unwrap();
        assert!(close(bound1_base(&p, 1.0, h), 1.0, 1e-12));
    }

    #[test]
    fn bound2_examples() {
        let p = BoundParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(p.beta0, 1.0);
        assert_eq!(error_bound_2(&p, 1, 0.0), 0.0);
        assert!(close(error_bound_2(&p, 1, 1.5f64.ln()), 1.5, 1e-14));
        assert_eq!(error_bound_2(&p, 3, t_star(&p)), f64::INFINITY);
        assert_eq!(error_bound_2(&p, 3, 2.0 * t_star(&p)), f64::INFINITY);
    }

    #[test]
    fn van_der_pol_horizon() {
        let red = reduce_quadratic(&van_der_pol(1.0, 0.6)).unwrap();
        let p = BoundParams::from_reduction(&red, &[0.0, 0.5]).unwrap();
        assert!(close(p.beta0, 0.1875, 1e-14));
        let expected = (1.0f64 + 1.0 / 0.1875).ln() / 3.2;
        assert!(close(t_star(&p), expected, 1e-14));
        assert!((t_star(&p) - 0.5768).abs() < 1e-4);
    }

    #[test]
    fn t_star_limits() {
        let p = BoundParams::new(1.0, 1.0, 0.0, 1e12).unwrap();
        assert!(t_star(&p) < 1e-10);
        let p = BoundParams::new(0.0, 1.0, 0.0, 2.0).unwrap();
        assert_eq!(t_star(&p), 0.5);
        let p = BoundParams::new(1.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(t_star(&p), f64::INFINITY);
    }

    #[test]
    fn growth_bound_examples() {
        let p = BoundParams::new(1.5, 0.7, 0.0, 0.3).unwrap();
        assert_eq!(growth_bound(&p, 0.0), 0.3);
        let linear = BoundParams::new(1.5, 0.0, 0.0, 0.3).unwrap();
        assert!(close(
            growth_bound(&linear, 2.0),
            0.3 * (3.0f64).exp(),
            1e-15
        ));
        let e = core::f64::consts::E;
        let scalar = BoundParams::new(1.0, 1.0, 1.0, 0.1).unwrap();
        assert!(close(
            growth_bound(&scalar, 1.0),
            0.1 * e / (1.0 - 0.1 * (e - 1.0)),
            1e-14
        ));
        assert_eq!(growth_bound(&scalar, 10.0), f64::INFINITY);
    }

    #[test]
    fn comparison_at_origin_and_beyond_horizon() {
        let p = BoundParams::new(1.0, 1.0, 0.5, 0.5).unwrap();
        let c = compare_bounds(&p, 3, 0.0).unwrap();
        assert_eq!((c.e1_worst, c.e2, c.factor), (0.0, 0.0, 1.0));
        assert!(matches!(
            compare_bounds(&p, 3, 10.0),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn van_der_pol_comparison_factor() {
        let red = reduce_quadratic(&van_der_pol(1.0, 0.6)).unwrap();
        let p = BoundParams::from_reduction(&red, &[0.0, 0.5]).unwrap();
        let c = compare_bounds(&p, 4, 0.3).unwrap();
        assert!(c.factor > 1.0);
        assert!(c.e1_worst <= c.factor * c.e2 * (1.0 + 1e-12));
    }

    #[test]
    fn alpha_validation() {
        let p = BoundParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
        assert!(p.with_alpha(0.4).is_err());
        assert!(p.with_alpha(0.5).is_ok());
        assert!(BoundParams::new(-1.0, 1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn envelopes_mark_horizon() {
        let p = BoundParams::new(1.0, 1.0, 1.0, 0.5).unwrap();
        let ts = [0.0, 0.1, 0.5, 1.0, 2.0];
        let e2 = envelope_e2(&p, 2, &ts);
        for &(t, v) in &e2.samples {
            assert_eq!(v.is_infinite(), t >= e2.t_star);
        }
        let e1 = envelope_e1(&p.with_alpha(1.0).unwrap(), 2, &ts);
        assert!(close(e1.t_star, core::f64::consts::LN_2, 1e-15));
        for &(t, v) in &e1.samples {
            assert_eq!(v.is_infinite(), t >= e1.t_star);
        }
    }
}
