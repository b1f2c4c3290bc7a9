//! The third-law function G(v₀), the cutoff constants it fixes, and the step selectors.

use crate::error::{Error, Result};
use crate::numerics::{brent, integrate, QuadratureResult};
use crate::specfun::{eps_derivs, family, SERIES_SWITCH};
use crate::types::CutoffConstants;

/// Upper end of the explicit quadrature; the rest of the second integral is −1/V_FAR
/// plus an exponentially small remainder bounded by e^{−2·V_FAR}.
const V_FAR: f64 = 40.0;
const ABS_TOL: f64 = 1e-13;

/// (g(v) − 1)/v without cancellation.
fn gm1_over_v(v: f64) -> f64 {
    if v < SERIES_SWITCH {
        family(v).g_over_v - 1.0 / v
    } else {
        (eps_derivs(v)[0] - 1.0 / v) / v
    }
}

/// G(v₀) with its quadrature bookkeeping.
pub fn g_integral(v0: f64) -> Result<QuadratureResult> {
    if !(v0 > 0.0) || !v0.is_finite() {
        return Err(Error::DomainError { func: "G", value: v0 });
    }
    let inner = integrate(|v| if v == 0.0 { 1.0 / 3.0 } else { family(v).g_over_v }, 0.0, v0, ABS_TOL, 0.0)?;
    let (outer, far) = if v0 < V_FAR {
        // t = 1/v maps [v0, V_FAR] onto [1/V_FAR, 1/v0].
        let r = integrate(
            |t: f64| {
                let v = 1.0 / t;
                gm1_over_v(v) * v * v
            },
            1.0 / V_FAR,
            1.0 / v0,
            ABS_TOL,
            0.0,
        )?;
        (r, -1.0 / V_FAR)
    } else {
        (QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0 }, -1.0 / v0)
    };
    let bound = (-2.0 * V_FAR.max(v0)).exp();
    let value = inner.value + outer.value + far;
    let error_estimate = inner.error_estimate + outer.error_estimate + bound;
    if error_estimate > 1e-11 {
        return Err(Error::QuadratureFailure { value, error_estimate });
    }
    Ok(QuadratureResult { value, error_estimate, evaluations: inner.evaluations + outer.evaluations })
}

/// G(v₀) = ∫₀^{v₀} g/v + ∫_{v₀}^∞ (g − 1)/v.
#[allow(non_snake_case)]
pub fn G(v0: f64) -> Result<f64> {
    Ok(g_integral(v0)?.value)
}

/// Cutoffs plus the number of G evaluations the solver used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSolution {
    pub cutoffs: CutoffConstants,
    pub g_evaluations: usize,
}

pub fn solve_cutoffs_counted(tolerance: f64) -> Result<CutoffSolution> {
    if !(tolerance > 0.0) || tolerance > 1e-2 {
        return Err(Error::RootFailure(format!("tolerance {tolerance} outside (0, 1e-2]")));
    }
    let f_tol = tolerance * 1e-3;
    let (v_v, n1) = brent(G, 0.5, 5.0, tolerance, f_tol)?;
    let (v_e, n2) = brent(|v| Ok(G(v)? + 1.0), 0.1, 3.0, tolerance, f_tol)?;
    if !(v_e < v_v) {
        return Err(Error::RootFailure(format!("v_E = {v_e} not below v_V = {v_v}")));
    }
    Ok(CutoffSolution { cutoffs: CutoffConstants { v_v, v_e }, g_evaluations: n1 + n2 })
}

/// Roots of G(v) = 0 and G(v) = −1, located to within `tolerance` in v (or earlier once
/// |G − target| < 1e−3·tolerance).
pub fn solve_cutoffs(tolerance: f64) -> Result<CutoffConstants> {
    Ok(solve_cutoffs_counted(tolerance)?.cutoffs)
}

/// Volume step selector, closed on the right.
#[allow(non_snake_case)]
pub fn K_V(v: f64, c: &CutoffConstants) -> i32 {
    (v >= c.v_v) as i32
}

/// Edge step selector, closed on the right.
#[allow(non_snake_case)]
pub fn K_E(v: f64, c: &CutoffConstants) -> i32 {
    (v >= c.v_e) as i32
}

/// The T → 0 limit of the regularized entropy: −G(v_V)/4 − 3(1 + G(v_E))/4.
pub fn zero_temperature_entropy(c: &CutoffConstants) -> Result<f64> {
    Ok(-0.25 * G(c.v_v)? - 0.75 * (1.0 + G(c.v_e)?))
}

/// `n` evenly spaced samples of (v₀, G(v₀)) on [lo, hi].
pub fn g_curve(lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    (0..n)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64;
            Ok((v, G(v)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((G(1.0).unwrap() - (-0.5675142209478673)).abs() < 1e-12);
        assert!((G(2.0).unwrap() - 0.1256329596120780).abs() < 1e-12);
    }

    #[test]
    fn published_cutoffs() {
        let c = solve_cutoffs(1e-12).unwrap();
        assert!((c.v_v - 1.763876988).abs() < 1e-8);
        assert!((c.v_e - 0.64889408).abs() < 1e-8);
        assert!((c.v_v - CutoffConstants::FROZEN.v_v).abs() < 1e-11);
        assert!((c.v_e - CutoffConstants::FROZEN.v_e).abs() < 1e-11);
    }

    #[test]
    fn selectors_closed_on_the_right() {
        let c = CutoffConstants::FROZEN;
        assert_eq!(K_V(c.v_v, &c), 1);
        assert_eq!(K_V(0.5, &c), 0);
        assert_eq!(K_V(2.0, &c), 1);
        assert_eq!(K_E(1.0, &c), 1);
        assert_eq!(K_E(c.v_e * (1.0 - 1e-15), &c), 0);
    }

    #[test]
    fn third_law_identity() {
        let s0 = zero_temperature_entropy(&CutoffConstants::FROZEN).unwrap();
        assert!(s0.abs() < 1e-11, "{s0}");
    }
}
