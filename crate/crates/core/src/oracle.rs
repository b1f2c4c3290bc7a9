//! Brute-force checks that do not depend on the regularization: direct sums over the
//! discrete spectrum, Weyl-law mode counting, and quadrature of the two oscillatory
//! Bose integrals whose closed forms underlie the auxiliary functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{mode_frequencies, weighted_mode_count};
use crate::numerics::{integrate, integrate_to_infinity};
use crate::thermo::spectral::direct_sums;
use crate::thermo::{blackbody, ThermoModel};
use crate::types::{CavityGeometry, CutoffConstants, SumPolicy};

/// omega_max must be at least this many T.
pub const MIN_WINDOW: f64 = 30.0;

/// A truncated mode sum together with a rigorous bound on the dropped modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectValue {
    pub value: f64,
    pub tail_bound: f64,
}

fn default_parallel() -> bool {
    cfg!(feature = "parallel")
}

fn check_window(t: f64, omega_max: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::DomainError { func: "direct mode sum", value: t });
    }
    if !(omega_max > 0.0) {
        return Err(Error::DomainError { func: "direct mode sum", value: omega_max });
    }
    Ok(())
}

/// Upper bound on Σ_{ω>Ω} w·φ(ω) for a positive decreasing φ.
///
/// Every octant lattice point with ω ≤ x owns the unit cell above it, and those cells sit
/// inside the ball of radius x + δ, δ = π|1/a|. So the weighted count never exceeds
/// N⁺(x) = V(x + δ)³/(3π²), and Stieltjes integration by parts gives
/// Σ ≤ φ(Ω)N⁺(Ω) + ∫_Ω^∞ φ dN⁺.
fn weyl_tail_bound<F: Fn(f64) -> f64>(g: &CavityGeometry, omega_max: f64, phi: F) -> Result<f64> {
    let v = g.volume();
    let delta = PI * g.edges().iter().map(|a| a.powi(-2)).sum::<f64>().sqrt();
    let n_up = |x: f64| v * (x + delta).powi(3) / (3.0 * PI * PI);
    let head = phi(omega_max) * n_up(omega_max);
    let tail = integrate_to_infinity(|x| phi(x) * v * (x + delta).powi(2) / (PI * PI), omega_max, 1e-300, 1e-8)?;
    Ok(head + tail.value)
}

fn bound_or_error(t: f64, omega_max: f64, bound: f64) -> Result<f64> {
    if omega_max < MIN_WINDOW * t {
        Err(Error::TailBoundTooLarge { bound })
    } else {
        Ok(bound)
    }
}

/// T Σ w ln(1 − e^{−ω/T}) over modes with ω ≤ omega_max.
pub fn direct_thermal_free_energy(t: f64, g: &CavityGeometry, omega_max: f64) -> Result<DirectValue> {
    check_window(t, omega_max)?;
    if t == 0.0 {
        return Ok(DirectValue { value: 0.0, tail_bound: 0.0 });
    }
    let phi = |x: f64| -t * (-(-x / t).exp()).ln_1p();
    let bound = bound_or_error(t, omega_max, weyl_tail_bound(g, omega_max, phi)?)?;
    Ok(DirectValue { value: direct_sums(t, g, omega_max, default_parallel()).f, tail_bound: bound })
}

/// Σ w [−ln(1 − e^{−ω/T}) + (ω/T)/(e^{ω/T} − 1)].
pub fn direct_entropy(t: f64, g: &CavityGeometry, omega_max: f64) -> Result<f64> {
    check_window(t, omega_max)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    bound_or_error(t, omega_max, f64::INFINITY)?;
    Ok(direct_sums(t, g, omega_max, default_parallel()).s)
}

/// Thermal energy Σ w ω/(e^{ω/T} − 1).
pub fn direct_energy(t: f64, g: &CavityGeometry, omega_max: f64) -> Result<f64> {
    check_window(t, omega_max)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    bound_or_error(t, omega_max, f64::INFINITY)?;
    Ok(direct_sums(t, g, omega_max, default_parallel()).e)
}

/// One quantity computed both ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteDifference {
    pub regularized: f64,
    pub direct: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

impl RouteDifference {
    fn new(regularized: f64, direct: f64) -> Self {
        let abs_diff = (regularized - direct).abs();
        RouteDifference { regularized, direct, abs_diff, rel_diff: abs_diff / direct.abs().max(f64::MIN_POSITIVE) }
    }
}

/// Thermal parts of the regularized potentials against the direct mode sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub t: f64,
    pub xi: f64,
    /// F_BB + ΔF − ΔE₀ vs T Σ ln(1 − e^{−ω/T}).
    pub f: RouteDifference,
    /// S_BB + ΔS vs the mode-wise entropy.
    pub s: RouteDifference,
    /// E_BB + ΔE − ΔE₀ vs the mode-wise thermal energy.
    pub e: RouteDifference,
    /// (E-route − direct)/(−T/2) − 1: vanishes when the only difference is the
    /// zero-frequency half mode carried by the Weyl edge term.
    pub e_half_mode_residual: f64,
    pub direct_tail_bound: f64,
}

pub fn compare_regularized(
    t: f64,
    g: &CavityGeometry,
    c: &CutoffConstants,
    policy: &SumPolicy,
    omega_max: f64,
) -> Result<Comparison> {
    let model = ThermoModel::new(*g, *c, *policy)?;
    let e0 = model.casimir()?.energy;
    let d = model.delta(t)?.delta;
    let bb = blackbody(t, g);
    let fd = direct_thermal_free_energy(t, g, omega_max)?;
    let sums = direct_sums(t, g, omega_max, policy.parallel);
    let e_reg = bb.e + d.e - e0;
    let half = if t > 0.0 { (e_reg - sums.e) / (-0.5 * t) - 1.0 } else { 0.0 };
    Ok(Comparison {
        t,
        xi: g.xi_from_t(t),
        f: RouteDifference::new(bb.f + d.f - e0, fd.value),
        s: RouteDifference::new(bb.s + d.s, sums.s),
        e: RouteDifference::new(e_reg, sums.e),
        e_half_mode_residual: half,
        direct_tail_bound: fd.tail_bound,
    })
}

/// Largest number of half-period panels before giving up.
const MAX_PANELS: usize = 100_000;

/// 1/(e^{βω} − 1), finite at ω = 0 once multiplied by an odd factor.
fn bose(beta: f64, w: f64) -> f64 {
    1.0 / (beta * w).exp_m1()
}

/// Wynn's ε-algorithm over a sequence of partial sums; returns the latest even-column
/// estimate.
struct Wynn {
    rows: Vec<Vec<f64>>,
}

impl Wynn {
    fn new() -> Self {
        Wynn { rows: Vec::new() }
    }

    fn push(&mut self, s: f64) -> f64 {
        let mut row = vec![s];
        if let Some(prev) = self.rows.last() {
            let mut below = 0.0;
            for (j, &p) in prev.iter().enumerate() {
                let diff = row[j] - p;
                let next = if diff == 0.0 { f64::INFINITY } else { below + 1.0 / diff };
                below = p;
                if !next.is_finite() {
                    break;
                }
                row.push(next);
            }
        }
        let best = row.iter().step_by(2).last().copied().unwrap_or(s);
        self.rows.push(row);
        if self.rows.len() > 12 {
            self.rows.remove(0);
        }
        best
    }
}

/// ∫₀^∞ f over the panels [jπ/u, (j+1)π/u], accelerated.
fn panel_integral<F: Fn(f64) -> f64>(f: F, u: f64, beta: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::DomainError { func: "appendix integral", value: u });
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::DomainError { func: "appendix integral", value: beta });
    }
    let h = PI / u;
    let mut raw = 0.0;
    let mut wynn = Wynn::new();
    let mut prev = f64::NAN;
    let mut streak = 0;
    for j in 0..MAX_PANELS {
        let a = j as f64 * h;
        let piece = integrate(&f, a, a + h, 1e-17, 1e-14)?.value;
        raw += piece;
        let acc = wynn.push(raw);
        // The integrand decays like e^{−βω}, so the raw sum itself is exact once a panel
        // no longer registers.
        if piece.abs() <= 1e-17 * raw.abs().max(1e-300) {
            return Ok(raw);
        }
        if (acc - prev).abs() <= 1e-15 * acc.abs().max(1e-12) {
            streak += 1;
            if streak >= 3 && j >= 8 {
                return Ok(acc);
            }
        } else {
            streak = 0;
        }
        prev = acc;
    }
    Err(Error::QuadratureFailure { value: raw, error_estimate: (prev - raw).abs() })
}

/// ∫₀^∞ sin(uω)/(e^{βω} − 1) dω by quadrature.
pub fn appendix_integral_sin(u: f64, beta: f64) -> Result<f64> {
    panel_integral(|w| if w == 0.0 { u / beta } else { (u * w).sin() * bose(beta, w) }, u, beta)
}

/// ∫₀^∞ ω cos(uω)/(e^{βω} − 1) dω by quadrature.
pub fn appendix_integral_omega_cos(u: f64, beta: f64) -> Result<f64> {
    panel_integral(|w| if w == 0.0 { 1.0 / beta } else { w * (u * w).cos() * bose(beta, w) }, u, beta)
}

/// (π/2β) coth(πu/β) − 1/(2u).
pub fn appendix_sin_closed_form(u: f64, beta: f64) -> f64 {
    let x = PI * u / beta;
    PI / (2.0 * beta) / x.tanh() - 0.5 / u
}

/// −½(π/β)² csch²(πu/β) + 1/(2u²).
pub fn appendix_omega_cos_closed_form(u: f64, beta: f64) -> f64 {
    let x = PI * u / beta;
    -0.5 * (PI / beta).powi(2) / x.sinh().powi(2) + 0.5 / (u * u)
}

/// Hard tolerance of the Appendix suite.
pub const APPENDIX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixCheck {
    pub integral: &'static str,
    pub u: f64,
    pub beta: f64,
    pub quadrature: f64,
    pub closed_form: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixReport {
    pub checks: Vec<AppendixCheck>,
    pub max_abs_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Both integrals on an n×n log grid u ∈ [0.1, 10], β ∈ [0.5, 20].
pub fn appendix_suite(n: usize) -> Result<AppendixReport> {
    let n = n.max(2);
    let mut checks = Vec::new();
    for &u in &log_grid(0.1, 10.0, n) {
        for &beta in &log_grid(0.5, 20.0, n) {
            let q = appendix_integral_sin(u, beta)?;
            let c = appendix_sin_closed_form(u, beta);
            checks.push(AppendixCheck { integral: "sin", u, beta, quadrature: q, closed_form: c, abs_err: (q - c).abs() });
            let q = appendix_integral_omega_cos(u, beta)?;
            let c = appendix_omega_cos_closed_form(u, beta);
            checks.push(AppendixCheck { integral: "omega_cos", u, beta, quadrature: q, closed_form: c, abs_err: (q - c).abs() });
        }
    }
    let max_abs_err = checks.iter().map(|c| c.abs_err).fold(0.0, f64::max);
    Ok(AppendixReport { checks, max_abs_err, tolerance: APPENDIX_TOL, pass: max_abs_err < APPENDIX_TOL })
}

/// Smooth Weyl count N∞(ω) = Vω³/(3π²) − Lω/(2π).
pub fn weyl_count(g: &CavityGeometry, omega: f64) -> f64 {
    g.volume() * omega.powi(3) / (3.0 * PI * PI) - g.edge_sum() * omega / (2.0 * PI)
}

/// Largest spectrum the mode-count suite will sort.
const MAX_WEYL_MODES: f64 = 2e7;

/// Drift threshold of the mode-count suite.
pub const WEYL_DRIFT_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub omega_lo: f64,
    pub omega_hi: f64,
    /// Weighted count from the sorted spectrum at omega_hi.
    pub count: f64,
    /// Same count from the column enumerator; must agree exactly.
    pub count_columns: f64,
    /// max over the window of |running mean of N − N∞| / N.
    pub drift: f64,
    /// Mean of N − N∞ over the window.
    pub mean_offset: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Exact counting against the Weyl term over ω ∈ [lo, hi]·π/a₁.
pub fn weyl_suite(g: &CavityGeometry, lo: f64, hi: f64) -> Result<WeylReport> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::DomainError { func: "weyl_suite", value: hi });
    }
    let scale = PI / g.a1();
    let (w_lo, w_hi) = (lo * scale, hi * scale);
    if weyl_count(g, w_hi) > MAX_WEYL_MODES {
        return Err(Error::NumericalFailure(format!("more than {MAX_WEYL_MODES:e} modes below ω = {w_hi}")));
    }
    let modes = mode_frequencies(g, w_hi);
    let mut running = 0.0;
    let mut n_eval = 0usize;
    let mut drift: f64 = 0.0;
    let mut idx = 0;
    let mut count = 0.0;
    // Evaluate the staircase just below every jump inside the window and at its ends.
    let mut eval = |w: f64, count: f64| {
        running += count - weyl_count(g, w);
        n_eval += 1;
        if count > 0.0 {
            drift = drift.max((running / n_eval as f64).abs() / count);
        }
    };
    while idx < modes.len() && modes[idx].1 < w_lo {
        count += modes[idx].0.weight as f64;
        idx += 1;
    }
    eval(w_lo, count);
    while idx < modes.len() {
        let w = modes[idx].1;
        eval(w, count);
        while idx < modes.len() && modes[idx].1 == w {
            count += modes[idx].0.weight as f64;
            idx += 1;
        }
        eval(w, count);
    }
    eval(w_hi, count);
    let mean_offset = running / n_eval as f64;
    let count_columns = weighted_mode_count(g, w_hi);
    let pass = drift < WEYL_DRIFT_TOL && count == count_columns;
    Ok(WeylReport { omega_lo: w_lo, omega_hi: w_hi, count, count_columns, drift, mean_offset, tolerance: WEYL_DRIFT_TOL, pass })
}
