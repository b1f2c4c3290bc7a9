//! Imaginary-frequency (Matsubara) form of the K = 0 free energy, its divergence
//! diagnostics, and the massive-photon volume term.
//!
//! Using g(v)/v = 2Σ_{k≥1} 1/(v² + π²k²), the K = 0 thermal part of ΔF becomes
//!
//!   ΔF_M = −(2V/π²) Σ'_n Σ_k 1/((k/T)² + u²)²  +  Σ_axes (a/π) Σ_{n≥1} Σ_k 1/((k/T)² + u²).
//!
//! For fixed k the edge sum behaves like T/(4k) per axis and the volume sum like −T/(4k),
//! so both grow logarithmically with the frequency cutoff.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ball_sums, volume_sum};
use crate::numerics::{log_fit, ordered_sum_range, LogFit, Neumaier};
use crate::specfun::{bessel_k2, family};
use crate::thermo::spectral::harmonic;
use crate::thermo::{images::inactive_edge_count, ThermoModel};
use crate::types::{CavityGeometry, CutoffConstants, SumPolicy};

/// Partial values at increasing truncations and their fit to c0 + c1·ln k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceDiagnostic {
    pub partial_values: Vec<(u64, f64)>,
    pub log_fit: LogFit,
}

impl DivergenceDiagnostic {
    fn from_points(partial_values: Vec<(u64, f64)>) -> Self {
        let pts: Vec<(f64, f64)> = partial_values.iter().map(|&(k, v)| (k as f64, v)).collect();
        DivergenceDiagnostic { log_fit: log_fit(&pts), partial_values }
    }
}

/// Edge and volume parts of ΔF_M at k_max/4, k_max/2 and k_max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatsubaraReport {
    pub t: f64,
    pub edge: DivergenceDiagnostic,
    pub volume: DivergenceDiagnostic,
}

/// (a/π) Σ_{n≥1} 1/((k/T)² + (2na)²), closed form in y = k/(2aT).
fn edge_k(k: u64, a: f64, t: f64) -> f64 {
    let y = k as f64 / (2.0 * a * t);
    let z = PI * y;
    // Σ_{n≥1} 1/(n² + y²) = (z coth z − 1)/(2y²) = z·g(z)/(2y²)
    let s = z * family(z).g / (2.0 * y * y);
    s / (4.0 * PI * a)
}

/// Σ'_m e^{−c ω_m} over the full lattice, ω_m = π|m/a|.
fn dual_exp_sum(g: &CavityGeometry, c: f64, parallel: bool) -> f64 {
    const L: f64 = 46.0;
    let a = g.edges();
    let m = a.map(|ai| (L * ai / (PI * c)).floor() as u64);
    let rows = (m[0] + 1) as usize;
    ordered_sum_range::<1, _>(rows, parallel, |i| {
        let m1 = i as u64;
        let mut acc = Neumaier::new();
        for m2 in 0..=m[1] {
            for m3 in 0..=m[2] {
                if m1 == 0 && m2 == 0 && m3 == 0 {
                    continue;
                }
                let idx = [m1, m2, m3];
                let w = PI * (0..3).map(|j| (idx[j] as f64 / a[j]).powi(2)).sum::<f64>().sqrt();
                if c * w > L {
                    break;
                }
                let mult = idx.iter().filter(|&&x| x != 0).count();
                acc.add((1u32 << mult) as f64 * (-c * w).exp());
            }
        }
        [acc.value()]
    })[0]
}

/// Σ'_n 1/(c² + u²)² over the full image lattice.
///
/// Large c uses the Poisson-dual form −1/c⁴ + (π²/(8cV))(1 + Σ'_m e^{−c ω_m}), which
/// converges exponentially; small c falls back to the direct lattice sum.
pub fn volume_k_sum(g: &CavityGeometry, c: f64, policy: &SumPolicy) -> Result<f64> {
    let a = g.edges();
    let dual_terms: f64 = a.iter().map(|ai| 46.0 * ai / (PI * c) + 1.0).product();
    if dual_terms <= 1e6 {
        let d = dual_exp_sum(g, c, policy.parallel);
        Ok(-1.0 / c.powi(4) + PI * PI / (8.0 * c * g.volume()) * (1.0 + d))
    } else {
        let c2 = c * c;
        Ok(volume_sum(g, policy, move |u| {
            let w = c2 + u * u;
            1.0 / (w * w)
        })?
        .value)
    }
}

fn checkpoints(k_max: u64) -> [u64; 3] {
    [k_max / 4, k_max / 2, k_max]
}

/// Partial sums of the edge and volume parts of ΔF_M.
pub fn delta_f_matsubara(t: f64, g: &CavityGeometry, k_max: u64, policy: &SumPolicy) -> Result<MatsubaraReport> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DomainError { func: "delta_f_matsubara", value: t });
    }
    if k_max < 8 {
        return Err(Error::DomainError { func: "delta_f_matsubara", value: k_max as f64 });
    }
    policy.validate()?;
    let cps = checkpoints(k_max);
    let vol = g.volume();
    let (mut edge, mut volume) = (Neumaier::new(), Neumaier::new());
    let (mut pe, mut pv) = (Vec::new(), Vec::new());
    for k in 1..=k_max {
        for ak in g.edges() {
            edge.add(edge_k(k, ak, t));
        }
        let c = k as f64 / t;
        volume.add(-2.0 * vol / (PI * PI) * volume_k_sum(g, c, policy)?);
        if cps.contains(&k) {
            pe.push((k, edge.value()));
            pv.push((k, volume.value()));
        }
    }
    Ok(MatsubaraReport {
        t,
        edge: DivergenceDiagnostic::from_points(pe),
        volume: DivergenceDiagnostic::from_points(pv),
    })
}

/// Thermal K-correction sums over active images with u ≤ u_cut:
/// (VT/2π) Σ u⁻³ (volume) and −(T/4) Σ 1/n per axis (edges).
fn k_corrections(t: f64, g: &CavityGeometry, c: &CutoffConstants, u_cut: f64, parallel: bool) -> (f64, f64) {
    let u_v = c.v_v / (PI * t);
    let vol = if u_cut > u_v {
        // ball_sums is strict (u < U); nudge the cut so u = u_cut is included.
        let outer = ball_sums(g, u_cut * (1.0 + 1e-14), parallel).s3;
        let inner = ball_sums(g, u_v, parallel).s3;
        g.volume() * t / (2.0 * PI) * (outer - inner)
    } else {
        0.0
    };
    let mut edge = 0.0;
    for ak in g.edges() {
        let n_cut = (u_cut / (2.0 * ak) * (1.0 + 1e-14)).floor() as u64;
        let n_in = inactive_edge_count(t, ak, c.v_e);
        if n_cut > n_in {
            edge += harmonic(n_cut) - harmonic(n_in);
        }
    }
    (vol, -0.25 * t * edge)
}

/// One matched truncation of the decomposition ΔF = ΔE₀ + ΔF_M + K-corrections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub k_max: u64,
    /// Image cut paired with k_max: u ≤ k_max/T.
    pub u_cut: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub t: f64,
    pub pairing: String,
    pub rows: Vec<RelationRow>,
    /// Change of the residual between the last two truncations.
    pub trend: f64,
}

/// How the two divergent sides are truncated together.
pub const RELATION_PAIRING: &str = "Matsubara sums truncated at k <= k_max; the K-correction sums \
run over active images with u <= k_max/T (edges: n <= k_max/(2 a_k T)), so the Matsubara \
frequency cut and the image cut coincide in u-units";

/// Compares the regularized ΔF with ΔE₀ + ΔF_M + K-corrections at k_max/4, k_max/2, k_max.
pub fn relation_check(
    t: f64,
    g: &CavityGeometry,
    c: &CutoffConstants,
    policy: &SumPolicy,
    k_max: u64,
) -> Result<RelationReport> {
    let model = ThermoModel::new(*g, *c, *policy)?;
    let e0 = model.casimir()?.energy;
    let lhs = model.delta(t)?.delta.f;
    let mut rows = Vec::new();
    if t == 0.0 {
        for k in checkpoints(k_max) {
            rows.push(RelationRow { k_max: k, u_cut: f64::INFINITY, lhs, rhs: e0, residual: lhs - e0 });
        }
    } else {
        let m = delta_f_matsubara(t, g, k_max, policy)?;
        for i in 0..3 {
            let k = m.edge.partial_values[i].0;
            let u_cut = k as f64 / t;
            let (kv, ke) = k_corrections(t, g, c, u_cut, policy.parallel);
            let rhs = e0 + m.edge.partial_values[i].1 + m.volume.partial_values[i].1 + kv + ke;
            rows.push(RelationRow { k_max: k, u_cut, lhs, rhs, residual: lhs - rhs });
        }
    }
    let trend = rows[2].residual - rows[1].residual;
    Ok(RelationReport { t, pairing: RELATION_PAIRING.to_string(), rows, trend })
}

/// ln(μ/(√(2π)T)) = (V/2π) Σ_{active} u⁻³ − ¼ Σ_axes Σ_{active} 1/n, truncated at image
/// radius L·a_min (u ≤ 2L a_min) for L = truncation, 2·truncation, 4·truncation.
/// Formally divergent; reported only.
pub fn scale_factor_mu(t: f64, g: &CavityGeometry, c: &CutoffConstants, truncation: u64) -> Result<DivergenceDiagnostic> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DomainError { func: "scale_factor_mu", value: t });
    }
    if truncation < 1 {
        return Err(Error::DomainError { func: "scale_factor_mu", value: 0.0 });
    }
    let mut pts = Vec::new();
    for l in [truncation, 2 * truncation, 4 * truncation] {
        let u_cut = 2.0 * l as f64 * g.min_edge();
        let (kv, ke) = k_corrections(t, g, c, u_cut, true);
        pts.push((l, (kv + ke) / t));
    }
    Ok(DivergenceDiagnostic::from_points(pts))
}

/// Massive-photon volume term −(V m²/4π²) Σ'_n Σ_{k≥1} K₂((m/2)√w)/w, w = (k/T)² + u².
/// The k sum is outermost; it stops once a k-term no longer changes the total.
pub fn delta_f_massive(t: f64, g: &CavityGeometry, m_gamma: f64, k_max: u64, policy: &SumPolicy) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DomainError { func: "delta_f_massive", value: t });
    }
    if !(m_gamma > 0.0) || !m_gamma.is_finite() {
        return Err(Error::DomainError { func: "delta_f_massive", value: m_gamma });
    }
    let mut acc = Neumaier::new();
    let mut last = f64::INFINITY;
    for k in 1..=k_max {
        let c2 = (k as f64 / t).powi(2);
        let r = volume_sum(g, policy, move |u| {
            let w = c2 + u * u;
            bessel_k2(0.5 * m_gamma * w.sqrt()).unwrap_or(0.0) / w
        });
        let term = match r {
            Ok(r) => r.value,
            // An exponentially small k-term may underflow to exactly zero.
            Err(Error::ConvergenceFailure { partial, .. }) if partial == 0.0 => 0.0,
            Err(e) => return Err(e),
        };
        acc.add(term);
        last = term;
        if term.abs() <= 1e-17 * acc.value().abs() || term == 0.0 {
            let pref = -g.volume() * m_gamma * m_gamma / (4.0 * PI * PI);
            return Ok(pref * acc.value());
        }
    }
    Err(Error::ConvergenceFailure {
        partial: -g.volume() * m_gamma * m_gamma / (4.0 * PI * PI) * acc.value(),
        error_estimate: last.abs(),
    })
}

/// ln(1 − e^{−x}) + x/(eˣ − 1) with x = m/(2T).
pub fn delta_s_massive_closed_form(t: f64, m_gamma: f64) -> Result<f64> {
    if !(t > 0.0) || !(m_gamma > 0.0) {
        return Err(Error::DomainError { func: "delta_s_massive_closed_form", value: t.min(m_gamma) });
    }
    let x = m_gamma / (2.0 * t);
    Ok((-(-x).exp()).ln_1p() + x / x.exp_m1())
}

/// Reference low-temperature form −T ln(1 − e^{−m/2T}).
pub fn massive_low_t_reference(t: f64, m_gamma: f64) -> f64 {
    -t * (-(-m_gamma / (2.0 * t)).exp()).ln_1p()
}

/// Low-temperature asymptote of [`delta_f_massive`]: (T/4) ln(1 − e^{−m/2T}).
/// It comes from the six nearest images together with the k = 1 term.
pub fn massive_low_t_asymptote(t: f64, m_gamma: f64) -> f64 {
    0.25 * t * (-(-m_gamma / (2.0 * t)).exp()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_and_direct_volume_sums_agree() {
        let g = CavityGeometry::new(1.0, 0.8, 1.3).unwrap();
        let p = SumPolicy { rel_tol: 3e-9, ..Default::default() };
        for c in [2.0, 5.0, 12.0] {
            let d = -1.0 / f64::powi(c, 4) + PI * PI / (8.0 * c * g.volume()) * (1.0 + dual_exp_sum(&g, c, false));
            let direct = volume_sum(&g, &p, move |u| 1.0 / (c * c + u * u).powi(2)).unwrap().value;
            assert!(((d - direct) / direct).abs() < 1e-8, "c {c}: {d} {direct}");
        }
    }

    #[test]
    fn edge_closed_form_matches_direct_sum() {
        let (k, a, t) = (3u64, 0.7, 0.4);
        let c = k as f64 / t;
        let direct: f64 = (1..200_000).map(|n| 1.0 / (c * c + (2.0 * n as f64 * a).powi(2))).sum();
        let tail = 1.0 / (4.0 * a * a * 199_999.5);
        let want = a / PI * (direct + tail);
        assert!((edge_k(k, a, t) - want).abs() < 1e-12 * want, "{} {want}", edge_k(k, a, t));
    }

    #[test]
    fn closed_form_entropy_values() {
        let x: f64 = 1.0;
        let v = delta_s_massive_closed_form(0.5, 1.0).unwrap();
        assert!((v - ((1.0 - (-x).exp()).ln() + 1.0 / (x.exp() - 1.0))).abs() < 1e-15);
        assert!(delta_s_massive_closed_form(1e-3, 1.0).unwrap().abs() < 1e-200);
        // Non-negative once m/2T ≳ 0.7.
        for i in 1..200 {
            let t = 0.5 / (1.0 + 0.05 * i as f64);
            assert!(delta_s_massive_closed_form(t, 1.0).unwrap() >= 0.0);
        }
    }

    #[test]
    fn mu_is_exact_when_nothing_is_active() {
        let g = CavityGeometry::cube(1.0);
        let t = g.t_from_xi(0.05);
        let d = scale_factor_mu(t, &g, &CutoffConstants::FROZEN, 1).unwrap();
        assert!(d.partial_values.iter().all(|p| p.1 == 0.0));
    }
}
