//! Spectral route for low temperatures, where the image table would be too large.
//!
//! Totals are assembled from the direct mode sum (gapped, so only a handful of modes
//! matter at low T) plus the exact bookkeeping of inactive images:
//!
//!   E = ΔE₀ + E_dir − T/2
//!   F = ΔE₀ + F_dir + T(½ ln T + c(T)),  c(T) = C₀ − Ω_V(T) + Ω_E(T)
//!   S = S_dir − ½ ln T − ½ − c(T)
//!
//! with Ω_V = (V/2π) Σ_{v<v_V} u⁻³ over inactive volume images and Ω_E = ¼ Σ_k H(N_k)
//! over inactive edge images. The geometry constant C₀ and its edge derivatives are
//! calibrated once against the image route.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{ball_sums, mode_sum};
use crate::numerics::Neumaier;
use crate::types::{CavityGeometry, CutoffConstants};

use super::images::inactive_edge_count;
use super::{BranchSignature, Potentials};

/// Modes above ω_min + this many T are dropped (e^{−48} relative).
pub const MODE_WINDOW: f64 = 48.0;

/// Thermal sums over the discrete spectrum: [F, S, E, C, ∂F/∂a_k].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectSums {
    pub f: f64,
    pub s: f64,
    pub e: f64,
    pub c: f64,
    pub df: [f64; 3],
    pub modes: u64,
}

/// Lowest frequency with nonzero weight.
pub fn lowest_mode(g: &CavityGeometry) -> f64 {
    let mut a = g.edges();
    a.sort_by(|x, y| y.total_cmp(x));
    PI * ((1.0 / a[0]).powi(2) + (1.0 / a[1]).powi(2)).sqrt()
}

pub fn direct_sums(t: f64, g: &CavityGeometry, omega_max: f64, parallel: bool) -> DirectSums {
    let a = g.edges();
    let (s, modes) = mode_sum::<7, _>(g, omega_max, parallel, |n, w, om| {
        let x = om / t;
        if x > 700.0 {
            return [0.0; 7];
        }
        let em = (-x).exp();
        let nb = 1.0 / x.exp_m1();
        let l = (-em).ln_1p();
        let mut r = [w * t * l, w * (x * nb - l), w * om * nb, w * x * x * nb * (1.0 + nb), 0.0, 0.0, 0.0];
        for k in 0..3 {
            let nk = n[k] as f64;
            r[4 + k] = -w * nb * PI * PI * nk * nk / (a[k].powi(3) * om);
        }
        r
    });
    DirectSums { f: s[0], s: s[1], e: s[2], c: s[3], df: [s[4], s[5], s[6]], modes }
}

/// Harmonic number H(n).
pub fn harmonic(n: u64) -> f64 {
    if n <= 1_000_000 {
        let mut acc = Neumaier::new();
        for k in (1..=n).rev() {
            acc.add(1.0 / k as f64);
        }
        return acc.value();
    }
    let x = n as f64;
    x.ln() + 0.577_215_664_901_532_9 + 0.5 / x - 1.0 / (12.0 * x * x) + 1.0 / (120.0 * x.powi(4))
}

/// Inactive-image bookkeeping at temperature `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inactive {
    /// Ω_V and its edge derivatives.
    pub omega_v: f64,
    pub d_omega_v: [f64; 3],
    pub omega_e: f64,
    pub branch: BranchSignature,
}

pub fn inactive(t: f64, g: &CavityGeometry, c: &CutoffConstants, parallel: bool) -> Inactive {
    let a = g.edges();
    let vol = g.volume();
    let b = ball_sums(g, c.v_v / (PI * t), parallel);
    let pref = vol / (2.0 * PI);
    let edge_inactive = a.map(|ak| inactive_edge_count(t, ak, c.v_e));
    Inactive {
        omega_v: pref * b.s3,
        d_omega_v: [0, 1, 2].map(|k| pref * (b.s3 / a[k] - 12.0 * a[k] * b.d5[k])),
        omega_e: 0.25 * edge_inactive.iter().map(|&n| harmonic(n)).sum::<f64>(),
        branch: BranchSignature { volume_inactive: b.count, edge_inactive },
    }
}

/// The calibrated geometry constant C₀ and ∂C₀/∂a_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub t_ref: f64,
    pub c0: f64,
    pub dc0: [f64; 3],
}

/// Totals (not Δ parts) from the spectral formulas.
pub fn totals(
    t: f64,
    g: &CavityGeometry,
    c: &CutoffConstants,
    e0: f64,
    de0: [f64; 3],
    cal: &Calibration,
    parallel: bool,
) -> (Potentials, BranchSignature) {
    let d = direct_sums(t, g, lowest_mode(g) + MODE_WINDOW * t, parallel);
    let ina = inactive(t, g, c, parallel);
    let ct = cal.c0 - ina.omega_v + ina.omega_e;
    let lt = t.ln();
    let p = Potentials {
        f: e0 + d.f + t * (0.5 * lt + ct),
        s: d.s - 0.5 * lt - 0.5 - ct,
        e: e0 + d.e - 0.5 * t,
        c: d.c - 0.5,
        df: [0, 1, 2].map(|k| de0[k] + d.df[k] + t * (cal.dc0[k] - ina.d_omega_v[k])),
    };
    (p, ina.branch)
}

/// Total energy only (no inactive-image sums needed).
pub fn total_energy(t: f64, g: &CavityGeometry, e0: f64, parallel: bool) -> f64 {
    let d = direct_sums(t, g, lowest_mode(g) + MODE_WINDOW * t, parallel);
    e0 + d.e - 0.5 * t
}

/// Solves the spectral formulas for C₀ and ∂C₀/∂a_k given image-route totals at t_ref.
pub fn calibrate(
    t_ref: f64,
    g: &CavityGeometry,
    c: &CutoffConstants,
    de0: [f64; 3],
    image_totals: &Potentials,
    parallel: bool,
) -> Calibration {
    let d = direct_sums(t_ref, g, lowest_mode(g) + MODE_WINDOW * t_ref, parallel);
    let ina = inactive(t_ref, g, c, parallel);
    let c0 = d.s - image_totals.s - 0.5 * t_ref.ln() - 0.5 + ina.omega_v - ina.omega_e;
    let dc0 = [0, 1, 2].map(|k| (image_totals.df[k] - de0[k] - d.df[k]) / t_ref + ina.d_omega_v[k]);
    Calibration { t_ref, c0, dc0 }
}
