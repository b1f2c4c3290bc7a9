//! Image route: the regularized sums evaluated image by image.
//!
//! The Casimir term is folded into the summands, so images above the cutoff contribute
//! only exponentially small amounts and the sum stops at v_max with no power-law tail.

use std::f64::consts::PI;

use crate::lattice::{octant_points, shell_sums};
use crate::numerics::Neumaier;
use crate::specfun::{eps_derivs, family};
use crate::types::{CavityGeometry, CutoffConstants};

use super::{BranchSignature, Potentials};

/// Summands are dropped beyond max(cutoff, smallest v) + this margin (e^{−2·19} ≈ 3e−17).
pub const V_MARGIN: f64 = 19.0;

const SHELLS: usize = 128;

/// Volume summand [φF, φS, φE, φC, φF'] for one image.
#[inline]
fn volume_terms(v: f64, active: bool) -> [f64; 5] {
    let iv = 1.0 / v;
    let iv2 = iv * iv;
    let iv3 = iv2 * iv;
    let iv4 = iv2 * iv2;
    if active {
        let [e0, e1, e2, e3] = eps_derivs(v);
        [
            e1 * iv2 - e0 * iv3,
            e2 * iv + e1 * iv2 - e0 * iv3,
            e2 * iv,
            3.0 * e2 * iv + e3,
            e2 * iv2 - 3.0 * e1 * iv3 + 3.0 * e0 * iv4,
        ]
    } else {
        let f = family(v);
        [
            f.h - 2.0 * iv4,
            v * f.h1 + 4.0 * f.h,
            f.g2 * iv + 2.0 * iv4,
            3.0 * f.g2 * iv + f.g3,
            f.h1 + 8.0 * iv4 * iv,
        ]
    }
}

/// Edge summand [φF, φS, φE, φC, vφF'] for one single-axis image.
#[inline]
fn edge_terms(v: f64, active: bool) -> [f64; 5] {
    let iv = 1.0 / v;
    if active {
        let [e0, e1, e2, _] = eps_derivs(v);
        [e0 * iv, e0 * iv + e1, e1, 2.0 * e1 + v * e2, e1 - e0 * iv]
    } else {
        let f = family(v);
        let iv2 = iv * iv;
        [f.g_over_v + iv2, f.g_over_v + f.g1, f.g1 - iv2, 2.0 * f.g1 + v * f.g2, f.g1 - f.g_over_v - 2.0 * iv2]
    }
}

fn volume_cut(t: f64, g: &CavityGeometry, c: &CutoffConstants) -> f64 {
    let v_min = 2.0 * PI * t * g.min_edge();
    c.v_v.max(v_min) + V_MARGIN
}

/// Octant images the volume pass would visit at temperature `t`.
pub fn estimated_images(t: f64, g: &CavityGeometry, c: &CutoffConstants) -> f64 {
    let r = volume_cut(t, g, c) / (2.0 * PI * t);
    octant_points(g, r)
}

/// Number of n ≥ 1 with 2πT n a < v_c.
pub fn inactive_edge_count(t: f64, a: f64, v_c: f64) -> u64 {
    let step = 2.0 * PI * t * a;
    let mut n = (v_c / step).floor() as u64;
    while n > 0 && PI * t * (2.0 * n as f64 * a) >= v_c {
        n -= 1;
    }
    while PI * t * (2.0 * (n + 1) as f64 * a) < v_c {
        n += 1;
    }
    n
}

/// Δ potentials (ΔE₀ included) and the branch signature by direct image summation.
pub fn delta_by_images(t: f64, g: &CavityGeometry, c: &CutoffConstants, parallel: bool) -> (Potentials, BranchSignature) {
    let a = g.edges();
    let vol = g.volume();
    let pt = PI * t;
    let v_max = volume_cut(t, g, c);
    // Shells of at least one shortest edge, at most SHELLS of them.
    let r = v_max / (2.0 * pt);
    let n_shells = ((r / g.min_edge()).ceil() as usize).clamp(1, SHELLS);
    let w = r * (1.0 + 1e-12) / n_shells as f64;
    let shells = shell_sums::<9, _>(g, w, n_shells, parallel, |img| {
        let v = pt * img.u();
        if v >= v_max {
            return [0.0; 9];
        }
        let active = v >= c.v_v;
        let [f, s, e, cc, fp] = volume_terms(v, active);
        let m = img.mult;
        let mut out = [m * f, m * s, m * e, m * cc, 0.0, 0.0, 0.0, 0.0, if active { 0.0 } else { m }];
        for k in 0..3 {
            let x = 2.0 * pt * img.n[k] as f64 * a[k];
            out[4 + k] = m * fp * x * x / v;
        }
        out
    });
    let mut acc = [Neumaier::new(); 9];
    for (s, _) in &shells {
        for i in 0..9 {
            acc[i].add(s[i]);
        }
    }
    let sv = acc.map(|x| x.value());
    let t2 = t * t;
    let p_v = 0.5 * PI * PI * vol * t2 * t2;
    let s_v = 0.5 * PI * PI * vol * t2 * t;
    let mut d = Potentials {
        f: p_v * sv[0],
        s: -s_v * sv[1],
        e: -p_v * sv[2],
        c: -s_v * sv[3],
        df: [0, 1, 2].map(|k| p_v / a[k] * (sv[0] + sv[4 + k])),
    };
    let mut edge_inactive = [0u64; 3];
    for k in 0..3 {
        let v_max_e = c.v_e.max(2.0 * pt * a[k]) + V_MARGIN;
        let mut e = [Neumaier::new(); 5];
        let mut n = 1u64;
        loop {
            let v = pt * (2.0 * n as f64 * a[k]);
            if v >= v_max_e {
                break;
            }
            let active = v >= c.v_e;
            if !active {
                edge_inactive[k] += 1;
            }
            let r = edge_terms(v, active);
            for i in 0..5 {
                e[i].add(2.0 * r[i]);
            }
            n += 1;
        }
        let se = e.map(|x| x.value());
        let p_k = 0.25 * PI * a[k] * t2;
        let s_k = 0.25 * PI * a[k] * t;
        d.f += p_k * se[0];
        d.s -= s_k * se[1];
        d.e -= p_k * se[2];
        d.c -= s_k * se[3];
        d.df[k] += p_k / a[k] * (se[0] + se[4]);
    }
    let sig = BranchSignature { volume_inactive: sv[8].round() as u64, edge_inactive };
    (d, sig)
}
