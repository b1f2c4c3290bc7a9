//! Weyl (large-cavity) part of the thermal free energy, with its edge term.

use std::f64::consts::PI;

use crate::types::CavityGeometry;

use super::Potentials;

/// Closed-form blackbody potentials at temperature `t`:
/// F = −π²VT⁴/45 + πLT²/12 and everything derived from it analytically.
pub fn blackbody(t: f64, g: &CavityGeometry) -> Potentials {
    let v = g.volume();
    let l = g.edge_sum();
    let (t2, t3) = (t * t, t * t * t);
    let t4 = t2 * t2;
    let a = g.edges();
    Potentials {
        f: -PI * PI * v * t4 / 45.0 + PI * l * t2 / 12.0,
        s: 4.0 * PI * PI * v * t3 / 45.0 - PI * l * t / 6.0,
        e: PI * PI * v * t4 / 15.0 - PI * l * t2 / 12.0,
        c: 4.0 * PI * PI * v * t3 / 15.0 - PI * l * t / 6.0,
        df: a.map(|ak| -(PI * PI / 45.0) * (v / ak) * t4 + PI / 12.0 * t2),
    }
}

pub fn blackbody_free_energy(t: f64, g: &CavityGeometry) -> f64 {
    blackbody(t, g).f
}

pub fn blackbody_entropy(t: f64, g: &CavityGeometry) -> f64 {
    blackbody(t, g).s
}

pub fn blackbody_energy(t: f64, g: &CavityGeometry) -> f64 {
    blackbody(t, g).e
}

pub fn blackbody_specific_heat(t: f64, g: &CavityGeometry) -> f64 {
    blackbody(t, g).c
}

/// Blackbody wall pressures P_k = −(a_k/V) ∂F_BB/∂a_k.
pub fn blackbody_pressures(t: f64, g: &CavityGeometry) -> [f64; 3] {
    let p = blackbody(t, g);
    let v = g.volume();
    [0, 1, 2].map(|k| -g.a(k) / v * p.df[k])
}
