//! The g-family of auxiliary functions, their branch variants, and K₂.
//!
//! Below `SERIES_SWITCH` every function is summed from the power series
//! coth v − 1/v = Σ_k (−1)^{k+1} 2ζ(2k)/π^{2k} · v^{2k−1}, which converges for |v| < π.
//! Above it the exact forms are written through ε(v) = coth v − 1 = 2e^{−2v}/(1 − e^{−2v}),
//! so the algebraic 1/v^k pieces cancel analytically and no nearly equal floats are
//! subtracted.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Series below, exponential forms above.
pub const SERIES_SWITCH: f64 = 2.0;
/// Below this the series needs only a handful of terms.
pub const SMALL_V: f64 = 0.05;

const N_COEF: usize = 90;

fn zeta_even(s: i32) -> f64 {
    match s {
        2 => PI * PI / 6.0,
        4 => PI.powi(4) / 90.0,
        _ => {
            let n = 50;
            let mut acc = 0.0;
            for k in (1..=n).rev() {
                acc += (k as f64).powi(-s);
            }
            let nf = n as f64;
            let sf = s as f64;
            // Euler–Maclaurin tail of Σ_{k>n} k^{-s}
            acc + nf.powf(1.0 - sf) / (sf - 1.0) - 0.5 * nf.powf(-sf) + sf * nf.powf(-sf - 1.0) / 12.0
        }
    }
}

/// c_k with g(v) = Σ_{k≥1} c_k v^{2k−1}; index 0 holds c_1.
fn coef() -> &'static [f64; N_COEF] {
    static C: OnceLock<[f64; N_COEF]> = OnceLock::new();
    C.get_or_init(|| {
        let mut c = [0.0; N_COEF];
        for (i, ci) in c.iter_mut().enumerate() {
            let k = (i + 1) as i32;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ci = sign * 2.0 * zeta_even(2 * k) / PI.powi(2 * k);
        }
        c
    })
}

/// All g-family values at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFamily {
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    /// g/v
    pub g_over_v: f64,
    pub h: f64,
    pub h1: f64,
}

fn series(v: f64) -> GFamily {
    let c = coef();
    let v2 = v * v;
    let r = v2 / (PI * PI);
    let (mut g1, mut g2, mut g3, mut gv, mut h, mut h1) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut p = 1.0; // v^{2k-2}
    let mut decay = 1.0 / (r * r * r); // r^{k-3}: size of term k relative to the leading h' term
    for (i, &ck) in c.iter().enumerate() {
        let k = (i + 1) as f64;
        let a = 2.0 * k - 1.0;
        let t = ck * p;
        gv += t;
        g1 += a * t;
        if i >= 1 {
            g2 += a * (a - 1.0) * t / v;
            g3 += a * (a - 1.0) * (a - 2.0) * t / v2;
            h += (2.0 * k - 2.0) * t / v2;
        }
        if i >= 2 {
            h1 += (2.0 * k - 2.0) * (2.0 * k - 4.0) * t / (v2 * v);
        }
        decay *= r;
        if i >= 3 && decay * 8.0 * k * k * k < 1e-18 {
            break;
        }
        p *= v2;
    }
    GFamily { g: gv * v, g1, g2, g3, g_over_v: gv, h, h1 }
}

/// ε = coth v − 1 and its first three derivatives, valid for every v > 0.
#[inline]
pub fn eps_derivs(v: f64) -> [f64; 4] {
    let t = (-2.0 * v).exp();
    let om = -(-2.0 * v).exp_m1(); // 1 − t
    let om2 = om * om;
    [
        2.0 * t / om,
        -4.0 * t / om2,
        8.0 * t * (1.0 + t) / (om2 * om),
        -16.0 * t * (1.0 + 4.0 * t + t * t) / (om2 * om2),
    ]
}

fn closed(v: f64) -> GFamily {
    let [e0, e1, e2, e3] = eps_derivs(v);
    let iv = 1.0 / v;
    let iv2 = iv * iv;
    let iv3 = iv2 * iv;
    let iv4 = iv2 * iv2;
    GFamily {
        g: 1.0 - iv + e0,
        g1: iv2 + e1,
        g2: -2.0 * iv3 + e2,
        g3: 6.0 * iv4 + e3,
        g_over_v: iv - iv2 + e0 * iv,
        h: -iv3 + 2.0 * iv4 + e1 * iv2 - e0 * iv3,
        h1: 3.0 * iv4 - 8.0 * iv4 * iv + e2 * iv2 - 3.0 * e1 * iv3 + 3.0 * e0 * iv4,
    }
}

/// Unchecked evaluation of the whole family; `v` must be positive.
#[inline]
pub fn family(v: f64) -> GFamily {
    if v < SERIES_SWITCH {
        series(v)
    } else {
        closed(v)
    }
}

fn check(func: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError { func, value: v })
    }
}

/// g(v) = coth v − 1/v.
pub fn g(v: f64) -> Result<f64> {
    check("g", v)?;
    Ok(family(v).g)
}

/// (g', g'', g''').
pub fn g_derivs(v: f64) -> Result<(f64, f64, f64)> {
    check("g_derivs", v)?;
    let f = family(v);
    Ok((f.g1, f.g2, f.g3))
}

/// h(v) = (1/v)·d/dv(g(v)/v).
pub fn h(v: f64) -> Result<f64> {
    check("h", v)?;
    Ok(family(v).h)
}

/// h'(v).
pub fn h_prime(v: f64) -> Result<f64> {
    check("h_prime", v)?;
    Ok(family(v).h1)
}

fn check_k(func: &'static str, k: i32) -> Result<()> {
    if (-1..=1).contains(&k) {
        Ok(())
    } else {
        Err(Error::DomainError { func, value: k as f64 })
    }
}

/// Value tagged with the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchValue {
    pub value: f64,
    pub k: i32,
}

/// f(v) = (g(v) − K)/v.
pub fn f_branch(v: f64, k: i32) -> Result<BranchValue> {
    check("f_branch", v)?;
    check_k("f_branch", k)?;
    let value = if v < SERIES_SWITCH {
        let f = series(v);
        f.g_over_v - k as f64 / v
    } else {
        let e = eps_derivs(v)[0];
        // (1 − K)/v − 1/v² + ε/v
        (1.0 - k as f64) / v - 1.0 / (v * v) + e / v
    };
    Ok(BranchValue { value, k })
}

/// h(v) + K/v³.
pub fn h_branch(v: f64, k: i32) -> Result<BranchValue> {
    check("h_branch", v)?;
    check_k("h_branch", k)?;
    let value = if v < SERIES_SWITCH {
        series(v).h + k as f64 / (v * v * v)
    } else {
        let [e0, e1, ..] = eps_derivs(v);
        let iv = 1.0 / v;
        (k as f64 - 1.0) * iv * iv * iv + 2.0 * iv.powi(4) + e1 * iv * iv - e0 * iv * iv * iv
    };
    Ok(BranchValue { value, k })
}

/// Modified Bessel function K₂(x).
pub fn bessel_k2(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::DomainError { func: "bessel_k2", value: x });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let (k0, k1) = bessel_k01(x);
    Ok(k0 + 2.0 * k1 / x)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// (K₀(x), K₁(x)) for x > 0.
pub fn bessel_k01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        // Power series with logarithmic terms.
        let y = 0.25 * x * x;
        let lx = (0.5 * x).ln();
        let mut term0 = 1.0; // y^k/(k!)^2
        let mut term1 = 0.5 * x; // (x/2)·y^k/(k!(k+1)!)
        let mut i0 = 0.0;
        let mut i1 = 0.0;
        let mut s0 = 0.0; // Σ H_k y^k/(k!)^2
        let mut s1 = 0.0; // Σ (ψ(k+1)+ψ(k+2)) (x/2) y^k/(k!(k+1)!)
        let mut hk = 0.0;
        for k in 0..60 {
            let kf = k as f64;
            if k > 0 {
                hk += 1.0 / kf;
            }
            let psi1 = -EULER_GAMMA + hk;
            let psi2 = psi1 + 1.0 / (kf + 1.0);
            i0 += term0;
            i1 += term1;
            s0 += hk * term0;
            s1 += (psi1 + psi2) * term1;
            if term0 < 1e-18 * i0 && k > 2 {
                break;
            }
            term0 *= y / ((kf + 1.0) * (kf + 1.0));
            term1 *= y / ((kf + 1.0) * (kf + 2.0));
        }
        let k0 = -(lx + EULER_GAMMA) * i0 + s0;
        let k1 = 1.0 / x + lx * i1 - 0.5 * s1;
        (k0, k1)
    } else {
        // Steed's continued fraction (order 0), then K₁ from the ratio.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut hh = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..10_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            hh += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        hh *= a1;
        let log_k0 = -x + 0.5 * (PI / (2.0 * x)).ln() - s.ln();
        let k0 = log_k0.exp();
        let k1 = k0 * (x + 0.5 - hh) / x;
        (k0, k1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // 40-digit reference values (independent arbitrary-precision evaluation).
    const REF: [(f64, [f64; 6]); 7] = [
        (0.01, [0.0033333111113227492064, 0.33332666677248529102, -0.0013332910061798787881, -0.13332063536506859088, -0.044443597896296125276, 0.00016930709004970165154]),
        (0.05, [0.016663889550099248092, 0.33316673278109216939, -0.0066613784379514027927, -0.13301615062538429014, -0.044423288357116980107, 0.00084592624645768936275]),
        (0.3, [0.099405096988408256124, 0.32741798010333677369, -0.038878410860125743985, -0.12225704575588840411, -0.04369270212619348218, 0.0049446783716487775252]),
        (1.0, [0.31303528549933130364, 0.27593833903368953359, -0.098562980547961016516, -0.041838377152995795827, -0.037096946465641770044, 0.012727858848964293616]),
        (2.0, [0.53731472072754809588, 0.17397817016192890075, -0.092282873624648189588, 0.036236768976143779205, -0.023669797550461286798, 0.0124339779195298828]),
        (5.0, [0.80009080398201937554, 0.039818383790598098352, -0.015636734598246170788, 0.0088733372557072883141, -0.0048079910802322310702, 0.0022593252642094918106]),
        (30.0, [0.96666666666666666667, 0.0011111111111111111111, -0.000074074074074074074074, 7.4074074074074074073e-6, -0.000034567901234567901235, 3.37448559670781893e-6]),
    ];

    #[test]
    fn family_matches_reference() {
        for (v, r) in REF {
            let f = family(v);
            let got = [f.g, f.g1, f.g2, f.g3, f.h, f.h1];
            for (i, (a, b)) in got.iter().zip(r.iter()).enumerate() {
                assert!(rel(*a, *b) < 2e-13, "v={v} idx={i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn small_v_limits() {
        let f = family(1e-6);
        assert!(rel(f.g_over_v, 1.0 / 3.0) < 1e-11);
        assert!(rel(f.g1, 1.0 / 3.0) < 1e-11);
        assert!(rel(f.h, -2.0 / 45.0) < 1e-11);
    }

    #[test]
    fn switch_is_seamless() {
        for v in [SERIES_SWITCH * (1.0 - 1e-12), SERIES_SWITCH * 0.999, SERIES_SWITCH * 1.001] {
            let a = series(v);
            let b = closed(v);
            for (x, y) in [(a.g, b.g), (a.g1, b.g1), (a.g2, b.g2), (a.g3, b.g3), (a.h, b.h), (a.h1, b.h1)] {
                assert!(rel(x, y) < 5e-14, "v={v}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn branch_large_v_asymptotes() {
        let v = 30.0;
        assert!(rel(h_branch(v, 1).unwrap().value * v.powi(4), 1.9999999999999999853) < 1e-14);
        let v = 1e4;
        assert!(rel(f_branch(v, 1).unwrap().value * v * v, -1.0) < 1e-14);
        assert!(rel(f_branch(1e-5, 0).unwrap().value, 1.0 / 3.0) < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(g(0.0).is_err());
        assert!(h(-1.0).is_err());
        assert!(f_branch(1.0, 2).is_err());
        assert!(bessel_k2(0.0).is_err());
    }

    #[test]
    fn k2_reference_values() {
        let refs = [
            (0.001, 1999999.5000009717109),
            (0.1, 199.50396464211413931),
            (1.0, 1.6248388986351774828),
            (2.0, 0.25375975456605586294),
            (2.5, 0.12146020627856383695),
            (10.0, 0.000021509817006932768731),
            (50.0, 3.5479318388581977384e-23),
            (300.0, 3.7485608272780257479e-132),
            (700.0, 4.6831281768188282127e-306),
        ];
        for (x, r) in refs {
            let k = bessel_k2(x).unwrap();
            assert!(rel(k, r) < 1e-12, "x={x}: {k} vs {r}");
        }
        assert_eq!(bessel_k2(800.0).unwrap(), 0.0);
    }
}
