//! Image-vector and mode enumeration, and the convergence-controlled lattice sums.
//!
//! Volume sums run over the positive octant with multiplicity 2^{#nonzero indices},
//! grouped into shells of the metric |x| = √Σ(n_i a_i)² (u = 2|x|). Shells are reduced
//! in increasing order with compensated summation, so parallel and sequential runs
//! agree bit for bit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_to_infinity, ordered_sum_range, Neumaier};
use crate::types::{mode_omega, CavityGeometry, ModeTriple, SumPolicy, TailMethod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumResult {
    pub value: f64,
    pub truncation_error_estimate: f64,
    pub terms_used: u64,
    pub tail_correction: f64,
}

/// Which family of images a [`ShellEnumerator`] walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumKind {
    Volume3d,
    EdgeAxis(usize),
}

/// Canonical enumeration of octant images (volume) or positive single-axis images (edges).
#[derive(Debug, Clone, Copy)]
pub struct ShellEnumerator {
    pub geometry: CavityGeometry,
    pub policy: SumPolicy,
    pub kind: SumKind,
}

/// Octant image handed to shell callbacks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OctantImage {
    pub n: [u64; 3],
    /// q = Σ (n_i a_i)², so u = 2√q.
    pub q: f64,
    /// Number of full-lattice images represented: 8, 4 or 2.
    pub mult: f64,
}

impl OctantImage {
    pub fn u(&self) -> f64 {
        2.0 * self.q.sqrt()
    }
}

fn multiplicity(n: [u64; 3]) -> f64 {
    let nz = n.iter().filter(|&&k| k != 0).count();
    (1u32 << nz) as f64
}

/// Calls `f` on every octant image in shell s, i.e. s·w ≤ |x| < (s+1)·w.
pub fn for_each_in_shell<F: FnMut(&OctantImage)>(g: &CavityGeometry, w: f64, s: usize, mut f: F) {
    let a = g.edges();
    let lo2 = (s as f64 * w).powi(2);
    let hi2 = ((s + 1) as f64 * w).powi(2);
    let n1_max = (hi2.sqrt() / a[0]) as u64 + 1;
    for n1 in 0..=n1_max {
        let c1 = (n1 as f64 * a[0]).powi(2);
        if c1 >= hi2 {
            break;
        }
        let n2_max = ((hi2 - c1).sqrt() / a[1]) as u64 + 1;
        for n2 in 0..=n2_max {
            let c2 = c1 + (n2 as f64 * a[1]).powi(2);
            if c2 >= hi2 {
                break;
            }
            let mut n3 = if lo2 > c2 { ((lo2 - c2).sqrt() / a[2]) as u64 } else { 0 };
            n3 = n3.saturating_sub(1);
            loop {
                let q = c2 + (n3 as f64 * a[2]).powi(2);
                if q >= hi2 {
                    break;
                }
                if q >= lo2 && !(n1 == 0 && n2 == 0 && n3 == 0) {
                    let n = [n1, n2, n3];
                    f(&OctantImage { n, q, mult: multiplicity(n) });
                }
                n3 += 1;
            }
        }
    }
}

/// Per-shell sums of `f` (already multiplied by the caller's multiplicity handling)
/// for shells 0..n_shells, each shell reduced with compensated summation.
pub fn shell_sums<const N: usize, F>(
    g: &CavityGeometry,
    w: f64,
    n_shells: usize,
    parallel: bool,
    f: F,
) -> Vec<([f64; N], u64)>
where
    F: Fn(&OctantImage) -> [f64; N] + Sync,
{
    shell_sums_range(g, w, 0, n_shells, parallel, f)
}

/// Per-shell sums for shells start..end.
pub fn shell_sums_range<const N: usize, F>(
    g: &CavityGeometry,
    w: f64,
    start: usize,
    end: usize,
    parallel: bool,
    f: F,
) -> Vec<([f64; N], u64)>
where
    F: Fn(&OctantImage) -> [f64; N] + Sync,
{
    let one = |s: usize| {
        let mut acc = [Neumaier::new(); N];
        let mut count = 0u64;
        for_each_in_shell(g, w, s, |img| {
            let r = f(img);
            for k in 0..N {
                acc[k].add(r[k]);
            }
            count += 1;
        });
        (acc.map(|x| x.value()), count)
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (start..end).into_par_iter().map(one).collect();
    }
    let _ = parallel;
    (start..end).map(one).collect()
}

/// Compensated prefix totals of per-shell sums at the requested shell counts.
fn prefix_totals<const N: usize>(shells: &[([f64; N], u64)], cuts: &[usize]) -> Vec<([f64; N], u64)> {
    let mut out = Vec::with_capacity(cuts.len());
    let mut acc = [Neumaier::new(); N];
    let mut count = 0u64;
    let mut next = 0;
    for (i, (s, c)) in shells.iter().enumerate() {
        for k in 0..N {
            acc[k].add(s[k]);
        }
        count += c;
        while next < cuts.len() && cuts[next] == i + 1 {
            out.push((acc.map(|x| x.value()), count));
            next += 1;
        }
    }
    while next < cuts.len() {
        out.push((acc.map(|x| x.value()), count));
        next += 1;
    }
    out
}

/// Σ' term(u_n) over the full 3D lattice, origin excluded.
///
/// The shell radius doubles from 8 (units of the shortest edge) until the error
/// estimate meets rel_tol or max_shell_radius is reached. With a tail method the sum is
/// split by the smooth window w(u/U): the windowed part is summed image by image and
/// the remainder is replaced by its continuum integral with image density πu²/(2V),
/// which converges much faster than a sharp cut. Without one the sum is cut sharply and
/// the continuum tail beyond the cut is only used as the error estimate.
pub fn volume_sum<F>(g: &CavityGeometry, policy: &SumPolicy, term: F) -> Result<SumResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    policy.validate()?;
    let w = g.min_edge();
    let dens = PI / (2.0 * g.volume());
    let smooth = policy.tail_method != TailMethod::None;
    // Tails only need to be resolved relative to the lattice part they complete.
    let sharp_tail = |u_cut: f64, scale: f64| -> Result<f64> {
        Ok(integrate_to_infinity(|u| term(u) * dens * u * u, u_cut, 1e-17 * scale, 1e-13)?.value)
    };
    let smooth_tail = |u_cut: f64, scale: f64| -> Result<f64> {
        let inner =
            integrate(|u| term(u) * (1.0 - window(u / u_cut)) * dens * u * u, 0.5 * u_cut, u_cut, 1e-17 * scale, 1e-13)?;
        Ok(inner.value + sharp_tail(u_cut, scale)?)
    };
    let mut raw_shells: Vec<([f64; 1], u64)> = Vec::new();
    let mut corrected: Vec<f64> = Vec::new();
    let mut r = FIRST_RADIUS.min(policy.max_shell_radius as usize);
    let mut outcome;
    loop {
        let u_cut = 2.0 * w * r as f64;
        let (raw, count, tail) = if smooth {
            let shells = shell_sums::<1, _>(g, w, r, policy.parallel, |img| {
                let u = img.u();
                [img.mult * term(u) * window(u / u_cut)]
            });
            let (p, count) = prefix_totals(&shells, &[r])[0];
            (p[0], count, smooth_tail(u_cut, p[0].abs().max(f64::MIN_POSITIVE))?)
        } else {
            let start = raw_shells.len();
            raw_shells.extend(shell_sums_range::<1, _>(g, w, start, r, policy.parallel, |img| [img.mult * term(img.u())]));
            let (p, count) = prefix_totals(&raw_shells, &[r])[0];
            (p[0], count, sharp_tail(u_cut, p[0].abs().max(f64::MIN_POSITIVE))?)
        };
        let n = corrected.len() + 1;
        let (value, err) = match policy.tail_method {
            TailMethod::None => {
                corrected.push(raw);
                (raw, tail.abs())
            }
            TailMethod::ContinuumIntegral => {
                corrected.push(raw + tail);
                (corrected[n - 1], if n >= 2 { (corrected[n - 1] - corrected[n - 2]).abs() } else { f64::INFINITY })
            }
            TailMethod::Extrapolation => {
                corrected.push(raw + tail);
                let v = if n >= 3 { aitken(corrected[n - 3], corrected[n - 2], corrected[n - 1]) } else { corrected[n - 1] };
                (v, if n >= 2 { (corrected[n - 1] - corrected[n - 2]).abs() } else { f64::INFINITY })
            }
        };
        outcome = (value, err, count, value - raw);
        let converged = err <= policy.rel_tol * value.abs() && (n >= 3 || err == 0.0);
        let next = 2 * r;
        if converged || next > policy.max_shell_radius as usize || octant_points(g, w * next as f64) > MAX_POINTS {
            break;
        }
        r = next;
    }
    let (value, err, count, corr) = outcome;
    finish(value, err, count, corr, policy)
}

fn finish(value: f64, err: f64, terms_used: u64, tail_correction: f64, policy: &SumPolicy) -> Result<SumResult> {
    if !value.is_finite() || err > policy.rel_tol * value.abs() {
        return Err(Error::ConvergenceFailure { partial: value, error_estimate: err });
    }
    Ok(SumResult { value, truncation_error_estimate: err, terms_used, tail_correction })
}


/// Σ_{n ≠ 0} term(2|n| a_axis).
pub fn edge_sum<F>(g: &CavityGeometry, policy: &SumPolicy, axis: usize, term: F) -> Result<SumResult>
where
    F: Fn(f64) -> f64,
{
    policy.validate()?;
    if axis > 2 {
        return Err(Error::DomainError { func: "edge_sum axis", value: axis as f64 });
    }
    let a = g.a(axis);
    let n_max = 64 * policy.max_shell_radius as u64;
    let f = |n: f64| term(2.0 * n * a);
    let mut acc = Neumaier::new();
    let mut at_half = 0.0;
    for n in 1..=n_max {
        acc.add(f(n as f64));
        if n == n_max / 2 {
            at_half = acc.value();
        }
    }
    let raw = acc.value();
    // Euler–Maclaurin remainder Σ_{n>N} f(n) ≈ ∫_N^∞ f − f(N)/2 − f'(N)/12.
    let em_tail = |nn: f64| -> Result<f64> {
        let int = integrate_to_infinity(&f, nn, 1e-300, 1e-13)?.value;
        let h = 1e-3 * nn;
        let d = (f(nn + h) - f(nn - h)) / (2.0 * h);
        Ok(int - 0.5 * f(nn) - d / 12.0)
    };
    let (half_sum, value_sum, err, corr) = match policy.tail_method {
        TailMethod::None => {
            let t = em_tail(n_max as f64)?;
            (raw, raw, t.abs(), 0.0)
        }
        TailMethod::ContinuumIntegral | TailMethod::Extrapolation => {
            let t = em_tail(n_max as f64)?;
            let th = em_tail((n_max / 2) as f64)?;
            let full = raw + t;
            let half = at_half + th;
            (half, full, (full - half).abs(), t)
        }
    };
    let _ = half_sum;
    finish(2.0 * value_sum, 2.0 * err, 2 * n_max, 2.0 * corr, policy)
}

/// Zero-point energy and its edge-length derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasimirData {
    pub energy: f64,
    /// ∂ΔE₀/∂a_k at fixed other edges.
    pub d_energy: [f64; 3],
    pub error_estimate: f64,
    /// Σ' 1/u⁴ after tail treatment.
    pub inverse_quartic_sum: f64,
}

/// C∞ step: 1 on x ≤ 1/2, 0 on x ≥ 1.
fn window(x: f64) -> f64 {
    if x <= 0.5 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * (x - 0.5);
    let psi = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let (p, q) = (psi(t), psi(1.0 - t));
    q / (p + q)
}

/// ∫_{1/2}^∞ x^{-2} (1 − window(x)) dx.
fn window_tail_constant() -> f64 {
    crate::numerics::integrate(|x| (1.0 - window(x)) / (x * x), 0.5, 1.0, 1e-16, 1e-15)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
        + 1.0
}

/// Aitken Δ² on three successive estimates (Richardson with the rate estimated from the
/// data); falls back to the last value when the sequence is not contracting.
fn aitken(c1: f64, c2: f64, c4: f64) -> f64 {
    let d1 = c2 - c1;
    let d2 = c4 - c2;
    if d1 == 0.0 || d2 == 0.0 {
        return c4;
    }
    let r = d2 / d1;
    if r > 0.0 && r < 0.9 {
        c4 + d2 * r / (1.0 - r)
    } else {
        c4
    }
}

const FIRST_RADIUS: usize = 8;
/// Octant points beyond which a doubling pass is refused.
const MAX_POINTS: f64 = 4e8;

pub(crate) fn octant_points(g: &CavityGeometry, radius_len: f64) -> f64 {
    let a = g.edges();
    PI / 6.0 * a.iter().map(|ai| radius_len / ai + 1.0).product::<f64>()
}

/// ΔE₀ = −(V/π²)Σ'1/u⁴ + Σ_k π/(48 a_k), with derivatives for the T = 0 pressures.
///
/// The 1/u⁴ and n_k²/u⁶ sums are split with a smooth window w(u/U): the windowed part is
/// summed exactly and the remainder, smooth on the lattice scale, is replaced by its
/// continuum integral. U doubles from 8 shells until two successive estimates agree to
/// rel_tol; the last three estimates are then Richardson/Aitken extrapolated.
pub fn casimir_data(g: &CavityGeometry, policy: &SumPolicy) -> Result<CasimirData> {
    policy.validate()?;
    let w = g.min_edge();
    let a = g.edges();
    let vol = g.volume();
    let smooth = policy.tail_method != TailMethod::None;
    let jconst = window_tail_constant();
    let assemble = |s: [f64; 4]| -> [f64; 4] {
        let mut out = [0.0; 4];
        out[0] = -(vol / (PI * PI)) * s[0] + a.iter().map(|ak| PI / (48.0 * ak)).sum::<f64>();
        for k in 0..3 {
            out[k + 1] = -(vol / (a[k] * PI * PI)) * s[0] + 16.0 * vol * a[k] / (PI * PI) * s[k + 1]
                - PI / (48.0 * a[k] * a[k]);
        }
        out
    };
    let mut history: Vec<([f64; 4], f64)> = Vec::new();
    let mut c = FIRST_RADIUS;
    loop {
        let u_cut = 2.0 * w * c as f64;
        if octant_points(g, 0.5 * u_cut) > MAX_POINTS || c > policy.max_shell_radius as usize {
            break;
        }
        let shells = shell_sums::<4, _>(g, w, c, policy.parallel, |img| {
            let u2 = 4.0 * img.q;
            let wt = if smooth { window(u2.sqrt() / u_cut) } else { 1.0 };
            let i4 = img.mult * wt / (u2 * u2);
            let i6 = i4 / u2;
            let nf = img.n.map(|k| k as f64);
            [i4, nf[0] * nf[0] * i6, nf[1] * nf[1] * i6, nf[2] * nf[2] * i6]
        });
        let mut s = prefix_totals(&shells, &[c])[0].0;
        if smooth {
            s[0] += PI / (2.0 * vol) * jconst / u_cut;
            for k in 0..3 {
                s[k + 1] += PI / (24.0 * vol * a[k] * a[k]) * jconst / u_cut;
            }
        }
        let e = assemble(s);
        let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        history.push((e, scale));
        let n = history.len();
        if n >= 3 {
            let diff = (0..4).fold(0.0f64, |m, i| m.max((history[n - 1].0[i] - history[n - 2].0[i]).abs()));
            if diff <= policy.rel_tol * scale {
                break;
            }
        }
        c *= 2;
    }
    let n = history.len();
    if n < 2 {
        return Err(Error::ConvergenceFailure { partial: history.first().map_or(f64::NAN, |h| h.0[0]), error_estimate: f64::INFINITY });
    }
    let last = history[n - 1].0;
    let prev = history[n - 2].0;
    let diff = (0..4).fold(0.0f64, |m, i| m.max((last[i] - prev[i]).abs()));
    let mut out = last;
    if policy.tail_method == TailMethod::Extrapolation && n >= 3 {
        let first = history[n - 3].0;
        for i in 0..4 {
            out[i] = aitken(first[i], prev[i], last[i]);
        }
    }
    let scale = history[n - 1].1;
    if !out[0].is_finite() || diff > policy.rel_tol * scale {
        return Err(Error::ConvergenceFailure { partial: out[0], error_estimate: diff });
    }
    let s4 = (out[0] - a.iter().map(|ak| PI / (48.0 * ak)).sum::<f64>()) * (-(PI * PI) / vol);
    Ok(CasimirData { energy: out[0], d_energy: [out[1], out[2], out[3]], error_estimate: diff, inverse_quartic_sum: s4 })
}

/// ΔE₀ in natural units.
pub fn casimir_energy(g: &CavityGeometry, policy: &SumPolicy) -> Result<f64> {
    Ok(casimir_data(g, policy)?.energy)
}

/// All modes with 0 < ω ≤ omega_max and nonzero weight, sorted by ω then indices.
pub fn mode_frequencies(g: &CavityGeometry, omega_max: f64) -> Vec<(ModeTriple, f64)> {
    let a = g.edges();
    let nmax = a.map(|ai| (omega_max * ai / PI).floor() as u64);
    let mut out = Vec::new();
    for n1 in 0..=nmax[0] {
        for n2 in 0..=nmax[1] {
            for n3 in 0..=nmax[2] {
                let n = [n1, n2, n3];
                if n.iter().filter(|&&k| k == 0).count() >= 2 {
                    continue;
                }
                let w = mode_omega(n, g);
                if w <= omega_max {
                    out.push((ModeTriple::new(n1, n2, n3).expect("nonzero"), w));
                }
            }
        }
    }
    out.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.n.cmp(&y.0.n)));
    out
}

/// Σ over weighted modes with ω ≤ omega_max of `f(n, weight, ω)`, columns along axis 3,
/// reduced in (n1, n2) order.
pub fn mode_sum<const N: usize, F>(g: &CavityGeometry, omega_max: f64, parallel: bool, f: F) -> ([f64; N], u64)
where
    F: Fn([u64; 3], f64, f64) -> [f64; N] + Sync,
{
    let a = g.edges();
    let k = omega_max / PI;
    let n1_max = (k * a[0]).floor() as u64;
    let n2_max = (k * a[1]).floor() as u64;
    let cols = ((n1_max + 1) * (n2_max + 1)) as usize;
    let k2 = k * k;
    let totals = ordered_sum_range::<N, _>(cols, parallel, |idx| {
        let n1 = idx as u64 / (n2_max + 1);
        let n2 = idx as u64 % (n2_max + 1);
        let c = (n1 as f64 / a[0]).powi(2) + (n2 as f64 / a[1]).powi(2);
        let mut acc = [Neumaier::new(); N];
        if c > k2 {
            return [0.0; N];
        }
        let n3_max = ((k2 - c).max(0.0).sqrt() * a[2]).floor() as u64 + 1;
        for n3 in 0..=n3_max {
            let n = [n1, n2, n3];
            let zeros = n.iter().filter(|&&x| x == 0).count();
            if zeros >= 2 {
                continue;
            }
            let om = PI * (c + (n3 as f64 / a[2]).powi(2)).sqrt();
            if om > omega_max {
                break;
            }
            let wgt = if zeros == 0 { 2.0 } else { 1.0 };
            let r = f(n, wgt, om);
            for j in 0..N {
                acc[j].add(r[j]);
            }
        }
        acc.map(|x| x.value())
    });
    let count = mode_count(g, omega_max);
    (totals, count)
}

/// Weighted mode count Σ w over ω ≤ omega_max.
pub fn weighted_mode_count(g: &CavityGeometry, omega_max: f64) -> f64 {
    mode_sum::<1, _>(g, omega_max, false, |_, w, _| [w]).0[0]
}

fn mode_count(g: &CavityGeometry, omega_max: f64) -> u64 {
    let a = g.edges();
    let k = omega_max / PI;
    let mut count = 0u64;
    let n1_max = (k * a[0]).floor() as u64;
    let n2_max = (k * a[1]).floor() as u64;
    for n1 in 0..=n1_max {
        for n2 in 0..=n2_max {
            let c = (n1 as f64 / a[0]).powi(2) + (n2 as f64 / a[1]).powi(2);
            if c > k * k {
                continue;
            }
            let n3_max = ((k * k - c).sqrt() * a[2]).floor() as u64;
            count += n3_max + 1;
        }
    }
    count
}

/// Sums over the ball u < U of the full image lattice (origin excluded), computed column
/// by column so that the sphere boundary is resolved exactly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallSums {
    /// Number of full-lattice images with u < U.
    pub count: u64,
    /// Σ' u⁻³.
    pub s3: f64,
    /// Σ' n_k² u⁻⁵ for each axis.
    pub d5: [f64; 3],
}

const EM_START: f64 = 128.0;

/// Column along axis `c` with transverse offset ρ² (already in u² units); returns
/// (Σ w^{-3/2}, Σ n² w^{-5/2}, Σ w^{-5/2}) over n in [n_lo, n_hi], w = α²n² + ρ².
fn column_sums(alpha: f64, rho2: f64, n_lo: u64, n_hi: u64) -> [f64; 3] {
    if n_hi < n_lo {
        return [0.0; 3];
    }
    let a2 = alpha * alpha;
    let term = |n: f64| {
        let w = a2 * n * n + rho2;
        let w32 = w * w.sqrt();
        let w52 = w32 * w;
        [1.0 / w32, n * n / w52, 1.0 / w52]
    };
    // Explicit terms until the summand varies slowly on the unit scale, then
    // Euler–Maclaurin: Σ_{n=m}^{N} f ≈ ∫_m^N f + (f(m)+f(N))/2 + (f'(N) − f'(m))/12.
    let smooth_from = if rho2 > 0.0 { (EM_START - rho2.sqrt() / alpha).max(0.0) } else { EM_START };
    let m = (smooth_from.ceil() as u64).max(n_lo);
    let mut acc = [Neumaier::new(); 3];
    if n_hi <= m + 2 {
        for n in n_lo..=n_hi {
            let t = term(n as f64);
            for k in 0..3 {
                acc[k].add(t[k]);
            }
        }
        return acc.map(|x| x.value());
    }
    for n in n_lo..m {
        let t = term(n as f64);
        for k in 0..3 {
            acc[k].add(t[k]);
        }
    }
    let anti = |n: f64| -> [f64; 3] {
        if rho2 > 0.0 {
            let w = a2 * n * n + rho2;
            let sw = w.sqrt();
            let w32 = w * sw;
            [n / (rho2 * sw), n * n * n / (3.0 * rho2 * w32), n * (2.0 * a2 * n * n + 3.0 * rho2) / (3.0 * rho2 * rho2 * w32)]
        } else {
            let a3 = a2 * alpha;
            let a5 = a3 * a2;
            [-0.5 / (a3 * n * n), -0.5 / (a5 * n * n), -0.25 / (a5 * n.powi(4))]
        }
    };
    let deriv = |n: f64| -> [f64; 3] {
        let w = a2 * n * n + rho2;
        let sw = w.sqrt();
        let w52 = w * w * sw;
        let w72 = w52 * w;
        [-3.0 * a2 * n / w52, 2.0 * n / w52 - 5.0 * a2 * n * n * n / w72, -5.0 * a2 * n / w72]
    };
    let (mf, nf) = (m as f64, n_hi as f64);
    let (ia, ib) = (anti(mf), anti(nf));
    let (fa, fb) = (term(mf), term(nf));
    let (da, db) = (deriv(mf), deriv(nf));
    // f''' from second differences of the analytic f'.
    let d3 = |n: f64| -> [f64; 3] {
        let (l, c, r) = (deriv(n - 1.0), deriv(n), deriv(n + 1.0));
        [l[0] - 2.0 * c[0] + r[0], l[1] - 2.0 * c[1] + r[1], l[2] - 2.0 * c[2] + r[2]]
    };
    let (ta, tb) = (d3(mf), d3(nf));
    for k in 0..3 {
        acc[k].add(ib[k] - ia[k] + 0.5 * (fa[k] + fb[k]) + (db[k] - da[k]) / 12.0 - (tb[k] - ta[k]) / 720.0);
    }
    acc.map(|x| x.value())
}

/// Largest n ≥ 0 with α²n² + ρ² < U², or None if even n = 0 fails.
fn column_top(alpha: f64, rho2: f64, u2: f64) -> Option<u64> {
    if rho2 >= u2 {
        return None;
    }
    let mut n = ((u2 - rho2).sqrt() / alpha) as u64;
    while n > 0 && alpha * alpha * (n as f64).powi(2) + rho2 >= u2 {
        n -= 1;
    }
    while alpha * alpha * ((n + 1) as f64).powi(2) + rho2 < u2 {
        n += 1;
    }
    Some(n)
}

/// Sums over all full-lattice images with u < u_max.
pub fn ball_sums(g: &CavityGeometry, u_max: f64, parallel: bool) -> BallSums {
    let a = g.edges();
    // Column axis: the shortest edge (most points per column).
    let c = (0..3).min_by(|&i, &j| a[i].total_cmp(&a[j]).then(i.cmp(&j))).expect("3 axes");
    let (b1, b2) = match c {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let alpha = 2.0 * a[c];
    let u2 = u_max * u_max;
    let m1_max = (u_max / (2.0 * a[b1])) as u64 + 1;
    let rows = (m1_max + 1) as usize;
    let rows_out = ordered_sum_range::<6, _>(rows, parallel, |m1| {
        let m1f = m1 as f64;
        let r1 = 4.0 * (m1f * a[b1]).powi(2);
        let mut acc = [Neumaier::new(); 6];
        let mut m2 = 0u64;
        loop {
            let m2f = m2 as f64;
            let rho2 = r1 + 4.0 * (m2f * a[b2]).powi(2);
            let Some(top) = column_top(alpha, rho2, u2) else { break };
            let tmult = (if m1 > 0 { 2.0 } else { 1.0 }) * (if m2 > 0 { 2.0 } else { 1.0 });
            let (cnt, sums) = if rho2 == 0.0 {
                (2 * top, column_sums(alpha, 0.0, 1, top).map(|x| 2.0 * x))
            } else {
                let s0 = column_sums(alpha, rho2, 0, 0);
                let s1 = if top >= 1 { column_sums(alpha, rho2, 1, top) } else { [0.0; 3] };
                (1 + 2 * top, [s0[0] + 2.0 * s1[0], s0[1] + 2.0 * s1[1], s0[2] + 2.0 * s1[2]])
            };
            acc[0].add(tmult * cnt as f64);
            acc[1].add(tmult * sums[0]);
            // Along-column index contribution.
            acc[2].add(tmult * sums[1]);
            // Transverse indices are constant within the column.
            acc[3].add(tmult * m1f * m1f * sums[2]);
            acc[4].add(tmult * m2f * m2f * sums[2]);
            acc[5].add(0.0);
            m2 += 1;
        }
        acc.map(|x| x.value())
    });
    let mut d5 = [0.0; 3];
    d5[c] = rows_out[2];
    d5[b1] = rows_out[3];
    d5[b2] = rows_out[4];
    BallSums { count: rows_out[0].round() as u64, s3: rows_out[1], d5 }
}

/// Octant images with u in [u_lo, u_hi), found column by column.
pub fn images_in_shell(g: &CavityGeometry, u_lo: f64, u_hi: f64) -> Vec<OctantImage> {
    let a = g.edges();
    let (lo2, hi2) = ((0.5 * u_lo).powi(2), (0.5 * u_hi).powi(2));
    let mut out = Vec::new();
    let n1_max = (0.5 * u_hi / a[0]) as u64 + 1;
    for n1 in 0..=n1_max {
        let c1 = (n1 as f64 * a[0]).powi(2);
        if c1 >= hi2 {
            break;
        }
        let n2_max = ((hi2 - c1).sqrt() / a[1]) as u64 + 1;
        for n2 in 0..=n2_max {
            let c2 = c1 + (n2 as f64 * a[1]).powi(2);
            if c2 >= hi2 {
                break;
            }
            let start = if lo2 > c2 { ((lo2 - c2).sqrt() / a[2]) as u64 } else { 0 }.saturating_sub(1);
            let mut n3 = start;
            loop {
                let q = c2 + (n3 as f64 * a[2]).powi(2);
                if q >= hi2 {
                    break;
                }
                if q >= lo2 && q > 0.0 {
                    let n = [n1, n2, n3];
                    out.push(OctantImage { n, q, mult: multiplicity(n) });
                }
                n3 += 1;
            }
        }
    }
    out.sort_by(|x, y| x.q.total_cmp(&y.q).then(x.n.cmp(&y.n)));
    out
}
