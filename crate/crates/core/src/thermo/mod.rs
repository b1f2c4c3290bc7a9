//! Thermodynamic potentials of the cavity: blackbody parts, regularized Δ parts,
//! totals, specific heat, wall pressures and the branch structure in temperature.
//!
//! Two evaluation routes produce the same numbers. Above a switch temperature the
//! regularized sums run image by image ([`images`]). Below it the image table becomes
//! too large and the totals come from the direct mode sum plus exact inactive-image
//! bookkeeping ([`spectral`]), calibrated once against the image route.

mod blackbody;
pub mod images;
pub mod spectral;

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{casimir_data, images_in_shell, octant_points, CasimirData};
use crate::types::{CavityGeometry, CutoffConstants, SumPolicy};

pub use blackbody::{
    blackbody, blackbody_energy, blackbody_entropy, blackbody_free_energy, blackbody_pressures,
    blackbody_specific_heat,
};
pub use spectral::Calibration;

/// Half-width of the exclusion zone around a branch boundary, in ξ.
pub const BOUNDARY_EXCLUSION: f64 = 1e-9;

/// F, S, E, C_V and ∂F/∂a_k at one temperature (natural units).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Potentials {
    pub f: f64,
    pub s: f64,
    pub e: f64,
    pub c: f64,
    pub df: [f64; 3],
}

impl Potentials {
    fn minus(&self, o: &Potentials) -> Potentials {
        Potentials {
            f: self.f - o.f,
            s: self.s - o.s,
            e: self.e - o.e,
            c: self.c - o.c,
            df: [0, 1, 2].map(|k| self.df[k] - o.df[k]),
        }
    }

    fn plus(&self, o: &Potentials) -> Potentials {
        Potentials {
            f: self.f + o.f,
            s: self.s + o.s,
            e: self.e + o.e,
            c: self.c + o.c,
            df: [0, 1, 2].map(|k| self.df[k] + o.df[k]),
        }
    }

    /// P_k = −(a_k/V) ∂F/∂a_k.
    pub fn pressures(&self, g: &CavityGeometry) -> [f64; 3] {
        let v = g.volume();
        [0, 1, 2].map(|k| -g.a(k) / v * self.df[k])
    }
}

/// Which images are inactive (K = 0): volume images with v < v_V and, per axis, the
/// single-axis images n = 1..N_k with v < v_E. The active set is the complement, so it
/// grows with T while these counts shrink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSignature {
    /// Full-lattice volume images with v < v_V.
    pub volume_inactive: u64,
    /// Per axis, positive n with v < v_E (the ±n pair counts twice in the lattice).
    pub edge_inactive: [u64; 3],
}

impl BranchSignature {
    /// Total number of inactive full-lattice images; constant on each branch.
    pub fn branch_id(&self) -> u64 {
        self.volume_inactive
            .saturating_add(2 * self.edge_inactive.iter().fold(0u64, |s, &n| s.saturating_add(n)))
    }

    /// Signature at T = 0, where every image is inactive.
    pub fn all_inactive() -> Self {
        BranchSignature { volume_inactive: u64::MAX, edge_inactive: [u64::MAX / 8; 3] }
    }
}

/// How a point was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Zero,
    Image,
    Spectral,
}

/// Δ parts (ΔE₀ included) at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaState {
    pub t: f64,
    pub route: Route,
    pub delta: Potentials,
    pub branch: BranchSignature,
}

/// Total, blackbody and Δ part of one quantity; total = blackbody + delta exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parts {
    pub total: f64,
    pub blackbody: f64,
    pub delta: f64,
}

impl Parts {
    pub fn new(blackbody: f64, delta: f64) -> Self {
        Parts { total: blackbody + delta, blackbody, delta }
    }
}

/// One point of a sweep in dimensionless form: f = πa₁F, s = S, e = πa₁E, c_v = C_V,
/// p_k = πa₁⁴P_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub xi: f64,
    pub t: f64,
    pub geometry: CavityGeometry,
    pub route: Route,
    pub f: Parts,
    pub s: Parts,
    pub e: Parts,
    pub c_v: Parts,
    pub p: [Parts; 3],
    pub branch: BranchSignature,
}

impl ThermoReport {
    pub fn branch_id(&self) -> u64 {
        self.branch.branch_id()
    }

    /// |E − (P₁+P₂+P₃)V| / |E|.
    pub fn eos_residual(&self) -> f64 {
        let a1 = self.geometry.a1();
        let r = self.geometry.volume() / (a1 * a1 * a1);
        let sum: f64 = self.p.iter().map(|p| p.total).sum();
        (self.e.total - r * sum).abs() / self.e.total.abs()
    }
}

/// Evaluator bound to one geometry, cutoff pair and policy. Caches ΔE₀, the route
/// switch temperature and the spectral calibration.
#[derive(Debug)]
pub struct ThermoModel {
    geometry: CavityGeometry,
    cutoffs: CutoffConstants,
    policy: SumPolicy,
    casimir: OnceLock<Result<CasimirData>>,
    switch: OnceLock<f64>,
    calibration: OnceLock<Result<Calibration>>,
}

impl ThermoModel {
    pub fn new(geometry: CavityGeometry, cutoffs: CutoffConstants, policy: SumPolicy) -> Result<Self> {
        policy.validate()?;
        if !(cutoffs.v_e > 0.0 && cutoffs.v_e < cutoffs.v_v) {
            return Err(Error::DomainError { func: "ThermoModel::new", value: cutoffs.v_e });
        }
        Ok(ThermoModel {
            geometry,
            cutoffs,
            policy,
            casimir: OnceLock::new(),
            switch: OnceLock::new(),
            calibration: OnceLock::new(),
        })
    }

    pub fn geometry(&self) -> &CavityGeometry {
        &self.geometry
    }
    pub fn cutoffs(&self) -> &CutoffConstants {
        &self.cutoffs
    }
    pub fn policy(&self) -> &SumPolicy {
        &self.policy
    }

    pub fn casimir(&self) -> Result<CasimirData> {
        self.casimir.get_or_init(|| casimir_data(&self.geometry, &self.policy)).clone()
    }

    /// Lowest temperature at which the image table fits in `policy.image_budget`.
    pub fn switch_temperature(&self) -> f64 {
        *self.switch.get_or_init(|| {
            let budget = self.policy.image_budget as f64;
            let est = |t: f64| images::estimated_images(t, &self.geometry, &self.cutoffs);
            let mut hi = 1.0 / (PI * self.geometry.a1());
            while est(hi) > budget {
                hi *= 2.0;
            }
            let mut lo = hi;
            while est(lo) <= budget && lo > 1e-300 {
                lo *= 0.5;
            }
            for _ in 0..80 {
                let mid = (lo * hi).sqrt();
                if est(mid) > budget {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        })
    }

    pub fn route_for(&self, t: f64) -> Route {
        if t == 0.0 {
            Route::Zero
        } else if t >= self.switch_temperature() {
            Route::Image
        } else {
            Route::Spectral
        }
    }

    pub fn calibration(&self) -> Result<Calibration> {
        self.calibration
            .get_or_init(|| {
                let cas = self.casimir()?;
                let mut t_ref = self.switch_temperature();
                for _ in 0..64 {
                    if self.nearest_boundary(t_ref, 1e-6).is_none() {
                        break;
                    }
                    t_ref *= 1.000_013_7;
                }
                let (d, _) = images::delta_by_images(t_ref, &self.geometry, &self.cutoffs, self.policy.parallel);
                let tot = blackbody(t_ref, &self.geometry).plus(&d);
                Ok(spectral::calibrate(t_ref, &self.geometry, &self.cutoffs, cas.d_energy, &tot, self.policy.parallel))
            })
            .clone()
    }

    fn check_t(t: f64) -> Result<()> {
        if t >= 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::DomainError { func: "temperature", value: t })
        }
    }

    /// Δ parts at `t` on the automatically chosen route.
    pub fn delta(&self, t: f64) -> Result<DeltaState> {
        Self::check_t(t)?;
        self.delta_with(t, self.route_for(t))
    }

    /// Δ parts on a forced route (used by the cross-route tests and the C_V stencil).
    pub fn delta_with(&self, t: f64, route: Route) -> Result<DeltaState> {
        Self::check_t(t)?;
        let g = &self.geometry;
        if t == 0.0 || route == Route::Zero {
            let cas = self.casimir()?;
            let delta = Potentials { f: cas.energy, s: 0.0, e: cas.energy, c: -0.5, df: cas.d_energy };
            return Ok(DeltaState { t: 0.0, route: Route::Zero, delta, branch: BranchSignature::all_inactive() });
        }
        match route {
            Route::Image => {
                let (delta, branch) = images::delta_by_images(t, g, &self.cutoffs, self.policy.parallel);
                Ok(DeltaState { t, route, delta, branch })
            }
            _ => {
                let cas = self.casimir()?;
                let cal = self.calibration()?;
                let (tot, branch) =
                    spectral::totals(t, g, &self.cutoffs, cas.energy, cas.d_energy, &cal, self.policy.parallel);
                let delta = tot.minus(&blackbody(t, g));
                Ok(DeltaState { t, route: Route::Spectral, delta, branch })
            }
        }
    }

    /// Total potentials (blackbody + Δ).
    pub fn totals(&self, t: f64) -> Result<Potentials> {
        Ok(blackbody(t, &self.geometry).plus(&self.delta(t)?.delta))
    }

    fn thermal_energy(&self, t: f64, route: Route) -> Result<f64> {
        let g = &self.geometry;
        match route {
            Route::Spectral => Ok(spectral::total_energy(t, g, 0.0, self.policy.parallel)),
            _ => {
                let d = self.delta_with(t, route)?;
                Ok(blackbody(t, g).e + d.delta.e - self.casimir()?.energy)
            }
        }
    }

    /// C_V = ∂E/∂T by central differences with Richardson refinement, on the route
    /// chosen at `t` so that the stencil never mixes routes.
    pub fn specific_heat(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::DomainError { func: "specific_heat", value: t });
        }
        let route = self.route_for(t);
        let e = |x: f64| self.thermal_energy(x, route);
        let d = |h: f64| -> Result<f64> { Ok((e(t + h)? - e(t - h)?) / (2.0 * h)) };
        let mut h = 0.05 * t;
        let mut d1 = d(h)?;
        let mut d2 = d(0.5 * h)?;
        let mut r1 = (4.0 * d2 - d1) / 3.0;
        // Best (estimate, error) so far; halving stops once round-off makes the error grow.
        let mut best = (r1, f64::INFINITY);
        loop {
            let d3 = d(0.25 * h)?;
            let r2 = (4.0 * d3 - d2) / 3.0;
            let err = (r2 - r1).abs();
            let scale = r2.abs().max(1e-6 * t);
            if err <= 1e-8 * scale {
                return Ok(r2 + (r2 - r1) / 15.0);
            }
            if err < best.1 {
                best = (r2, err);
            } else if err > 2.0 * best.1 {
                break;
            }
            h *= 0.5;
            if h < 1e-7 * t {
                break;
            }
            d1 = d2;
            d2 = d3;
            r1 = (4.0 * d2 - d1) / 3.0;
        }
        if best.1 <= 1e-6 * best.0.abs().max(1e-6 * t) {
            Ok(best.0)
        } else {
            Err(Error::NumericalFailure(format!("specific heat step underflow at T = {t}")))
        }
    }

    /// Analytic C_V from the summands (a cross-check on [`Self::specific_heat`]).
    pub fn specific_heat_analytic(&self, t: f64) -> Result<f64> {
        Ok(self.totals(t)?.c)
    }

    /// The crossing ξ nearest to `t` within `window` (in ξ), if any.
    pub fn nearest_boundary(&self, t: f64, window: f64) -> Option<f64> {
        let g = &self.geometry;
        let xi = g.xi_from_t(t);
        if xi <= window {
            return Some(0.0);
        }
        let a1 = g.a1();
        let mut best: Option<f64> = None;
        let mut consider = |xc: f64| {
            if (xc - xi).abs() < window && best.is_none_or(|b: f64| (b - xi).abs() > (xc - xi).abs()) {
                best = Some(xc);
            }
        };
        let (lo, hi) = (self.cutoffs.v_v * a1 / (xi + window), self.cutoffs.v_v * a1 / (xi - window));
        for img in images_in_shell(g, lo, hi) {
            consider(self.cutoffs.v_v * a1 / img.u());
        }
        for k in 0..3 {
            let n0 = self.cutoffs.v_e * a1 / (2.0 * g.a(k) * xi);
            for n in [n0.floor(), n0.ceil()] {
                if n >= 1.0 {
                    consider(self.cutoffs.v_e * a1 / (2.0 * n * g.a(k)));
                }
            }
        }
        best
    }

    /// Fails with BranchBoundary when ξ(t) is within the exclusion zone of a crossing.
    pub fn check_boundary(&self, t: f64) -> Result<()> {
        if t == 0.0 {
            return Ok(());
        }
        match self.nearest_boundary(t, BOUNDARY_EXCLUSION) {
            Some(xi) => Err(Error::BranchBoundary { xi }),
            None => Ok(()),
        }
    }

    /// Total wall pressures (P₁, P₂, P₃).
    pub fn pressures(&self, t: f64) -> Result<[f64; 3]> {
        self.check_boundary(t)?;
        Ok(self.totals(t)?.pressures(&self.geometry))
    }

    pub fn branch_signature(&self, t: f64) -> Result<BranchSignature> {
        if t == 0.0 {
            return Ok(BranchSignature::all_inactive());
        }
        Self::check_t(t)?;
        Ok(spectral::inactive(t, &self.geometry, &self.cutoffs, self.policy.parallel).branch)
    }

    /// Full dimensionless report at ξ.
    pub fn report(&self, xi: f64) -> Result<ThermoReport> {
        let g = &self.geometry;
        let t = g.t_from_xi(xi);
        Self::check_t(t)?;
        self.check_boundary(t)?;
        let st = self.delta(t)?;
        let bb = blackbody(t, g);
        let c_total = if t > 0.0 { self.specific_heat(t)? } else { st.delta.c };
        let pa = PI * g.a1();
        let pa4 = pa * g.a1().powi(3);
        let pbb = bb.pressures(g);
        let pd = st.delta.pressures(g);
        Ok(ThermoReport {
            xi,
            t,
            geometry: *g,
            route: st.route,
            f: Parts::new(pa * bb.f, pa * st.delta.f),
            s: Parts::new(bb.s, st.delta.s),
            e: Parts::new(pa * bb.e, pa * st.delta.e),
            c_v: Parts::new(bb.c, c_total - bb.c),
            p: [0, 1, 2].map(|k| Parts::new(pa4 * pbb[k], pa4 * pd[k])),
            branch: st.branch,
        })
    }

    /// Crossings ξ_c = v_c a₁/u in [xi_lo, xi_hi], sorted, duplicates merged.
    pub fn boundaries_between(&self, xi_lo: f64, xi_hi: f64) -> Vec<f64> {
        branch_boundaries_between(&self.geometry, &self.cutoffs, xi_lo, xi_hi)
    }
}

/// Branch crossings with ξ in [xi_lo, xi_hi]: volume images with v_V a₁/u in range and
/// single-axis images with v_E a₁/u in range.
pub fn branch_boundaries_between(g: &CavityGeometry, c: &CutoffConstants, xi_lo: f64, xi_hi: f64) -> Vec<f64> {
    crossings(g, c, [xi_lo, xi_hi], [xi_lo, xi_hi])
}

fn crossings(g: &CavityGeometry, c: &CutoffConstants, vol: [f64; 2], edge: [f64; 2]) -> Vec<f64> {
    let a1 = g.a1();
    let mut out = Vec::new();
    if vol[0] > 0.0 && vol[1] >= vol[0] {
        out.extend(
            images_in_shell(g, c.v_v * a1 / vol[1], c.v_v * a1 / vol[0] * (1.0 + 1e-15))
                .iter()
                .map(|img| c.v_v * a1 / img.u())
                .filter(|&x| x >= vol[0] && x <= vol[1]),
        );
    }
    if edge[0] > 0.0 && edge[1] >= edge[0] {
        for k in 0..3 {
            let ak = g.a(k);
            let n_lo = (c.v_e * a1 / (2.0 * ak * edge[1])).floor().max(1.0) as u64;
            let n_hi = (c.v_e * a1 / (2.0 * ak * edge[0])).ceil() as u64;
            for n in n_lo..=n_hi {
                let x = c.v_e * a1 / (2.0 * n as f64 * ak);
                if x >= edge[0] && x <= edge[1] {
                    out.push(x);
                }
            }
        }
    }
    out.sort_by(|x, y| x.total_cmp(y));
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * y.abs());
    out
}

/// All crossings up to xi_max among images within the truncation radius
/// (max_shell_radius shortest edges, reduced until the octant table fits image_budget).
pub fn branch_boundaries(g: &CavityGeometry, c: &CutoffConstants, policy: &SumPolicy, xi_max: f64) -> Result<Vec<f64>> {
    policy.validate()?;
    if !(xi_max > 0.0) {
        return Err(Error::DomainError { func: "branch_boundaries", value: xi_max });
    }
    let w = g.min_edge();
    let mut r = policy.max_shell_radius as f64 * w;
    while octant_points(g, r) > policy.image_budget as f64 && r > w {
        r *= 0.5;
    }
    // |x| ≤ r means u ≤ 2r.
    let a1 = g.a1();
    Ok(crossings(g, c, [c.v_v * a1 / (2.0 * r), xi_max], [c.v_e * a1 / (2.0 * r), xi_max]))
}

fn model(g: &CavityGeometry, c: &CutoffConstants, p: &SumPolicy) -> Result<ThermoModel> {
    ThermoModel::new(*g, *c, *p)
}

/// ΔF(T), equal to ΔE₀ at T = 0.
pub fn delta_free_energy(t: f64, g: &CavityGeometry, c: &CutoffConstants, p: &SumPolicy) -> Result<f64> {
    Ok(model(g, c, p)?.delta(t)?.delta.f)
}

pub fn delta_entropy(t: f64, g: &CavityGeometry, c: &CutoffConstants, p: &SumPolicy) -> Result<f64> {
    Ok(model(g, c, p)?.delta(t)?.delta.s)
}

/// ΔE(T); independent of the cutoffs.
pub fn delta_energy(t: f64, g: &CavityGeometry, p: &SumPolicy) -> Result<f64> {
    let m = model(g, &CutoffConstants::FROZEN, p)?;
    match m.route_for(t) {
        Route::Spectral => Ok(spectral::total_energy(t, g, m.casimir()?.energy, p.parallel) - blackbody_energy(t, g)),
        _ => Ok(m.delta(t)?.delta.e),
    }
}

/// Total C_V by finite differences of the total energy.
pub fn specific_heat(t: f64, g: &CavityGeometry, p: &SumPolicy) -> Result<f64> {
    model(g, &CutoffConstants::FROZEN, p)?.specific_heat(t)
}

/// Total wall pressures (P₁, P₂, P₃) in natural units.
pub fn pressures(t: f64, g: &CavityGeometry, c: &CutoffConstants, p: &SumPolicy) -> Result<[f64; 3]> {
    model(g, c, p)?.pressures(t)
}
