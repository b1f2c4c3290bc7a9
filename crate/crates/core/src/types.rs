//! Domain types shared by every module. Natural units throughout (ħ = c = k_B = 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular cavity with edge lengths `a = [a1, a2, a3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    a: [f64; 3],
    r2: f64,
    r3: f64,
}

impl CavityGeometry {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        validate_geometry(a1, a2, a3)
    }

    pub fn cube(a: f64) -> Self {
        validate_geometry(a, a, a).expect("cube edge must be positive")
    }

    /// The thin slab (1, 100, 100) scaled by `a1`.
    pub fn pizza_box(a1: f64) -> Self {
        validate_geometry(a1, 100.0 * a1, 100.0 * a1).expect("positive edge")
    }

    /// The long thin box (1, 0.1, 0.1) scaled by `a1`.
    pub fn waveguide(a1: f64) -> Self {
        validate_geometry(a1, 0.1 * a1, 0.1 * a1).expect("positive edge")
    }

    pub fn edges(&self) -> [f64; 3] {
        self.a
    }
    pub fn a1(&self) -> f64 {
        self.a[0]
    }
    pub fn a(&self, k: usize) -> f64 {
        self.a[k]
    }
    pub fn volume(&self) -> f64 {
        self.a[0] * self.a[1] * self.a[2]
    }
    /// L = a1 + a2 + a3.
    pub fn edge_sum(&self) -> f64 {
        self.a[0] + self.a[1] + self.a[2]
    }
    pub fn ratios(&self) -> (f64, f64) {
        (self.r2, self.r3)
    }
    pub fn min_edge(&self) -> f64 {
        self.a[0].min(self.a[1]).min(self.a[2])
    }

    /// Same box with axes reordered: new axis i is old axis `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let a = self.a;
        validate_geometry(a[perm[0]], a[perm[1]], a[perm[2]]).expect("already valid")
    }

    /// Same box with one edge replaced; used for finite-difference checks.
    pub fn with_edge(&self, k: usize, value: f64) -> Result<Self> {
        let mut a = self.a;
        a[k] = value;
        validate_geometry(a[0], a[1], a[2])
    }

    pub fn xi_from_t(&self, t: f64) -> f64 {
        std::f64::consts::PI * t * self.a[0]
    }
    pub fn t_from_xi(&self, xi: f64) -> f64 {
        xi / (std::f64::consts::PI * self.a[0])
    }
}

pub fn validate_geometry(a1: f64, a2: f64, a3: f64) -> Result<CavityGeometry> {
    for (i, &x) in [a1, a2, a3].iter().enumerate() {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "edge a{} = {} must be positive and finite",
                i + 1,
                x
            )));
        }
    }
    Ok(CavityGeometry { a: [a1, a2, a3], r2: a2 / a1, r3: a3 / a1 })
}

/// Polarization weight of a non-negative mode triple: 2 interior, 1 face, 0 edge-aligned.
pub fn mode_weight(n1: u64, n2: u64, n3: u64) -> Result<u8> {
    let zeros = [n1, n2, n3].iter().filter(|&&n| n == 0).count();
    match zeros {
        0 => Ok(2),
        1 => Ok(1),
        2 => Ok(0),
        _ => Err(Error::ExcludedMode),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeTriple {
    pub n: [u64; 3],
    pub weight: u8,
}

impl ModeTriple {
    pub fn new(n1: u64, n2: u64, n3: u64) -> Result<Self> {
        Ok(ModeTriple { n: [n1, n2, n3], weight: mode_weight(n1, n2, n3)? })
    }

    pub fn omega(&self, g: &CavityGeometry) -> f64 {
        mode_omega(self.n, g)
    }
}

pub(crate) fn mode_omega(n: [u64; 3], g: &CavityGeometry) -> f64 {
    let a = g.edges();
    let s: f64 = (0..3).map(|k| (n[k] as f64 / a[k]).powi(2)).sum();
    std::f64::consts::PI * s.sqrt()
}

/// Full-lattice image vector with u = 2·|(n1 a1, n2 a2, n3 a3)|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageVector {
    pub n: [i64; 3],
    pub u: f64,
}

impl ImageVector {
    pub fn new(n: [i64; 3], g: &CavityGeometry) -> Result<Self> {
        if n == [0, 0, 0] {
            return Err(Error::ExcludedMode);
        }
        let a = g.edges();
        let q: f64 = (0..3).map(|k| (n[k] as f64 * a[k]).powi(2)).sum();
        Ok(ImageVector { n, u: 2.0 * q.sqrt() })
    }

    pub fn v(&self, t: f64) -> f64 {
        std::f64::consts::PI * t * self.u
    }
}

/// Temperature together with its reduced form ξ = π T a1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub t: f64,
    pub xi: f64,
}

impl ThermoPoint {
    pub fn from_t(t: f64, g: &CavityGeometry) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::DomainError { func: "ThermoPoint", value: t });
        }
        Ok(ThermoPoint { t, xi: g.xi_from_t(t) })
    }
    pub fn from_xi(xi: f64, g: &CavityGeometry) -> Result<Self> {
        Self::from_t(g.t_from_xi(xi), g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    None,
    ContinuumIntegral,
    Extrapolation,
}

impl std::str::FromStr for TailMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(TailMethod::None),
            "continuum_integral" | "continuum" => Ok(TailMethod::ContinuumIntegral),
            "extrapolation" | "richardson" => Ok(TailMethod::Extrapolation),
            other => Err(Error::NumericalFailure(format!("unknown tail method '{other}'"))),
        }
    }
}

/// Truncation and tolerance settings shared by all lattice sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumPolicy {
    /// Shell radius in units of the shortest edge: images with |(n_i a_i)| ≤ R·min(a).
    pub max_shell_radius: u32,
    pub rel_tol: f64,
    pub tail_method: TailMethod,
    /// Use the rayon path when the `parallel` feature is compiled in.
    pub parallel: bool,
    /// Largest image table (octant points) the thermal image route may build before
    /// switching to the spectral route.
    pub image_budget: usize,
}

impl Default for SumPolicy {
    fn default() -> Self {
        SumPolicy {
            max_shell_radius: 1024,
            rel_tol: 1e-8,
            tail_method: TailMethod::Extrapolation,
            parallel: true,
            image_budget: 2_000_000,
        }
    }
}

impl SumPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_shell_radius < 1 {
            return Err(Error::NumericalFailure("max_shell_radius must be ≥ 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::NumericalFailure("rel_tol must be positive".into()));
        }
        if self.image_budget < 1000 {
            return Err(Error::NumericalFailure("image_budget must be ≥ 1000".into()));
        }
        Ok(())
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Infrared thresholds fixed by the third-law condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffConstants {
    pub v_v: f64,
    pub v_e: f64,
}

impl CutoffConstants {
    /// Values obtained by `regularize::solve_cutoffs(1e-13)`; kept for cheap construction.
    pub const FROZEN: CutoffConstants =
        CutoffConstants { v_v: 1.763_876_988_862_045_7, v_e: 0.648_894_080_957_735_8 };
}
