//! Regularized thermodynamics of the electromagnetic field inside a perfectly
//! conducting rectangular box, with brute-force oracles for every piece that has one.
//!
//! Units are natural (ħ = c = k_B = 1). Dimensionless values (ξ = πTa₁, f = πa₁F, …)
//! appear only in [`thermo::ThermoReport`].

pub mod error;
pub mod lattice;
pub mod matsubara;
pub mod numerics;
pub mod oracle;
pub mod regularize;
pub mod specfun;
pub mod thermo;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    mode_weight, validate_geometry, CavityGeometry, CutoffConstants, ImageVector, ModeTriple,
    SumPolicy, TailMethod, ThermoPoint,
};
