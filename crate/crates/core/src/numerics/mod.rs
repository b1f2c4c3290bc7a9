//! Small numerical toolkit: compensated ordered reductions, adaptive quadrature,
//! bracketed root finding and a log-linear fit.

pub mod fit;
pub mod quad;
pub mod roots;
pub mod sum;

pub use fit::{log_fit, LogFit};
pub use quad::{integrate, integrate_to_infinity, QuadratureResult};
pub use roots::brent;
pub use sum::{ordered_sum, ordered_sum_range, Neumaier};
