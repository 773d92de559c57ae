//! Fuchsian and regular systems on the Riemann sphere: monodromy, Levelt
//! exponents, gauge transformations, exponent reduction and scalarization.

pub mod ode;
pub mod gauge;
pub mod levelt;
pub mod monodromy;
mod system;
pub mod wronskian;

pub use gauge::{apply_gauge, gauge_transform, reduce_exponents, splitting_via_reduction, Gauge, GaugeFactor, Reduction};
pub use levelt::{all_exponents, fuchs_weight_beta, levelt_numeric, levelt_split, local_exponents, local_exponents_at_infinity, BetaReport, LeveltData};
pub use monodromy::{chern_canonical, monodromy, monodromy_with, MonodromyRep};
pub use system::*;
pub use wronskian::{count_wronskian_zeros, scalarize, winding_on_circle, Scalarization};
