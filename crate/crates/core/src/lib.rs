//! Riemann-Hilbert problems, Birkhoff factorization of matrix loops and the
//! holomorphic vector bundles they define on the Riemann sphere.
//!
//! The numerical core is generic over the real scalar `T` (see
//! [`scalar::Real`]); the `*64` aliases below fix `T = f64`, which is the
//! precision the default tolerances are tuned for.

pub mod acceptance;
pub mod birkhoff;
pub mod bundle;
pub mod cauchy;
pub mod error;
pub mod fixtures;
pub mod fuchsian;
pub mod linalg;
pub mod loop_algebra;
pub mod random;
pub mod regularization;
pub mod scalar;

pub use error::{Error, Result};

pub type MatrixLoop64 = loop_algebra::MatrixLoop<f64>;
pub type PiecewiseLoop64 = loop_algebra::PiecewiseLoop<f64>;
pub type Factorization64 = birkhoff::Factorization<f64>;
pub use birkhoff::SplittingType;
