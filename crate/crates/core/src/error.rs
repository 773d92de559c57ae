use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants split into input/validation problems and numerical failures;
/// [`Error::is_numerical`] is what the CLI uses to pick its exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("matrix is singular (|det| = {det:e}) at {location}")]
    Singular { location: String, det: f64 },
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("rank determination ambiguous: singular value ratio {ratio:e} is too close to the cutoff {cutoff:e}")]
    AmbiguousRank { ratio: f64, cutoff: f64 },
    #[error("inconsistent dimension profile: {0}")]
    InconsistentProfile(String),
    #[error("tolerance not met: {what} (achieved {achieved:e}, required {required:e})")]
    Tolerance {
        what: String,
        achieved: f64,
        required: f64,
    },
    #[error("branch ambiguity: {0}")]
    Branch(String),
    #[error("resonance at point {point}: eigenvalues {a} and {b} differ by a nonzero integer")]
    Resonance { point: usize, a: String, b: String },
    #[error("path passes too close to a singular point: {0}")]
    PathTooClose(String),
    #[error("integrator failed: {0}")]
    Integrator(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Schema { .. } | Error::Invalid(_) | Error::Singular { .. } | Error::Resonance { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
