use thiserror::Error;

/// Errors produced by the statistics and simulation routines.
///
/// The first two variants are caller mistakes (bad parameters); the last two
/// are numeric failures hit while computing. The CLI maps them to exit codes
/// 2 and 1 respectively.
#[derive(Debug, Error)]
pub enum Error {
    /// Detector probabilities violate the simplex constraints.
    #[error("invalid detector model: {0}")]
    InvalidDetector(String),

    /// An excitation or run parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A size or domain guard was hit (enumeration grid, table cutoff, pole).
    #[error("guard violated: {0}")]
    Guard(String),

    /// An adaptive summation did not converge within its term budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
