//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in this crate.
///
/// `Domain`, `Precondition` and `NoSolution` indicate bad inputs; the
/// remaining variants are numerical failures of an otherwise valid request.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested value does not exist (e.g. inverting past an asymptote).
    #[error("no solution: {0}")]
    NoSolution(String),

    /// A threshold search found no sign change in the given interval.
    #[error("not found: {0}")]
    NotFound(String),

    /// The adaptive integrator drove the step size below its floor.
    #[error("step size underflow at t = {t} (h = {h}); system too stiff for this method")]
    StepUnderflow { t: f64, h: f64 },

    /// No section crossing occurred within the allowed flight time.
    #[error("no section crossing within t = {horizon}")]
    Recurrence { horizon: f64 },

    /// Newton iteration on the return map failed to converge.
    #[error("cycle search did not converge after {iterations} iterations (residual {residual})")]
    NoCycle { iterations: usize, residual: f64 },

    /// Least-squares fit ran out of iterations; the payload is the best point seen.
    #[error("fit did not converge after {iterations} iterations (best sse {sse})")]
    FitNotConverged {
        iterations: usize,
        sse: f64,
        best_p1: f64,
        best_p2: f64,
    },
}

impl Error {
    /// True for input errors (CLI exit code 2), false for numerical failures (exit code 3).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Precondition(_) | Error::NoSolution(_)
        )
    }
}
