use thiserror::Error;

/// Errors raised by the evaluators, kernels and solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alpha = {alpha} is resonant (margin {margin:.3e}); residue series refused")]
    ResonantAlpha { alpha: f64, margin: f64 },

    #[error("series tail not converged after {terms} terms (last/sum = {ratio:.3e})")]
    TailNotConverged { terms: usize, ratio: f64 },

    #[error("series lost precision: condition number {condition:.3e}")]
    IllConditionedSeries { condition: f64 },

    #[error("z = {z} too small for the asymptotic expansion")]
    AsymptoticRange { z: f64 },

    #[error("quadrature failed to converge: estimate {estimate:e}, error {error:e}, bracket [{lo:e}, {hi:e}]")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        lo: f64,
        hi: f64,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("moment integral diverges: {0}")]
    Divergent(String),

    #[error("finite-kernel bound violated at ({i}, {j}): |fin| = {value:e} > {bound:e}")]
    BoundViolated {
        i: usize,
        j: usize,
        value: f64,
        bound: f64,
    },

    #[error("linear system ill conditioned (estimate {0:e})")]
    IllConditioned(f64),

    #[error("eigensolver did not converge")]
    EigenNotConverged,

    #[error("no sign change of the residual on [{lo:e}, {hi:e}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("weak coupling violated: ||g fin||_HS = {0} >= 1")]
    WeakCouplingViolated(f64),

    #[error("residual changes sign {0} times; expected exactly one")]
    MultipleRoots(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
