use thiserror::Error;

/// Errors reported by the numeric layers.
///
/// These are programming/contract errors (bad dimensions, violated
/// preconditions), not verdicts: an undecidable instance is a regular
/// [`crate::decision::Verdict`], never an `Err`.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max |A_ij - A_ji| = {max_asym:.3e} exceeds tolerance {tol:.3e})")]
    NotSymmetric { max_asym: f64, tol: f64 },

    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("quadratic is constant; canonical form requires a non-constant function")]
    ConstantQuadratic,

    #[error("hyperplane normal is zero")]
    ZeroNormal,

    #[error("Hessians are linearly dependent; the LMI bound is only exact for independent pairs")]
    DependentHessians,

    #[error("function is not one-sided; this branch requires a sign-definite quadratic")]
    NotOneSided,

    #[error("invalid sampling box: {0}")]
    BadBox(String),
}
