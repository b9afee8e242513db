use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("eigensolver failed to converge after {iterations} iterations (n = {n})")]
    EigenConvergence { n: usize, iterations: usize },

    #[error("matrix exponential overflowed at t = {t} (norm of tA = {norm:e})")]
    ExpmOverflow { t: f64, norm: f64 },

    #[error("resolvent is singular or ill-conditioned at lambda = {lambda} (condition estimate {condition:e})")]
    SingularResolvent { lambda: String, condition: f64 },

    #[error("eigenvalue {lambda} is defective: |<psi, v>| = {overlap:e} relative to |psi||v|")]
    Defective { lambda: f64, overlap: f64 },

    #[error("eigenvalue {lambda} is not simple: {count} eigenvalues in its cluster, geometric multiplicity {geometric}")]
    NotSimple {
        lambda: f64,
        count: usize,
        geometric: usize,
    },

    #[error("no eigenvalue within tolerance of {lambda}")]
    NotAnEigenvalue { lambda: f64 },

    #[error("generator is not symmetric for the quadrature inner product: defect {defect:e} exceeds {tolerance:e}")]
    SymmetryViolation { defect: f64, tolerance: f64 },

    #[error("certificate did not pass; uniform bounds need a passing certificate (reasons: {reasons})")]
    CertificateFailed { reasons: String },

    #[error(
        "time grid exhausted at t = {t_end}: bound {value:e} still above {target:e}; \
         extrapolated crossing near t = {extrapolated}"
    )]
    GridExhausted {
        t_end: f64,
        value: f64,
        target: f64,
        extrapolated: f64,
    },

    #[error("Dirichlet-to-Neumann symbol is singular for mode {mode} at lambda = {lambda} (Bessel zero)")]
    SingularSymbol { mode: usize, lambda: f64 },

    #[error("Bessel argument out of supported envelope: order {order}, x = {x}")]
    BesselEnvelope { order: usize, x: f64 },

    #[error("argument principle failed on the window boundary: {reason}")]
    Winding { reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
