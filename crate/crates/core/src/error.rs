use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid truncated Fock space: {0}")]
    InvalidSpace(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("cutoff D = {cutoff} too small: need {required}")]
    CutoffTooSmall { cutoff: usize, required: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eta is singular (|eta eta^-1 - 1| = {0:e})")]
    SingularEta(f64),

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error("eigenvalue {re} + {im}i has no conjugate partner within tolerance {tol:e}")]
    Unpairable { re: f64, im: f64, tol: f64 },

    #[error("mixing angle undefined: |2 rho sqrt(...)| = {coupling} exceeds |detuning| = {detuning} (past the exceptional point)")]
    AngleUndefined { coupling: f64, detuning: f64 },

    #[error("mixing angle kind {requested} does not match phi = {phi}")]
    AngleKindMismatch { requested: &'static str, phi: i8 },

    #[error("subspace is not invariant: leak {0:e}")]
    NotInvariant(f64),

    #[error("recurrence step at j = {0} hits a singular A matrix; use step_critical")]
    SingularStep(i64),

    #[error("recurrence step_critical called at j = {got}, expected j = {expected}")]
    NotAtCriticalStep { got: i64, expected: i64 },

    #[error("degenerate truncation polynomial (identically zero)")]
    DegeneratePolynomial,

    #[error("ill-conditioned polynomial: condition estimate {0:e}")]
    IllConditioned(f64),

    #[error("E = {energy} is not a truncation root: residual {residual:e} leaks onto {component}")]
    NotARoot {
        energy: f64,
        residual: f64,
        component: String,
    },

    #[error("eigenpair certification failed: residual {0:e}")]
    Certification(f64),

    #[error("level tracking ambiguous near parameter {0} after maximum refinement")]
    TrackingAmbiguity(f64),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
