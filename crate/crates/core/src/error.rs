//! Error types shared across the crate.

use thiserror::Error;

/// Syntax error produced by the operator text parser.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("byte {position}: {message}")]
pub struct ParseError {
    /// Byte offset into the input where the error was detected.
    pub position: usize,
    pub message: String,
}

/// Structural error while building or transforming an operator symbol.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymbolError {
    #[error("exponent tuple has length {got}, expected {expected} (one time slot plus {spatial} spatial)")]
    ExponentLength {
        got: usize,
        expected: usize,
        spatial: usize,
    },
    #[error("coefficient is not finite: ({re}, {im})")]
    NonFiniteCoefficient { re: f64, im: f64 },
    #[error("spatial dimension mismatch: operator has n = {expected}, argument has n = {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid symbol JSON: {0}")]
    Json(String),
}

/// Failure of the polynomial root engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum RootError {
    #[error("root finding requires a nonzero polynomial")]
    ZeroPolynomial,
    #[error("root iteration did not reach the residual target after {iterations} iterations (best normalized residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

/// Failure in the exact one-dimensional asymptotic analysis.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AsymptoticsError {
    #[error("operator does not involve the time variable d0 (no lambda variable)")]
    NoLambdaVariable,
    #[error("exact branch analysis is implemented for n = 1 only (operator has n = {0})")]
    NotOneDimensional(usize),
    #[error("requested expansion depth {requested} exceeds the hard cap {cap}")]
    DepthExceeded { requested: usize, cap: usize },
    #[error("root engine failed inside branch expansion: {0}")]
    Roots(#[from] RootError),
}

/// Failure in the sampling-based spectral estimators.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericError {
    #[error("growth fit needs at least {needed} defined samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("sample budget must be positive")]
    EmptyBudget,
    #[error("radii must be positive and strictly increasing")]
    BadRadii,
    #[error("root engine failed during sampling: {0}")]
    Roots(#[from] RootError),
}

/// Failure in grid construction, inversion, pairing or gfield I/O.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid spec: {0}")]
    BadSpec(String),
    #[error("shift line touches the spectrum: min |P| on the line is {min_abs:.3e}, below {threshold:.3e} (sigma <= omega0 or too close)")]
    SigmaTooCloseToSpectrum { min_abs: f64, threshold: f64 },
    #[error("right-hand side is not supported in x0 >= 0: fraction {fraction:.3e} of its mass lies below x0 = {cutoff:.3}")]
    SupportViolation { fraction: f64, cutoff: f64 },
    #[error("field roles do not match: expected {expected}, got {got}")]
    RoleMismatch { expected: String, got: String },
    #[error("grid shapes do not match")]
    ShapeMismatch,
    #[error("operator/grid dimension mismatch: operator n = {operator}, grid n = {grid}")]
    DimensionMismatch { operator: usize, grid: usize },
    #[error("gfield container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure while pairing a field or symbol inverse with a test function.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PairingError {
    #[error("quadrature tail bound {tail:.3e} exceeds the requested tolerance {tol:.3e} at the box cap")]
    TailBound { tail: f64, tol: f64 },
    #[error("dimension mismatch: operator n = {operator}, test function covers n = {test} (axes must be n + 1)")]
    DimensionMismatch { operator: usize, test: usize },
}
