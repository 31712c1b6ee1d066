use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or run parameter lies outside its admissible domain.
    #[error("parameter `{name}` = {value} violates {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("frequency {lambda} outside the admissible window (0, {lambda_inf})")]
    LambdaOutOfRange { lambda: f64, lambda_inf: f64 },

    #[error("monotonicity violated: d2f({x}, {s}) = {d2f} is not positive")]
    Monotonicity { x: f64, s: f64, d2f: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("converged profile is not positive: u[{node}] = {value:e}")]
    PositivityViolation { node: usize, value: f64 },

    #[error("converged profile is not strictly decreasing on x > 0 at node {node}")]
    ShapeViolation { node: usize },

    #[error("tridiagonal system is singular (zero pivot at row {row}); linearization is degenerate")]
    Singular { row: usize },

    #[error(
        "no positive principal eigenvalue of u'' + f_inf u (top of spectrum {top:e}); assumption A7 fails on this grid"
    )]
    NoPrincipalEigenvalue { top: f64 },

    #[error("eigensolver failed to converge for a {size}x{size} matrix (shifts tried: {shifts:?})")]
    EigenNonConvergence { size: usize, shifts: Vec<f64> },

    #[error("time integration invalidated: relative {quantity} drift {drift:e} exceeds {limit:e}")]
    IntegratorDrift {
        quantity: &'static str,
        drift: f64,
        limit: f64,
    },

    #[error("continuation could not be seeded at lambda = {lambda}: {reason}")]
    Seeding { lambda: f64, reason: String },

    #[error("missing artifact {path}: run `{command}` first")]
    MissingArtifact { path: PathBuf, command: &'static str },

    #[error("malformed artifact {path}: {reason}")]
    MalformedArtifact { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
