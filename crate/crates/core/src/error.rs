use thiserror::Error;

/// Errors raised by the billiard toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("boundary is not star-shaped: min r(theta) = {min_radius:.6e} at theta = {theta:.6}")]
    NonStarShaped { min_radius: f64, theta: f64 },

    #[error("boundary is not strictly convex: min curvature = {min_curvature:.6e}")]
    NonConvex { min_curvature: f64 },

    #[error("chord solver failed after {iterations} iterations (x = {x}, phi = {phi})")]
    SolverFailure { iterations: usize, x: f64, phi: f64 },

    #[error(
        "shooting bracket failed for q = {q}: residual at lower end {lower:.3e}, at upper end {upper:.3e}"
    )]
    BracketFailure { q: usize, lower: f64, upper: f64 },

    #[error("passage window violated: |s - s'| = {separation} >= {window}")]
    WindowViolation { separation: f64, window: f64 },

    #[error("curve is outside the nearly circular regime: max|kappa - 1| = {deviation:.4} > guard {guard}")]
    NotNearlyCircular { deviation: f64, guard: f64 },

    #[error("Birkhoff ascent for ({p}, {q}) did not converge after {sweeps} sweeps (last move {last_move:.3e})")]
    NoConvergence {
        p: usize,
        q: usize,
        sweeps: usize,
        last_move: f64,
    },

    #[error("operation requires a Fourier profile; the analytic ellipse is not supported here")]
    UnsupportedProfile,

    #[error("ambiguous partition at length {length}: gap {gap:.6e} is within 10% of threshold {threshold:.6e}")]
    PartitionAmbiguous {
        length: f64,
        gap: f64,
        threshold: f64,
    },

    #[error("oscillatory integral not resolved at {nodes} nodes: last two values {previous} and {last}")]
    ResolutionCap {
        nodes: usize,
        previous: String,
        last: String,
    },

    #[error("log-log regression residual {residual:.4} exceeds {limit}")]
    NoisyFit { residual: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain config line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    /// True for failures of a numerical solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure { .. }
                | Error::BracketFailure { .. }
                | Error::NoConvergence { .. }
                | Error::ResolutionCap { .. }
                | Error::NoisyFit { .. }
                | Error::PartitionAmbiguous { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
