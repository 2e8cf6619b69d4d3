use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input on which a quantity is undefined, e.g. `|H| = 0` for `f0`.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    /// Non-positive curvature radius at a grid node.
    #[error("convexity lost at node {node} (radius {radius:e})")]
    ConvexityLoss { node: usize, radius: f64 },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("time step {dt:e} below minimum {dt_min:e} at t = {t}")]
    StepUnderflow { dt: f64, dt_min: f64, t: f64 },

    #[error("optimizer did not converge: {what} (best value {best})")]
    NonConvergence { what: String, best: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
