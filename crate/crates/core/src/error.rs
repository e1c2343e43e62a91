use thiserror::Error;

/// Errors raised by the solvers, geometry routines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("could not locate the zero level set of component {component}: {reason}")]
    SamplingFailure { component: usize, reason: String },

    #[error("direction ({0:.6}, {1:.6}) has an empty cap for every admissible offset")]
    DegenerateDirection(f64, f64),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("pure Neumann operator without reaction term is singular for a right-hand side with mean {mean:.3e}")]
    SingularOperator { mean: f64 },

    #[error("point ({0:.6}, {1:.6}) lies outside the interpolation range of the grid")]
    SampleOutsideGrid(f64, f64),

    #[error("radial matching system is singular (determinant {0:.3e})")]
    SingularMatching(f64),

    #[error("reflection of ({0:.6}, {1:.6}) leaves the grid")]
    ReflectionLeavesGrid(f64, f64),

    #[error("one-sided stencil at sample {0} crosses another part of the interface")]
    StencilCollision(usize),

    #[error("local graph fit around the contact point failed: {0}")]
    FrameFit(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
