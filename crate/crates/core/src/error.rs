use thiserror::Error;

/// Errors raised by the rotor toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RotorError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point outside the reduced chart: |x|^2 = {norm_sq} >= R^2 = {radius_sq}")]
    ChartDomain { norm_sq: f64, radius_sq: f64 },

    #[error("angle {angle} cannot be recovered at this point (coordinate singularity)")]
    SingularPoint { angle: usize },

    #[error("sin(phi_{angle}) vanishes: pole singularity")]
    PoleSingularity { angle: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension D = {0}")]
    UnsupportedDimension(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no convergence after {iterations} iterations (residuals {residuals:?})")]
    NonConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("trajectory left the chart margin at t = {time}")]
    ChartMargin { time: f64 },

    #[error("implicit step did not converge at t = {time}; reduce the step size")]
    StepSize { time: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel width sqrt(hbar*eps) = {width} exceeds limit {limit}")]
    KernelWidth { width: f64, limit: f64 },

    #[error("angular quadrature failed to stabilise at {nodes} nodes")]
    QuadratureNonConvergence { nodes: usize },
}

pub type Result<T> = std::result::Result<T, RotorError>;
