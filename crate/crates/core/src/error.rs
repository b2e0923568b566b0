use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid process specification: {0}")]
    InvalidSpec(String),

    #[error("mean drift undefined: {0}")]
    MeanDriftUndefined(String),

    #[error("MGF divergence: lambda = {lambda} is not below the MGF domain bound {lambda_max}")]
    MgfDivergence { lambda: f64, lambda_max: f64 },

    #[error("no valid certificate: k(lambda) = {k} is not positive")]
    NoValidCertificate { k: f64 },

    #[error("growth constant unavailable: drift one-sided Lipschitz bound cannot be formed")]
    GrowthConstantUnavailable,

    #[error("exponential bound not applicable: k(lambda) = {k} does not exceed p*G = {pg}")]
    ContractionNotApplicable { k: f64, pg: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("step too large for monotone coupling: dt = {dt} must be below {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("oracle size exceeded: n = {0} > 8")]
    OracleSizeExceeded(usize),

    #[error("path grids do not match")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
