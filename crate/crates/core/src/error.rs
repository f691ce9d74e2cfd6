use thiserror::Error;

/// Errors raised anywhere in the pricing stack.
///
/// The CLI reports failures by variant name (see [`PricingError::name`]), so
/// variant names are part of the external interface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("strip too narrow: lambda_minus = {lambda_minus} must be < -1")]
    StripTooNarrow { lambda_minus: f64 },

    #[error("Im xi = {im} outside the regularity strip ]{lo}, {hi}[ (leg {leg:?})")]
    StripViolation {
        im: f64,
        lo: f64,
        hi: f64,
        leg: Option<usize>,
    },

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("non-positive input: {0}")]
    NonPositiveInput(String),

    #[error("quadrature did not converge after {evaluations} evaluations (best {best}, estimate {error_estimate:e})")]
    NoConvergence {
        best: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("integrand returned a non-finite value at {0}")]
    NaNEncountered(String),

    #[error("dimension {dim} exceeds the limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("no feasible contour offsets (leg {leg}): {reason}")]
    NoFeasibleOffsets { leg: usize, reason: String },

    #[error("compound thresholds have not been solved")]
    UnsolvedThresholds,

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("correlation matrix is not positive semidefinite (smallest pivot {0:e})")]
    NotPSD(f64),

    #[error("unsupported contract: {0}")]
    UnsupportedContract(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("nesting too deep: compound depth {0} under Monte Carlo")]
    NestingTooDeep(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl PricingError {
    /// Variant name, used verbatim in CLI error messages.
    pub fn name(&self) -> &'static str {
        match self {
            PricingError::InvalidModel(_) => "InvalidModel",
            PricingError::StripTooNarrow { .. } => "StripTooNarrow",
            PricingError::StripViolation { .. } => "StripViolation",
            PricingError::NoRoot(_) => "NoRoot",
            PricingError::NonPositiveInput(_) => "NonPositiveInput",
            PricingError::NoConvergence { .. } => "NoConvergence",
            PricingError::NaNEncountered(_) => "NaNEncountered",
            PricingError::DimensionTooLarge { .. } => "DimensionTooLarge",
            PricingError::NoFeasibleOffsets { .. } => "NoFeasibleOffsets",
            PricingError::UnsolvedThresholds => "UnsolvedThresholds",
            PricingError::CapExceeded(_) => "CapExceeded",
            PricingError::NotPSD(_) => "NotPSD",
            PricingError::UnsupportedContract(_) => "UnsupportedContract",
            PricingError::UnsupportedModel(_) => "UnsupportedModel",
            PricingError::NestingTooDeep(_) => "NestingTooDeep",
            PricingError::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, PricingError>;
