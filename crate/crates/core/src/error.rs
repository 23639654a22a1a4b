use thiserror::Error;

/// Everything that can go wrong while building states, policies or evaluating metrics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate protocol: {0}")]
    Degenerate(String),

    #[error("undefined jump: success probability is zero at F = {0}")]
    UndefinedJump(f64),

    #[error("inadmissible protocol for k = {k}: {reason}")]
    Inadmissible { k: usize, reason: String },

    #[error("divergent expectation: {0}")]
    Divergent(String),

    #[error("no generation: effective generation probability is zero")]
    NoGeneration,

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("unsupported tabulation: {0}")]
    UnsupportedTabulation(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("oracle budget exceeded after {steps} ticks (residual mass {residual:e})")]
    BudgetExceeded {
        steps: usize,
        residual: f64,
        partial: Box<crate::oracle::OracleResult>,
    },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Degenerate(_) => "DegenerateProtocol",
            Error::UndefinedJump(_) => "UndefinedJump",
            Error::Inadmissible { .. } => "InadmissibleProtocol",
            Error::Divergent(_) => "DivergentExpectation",
            Error::NoGeneration => "NoGeneration",
            Error::Evaluation(_) => "EvaluationError",
            Error::UnsupportedTabulation(_) => "UnsupportedTabulation",
            Error::MissingData(_) => "MissingData",
            Error::Config(_) => "ConfigError",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_probability(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {x} is not a probability")))
    }
}
