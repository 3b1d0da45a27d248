use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad class of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("hypothesis ordering: hr1 ({hr1}) must be less than hr0 ({hr0})")]
    HypothesisOrdering { hr0: f64, hr1: f64 },

    #[error("infeasible gray zone: {which} = {sum} exceeds 1")]
    InfeasibleGrayZone { which: &'static str, sum: f64 },

    #[error("interim spending `{name}` = {spent} must be below the study-wise level {total}")]
    SpendingExceedsTotal {
        name: &'static str,
        spent: f64,
        total: f64,
    },

    #[error("root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    Bracketing {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate}")]
    Convergence { estimate: f64, error_estimate: f64 },

    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    #[error("log-rank statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error("degenerate risk sets: log-rank variance is zero")]
    DegenerateRiskSet,

    #[error("tied observed event times at calendar time {time}")]
    TiedEventTimes { time: f64 },

    #[error("infeasible scenario: design needs {required} events but only {available} patients")]
    InfeasibleScenario { required: u64, available: u64 },

    #[error("line {line}: {reason}")]
    Ingest { line: u64, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. }
            | Error::HypothesisOrdering { .. }
            | Error::InfeasibleGrayZone { .. }
            | Error::SpendingExceedsTotal { .. }
            | Error::TiedEventTimes { .. }
            | Error::InfeasibleScenario { .. }
            | Error::Ingest { .. } => ErrorClass::Validation,
            Error::Bracketing { .. }
            | Error::Convergence { .. }
            | Error::InfeasibleDesign(_)
            | Error::UndefinedStatistic(_)
            | Error::DegenerateRiskSet => ErrorClass::Numerical,
            Error::Io(_) => ErrorClass::Io,
        }
    }

    /// Stable kebab-case identifier for machine consumers.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::HypothesisOrdering { .. } => "hypothesis-ordering",
            Error::InfeasibleGrayZone { .. } => "infeasible-gray-zone",
            Error::SpendingExceedsTotal { .. } => "spending-exceeds-total",
            Error::Bracketing { .. } => "bracketing",
            Error::Convergence { .. } => "convergence",
            Error::InfeasibleDesign(_) => "infeasible-design",
            Error::UndefinedStatistic(_) => "undefined-statistic",
            Error::DegenerateRiskSet => "degenerate-risk-set",
            Error::TiedEventTimes { .. } => "tied-event-times",
            Error::InfeasibleScenario { .. } => "infeasible-scenario",
            Error::Ingest { .. } => "ingest",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
