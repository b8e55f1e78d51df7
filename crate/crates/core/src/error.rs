use thiserror::Error;

/// Errors raised anywhere in the sector pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown coordinate system `{name}`; valid keys: {}", valid.join(", "))]
    UnknownSystem { name: String, valid: Vec<String> },

    #[error("unknown sector `{label}` in system `{system}`")]
    UnknownSector { system: String, label: String },

    #[error("weight is singular at q = {q}")]
    Singularity { q: f64 },

    #[error("q = {q} lies outside the sector domain [{lo}, {hi}]")]
    OutOfDomain { q: f64, lo: f64, hi: f64 },

    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration failed at q = {q}: {reason}")]
    IntegrationFailure { q: f64, reason: String },

    #[error("{basis} pair is linearly dependent; build the second column with `companion_solution`")]
    DegeneratePair { basis: String },

    #[error("series for {what} did not converge within {terms} terms (tail {tail:e})")]
    SeriesNonConvergence { what: String, terms: usize, tail: f64 },

    #[error("Mathieu characteristic value (order {order}, q = {q}) did not converge up to truncation {cap}")]
    CharValueNonConvergence { order: usize, q: f64, cap: usize },

    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("Pinney constraint AB - D^2 = k/W^2 violated, residual {residual:e}")]
    ConstraintViolation { residual: f64 },

    #[error("quadratic form is not positive at q = {q}")]
    NonPositiveForm { q: f64 },

    #[error("amplitude approached a node at q = {q}")]
    NodeApproach { q: f64 },

    #[error("momentum field is singular at amplitude nodes {nodes:?}")]
    NodeSingularity { nodes: Vec<f64> },

    #[error("sample grids do not match")]
    GridMismatch,

    #[error("trajectory left the field grid at t = {t}")]
    PathExit { t: f64 },

    #[error("incomplete problem specification, missing: {}", missing.join(", "))]
    IncompleteSpec { missing: Vec<String> },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
