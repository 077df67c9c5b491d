use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid piecewise function: {0}")]
    InvalidFunction(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("cumulative function takes value {found} outside [0, {total}]")]
    RangeExceedsMass { found: f64, total: f64 },

    #[error("cumulative function tops out at {found}, below the total mass {total}")]
    IncompleteRange { found: f64, total: f64 },

    #[error("function is infinite on a set of positive measure near {at}")]
    NonIntegrable { at: f64 },

    #[error("total masses differ: {0} vs {1}")]
    MassMismatch(f64, f64),

    #[error(
        "{label}: tail integrability condition violated \
         (integral of F over (-inf,0) plus integral of C-F over (0,inf) is infinite)"
    )]
    TailCondition { label: String },

    #[error("negative time {0}; solutions are defined for t >= 0")]
    NegativeTime(f64),

    #[error("evolved pseudo-inverse decreases by {drop} at eta = {eta}; input state is corrupted")]
    NonMonotone { eta: f64, drop: f64 },

    #[error("pseudo-inverse has an infinite limit on the {0} side; it cannot be continued")]
    InfiniteBoundary(&'static str),

    #[error("invalid Lagrangian state: {0}")]
    InvalidLagrangian(String),

    #[error("stencil around x = {x} comes within reach of a kink or atom at {kink}")]
    NearSingularity { x: f64, kink: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid scenario parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
