use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid source configuration: {0}")]
    InvalidSource(String),

    #[error("empty request: at least one sample is required")]
    EmptyRequest,

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid object geometry: {0}")]
    Geometry(String),

    #[error("degenerate object: amplitudes sum to zero, bucket signal is identically zero")]
    DegenerateObject,

    #[error("cannot normalize: {0} is zero")]
    Normalization(String),

    #[error("invalid bin selection: {0}")]
    Selection(String),

    #[error("peak bins mix amplitudes {first} and {other}")]
    AmbiguousPeak { first: f64, other: f64 },

    #[error("degenerate samples: {0}")]
    DegenerateSamples(&'static str),

    #[error("invalid bandwidths: {0}")]
    Bandwidth(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by physically degenerate input (zero object,
    /// zero signal) as opposed to malformed parameters.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateObject | Error::Normalization(_) | Error::DegenerateSamples(_))
    }
}
