use thiserror::Error;

/// Errors raised by the constants engine, the renewal and shift
/// laboratories, and the toral pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `1 - a - epsilon` is not strictly positive, or a derived quantity
    /// that appears in a denominator does not exclude zero.
    #[error("degenerate constants bundle: {0}")]
    DegenerateBundle(String),

    #[error("series does not converge at working precision: {reason} (about {required_terms:e} terms needed)")]
    NonconvergentAtPrecision { reason: String, required_terms: f64 },

    #[error("generating function evaluated outside its radius: {0}")]
    DivergenceRisk(String),

    #[error("representation depth {requested} is below the potential depth {potential}")]
    DepthTooSmall { requested: usize, potential: usize },

    #[error("model is not irreducible and aperiodic: {0}")]
    ReducibleModel(String),

    #[error("observable has nonzero mean {0:e}")]
    NonzeroMean(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("map is not hyperbolic: {0}")]
    NonHyperbolic(String),

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl Error {
    /// Deserialises JSON; a failure names the offending field by its path,
    /// falling back to `root` for errors at the top level.
    pub fn from_json<T: serde::de::DeserializeOwned>(text: &str, root: &str) -> Result<T> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { root.to_string() } else { format!("{root}.{path}") };
            Error::parse(field, e.into_inner().to_string())
        })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
