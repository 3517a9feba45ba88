use std::path::PathBuf;

/// Errors raised by the numerical engines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} outside admissible interval [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("observation point within one cell of the aperture (distance {distance:.3e} m)")]
    SingularProximity { distance: f64 },

    #[error("reference field is identically zero; normalization undefined")]
    ZeroReference,

    #[error("meta-atom table: {0}")]
    Table(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
