use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },

    #[error("non-finite value at flat index {index} (component {component})")]
    NonFinite { component: String, index: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point ({:.6e}, {:.6e}, {:.6e}) outside the grid domain", .0[0], .0[1], .0[2])]
    OutOfDomain([f64; 3]),

    #[error("coincident points: {0}")]
    CoincidentPoints(String),

    #[error("undersampled angle series: jump of {jump:.6} rad at index {index}")]
    Undersampled { index: usize, jump: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-contiguous labels: {0}")]
    NonContiguousLabels(String),

    #[error("formula regime violated: {0}")]
    Regime(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
