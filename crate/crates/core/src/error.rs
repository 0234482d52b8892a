use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary: max |U·U† - I| entry is {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("photon number {found} exceeds the maximum of {max}")]
    TooManyPhotons { found: usize, max: usize },

    #[error("terms span several photon-number sectors ({first} and {second}) but the state is not flagged as a sector superposition")]
    MixedSectors { first: usize, second: usize },

    #[error("state has no terms or zero norm")]
    EmptyState,

    #[error("unknown mode: {0}")]
    UnknownMode(String),

    #[error("duplicate mode: {0}")]
    DuplicateMode(String),

    #[error("invalid frequency bin: {0}")]
    InvalidBin(String),

    #[error("occupation {occupation} cannot be mapped onto the subsystem: {reason}")]
    Unclassifiable { occupation: String, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid component: {0}")]
    InvalidComponent(String),

    #[error("routing collision: {0}")]
    RoutingCollision(String),

    #[error("AOM {component}: pair {first} ({first_hz} Hz) / {second} ({second_hz} Hz) has gap {gap_hz} Hz but the drive is {modulation_hz} Hz")]
    FrequencyGap {
        component: String,
        first: String,
        second: String,
        first_hz: f64,
        second_hz: f64,
        gap_hz: f64,
        modulation_hz: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bandwidth ratio is singular: sin(ωR) = {0:e} (ωR at a multiple of π)")]
    Singular(f64),

    #[error("{path}: {message}")]
    Document { path: String, message: String },

    #[error("component {index} ({kind}): {source}")]
    Component {
        index: usize,
        kind: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn document(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Document {
            path: path.into(),
            message: message.into(),
        }
    }
}
