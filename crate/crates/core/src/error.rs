use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {width}-qubit circuit")]
    QubitOutOfRange { qubit: usize, width: usize },

    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),

    #[error("qubits ({0}, {1}) are not neighbours on the linear chain")]
    NotCoupled(usize, usize),

    #[error("non-finite angle in {0}")]
    NonFiniteAngle(&'static str),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{width} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { width: usize, limit: usize },

    #[error("gate {0} is not supported here")]
    UnsupportedGate(String),

    #[error("invalid device model: {0}")]
    InvalidDevice(String),

    #[error("singular readout assignment matrix on qubit {0}")]
    SingularAssignment(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
