use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpvError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor index {index} out of range for {factors} factors")]
    IndexOutOfRange { index: usize, factors: usize },

    #[error("operator is not Hermitian (max |H - H^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:e})")]
    EigenNotConverged { sweeps: usize, off: f64 },

    #[error(
        "SDP solver did not converge after {iterations} iterations \
         (gap {gap:e}, psd residual {psd:e}, ppt residual {ppt:e})"
    )]
    SdpNotConverged {
        iterations: usize,
        gap: f64,
        psd: f64,
        ppt: f64,
    },

    #[error("protocol '{0}' is abstract and has no concrete honest measurement")]
    AbstractProtocol(String),

    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },

    #[error("strategy '{strategy}' is incompatible with protocol '{protocol}': {reason}")]
    Incompatible {
        strategy: String,
        protocol: String,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, QpvError>;
