use thiserror::Error;

/// Errors raised by the simulator and the protocol parties.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bit string is empty")]
    EmptyBits,
    #[error("invalid bit character {0:?}; expected '0' or '1'")]
    InvalidBit(char),
    #[error("amplitude vector length {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
    #[error("amplitudes contain NaN or infinity")]
    NonFinite,
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("qubit index {index} out of range 1..={num_qubits}")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("key has {got} bits but {needed} are required")]
    KeyTooShort { needed: usize, got: usize },
    #[error("mixture weights must be nonnegative and sum to 1 (sum = {0})")]
    WeightSum(f64),
    #[error("cannot mix an empty list of density matrices")]
    EmptyMixture,
    #[error("{num_qubits} qubits exceeds the enumeration bound of {max}")]
    EnumerationBound { num_qubits: usize, max: usize },
    #[error("phase encoding k={k} is invalid for {bits}-bit phases (need 1 <= k < 2^{bits})")]
    InvalidPhase { k: u64, bits: u32 },
    #[error("qubit count must be at least 1")]
    ZeroQubits,
    #[error("no key has been established on this channel")]
    MissingPriorKey,
    #[error("injected key has {got} bits, expected {expected}")]
    InjectedKeyLength { expected: usize, got: usize },
    #[error("insufficient sifted bits: need {needed}, have {got}")]
    InsufficientSiftedBits { needed: usize, got: usize },
    #[error("key establishment aborted: observed QBER {qber:.4} exceeds threshold")]
    QkdAborted { qber: f64 },
    #[error("identity {0} is registered more than once")]
    DuplicateIdentity(String),
    #[error("identity has {got} bits, expected {expected}")]
    IdentityLength { expected: usize, got: usize },
    #[error("signer holds no key material")]
    UninitializedSigner,
    #[error("verifier has no pending verification")]
    NoPendingVerification,
    #[error("identity {0} is not registered with the key generator")]
    UnknownIdentity(String),
    #[error("Pauli string has {got} labels, expected {expected}")]
    PauliLength { expected: usize, got: usize },
    #[error("invalid Pauli label {0:?}")]
    InvalidPauli(char),
    #[error("transcript does not record an accepting run")]
    NoAcceptingRun,
    #[error("{0} registered records explain the run; evidence is ambiguous")]
    AmbiguousEvidence(usize),
    #[error("no registered record explains the accepted run")]
    NoMatchingRecord,
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
