use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("generator {d} does not divide group order {n}")]
    InvalidGenerator { n: usize, d: usize },
    #[error("group order must be positive")]
    ZeroOrder,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vector has zero energy")]
    ZeroEnergy,
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("cyclic prefix of {n_cp} samples exceeds block length {n}")]
    CyclicPrefixTooLong { n_cp: usize, n: usize },
    #[error("{taps} channel taps exceed block length {n}")]
    TapsTooLong { taps: usize, n: usize },
    #[error("delay {delay_ns} ns lies outside the {symbol_ns} ns symbol")]
    DelayOutsideSymbol { delay_ns: f64, symbol_ns: f64 },
    #[error("tap at sample {index} is not covered by a {n_cp}-sample cyclic prefix")]
    TapOutsideCyclicPrefix { index: usize, n_cp: usize },
    #[error("invalid power delay profile: {0}")]
    InvalidProfile(String),
    #[error("pilot on active tone {0} is zero")]
    ZeroPilot(usize),
    #[error("no active tones to estimate")]
    NoActiveTones,
    #[error("tone index {tone} out of range for {n} subcarriers")]
    ToneOutOfRange { tone: usize, n: usize },
    #[error("odd bit count {0} cannot be mapped to QPSK")]
    OddBitCount(usize),
    #[error("LMMSE system is not positive definite (condition estimate {condition:e})")]
    SolverFailure { condition: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
