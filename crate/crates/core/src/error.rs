use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: a truncated Fock space needs at least 2 levels")]
    InvalidDimension(usize),
    #[error("tensor product dimension {requested} exceeds the cap of {cap}")]
    Capacity { requested: usize, cap: usize },
    #[error("operator dimensions do not match ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("mode index {0} is out of range")]
    ModeIndex(usize),
    #[error("incomplete model: {0}")]
    IncompleteModel(String),
    #[error("dispersive approximation breaks down: {0}")]
    DispersiveBreakdown(&'static str),
    #[error("outside the transmon regime (E_J/E_C = {0})")]
    OutsideTransmonRegime(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("invalid cavity mode index {kind}{m}{n}{p}")]
    InvalidModeIndex { kind: &'static str, m: u32, n: u32, p: u32 },
    #[error("duplicate mode label `{0}`")]
    DuplicateMode(String),
    #[error("drive is resonant with the cavity; the displacement formula is singular")]
    ResonantDrive,
    #[error("integrator failure at t = {time:e} s: trace drifted by {drift:e}; use a smaller step")]
    Integrator { time: f64, drift: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(&'static str),
    #[error("pi pulse has not been calibrated")]
    UncalibratedPulse,
    #[error("invalid trace: {0}")]
    InvalidTrace(&'static str),
    #[error("root not bracketed in [{lo:e}, {hi:e}]")]
    RootNotBracketed { lo: f64, hi: f64 },
}
