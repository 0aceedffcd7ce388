use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("path register is empty")]
    EmptyRegister,
    #[error("path `{0}` is declared more than once")]
    DuplicatePath(String),
    #[error("unknown path `{0}`")]
    UnknownPath(String),
    #[error("gate `{gate}` needs distinct paths, got `{path}` twice")]
    RepeatedTarget { gate: &'static str, path: String },
    #[error("ket `{ket}` has {found} symbols but the register has {expected} paths")]
    KetLength {
        ket: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid qutrit symbol `{0}` (expected 0, H or V)")]
    InvalidSymbol(char),
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("transmittance {0} outside [0, 1]")]
    TransmittanceRange(f64),
    #[error("beam splitter input `{ket}` occupies both paths")]
    DoublyOccupied { ket: String },
    #[error("loss mode `{path}` and the object input are both occupied in `{ket}`")]
    OccupiedLossMode { path: String, ket: String },
    #[error("term `{ket}` lies outside the single-photon-pump subspace")]
    OutsideSinglePumpSubspace { ket: String },
    #[error("term `{ket}` does not fit the effective block structure: {reason}")]
    EffectiveStructure { ket: String, reason: String },
    #[error("unknown signal/idler pair ({signal}, {idler})")]
    UnknownPair { signal: String, idler: String },
    #[error("effective states live on different registers")]
    RegisterMismatch,
    #[error("oracle dimension {dimension} exceeds the limit {limit}")]
    DimensionOverflow { dimension: usize, limit: usize },
    #[error("gate `{0}` has no Fock-space counterpart")]
    UnsupportedGate(String),
    #[error("oracle needs a vacuum initial state")]
    NonVacuumInitial,
    #[error("nothing to post-select: the order-κ sector is empty")]
    EmptyKappaSector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("target vector has norm {norm}, expected 1")]
    NonUnitNorm { norm: f64 },
    #[error("{0}")]
    InvalidSpec(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}
