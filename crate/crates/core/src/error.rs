use thiserror::Error;

/// Errors raised by the library. Verification outcomes are reported through
/// report types, not through this enum.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("D = {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("p = {0} must be an odd prime")]
    BadPrime(u64),
    #[error("p = {p} is not split in Q(sqrt(-{d})): the split hypothesis fails")]
    NotSplit { d: u64, p: u64 },
    #[error("precision M = {m} must be at least 2c = {two_c}")]
    PrecisionTooLow { m: u32, two_c: u32 },
    #[error("element is not p-integral (negative valuation)")]
    NegativeValuation,
    #[error("element is not prime to p")]
    NotPrimeToP,
    #[error("root-of-unity order {m} is not tame for p = {p} (wild regime unsupported)")]
    WildRegime { m: u64, p: u64 },
    #[error("mu_{m} is not contained in Z_{p}")]
    RootNotInZp { m: u64, p: u64 },
    #[error("character table is not multiplicative at ({a}, {b})")]
    NotMultiplicative { a: u64, b: u64 },
    #[error("not a Hecke character: not trivial on the unit {unit} of O_K")]
    UnitIncompatible { unit: String },
    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: u32, found: u32 },
    #[error("k = {k} out of convergence range (need k > 2n - 1 = {bound})")]
    KOutOfRange { k: i64, bound: i64 },
    #[error("unsupported: P unknown for n > 1 (ell = {ell})")]
    UnsupportedP { ell: u64 },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("inputs not congruent mod p^{m}: property not applicable")]
    NotCongruent { m: u32 },
    #[error("nonzero coefficient on a unit-incompatible character: input violates the weight relation")]
    CorruptedWeightFunction,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
