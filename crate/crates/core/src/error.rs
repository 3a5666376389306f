use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid surface parameters g={g}, n={n}")]
    InvalidSurface { g: i64, n: i64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("symbol {0} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("alphabets differ: {0}")]
    AlphabetMismatch(String),
    #[error("certificate does not reproduce the relator: {0}")]
    BadCertificate(String),
    #[error("generator {0} cannot be removed: {1}")]
    NotRemovable(String, String),
    #[error("word {0} is not in the subgroup")]
    NotInSubgroup(String),
    #[error("character is not onto Z/2 or index exceeds 2")]
    BadCharacter,
    #[error("no matrix assigned to {0}")]
    Unassigned(String),
    #[error("curve {0} is one-sided")]
    OneSided(String),
    #[error("guard violation in {family} {branch}: {detail}")]
    Guard { family: String, branch: String, detail: String },
    #[error("loop {0} is not a named loop")]
    UnnamedLoop(String),
    #[error("derivation {name}: {detail}")]
    Derivation { name: String, detail: String },
    #[error("ledger: {0}")]
    Ledger(String),
    #[error("extension data: {0}")]
    Extension(String),
    #[error("malformed schema data: {0}")]
    Schema(String),
    #[error("dimension {0} exceeds the supported maximum of 64")]
    Dimension(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
