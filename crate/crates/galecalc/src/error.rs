//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rational literal {0:?}: expected integer or p/q text")]
    BadRational(String),

    #[error("invalid bit string {0:?}: only '0' and '1' are allowed")]
    BadBitString(String),

    #[error("growth factor must be positive, got {0}")]
    BadGrowth(String),

    #[error("initial capital must be non-negative, got {0}")]
    BadInitialCapital(String),

    #[error("interval [{a}, {b}] is not a sub-interval of [0, 1] with a < b")]
    BadInterval { a: String, b: String },

    #[error("dyadic interval numerator {j} does not fit below 2^{k}")]
    BadDyadic { j: String, k: u32 },

    #[error("target growth {target} is below the strategy's own growth {origin}")]
    ScaleBelowSource { origin: String, target: String },

    #[error("prefix of length {have} is shorter than the required 2^{n} = {need}")]
    PrefixTooShort { have: u64, need: u64, n: u32 },

    #[error("exponent pair wants {detail}")]
    BadExponentPair { detail: String },

    #[error("output length {0} is not a power of two at least 2^m")]
    BadOutLen(u64),

    #[error("seed of length {got} is shorter than the required {need} bits")]
    SeedTooShort { need: u64, got: u64 },

    #[error("enumeration of {0} needs more than 2^20 cases; refusing")]
    DepthGuard(String),

    #[error("encoding needs an exact gale (kind=gale), not a supergale")]
    EncodeNeedsGale,

    #[error("encoding needs unit initial capital, got {0}")]
    EncodeNeedsUnitCapital(String),

    #[error("string is not compressible by this strategy: capital {capital} <= 1")]
    NotCompressible { capital: String },

    #[error("codeword payload of {0} bits does not fit the wire format (max 255)")]
    PayloadTooWide(u64),

    #[error("corrupt codeword: interval fits neither child at position {position}")]
    Corrupt { position: u64 },

    #[error("malformed codeword file: {0}")]
    BadCodeword(String),

    #[error("roster is invalid: {0}")]
    BadRoster(String),

    #[error("member {index} is frozen at prefix length {at}; constant undefined")]
    FrozenMember { index: u32, at: u64 },

    #[error("member {index} has zero capital at its checkpoint prefix; constant undefined")]
    ZeroCheckpoint { index: u32 },

    #[error("no roster member has index {0}")]
    NoSuchMember(u32),

    #[error("malformed fixture: {0}")]
    BadFixture(String),

    #[error("bad configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
