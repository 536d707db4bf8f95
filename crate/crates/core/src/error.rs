use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("invalid name `{0}`")]
    InvalidName(String),

    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },

    #[error("exploration budget of {limit} configurations exceeded")]
    Budget { limit: usize },

    #[error("symbol class is empty")]
    EmptyClass,

    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("input alphabets overlap on `{0}`")]
    OverlappingAlphabets(String),

    #[error("transducer has no transition from `{state}` on `{symbol}`")]
    MissingTransition { state: String, symbol: String },

    #[error("transducer output on `{symbol}` from `{state}` is empty")]
    EmptyOutput { state: String, symbol: String },

    #[error("word must be nonempty")]
    EmptyWord,

    #[error("value exceeds the magnitude bound of {max_bits} bits")]
    Magnitude { max_bits: u64 },

    #[error("value {value} out of range for a ({level},{base})-counter")]
    OutOfRange {
        level: u32,
        base: u32,
        value: String,
    },

    #[error("malformed counter at position {position}: {reason}")]
    Counter { position: usize, reason: String },

    #[error("state `{0}` is the source of more than one macro")]
    DuplicateSource(String),

    #[error("choice has no options")]
    EmptyOptions,

    #[error("guard and transducer alphabets differ: {0}")]
    GuardAlphabetMismatch(String),

    #[error("machine length {found} does not match Tow(k,n) = {expected}")]
    LengthMismatch { expected: String, found: String },

    #[error("output symbol `{0}` collides with a reserved action")]
    AlphabetCollision(String),

    #[error("length {ell} exceeds the enumeration bound {max}")]
    EnumerationBound { ell: u64, max: u64 },

    #[error("transducer `{0}` is not letter-to-letter")]
    NotLetterToLetter(String),

    #[error("space bound {space} exceeds the {cells} cells available")]
    SpaceBound { space: usize, cells: usize },

    #[error("machine is not deterministic: {0}")]
    Nondeterministic(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
