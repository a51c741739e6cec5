use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("{what} {value} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("`{name}` has arity {expected} but was given {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid base structure: {0}")]
    InvalidBase(String),

    #[error("base structure delegated to prior work: {0}")]
    DelegatedBase(String),

    #[error("operation not supported over {0}")]
    UnsupportedBase(String),

    #[error("relation `{relation}` contains {ty}, which is invalid: {reason}")]
    InvalidType {
        relation: String,
        ty: String,
        reason: String,
    },

    #[error("relation `{0}` has no exact clause compilation")]
    NotCompiled(String),

    #[error("class-pattern relation of `{0}` is not affine")]
    NotAffine(String),

    #[error("{behaviour} does not preserve `{relation}`")]
    NotPreserved { behaviour: String, relation: String },

    #[error("wrong signature: {0}")]
    WrongSignature(String),

    #[error("empty input")]
    EmptyInput,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by this crate.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
