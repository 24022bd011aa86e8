use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: unresolved reference `{id}`")]
    DanglingRef { line: usize, id: String },

    #[error("duplicate document id `{0}`")]
    DuplicateDoc(String),

    #[error("invalid document `{doc}`: {reason}")]
    InvalidDocument { doc: String, reason: String },

    #[error("`{entity}` is linked to unknown event `{event}`")]
    UnknownEvent { entity: String, event: String },

    #[error("event `{event}` has two result-of ingredients: `{first}` and `{second}`")]
    MultipleResults {
        event: String,
        first: String,
        second: String,
    },

    #[error("drop entity `{entity}` at event `{event}` has no prior mention to resolve against")]
    NoAntecedent { entity: String, event: String },

    #[error("mention `{mention}` is declared in chains `{first}` and `{second}`")]
    MentionInTwoChains {
        mention: String,
        first: String,
        second: String,
    },

    #[error("chain `{chain}` mixes entity types {first} and {second}")]
    MixedChainTypes {
        chain: String,
        first: String,
        second: String,
    },

    #[error("{source_name}:{line}: {reason}")]
    Table {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },

    #[error("unknown split label `{0}`")]
    UnknownSplit(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("mention `{0}` appears more than once in one partition")]
    DuplicateMention(String),
}

pub type Result<T> = std::result::Result<T, Error>;
