use thiserror::Error;

/// Errors produced by schema, instance, rewrite, and migration operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("unknown endpoint `{0}`")]
    UnknownEndpoint(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("out-of-range reference: {0}")]
    OutOfRange(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid ontology map: {0}")]
    InvalidMap(String),

    #[error("invalid match: {0}")]
    InvalidMatch(String),

    #[error("dangling condition violated: {0}")]
    DanglingViolation(String),

    #[error("rewrite left a hom of the result state undefined: {0}")]
    IncompleteResult(String),

    #[error("migration is partial here: {0}")]
    MigrationPartiality(String),

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Annotate an error with the plan step it occurred at.
    pub fn at_step(self, index: usize) -> Error {
        Error::Step {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!(
            "{} (line {}, column {})",
            e,
            e.line(),
            e.column()
        ))
    }
}
