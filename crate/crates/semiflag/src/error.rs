//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("semifield mismatch: {0} vs {1}")]
    SemifieldMismatch(String, String),

    #[error("basis mismatch: {0} vs {1}")]
    BasisMismatch(String, String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("not in the generated catalog: {0}")]
    Catalog(String),

    #[error("positivity violation in {module}: {op}^({n})_{i} entry ({from} -> {to}) = {value}")]
    Positivity {
        module: String,
        op: char,
        i: usize,
        n: usize,
        from: String,
        to: String,
        value: String,
    },

    #[error("equivariance conflict while computing structure constants for {0}: {1}")]
    GammaConflict(String, String),

    #[error("module validation failed for {0}: {1}")]
    Validation(String, String),

    #[error("no solution for component {lambda}: {witness}")]
    NoSolution { lambda: String, witness: String },

    #[error("ambiguous solution for component {lambda}: the defining equations do not determine it uniquely")]
    AmbiguousSolution { lambda: String },

    #[error("missing structure-constant table for ({0}, {1})")]
    MissingTable(String, String),

    #[error("missing module data for {0}")]
    MissingModule(String),

    #[error("evaluation requested beyond verified depth {verified} (needed {needed})")]
    DepthExceeded { verified: u32, needed: u32 },

    #[error("zero component at fundamental weight index {0}")]
    ZeroComponent(usize),

    #[error("character does not come from a point: fundamental component {0} is identically absent")]
    NonPoint(usize),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("tropical integer overflow in {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported schema {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
