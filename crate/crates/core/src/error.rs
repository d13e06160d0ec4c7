use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} exceeded the cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("group `{0}` is not simple")]
    NotSimple(String),
    #[error("group `{0}` is abelian")]
    Abelian(String),
    #[error("automorphism generator {0} does not define an automorphism")]
    NotAnAutomorphism(usize),
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: u64, found: u64 },
    #[error("automorphism group order mismatch: declared {declared}, inferred {inferred}")]
    AutOrderMismatch { declared: u64, inferred: u64 },
    #[error("|Aut(T)| = {aut_order} exceeds |T|^2 = {bound}")]
    AutTooLarge { aut_order: u64, bound: u128 },
    #[error("outer automorphism cosets `{0}` and `{1}` induce the same class permutation")]
    DuplicateClassAction(String, String),
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("cannot parse product spec `{0}`")]
    SpecSyntax(String),
    #[error("subgroup lattice unavailable for `{0}`")]
    LatticeUnavailable(String),
    #[error("imported maximal class invalid: {0}")]
    InvalidImport(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("waiting-time trial exceeded {0} draws")]
    WaitingTimeCap(usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
