//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // ffmat
    #[error("pivot columns are linearly dependent")]
    SingularPivot,
    #[error("vector dimension {got} does not match workspace dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    // matroid
    #[error("self-loop {0}-{0} not allowed in a graphic matroid")]
    SelfLoop(usize),
    #[error("field modulus {modulus} too small, need more than {needed} evaluation points")]
    ModulusTooSmall { modulus: u64, needed: usize },
    #[error("contraction set is dependent")]
    DependentContractionSet,

    // repset
    #[error("family member {0:?} is not independent in the matroid")]
    SetNotIndependent(crate::set::ElemSet),
    #[error("matroid rank {rank} is smaller than required p+q = {needed}")]
    RankTooSmall { rank: usize, needed: usize },
    #[error("families are over different ground sets ({0} vs {1})")]
    GroundMismatch(usize, usize),

    // sepcol
    #[error("randomized construction failed verification after {attempts} attempts")]
    VerificationBudgetExceeded { attempts: usize },

    // product
    #[error("size class {size} holds {len} sets, above the allowed {cap}")]
    ClassTooLarge { size: usize, len: usize, cap: u64 },

    // mld
    #[error("circuit contains a cycle")]
    CyclicCircuit,
    #[error("circuit has no output gate")]
    NoOutput,
    #[error("k = {k} exceeds the verification ceiling {ceiling}")]
    KTooLarge { k: usize, ceiling: usize },
    #[error("circuit constant must be a positive integer")]
    NonPositiveConstant,

    // twdp
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("no solution: {0}")]
    NoSolution(String),

    // oracle
    #[error("enumeration budget exceeded: needed {needed}, budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    // io / parsing (used by the file-format parsers)
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
