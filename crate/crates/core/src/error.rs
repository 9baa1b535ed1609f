use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("position map is not injective (slot {0} used twice)")]
    NonInjectiveMap(usize),

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("degree {degree} exceeds basis bound {bound}")]
    DegreeExceedsBound { degree: u32, bound: u32 },

    #[error("basis too large: {0}")]
    BasisTooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("point lies in {count} domain sets (expected exactly one)")]
    DomainInconsistent { count: usize },

    #[error("no surviving root in window [{lo}, {hi}]")]
    NoRootInWindow { lo: String, hi: String },

    #[error("{count} surviving roots (specification is not a function at this point)")]
    MultipleRoots { count: usize },

    #[error("fiber over the point is not a finite set (equality vanishes identically and the inequalities hold on an open interval)")]
    FiberNotFinite,

    #[error("point lies in {count} cells (expected exactly one)")]
    NotPartition { count: usize },

    #[error("{what} has size {size}, above the cap {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("index sets are not normalized: {0}")]
    NotNormalized(String),

    #[error("empty decomposition: {0}")]
    EmptyDecomposition(String),

    #[error("growth bounds rejected: {0}")]
    BoundsViolated(String),

    #[error("invalid growth bounds: {0}")]
    InvalidBounds(String),

    #[error("lower-level box is unbounded in coordinate {0}")]
    UnboundedBox(usize),

    #[error("program cannot be lifted: {0}")]
    NotLiftable(String),

    #[error("empty evaluation grid: {0}")]
    EmptyGrid(String),

    #[error("unknown construction tag `{0}`")]
    UnknownConstruction(String),

    #[error("recipe precondition violated: {0}")]
    RecipePrecondition(String),

    #[error("trivial instance: r = {r} exceeds k = {k}")]
    TrivialInstance { r: usize, k: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("point is not binary")]
    NonBinaryPoint,

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("reduction mismatch: {0}")]
    ReductionMismatch(String),

    #[error("evaluators disagree: {0}")]
    Disagreement(String),
}
