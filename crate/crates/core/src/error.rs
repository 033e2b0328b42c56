use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported bound {max}", max = crate::field::MAX_MODULUS)]
    ModulusTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular matrix: ad - bc = 0")]
    SingularMatrix,
    #[error("degenerate triple: points must be pairwise distinct")]
    DegenerateTriple,
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("unsupported threshold k = {k}; this operation needs k >= {min}")]
    UnsupportedThreshold { k: usize, min: usize },
    #[error("transformation is affine (c = 0); the pivot map needs c != 0")]
    WrongBranch,
    #[error("transformation does not pass through the pivot")]
    PivotMismatch,
    #[error("oracle input too large: {size} exceeds cap {cap}")]
    OracleTooLarge { size: usize, cap: usize },
    #[error("empty hyperbola family")]
    EmptyFamily,
    #[error("unbalanced input: |A| = {0}, |B| = {1}")]
    Unbalanced(usize, usize),
    #[error("degenerate input: need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate pattern: need |S| >= 3, got {0}")]
    PatternTooSmall(usize),
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("bound {bound} is missing parameter `{param}`")]
    MissingParameter {
        bound: &'static str,
        param: &'static str,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}
