use thiserror::Error;

/// Crate-wide error type. Variants map onto the failure modes of jet
/// arithmetic, state construction, and the CLI exit-code contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pole encountered: {0}")]
    Pole(String),

    #[error("division by a jet with zero value")]
    DivisionByZero,

    #[error("derivative order ({i},{j}) exceeds jet order {order}")]
    OrderExceeded { i: usize, j: usize, order: usize },

    #[error("jacobi recurrence breakdown: leading coefficient vanishes at degree {degree}")]
    RecurrenceBreakdown { degree: usize },

    #[error("level index n = {n} outside the bound-state range n < b = {b}")]
    IndexOutOfBoundState { n: usize, b: f64 },

    #[error("antisymmetric combination with n = m = {n} vanishes identically")]
    DegenerateAntisymmetric { n: usize },

    #[error("selection rule |n - m| > k violated: n = {n}, m = {m}, k = {k}")]
    SelectionRuleViolated { n: usize, m: usize, k: usize },

    #[error("collocation matrix ill-conditioned: cond = {cond:.3e}")]
    IllConditioned { cond: f64 },

    #[error("resonant diagonal entries c[{n}][{n}] and c[{k}][{k}] obstruct back-substitution")]
    ResonanceError { n: usize, k: usize },

    #[error("chain depth m + M = {depth} exceeds configured maximum {max}")]
    ChainDepthExceeded { depth: usize, max: usize },

    #[error("parameter a = {a} outside the admissible region a > -1/2")]
    RegionError { a: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    /// Exit code per the CLI contract: 2 for configuration problems,
    /// 3 for domain/branch errors. Verification failures (code 1) are
    /// signaled by report contents, not by this error type.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::InvalidConfig(_) | Error::Io(_) | Error::Serialize(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
