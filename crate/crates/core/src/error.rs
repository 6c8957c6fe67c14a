use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("digit {digit} at position {position} is not below the prime {prime}")]
    AlphabetViolation { digit: u64, position: usize, prime: u32 },
    #[error("exponent window violated: {0}")]
    WindowViolation(String),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("enumeration of {requested} residues exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("delta {0} is below the context resolution")]
    DeltaTooSmall(String),
    #[error("delta too large: {0}")]
    DeltaTooLarge(String),
    #[error("map is not an isometry: {0}")]
    NotIsometry(String),
    #[error("map is not bijective: {0}")]
    NotBijective(String),
    #[error("map is not injective: {0}")]
    NotInjective(String),
    #[error("covering violated: {0}")]
    CoveringViolation(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("bi-Lipschitz hypothesis violated: {0}")]
    BiLipschitzViolation(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("sequence is not proper: {0}")]
    NotProper(String),
    #[error("sequences are not close: {0}")]
    NotClose(String),
    #[error("isolated point in subshift: {0}")]
    IsolatedPoint(String),
    #[error("chart exhausted: {0}")]
    Exhausted(String),
    #[error("chart depth insufficient: {0}")]
    DepthInsufficient(String),
    #[error("no witness found: {0}")]
    NoWitnessFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
