use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the ownership diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has no positive mass")]
    AllZeroMatrix,
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty matrix: at least one investor and one stock are required")]
    EmptyMatrix,
    #[error("entries sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),
    #[error("inactive support: {0}")]
    InactiveSupport(String),
    #[error("support mismatch: mass at index {0} where the reference vanishes")]
    SupportMismatch(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("index {index} out of range for {len} {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("investor {0} cannot be merged with itself")]
    SameInvestor(usize),
    #[error("matrix is not feasible for the given marginals")]
    NotFeasible,
    #[error("fixed-marginal range is degenerate (M_max - M_min = {0:e})")]
    DegenerateRange(f64),
    #[error("solver did not converge after {iterations} sweeps (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("return vector is not capitalization-centered (s'R = {0:e})")]
    NotCentered(f64),
    #[error("removing stock {0} would remove all remaining mass")]
    RemovingEverything(usize),
    #[error("Renyi order {0} is too close to 1")]
    AlphaNearOne(f64),
    #[error("aggregate net exposure {0:e} is zero; no rank-one net benchmark exists")]
    MarketNeutral(f64),
    #[error("gross marginal vanishes: {0}")]
    InactiveGrossSupport(String),
    #[error("cell ({0}, {1}) is both long and short")]
    LongAndShort(usize, usize),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceFailure { .. } | Error::Inconsistent(_)
        )
    }
}
