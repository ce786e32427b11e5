use thiserror::Error;

/// Errors raised by kernel construction, the solvers and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kernel is not square: {rows} rows, row {row} has {cols} entries")]
    NonSquare { rows: usize, row: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, not 1")]
    NonStochastic { row: usize, sum: f64 },

    #[error("kernel is reducible")]
    Reducible,

    #[error("kernel is periodic with period {period}; use the resolvent method")]
    Periodic { period: usize },

    #[error("subset is empty")]
    EmptySubset,

    #[error("the complement block I - Q is singular (subset unreachable from part of its complement)")]
    SingularComplementBlock,

    #[error("state {state} has zero stationary mass")]
    ZeroMassState { state: usize },

    #[error("observable is not centered: mean {mean}")]
    NotCentered { mean: f64 },

    #[error("observable is nonzero off the subset (state {state}, value {value})")]
    SupportViolation { state: usize, value: f64 },

    #[error("input is not a solution of the induced equation (residual {residual})")]
    NotInducedSolution { residual: f64 },

    #[error("log-weight must be nonpositive, found {value} at state {state}")]
    WeightPositive { state: usize, value: f64 },

    #[error("subset must contain exactly one state, has {size}")]
    SubsetNotSingleton { size: usize },

    #[error("H must have unit integral, has {mass}")]
    HNotUnitMass { mass: f64 },

    #[error("denominator observable has zero integral")]
    ZeroDenominatorMass,

    #[error("lattice walk has nonzero drift {drift:?}")]
    NonCentered { drift: Vec<f64> },

    #[error("target site must differ from the origin")]
    ZeroTarget,

    #[error("window too small: {leak:e} mass left the window")]
    WindowTooSmall { leak: f64 },

    #[error("radius too small: sensitivity {sensitivity:e} exceeds tolerance {tolerance:e}")]
    RadiusTooSmall { sensitivity: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown state label {0:?}")]
    UnknownState(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("model file: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
