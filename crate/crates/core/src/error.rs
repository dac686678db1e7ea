use alloc::boxed::Box;
use core::fmt;

use crate::dynamics::Trajectory;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numeric core can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value that must be finite (or otherwise in range) was not.
    InvalidValue { what: &'static str, value: f64 },
    /// A phase too close to ±π/2 to decode through `tan`.
    NearSingularPhase { radians: f64 },
    /// `|Σ w|` is too small relative to `Σ |w|` for a weighted average.
    /// `column` names the offending output column when there is one.
    DegenerateNormalization { column: Option<usize>, sum: f64, abs_sum: f64 },
    /// Mismatched lengths or shapes.
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    /// A precondition on a count or hyperparameter failed.
    InvalidArgument(&'static str),
    /// An RK4 run hit `max_steps` before the free phases stopped moving.
    NotSettled { residual: f64, steps: usize, trajectory: Box<Trajectory> },
    /// Coordinate descent hit `max_sweeps`; the last iterate is attached.
    NotConverged { sweeps: usize, max_change: f64, theta: alloc::vec::Vec<f64> },
    /// A regression feature column with `Σ x² = 0`.
    DegenerateFeature { column: usize },
    /// A weight or parameter left the finite range during training.
    NumericOverflow { context: &'static str, index: usize },
    /// A zero vector where a direction was required.
    ZeroVector { index: Option<usize> },
    /// Labels were required but the dataset has none.
    MissingLabels,
    /// A training error annotated with the sample (or wave/frame) that caused it.
    AtSample { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_sample(self, index: usize) -> Self {
        Error::AtSample { index, source: Box::new(self) }
    }

    /// Strips [`Error::AtSample`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtSample { source, .. } => source.root(),
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidValue { what, value } => write!(f, "invalid {what}: {value}"),
            Error::NearSingularPhase { radians } => {
                write!(f, "phase {radians} rad is too close to ±π/2 to decode")
            }
            Error::DegenerateNormalization { column: Some(c), sum, abs_sum } => {
                write!(f, "degenerate normalization in column {c}: Σw = {sum:e}, Σ|w| = {abs_sum:e}")
            }
            Error::DegenerateNormalization { column: None, sum, abs_sum } => {
                write!(f, "degenerate normalization: Σw = {sum:e}, Σ|w| = {abs_sum:e}")
            }
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "{what}: expected {expected}, found {found}")
            }
            Error::InvalidArgument(msg) => f.write_str(msg),
            Error::NotSettled { residual, steps, .. } => {
                write!(f, "not settled after {steps} steps (max |dθ/dt| = {residual:e})")
            }
            Error::NotConverged { sweeps, max_change, .. } => {
                write!(f, "coordinate descent not converged after {sweeps} sweeps (last max |Δθ| = {max_change:e})")
            }
            Error::DegenerateFeature { column } => {
                write!(f, "feature column {column} has zero energy (Σx² = 0)")
            }
            Error::NumericOverflow { context, index } => {
                write!(f, "numeric overflow in {context} (index {index})")
            }
            Error::ZeroVector { index: Some(i) } => write!(f, "zero vector at row {i}"),
            Error::ZeroVector { index: None } => f.write_str("zero vector"),
            Error::MissingLabels => f.write_str("dataset has no labels"),
            Error::AtSample { index, source } => write!(f, "sample {index}: {source}"),
        }
    }
}

impl core::error::Error for Error {}
