use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::Dist;
use crate::double::DoubleValidationReport;
use crate::dsl::{EvalError, ParseError};

/// A matrix row (or flat buffer) with the wrong length.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("matrix is not square: row {row} has {found} entries, expected {expected}")]
pub struct ShapeError {
    pub row: usize,
    pub expected: usize,
    pub found: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("invalid input at ({i}, {j}): {reason}")]
    InvalidInput { i: usize, j: usize, reason: &'static str },
    #[error("entry {value} at ({i}, {j}) exceeds the 2^40 quanta cap")]
    TooLarge { i: usize, j: usize, value: u64 },
    #[error("matrix is not a metric ({violations} violations)")]
    NotAMetric { violations: usize },
    #[error("labels: expected {expected} rows, found {found}")]
    Labels { expected: usize, found: usize },
    #[error("scale denominator must be positive")]
    ZeroScale,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("unknown space kind `{0}`")]
    UnknownKind(String),
    #[error("level size must be at least 1")]
    ZeroSize,
    #[error("bad parameters for {kind}: {reason}")]
    BadParams { kind: &'static str, reason: &'static str },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DoubleError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("cross block is {found}x{found}, base has {expected} points")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid double metric: {0}")]
    Invalid(Box<DoubleValidationReport>),
    #[error("catalog parameter: {0}")]
    BadParams(&'static str),
    #[error("DSL cross expression needs point labels on the base space")]
    MissingLabels,
    #[error("DSL expression uses coordinate {index} but labels have dimension {dim}")]
    Dimension { index: usize, dim: usize },
    #[error("DSL evaluation at ({i}, {j}): {source}")]
    Eval { i: usize, j: usize, source: EvalError },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComposeError {
    #[error("operands do not share the same base metric")]
    IncompatibleOperands,
    #[error("composition chain needs at least {needed} elements, got {found}")]
    ChainTooShort { needed: usize, found: usize },
    #[error("composition produced an invalid double (kernel defect): {0}")]
    InvalidResult(Box<DoubleValidationReport>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("families live on different ladders")]
    LadderMismatch,
    #[error("ladder has {levels} levels, stability window {window} needs at least {}", window + 1)]
    LadderTooShort { levels: usize, window: usize },
    #[error("level {level} out of range (ladder has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("invalid ladder: {0}")]
    BadLadder(&'static str),
    #[error("family level {level}: {source}")]
    Level { level: usize, source: DoubleError },
    #[error("family is not restriction coherent between levels {lower} and {upper}")]
    Incoherent { lower: usize, upper: usize },
    #[error("stability window must be at least 1")]
    ZeroWindow,
    #[error("control fails: band {band} holds pairs with the first function below {bound} on every level")]
    ControlFails { band: u64, bound: Dist },
    #[error("control could not be decided: {0}")]
    Undecided(String),
    #[error("band {band} contains a pair with the first function equal to 0")]
    NoRoom { band: u64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FundamentalError {
    #[error("the first family controls the second; no divergent witness exists")]
    ControlHolds,
    #[error("inconclusive at stage {stage}: {reason}; try levels {suggested_levels:?}")]
    Inconclusive { stage: &'static str, reason: String, suggested_levels: Vec<usize> },
    #[error("witness {side} sequence stays bounded across the window, contradicting divergence of the second family")]
    BoundedWitness { side: &'static str },
    #[error("only {kept} witness points survive sparsification, {needed} needed; extend the ladder")]
    TooFewSurvivors { kept: usize, needed: usize },
    #[error("families are coarsely equivalent; nothing to separate")]
    Equivalent,
    #[error("separating metric failed validation (witness invariants violated): {0}")]
    Internal(DoubleError),
    #[error(transparent)]
    Order(#[from] OrderError),
}
