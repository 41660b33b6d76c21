use std::fmt;

use thiserror::Error;

/// One of the two halves of the splitting `E = V+ ⊕ V-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    /// `+1` for `V+`, `-1` for `V-`.
    pub fn sign(self) -> i64 {
        match self {
            Side::Plus => 1,
            Side::Minus => -1,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Plus => f.write_str("+"),
            Side::Minus => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("degree cap exceeded: intermediate degree {degree} > cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error("singular Gram matrix on V{0}")]
    SingularGram(Side),
    #[error("connection is not metric: {0}")]
    NonMetricConnection(String),
    #[error("a generalized metric is required for this computation")]
    MissingMetric,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("V{0} has rank 1; no metric connection with prescribed divergence and pure-type torsion is available")]
    RankOneSide(Side),
    #[error("divergence defect is not tensorial: {0}")]
    NonTensorialDefect(String),
    #[error("unknown catalog instance `{0}`")]
    UnknownInstance(String),
    #[error("instance is not homogeneous: base has {0} variable(s)")]
    NotHomogeneous(usize),
    #[error("Ricci symmetry lost at t = {t}: residual {residual:e}")]
    SymmetryLost { t: f64, residual: f64 },
    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
