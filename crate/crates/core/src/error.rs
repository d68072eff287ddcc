use thiserror::Error;

use crate::expr::VarId;
use crate::logic::Literal;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared variable `{name}`")]
    UndeclaredVariable { line: usize, col: usize, name: String },
    #[error("{line}:{col}: non-linear term")]
    NonLinear { line: usize, col: usize },
    #[error("problem has no (minimize ...) or (maximize ...) command")]
    MissingObjective,
    #[error("problem has more than one objective")]
    MultipleObjectives,
    #[error("variable {0} is not assigned by the model")]
    UnassignedVariable(VarId),
    #[error("literal {0:?} is not an arithmetic literal")]
    NonTheoryLiteral(Literal),
    #[error("pop({requested}) exceeds push depth {depth}")]
    PopUnderflow { requested: usize, depth: usize },
    #[error("no optimum available: minimize has not produced one")]
    NoOptimum,
    #[error("truth assignment is not total over the formula atoms")]
    NotTotal,
    #[error("truth assignment does not satisfy every clause")]
    NotSatisfying,
    #[error("truth assignment is theory-inconsistent")]
    TheoryInconsistent,
    #[error("refusing to learn a blocking lemma from a truncated minimization")]
    LemmaRefused,
    #[error("instance too large for the brute-force oracle: {0}")]
    OracleTooLarge(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
