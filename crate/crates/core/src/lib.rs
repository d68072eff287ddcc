//! Optimization modulo linear arithmetic with partial truth-assignment reduction.

pub mod bench;
pub mod error;
pub mod expr;
pub mod frontend;
pub mod lia;
pub mod logic;
pub mod lra;
pub mod num;
pub mod omt;
pub mod reduce;
pub mod sat;

use num_rational::BigRational;

pub type Rational = BigRational;
pub type DeltaRational = num::Delta<Rational>;
pub type LinearTerm = expr::LinearExpr<Rational>;
pub type ArithModel = expr::Model<Rational>;

pub use error::{Error, Result};
pub use frontend::{parse, parse_file, Problem, VarType};
pub use expr::{LinearExpr, Model, VarId};
pub use logic::{Atom, AtomId, AtomTable, Clause, CnfFormula, Literal, Rel, TruthAssignment};
pub use lra::{LraSolver, OptResult, OptStatus};
pub use num::{Delta, Scalar};
pub use sat::{SatResult, SatSolver};
