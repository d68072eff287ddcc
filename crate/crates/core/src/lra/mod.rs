//! Incremental LRA solver and minimizer over asserted literals.

pub mod simplex;

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed};

pub use simplex::{Minimum, Simplex};

use crate::error::{Error, Result};
use crate::expr::VarId;
use crate::logic::{Atom, AtomTable, LinearAtom, Literal, Rel};
use crate::{ArithModel, DeltaRational, LinearTerm, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssertOutcome {
    Ok,
    Conflict(Vec<Literal>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Sat,
    Unsat(Vec<Literal>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptStatus {
    Optimum,
    Unbounded,
    Infeasible,
    /// Branch and bound gave up at its node limit.
    ResourceOut,
}

/// Outcome of a minimization over a conjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptResult {
    pub status: OptStatus,
    pub model: Option<ArithModel>,
    pub value: Option<DeltaRational>,
    /// Literals whose bounds carry the optimality certificate, strongest
    /// multiplier first.
    pub limiting: Vec<Literal>,
    pub core: Vec<Literal>,
    /// Set by truncated branch and bound.
    pub possibly_suboptimal: bool,
    /// A set of literals that, together with `cost < value`, is inconsistent.
    /// Only present when such a set is known to be sound.
    pub explanation: Option<Vec<Literal>>,
}

impl OptResult {
    pub fn unbounded() -> Self {
        OptResult {
            status: OptStatus::Unbounded,
            model: None,
            value: None,
            limiting: Vec::new(),
            core: Vec::new(),
            possibly_suboptimal: false,
            explanation: None,
        }
    }

    pub fn infeasible(core: Vec<Literal>) -> Self {
        OptResult { status: OptStatus::Infeasible, core, ..Self::unbounded() }
    }

    pub fn is_optimum(&self) -> bool {
        self.status == OptStatus::Optimum
    }
}

#[derive(Clone, Debug)]
struct LastOptimum {
    limiting: Vec<Literal>,
    cursor: usize,
}

/// Simplex-backed theory solver. Atoms are registered lazily: the first
/// literal over a new coefficient vector adds one tableau row.
#[derive(Clone, Debug, Default)]
pub struct LraSolver {
    simplex: Simplex<Rational, Literal>,
    columns: BTreeMap<VarId, usize>,
    slacks: HashMap<LinearTerm, usize>,
    asserted: Vec<Literal>,
    frames: Vec<usize>,
    last: Option<LastOptimum>,
}

/// Where a linear constraint lands in the tableau: `coeff · column rel rhs`.
struct Placement {
    column: usize,
    coeff: Rational,
    rhs: Rational,
}

impl LraSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_var(&mut self, v: VarId) -> usize {
        if let Some(c) = self.columns.get(&v) {
            return *c;
        }
        let c = self.simplex.new_var();
        self.columns.insert(v, c);
        c
    }

    fn place(&mut self, term: &LinearTerm) -> Placement {
        let rhs = -term.constant_part().clone();
        let coeffs = term.coeffs();
        if coeffs.len() == 1 {
            let (v, c) = coeffs.iter().next().unwrap();
            return Placement { column: self.register_var(*v), coeff: c.clone(), rhs };
        }
        // share one row between t and -t
        let sign = if term.leading_coeff().unwrap().is_negative() { -Rational::one() } else { Rational::one() };
        let key = term.homogeneous().scaled(&sign);
        let column = match self.slacks.get(&key) {
            Some(c) => *c,
            None => {
                let entries: Vec<(usize, Rational)> =
                    key.coeffs().iter().map(|(v, c)| (*v, c.clone())).collect::<Vec<_>>()
                        .into_iter()
                        .map(|(v, c)| (self.register_var(v), c))
                        .collect();
                let c = self.simplex.add_row(&entries);
                self.slacks.insert(key, c);
                c
            }
        };
        Placement { column, coeff: sign, rhs }
    }

    fn assert_constraint(&mut self, c: &LinearAtom, tag: Option<Literal>) -> std::result::Result<(), Vec<Literal>> {
        if c.term.is_constant() {
            return if c.holds(c.term.constant_part()) { Ok(()) } else { Err(tag.into_iter().collect()) };
        }
        let Placement { column, coeff, rhs } = self.place(&c.term);
        let bound = rhs / &coeff;
        let upper = coeff.is_positive();
        match c.rel {
            Rel::Eq => {
                let b = DeltaRational::from_real(bound);
                self.simplex.assert_upper(column, b.clone(), tag)?;
                self.simplex.assert_lower(column, b, tag)
            }
            Rel::Le if upper => self.simplex.assert_upper(column, DeltaRational::from_real(bound), tag),
            Rel::Le => self.simplex.assert_lower(column, DeltaRational::from_real(bound), tag),
            Rel::Lt if upper => {
                self.simplex.assert_upper(column, DeltaRational::new(bound, -Rational::one()), tag)
            }
            Rel::Lt => self.simplex.assert_lower(column, DeltaRational::new(bound, Rational::one()), tag),
        }
    }

    /// Assert a theory literal. Crossing bounds are reported immediately.
    pub fn assert_literal(&mut self, lit: Literal, atom: &Atom) -> Result<AssertOutcome> {
        let linear = atom.as_linear().ok_or(Error::NonTheoryLiteral(lit))?;
        let constraint = if lit.polarity {
            linear.clone()
        } else {
            linear.negated().ok_or(Error::NonTheoryLiteral(lit))?
        };
        self.asserted.push(lit);
        Ok(match self.assert_constraint(&constraint, Some(lit)) {
            Ok(()) => AssertOutcome::Ok,
            Err(core) => AssertOutcome::Conflict(core),
        })
    }

    /// Assert every literal, stopping at the first conflict.
    pub fn assert_all(&mut self, lits: &[Literal], atoms: &AtomTable) -> Result<AssertOutcome> {
        for &l in lits {
            if let AssertOutcome::Conflict(core) = self.assert_literal(l, atoms.get(l.atom))? {
                return Ok(AssertOutcome::Conflict(core));
            }
        }
        Ok(AssertOutcome::Ok)
    }

    /// Untagged bound `v ≤ value` (or `≥`), used for branching cuts.
    pub fn assert_var_bound(&mut self, v: VarId, upper: bool, value: Rational) -> AssertOutcome {
        let column = self.register_var(v);
        let b = DeltaRational::from_real(value);
        let r = if upper { self.simplex.assert_upper(column, b, None) } else { self.simplex.assert_lower(column, b, None) };
        match r {
            Ok(()) => AssertOutcome::Ok,
            Err(core) => AssertOutcome::Conflict(core),
        }
    }

    pub fn check(&mut self) -> CheckOutcome {
        match self.simplex.check() {
            Ok(()) => CheckOutcome::Sat,
            Err(core) => CheckOutcome::Unsat(core),
        }
    }

    pub fn push(&mut self) {
        self.simplex.push();
        self.frames.push(self.asserted.len());
    }

    pub fn pop(&mut self, n: usize) -> Result<()> {
        let depth = self.frames.len();
        if n > depth {
            return Err(Error::PopUnderflow { requested: n, depth });
        }
        self.simplex.pop(n).expect("frame stacks in sync");
        let mark = self.frames[depth - n];
        self.frames.truncate(depth - n);
        self.asserted.truncate(mark);
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn asserted(&self) -> &[Literal] {
        &self.asserted
    }

    pub fn pivot_count(&self) -> u64 {
        self.simplex.pivot_count()
    }

    /// Current δ-valued assignment of the structural variables.
    pub fn delta_values(&self) -> BTreeMap<VarId, DeltaRational> {
        self.columns.iter().map(|(v, c)| (*v, self.simplex.value(*c).clone())).collect()
    }

    /// Current assignment with δ replaced by a safe rational.
    pub fn concrete_model(&self) -> ArithModel {
        let delta = self.simplex.concrete_delta();
        self.columns.iter().map(|(v, c)| (*v, self.simplex.value(*c).at(&delta))).collect()
    }

    /// Minimize `objective` over the asserted literals.
    pub fn minimize(&mut self, objective: &LinearTerm) -> OptResult {
        let obj: Vec<(usize, Rational)> = objective
            .coeffs()
            .iter()
            .map(|(v, c)| (*v, c.clone()))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(v, c)| (self.register_var(v), c))
            .collect();
        self.last = None;
        match self.simplex.minimize(&obj) {
            Minimum::Infeasible(core) => OptResult::infeasible(core),
            Minimum::Unbounded => OptResult::unbounded(),
            Minimum::Optimum { value, mut duals } => {
                let order: HashMap<Literal, usize> =
                    self.asserted.iter().enumerate().rev().map(|(i, l)| (*l, i)).collect();
                duals.sort_by(|(la, ma), (lb, mb)| {
                    mb.cmp(ma).then_with(|| order.get(la).cmp(&order.get(lb)))
                });
                let limiting: Vec<Literal> = duals.into_iter().map(|(l, _)| l).collect();
                self.last = Some(LastOptimum { limiting: limiting.clone(), cursor: 0 });
                let value = value.add(&DeltaRational::from_real(objective.constant_part().clone()));
                OptResult {
                    status: OptStatus::Optimum,
                    model: Some(self.concrete_model()),
                    value: Some(value),
                    limiting: limiting.clone(),
                    core: Vec::new(),
                    possibly_suboptimal: false,
                    explanation: Some(limiting),
                }
            }
        }
    }

    /// Next limiting literal of the last optimum, strongest first.
    pub fn propose_literal_to_drop(&mut self) -> Result<Option<Literal>> {
        let last = self.last.as_mut().ok_or(Error::NoOptimum)?;
        let next = last.limiting.get(last.cursor).copied();
        if next.is_some() {
            last.cursor += 1;
        }
        Ok(next)
    }

    /// Assert `lits` in a fresh frame, minimize, and pop again.
    pub fn minimize_scoped(&mut self, lits: &[Literal], atoms: &AtomTable, objective: &LinearTerm) -> Result<OptResult> {
        self.push();
        let result = match self.assert_all(lits, atoms)? {
            AssertOutcome::Conflict(core) => {
                self.last = None;
                OptResult::infeasible(core)
            }
            AssertOutcome::Ok => self.minimize(objective),
        };
        self.pop(1)?;
        Ok(result)
    }

    /// Check `lits` in a fresh frame.
    pub fn check_scoped(&mut self, lits: &[Literal], atoms: &AtomTable) -> Result<CheckOutcome> {
        self.push();
        let result = match self.assert_all(lits, atoms)? {
            AssertOutcome::Conflict(core) => CheckOutcome::Unsat(core),
            AssertOutcome::Ok => self.check(),
        };
        self.pop(1)?;
        Ok(result)
    }
}
