//! Shrinking a total satisfying assignment to a partial one.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::logic::{AtomTable, CnfFormula, Literal, TruthAssignment};
use crate::lra::{LraSolver, OptResult};
use crate::sat::{satisfies_all_clauses, SatisfactionIndex};
use crate::{DeltaRational, LinearTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ReductionStrategy {
    #[default]
    None,
    Basic,
    Guided,
}

impl fmt::Display for ReductionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionStrategy::None => "none",
            ReductionStrategy::Basic => "basic",
            ReductionStrategy::Guided => "guided",
        })
    }
}

impl FromStr for ReductionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ReductionStrategy::None),
            "basic" => Ok(ReductionStrategy::Basic),
            "guided" => Ok(ReductionStrategy::Guided),
            other => Err(Error::Config(format!("unknown reduction strategy `{other}`"))),
        }
    }
}

/// Which literals basic reduction may drop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum LiteralFilter {
    #[default]
    TheoryOnly,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    pub reduced: TruthAssignment,
    pub dropped: Vec<Literal>,
    pub minimize_calls: usize,
    pub final_limiting: Vec<Literal>,
    /// Values of the approximate minimizations, in call order.
    pub approx_values: Vec<Option<DeltaRational>>,
}

impl ReductionReport {
    fn unchanged(eta: TruthAssignment) -> Self {
        ReductionReport {
            reduced: eta,
            dropped: Vec::new(),
            minimize_calls: 0,
            final_limiting: Vec::new(),
            approx_values: Vec::new(),
        }
    }
}

fn validate(phi: &CnfFormula, eta: &TruthAssignment) -> Result<TruthAssignment> {
    let eta = eta.restricted(phi.num_atoms());
    if !eta.is_total_over(phi.num_atoms()) {
        return Err(Error::NotTotal);
    }
    if !satisfies_all_clauses(&phi.clauses, &eta) {
        return Err(Error::NotSatisfying);
    }
    Ok(eta)
}

/// The theory literals of `mu`, in atom order.
pub fn theory_literals(mu: &TruthAssignment, atoms: &AtomTable) -> Vec<Literal> {
    mu.literals().filter(|l| atoms.is_theory(l.atom)).collect()
}

/// Identity reduction, validated like the others.
pub fn reduce_none(phi: &CnfFormula, eta: &TruthAssignment) -> Result<ReductionReport> {
    Ok(ReductionReport::unchanged(validate(phi, eta)?))
}

/// Drop literals one at a time in atom order while every clause stays
/// satisfied.
pub fn reduce_basic(phi: &CnfFormula, eta: &TruthAssignment, filter: LiteralFilter) -> Result<ReductionReport> {
    let eta = validate(phi, eta)?;
    let mut idx = SatisfactionIndex::new(phi, &eta);
    let mut dropped = Vec::new();
    for lit in eta.literals() {
        if filter == LiteralFilter::TheoryOnly && !phi.atoms.is_theory(lit.atom) {
            continue;
        }
        if idx.can_drop(lit) {
            idx.drop(lit);
            dropped.push(lit);
        }
    }
    Ok(ReductionReport { dropped, ..ReductionReport::unchanged(idx.into_assignment()) })
}

/// Alternate approximate minimization with dropping one proposed limiting
/// literal, until no proposal can be dropped.
///
/// `lra` must not hold assertions that should outlive the call; every
/// minimization runs in its own frame.
pub fn reduce_guided(
    phi: &CnfFormula,
    eta: &TruthAssignment,
    objective: &LinearTerm,
    lra: &mut LraSolver,
) -> Result<ReductionReport> {
    let eta = validate(phi, eta)?;
    let mut idx = SatisfactionIndex::new(phi, &eta);
    let mut report = ReductionReport::unchanged(eta);
    let approx = |lra: &mut LraSolver, mu: &TruthAssignment, report: &mut ReductionReport| -> Result<OptResult> {
        let r = lra.minimize_scoped(&theory_literals(mu, &phi.atoms), &phi.atoms, objective)?;
        report.minimize_calls += 1;
        report.approx_values.push(r.value.clone());
        Ok(r)
    };
    let mut last = approx(lra, idx.assignment(), &mut report)?;
    if last.status == crate::lra::OptStatus::Infeasible {
        return Err(Error::TheoryInconsistent);
    }
    while last.is_optimum() {
        let Some(lit) = lra.propose_literal_to_drop()? else { break };
        if phi.atoms.is_theory(lit.atom) && idx.can_drop(lit) {
            idx.drop(lit);
            report.dropped.push(lit);
            last = approx(lra, idx.assignment(), &mut report)?;
        }
    }
    if last.is_optimum() {
        report.final_limiting = last.limiting;
    }
    report.reduced = idx.into_assignment();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::logic::AtomId;
    use crate::Rational;

    const TWO_CLAUSES: &str = "
        (declare-const x Real)(declare-const y Real)
        (assert (or (<= (- (* 2 x) (* 3 y)) 6) (<= x 4)))
        (assert (or (<= y 2) (<= y (+ (* (- 3) x) 9)) (< x (- 2))))
        (minimize (* (- 2) x))";

    fn mu_eq2() -> TruthAssignment {
        TruthAssignment::from_literals([
            Literal::pos(AtomId(0)),
            Literal::pos(AtomId(1)),
            Literal::pos(AtomId(2)),
            Literal::pos(AtomId(3)),
            Literal::neg(AtomId(4)),
        ])
    }

    fn v(n: i64) -> Option<DeltaRational> {
        Some(DeltaRational::from_real(Rational::from_integer(n.into())))
    }

    #[test]
    fn basic_on_example() {
        let p = parse(TWO_CLAUSES).unwrap();
        let r = reduce_basic(&p.cnf, &mu_eq2(), LiteralFilter::TheoryOnly).unwrap();
        assert_eq!(r.reduced, TruthAssignment::from_literals([Literal::pos(AtomId(1)), Literal::pos(AtomId(3))]));
        assert_eq!(r.dropped, vec![Literal::pos(AtomId(0)), Literal::pos(AtomId(2)), Literal::neg(AtomId(4))]);
    }

    #[test]
    fn guided_on_example() {
        let p = parse(TWO_CLAUSES).unwrap();
        let mut lra = LraSolver::new();
        let r = reduce_guided(&p.cnf, &mu_eq2(), &p.objective, &mut lra).unwrap();
        assert_eq!(r.approx_values, vec![v(-6), v(-8), v(-12)]);
        assert_eq!(r.dropped, vec![Literal::pos(AtomId(3)), Literal::pos(AtomId(1))]);
        assert_eq!(r.minimize_calls, 1 + r.dropped.len());
        assert_eq!(
            r.reduced,
            TruthAssignment::from_literals([Literal::pos(AtomId(0)), Literal::pos(AtomId(2)), Literal::neg(AtomId(4))])
        );
        let mut lim = r.final_limiting.clone();
        lim.sort();
        assert_eq!(lim, vec![Literal::pos(AtomId(0)), Literal::pos(AtomId(2))]);
        assert_eq!(lra.depth(), 0);
    }

    #[test]
    fn unit_clauses_are_mandatory() {
        let p = parse("(declare-const x Real)(assert (<= x 1))(assert (>= x 0))(minimize x)").unwrap();
        let eta = TruthAssignment::from_literals([Literal::pos(AtomId(0)), Literal::pos(AtomId(1))]);
        for filter in [LiteralFilter::TheoryOnly, LiteralFilter::All] {
            assert_eq!(reduce_basic(&p.cnf, &eta, filter).unwrap().reduced, eta);
        }
    }

    #[test]
    fn earlier_literal_of_two_is_dropped() {
        let p = parse("(declare-const x Real)(assert (or (<= x 1) (>= x 0)))(minimize x)").unwrap();
        let eta = TruthAssignment::from_literals([Literal::pos(AtomId(0)), Literal::pos(AtomId(1))]);
        let r = reduce_basic(&p.cnf, &eta, LiteralFilter::TheoryOnly).unwrap();
        assert_eq!(r.dropped, vec![Literal::pos(AtomId(0))]);
    }

    #[test]
    fn booleans_stay_unless_unrestricted() {
        let p = parse("(declare-const x Real)(declare-const b Bool)(assert (or b (<= x 1)))(minimize x)").unwrap();
        let eta = TruthAssignment::from_literals([Literal::pos(AtomId(0)), Literal::pos(AtomId(1))]);
        let r = reduce_basic(&p.cnf, &eta, LiteralFilter::TheoryOnly).unwrap();
        assert_eq!(r.dropped, vec![Literal::pos(AtomId(1))]);
        let r = reduce_basic(&p.cnf, &eta, LiteralFilter::All).unwrap();
        assert_eq!(r.dropped, vec![Literal::pos(AtomId(0))]);
    }

    #[test]
    fn unbounded_guided_keeps_eta() {
        let p = parse("(declare-const x Real)(assert (or (<= x 1) (<= x 2)))(minimize x)").unwrap();
        let eta = TruthAssignment::from_literals([Literal::pos(AtomId(0)), Literal::pos(AtomId(1))]);
        let r = reduce_guided(&p.cnf, &eta, &p.objective, &mut LraSolver::new()).unwrap();
        assert_eq!(r.reduced, eta);
        assert_eq!(r.minimize_calls, 1);
    }

    #[test]
    fn undroppable_proposal_is_skipped() {
        // x ≥ 1 is alone in a clause; x ≥ 0 is the next proposal and can go
        let p = parse(
            "(declare-const x Real)(declare-const y Real)
             (assert (>= x 1))
             (assert (or (>= y 0) (>= y 5)))
             (assert (or (>= (+ x y) 0) (<= y 9)))
             (minimize (+ x y))",
        )
        .unwrap();
        let eta = TruthAssignment::from_literals((0..5).map(|i| Literal::pos(AtomId(i))));
        let r = reduce_guided(&p.cnf, &eta, &p.objective, &mut LraSolver::new()).unwrap();
        assert!(r.reduced.holds(Literal::pos(AtomId(0))));
        assert!(!r.dropped.is_empty());
        assert!(satisfies_all_clauses(&p.cnf.clauses, &r.reduced));
        assert_eq!(r.minimize_calls, 1 + r.dropped.len());
    }

    #[test]
    fn invalid_inputs() {
        let p = parse(TWO_CLAUSES).unwrap();
        let partial = TruthAssignment::from_literals([Literal::pos(AtomId(0))]);
        assert!(matches!(reduce_basic(&p.cnf, &partial, LiteralFilter::TheoryOnly), Err(Error::NotTotal)));
        let bad = TruthAssignment::from_literals((0..5).map(|i| Literal::neg(AtomId(i))));
        assert!(matches!(reduce_basic(&p.cnf, &bad, LiteralFilter::TheoryOnly), Err(Error::NotSatisfying)));
        let mut lra = LraSolver::new();
        let clash = parse("(declare-const x Real)(assert (<= x 0))(assert (>= x 1))(minimize x)").unwrap();
        let eta = TruthAssignment::from_literals([Literal::pos(AtomId(0)), Literal::pos(AtomId(1))]);
        assert!(matches!(reduce_guided(&clash.cnf, &eta, &clash.objective, &mut lra), Err(Error::TheoryInconsistent)));
    }
}
