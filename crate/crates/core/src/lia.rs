//! Branch and bound over the LRA minimizer for mixed integer/rational
//! conjunctions.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_traits::One;

use crate::error::Result;
use crate::expr::VarId;
use crate::logic::{AtomTable, Literal};
use crate::lra::{AssertOutcome, LraSolver, OptResult, OptStatus};
use crate::{DeltaRational, LinearTerm, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BnbMode {
    /// Search until the integer optimum is proved.
    Full,
    /// Stop at the first integer-feasible relaxation.
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchRule {
    MostFractional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BnbConfig {
    pub mode: BnbMode,
    pub node_limit: usize,
    pub branch_rule: BranchRule,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig { mode: BnbMode::Truncated, node_limit: 100_000, branch_rule: BranchRule::MostFractional }
    }
}

impl BnbConfig {
    pub fn full() -> Self {
        BnbConfig { mode: BnbMode::Full, ..Self::default() }
    }

    pub fn truncated() -> Self {
        Self::default()
    }
}

/// A branching cut `v ≤ k` (`upper`) or `v ≥ k`.
type Cut = (VarId, bool, Rational);

struct Node {
    cuts: Vec<Cut>,
    result: OptResult,
    ints: BTreeMap<VarId, DeltaRational>,
}

enum Eval {
    Infeasible(Vec<Literal>),
    Unbounded,
    Integral(Node),
    Fractional(Node),
}

struct Search<'a> {
    lra: &'a mut LraSolver,
    objective: &'a LinearTerm,
    int_vars: &'a BTreeSet<VarId>,
    nodes: usize,
}

impl Search<'_> {
    fn evaluate(&mut self, cuts: Vec<Cut>) -> Result<Eval> {
        self.nodes += 1;
        self.lra.push();
        for (v, upper, k) in &cuts {
            if let AssertOutcome::Conflict(core) = self.lra.assert_var_bound(*v, *upper, k.clone()) {
                self.lra.pop(1)?;
                return Ok(Eval::Infeasible(core));
            }
        }
        let result = self.lra.minimize(self.objective);
        let values = self.lra.delta_values();
        self.lra.pop(1)?;
        Ok(match result.status {
            OptStatus::Infeasible => Eval::Infeasible(result.core),
            OptStatus::Unbounded => Eval::Unbounded,
            _ => {
                let ints: BTreeMap<VarId, DeltaRational> =
                    values.into_iter().filter(|(v, _)| self.int_vars.contains(v)).collect();
                let integral = ints.values().all(|x| x.is_integer());
                let node = Node { cuts, result, ints };
                if integral { Eval::Integral(node) } else { Eval::Fractional(node) }
            }
        })
    }
}

fn most_fractional(ints: &BTreeMap<VarId, DeltaRational>) -> Option<(VarId, Rational)> {
    let one = DeltaRational::from_real(Rational::one());
    let mut best: Option<(DeltaRational, VarId, Rational)> = None;
    for (v, x) in ints {
        if x.is_integer() {
            continue;
        }
        let floor = x.floor();
        let frac = x.sub(&DeltaRational::from_real(floor.clone()));
        let up = one.sub(&frac);
        let dist = if frac < up { frac } else { up };
        if best.as_ref().is_none_or(|(d, _, _)| dist > *d) {
            best = Some((dist, *v, floor));
        }
    }
    best.map(|(_, v, f)| (v, f))
}

fn extend(set: &mut Vec<Literal>, lits: &[Literal]) {
    for l in lits {
        if !set.contains(l) {
            set.push(*l);
        }
    }
}

/// Minimize `objective` over `mu` with the variables in `int_vars` integral.
///
/// In full mode an optimum carries `explanation`: literals of `mu` that,
/// with integrality and `objective < value`, are inconsistent. Truncated
/// results are flagged `possibly_suboptimal` and carry no explanation.
pub fn minimize_mixed(
    lra: &mut LraSolver,
    mu: &[Literal],
    atoms: &AtomTable,
    objective: &LinearTerm,
    int_vars: &BTreeSet<VarId>,
    cfg: &BnbConfig,
) -> Result<OptResult> {
    lra.push();
    let result = match lra.assert_all(mu, atoms)? {
        AssertOutcome::Conflict(core) => Ok(OptResult::infeasible(core)),
        AssertOutcome::Ok => branch_and_bound(lra, objective, int_vars, cfg),
    };
    lra.pop(1)?;
    result
}

fn branch_and_bound(
    lra: &mut LraSolver,
    objective: &LinearTerm,
    int_vars: &BTreeSet<VarId>,
    cfg: &BnbConfig,
) -> Result<OptResult> {
    let mut search = Search { lra, objective, int_vars, nodes: 0 };
    let mut explanation: Vec<Literal> = Vec::new();
    let mut incumbent: Option<Node> = None;
    let mut open: BinaryHeap<Reverse<(DeltaRational, usize)>> = BinaryHeap::new();
    let mut pending: BTreeMap<usize, Node> = BTreeMap::new();
    let mut seq = 0usize;

    let mut queue = vec![Vec::new()];
    loop {
        for cuts in queue.drain(..) {
            if search.nodes >= cfg.node_limit {
                return Ok(resource_out(incumbent));
            }
            match search.evaluate(cuts)? {
                Eval::Infeasible(core) => extend(&mut explanation, &core),
                Eval::Unbounded => return Ok(OptResult::unbounded()),
                Eval::Integral(node) => {
                    if cfg.mode == BnbMode::Truncated {
                        let mut r = node.result;
                        r.possibly_suboptimal = true;
                        r.explanation = None;
                        return Ok(r);
                    }
                    extend(&mut explanation, &node.result.limiting);
                    let better = incumbent.as_ref().is_none_or(|inc| node.result.value < inc.result.value);
                    if better {
                        incumbent = Some(node);
                    }
                }
                Eval::Fractional(node) => {
                    let value = node.result.value.clone().expect("optimum has a value");
                    open.push(Reverse((value, seq)));
                    pending.insert(seq, node);
                    seq += 1;
                }
            }
        }
        let Some(Reverse((value, id))) = open.pop() else { break };
        let node = pending.remove(&id).expect("heap entries are pending");
        if let Some(inc) = &incumbent {
            if &value >= inc.result.value.as_ref().unwrap() {
                extend(&mut explanation, &node.result.limiting);
                for (_, rest) in std::mem::take(&mut pending) {
                    extend(&mut explanation, &rest.result.limiting);
                }
                break;
            }
        }
        let (v, floor) = most_fractional(&node.ints).expect("fractional node has a fractional variable");
        let mut down = node.cuts.clone();
        down.push((v, true, floor.clone()));
        let mut up = node.cuts;
        up.push((v, false, floor + Rational::one()));
        queue.push(down);
        queue.push(up);
    }

    Ok(match incumbent {
        Some(node) => {
            let mut r = node.result;
            r.explanation = Some(explanation);
            r
        }
        None => OptResult::infeasible(explanation),
    })
}

fn resource_out(incumbent: Option<Node>) -> OptResult {
    let mut r = match incumbent {
        Some(node) => node.result,
        None => OptResult::unbounded(),
    };
    r.status = OptStatus::ResourceOut;
    r.possibly_suboptimal = true;
    r.explanation = None;
    r
}

/// The LRA relaxation of [`minimize_mixed`]: integrality is ignored.
pub fn minimize_relaxation(
    lra: &mut LraSolver,
    mu: &[Literal],
    atoms: &AtomTable,
    objective: &LinearTerm,
) -> Result<OptResult> {
    lra.minimize_scoped(mu, atoms, objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::logic::eval_literal;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn setup(text: &str) -> (crate::Problem, Vec<Literal>) {
        let p = parse(text).unwrap();
        let mu = p.cnf.clauses.iter().map(|c| c[0]).collect();
        (p, mu)
    }

    fn run(text: &str, cfg: BnbConfig) -> (crate::Problem, Vec<Literal>, OptResult) {
        let (p, mu) = setup(text);
        let mut lra = LraSolver::new();
        let r = minimize_mixed(&mut lra, &mu, &p.cnf.atoms, &p.objective, &p.integer_vars(), &cfg).unwrap();
        assert_eq!(lra.depth(), 0);
        (p, mu, r)
    }

    const FLOOR: &str = "(declare-const x Int)(assert (>= x 0))(assert (<= x (/ 5 2)))(minimize (- x))";
    const KNAP: &str = "(declare-const x Int)(declare-const y Int)
        (assert (>= (+ (* 2 x) (* 3 y)) 7))(assert (>= x 0))(assert (>= y 0))(minimize (+ x y))";

    #[test]
    fn floor_of_relaxation() {
        let (p, _, r) = run(FLOOR, BnbConfig::full());
        assert_eq!(r.value, Some(DeltaRational::from_real(q(-2, 1))));
        assert_eq!(r.model.unwrap().get(p.var("x").unwrap()), Some(&q(2, 1)));
        assert!(!r.possibly_suboptimal);
    }

    #[test]
    fn relaxation_drops_integrality() {
        let (p, mu) = setup(FLOOR);
        let mut lra = LraSolver::new();
        let r = minimize_relaxation(&mut lra, &mu, &p.cnf.atoms, &p.objective).unwrap();
        assert_eq!(r.value, Some(DeltaRational::from_real(q(-5, 2))));
    }

    #[test]
    fn two_variable_knapsack() {
        let (p, mu, r) = run(KNAP, BnbConfig::full());
        assert_eq!(r.value, Some(DeltaRational::from_real(q(3, 1))));
        let m = r.model.unwrap();
        for l in &mu {
            assert!(eval_literal(*l, &p.cnf.atoms, &m).unwrap());
        }
        let explanation = r.explanation.unwrap();
        assert!(explanation.iter().all(|l| mu.contains(l)));

        let (p, mu, t) = run(KNAP, BnbConfig::truncated());
        assert!(t.possibly_suboptimal);
        assert!(t.explanation.is_none());
        assert!(t.value.unwrap() >= DeltaRational::from_real(q(3, 1)));
        let m = t.model.unwrap();
        for v in p.integer_vars() {
            assert!(m.get(v).is_none_or(|x| x.is_integer()));
        }
        for l in &mu {
            assert!(eval_literal(*l, &p.cnf.atoms, &m).unwrap());
        }
    }

    #[test]
    fn strict_bounds_on_integers() {
        let (_, _, r) = run("(declare-const x Int)(assert (< x 3))(assert (> x (- 1)))(minimize (- x))", BnbConfig::full());
        assert_eq!(r.value, Some(DeltaRational::from_real(q(-2, 1))));
    }

    #[test]
    fn integer_infeasible() {
        let (_, mu, r) = run("(declare-const x Int)(assert (> (* 3 x) 1))(assert (< (* 3 x) 2))(minimize x)", BnbConfig::full());
        assert_eq!(r.status, OptStatus::Infeasible);
        assert!(!r.core.is_empty() && r.core.iter().all(|l| mu.contains(l)));
    }

    #[test]
    fn node_limit() {
        let cfg = BnbConfig { node_limit: 1, ..BnbConfig::full() };
        let (_, _, r) = run(KNAP, cfg);
        assert_eq!(r.status, OptStatus::ResourceOut);
    }

    #[test]
    fn relaxation_lower_bounds_mixed() {
        let text = "(declare-const x Int)(declare-const y Real)
            (assert (<= (+ (* 2 x) y) 7))(assert (>= x 0))(assert (>= y 0))(assert (<= y (/ 1 2)))
            (minimize (- (+ x y)))";
        let (p, mu, full) = run(text, BnbConfig::full());
        let mut lra = LraSolver::new();
        let relaxed = minimize_relaxation(&mut lra, &mu, &p.cnf.atoms, &p.objective).unwrap();
        assert_eq!(relaxed.value, Some(DeltaRational::from_real(q(-15, 4))));
        assert_eq!(full.value, Some(DeltaRational::from_real(q(-7, 2))));
    }
}
