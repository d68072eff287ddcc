//! Brute-force reference answers that share nothing with the Simplex code.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::VarId;
use crate::frontend::Problem;
use crate::logic::{AtomId, CnfFormula, Literal, Rel, TruthAssignment};
use crate::{LinearTerm, Rational};

/// `Σ coeffs[i]·x_i + constant ≤ 0`, or `< 0` when strict.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Ineq {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
    pub strict: bool,
}

impl Ineq {
    pub fn from_term(t: &LinearTerm, n: usize, strict: bool) -> Self {
        let mut coeffs = vec![Rational::zero(); n];
        for (v, c) in t.coeffs() {
            coeffs[v.index()] = c.clone();
        }
        Ineq { coeffs, constant: t.constant_part().clone(), strict }
    }

    fn normalized(mut self) -> Self {
        if let Some(k) = self.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            for c in &mut self.coeffs {
                *c /= &k;
            }
            self.constant /= &k;
        }
        self
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn constant_holds(&self) -> bool {
        if self.strict { self.constant.is_negative() } else { !self.constant.is_positive() }
    }
}

/// Minimum of a linear objective over a conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpValue {
    Infeasible,
    Unbounded,
    /// Infimum; `attained` is false when only approached through strict
    /// constraints.
    Min { value: Rational, attained: bool },
}

impl LpValue {
    /// The smaller of two minima, preferring attainment on ties.
    pub fn min(self, other: LpValue) -> LpValue {
        use LpValue::*;
        match (self, other) {
            (Unbounded, _) | (_, Unbounded) => Unbounded,
            (Infeasible, x) | (x, Infeasible) => x,
            (Min { value: a, attained: pa }, Min { value: b, attained: pb }) => {
                if a < b {
                    Min { value: a, attained: pa }
                } else if b < a {
                    Min { value: b, attained: pb }
                } else {
                    Min { value: a, attained: pa || pb }
                }
            }
        }
    }
}

const FM_LIMIT: usize = 50_000;

/// Fourier-Motzkin projection onto the objective value.
///
/// Each derived row remembers which input rows it combines; after `k`
/// eliminations a row built from more than `k + 1` inputs is implied by the
/// others and is dropped (Chernikov's rule).
pub fn fm_minimize(n: usize, constraints: &[Ineq], cost: &[Rational], cost_constant: &Rational) -> Result<LpValue> {
    // variable n is z = cost
    let widen = |c: &Ineq| {
        let mut coeffs = c.coeffs.clone();
        coeffs.resize(n + 1, Rational::zero());
        Ineq { coeffs, constant: c.constant.clone(), strict: c.strict }
    };
    let mut rows: Vec<Ineq> = constraints.iter().map(widen).collect();
    let mut up: Vec<Rational> = cost.to_vec();
    up.resize(n, Rational::zero());
    up.push(-Rational::one());
    rows.push(Ineq { coeffs: up.clone(), constant: cost_constant.clone(), strict: false });
    rows.push(Ineq { coeffs: up.iter().map(|c| -c.clone()).collect(), constant: -cost_constant.clone(), strict: false });
    if rows.len() > 128 {
        return Err(Error::OracleTooLarge(format!("{} input constraints", rows.len())));
    }
    let mut set: Vec<(Ineq, u128)> = rows.into_iter().enumerate().map(|(i, r)| (r.normalized(), 1u128 << i)).collect();

    for var in 0..n {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for (c, origin) in set {
            if c.coeffs[var].is_positive() {
                pos.push((c, origin));
            } else if c.coeffs[var].is_negative() {
                neg.push((c, origin));
            } else {
                rest.push((c, origin));
            }
        }
        let mut seen: HashSet<Ineq> = rest.iter().map(|(c, _)| c.clone()).collect();
        for (p, po) in &pos {
            for (q, qo) in &neg {
                let origin = po | qo;
                if origin.count_ones() as usize > var + 2 {
                    continue;
                }
                let a = p.coeffs[var].clone();
                let b = -q.coeffs[var].clone();
                let coeffs: Vec<Rational> = p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| x * &b + y * &a).collect();
                let c = Ineq { coeffs, constant: &p.constant * &b + &q.constant * &a, strict: p.strict || q.strict }
                    .normalized();
                if c.is_constant() {
                    if !c.constant_holds() {
                        return Ok(LpValue::Infeasible);
                    }
                    continue;
                }
                if seen.insert(c.clone()) {
                    rest.push((c, origin));
                    if rest.len() > FM_LIMIT {
                        return Err(Error::OracleTooLarge(format!("more than {FM_LIMIT} projected constraints")));
                    }
                }
            }
        }
        set = rest;
    }
    let set: Vec<Ineq> = set.into_iter().map(|(c, _)| c).collect();

    let mut lower: Option<(Rational, bool)> = None;
    let mut upper: Option<(Rational, bool)> = None;
    for c in &set {
        let a = &c.coeffs[n];
        if a.is_zero() {
            if !c.constant_holds() {
                return Ok(LpValue::Infeasible);
            }
            continue;
        }
        let bound = -c.constant.clone() / a;
        if a.is_positive() {
            let tighter = upper.as_ref().is_none_or(|(u, s)| bound < *u || (bound == *u && c.strict && !s));
            if tighter {
                upper = Some((bound, c.strict));
            }
        } else {
            let tighter = lower.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && c.strict && !s));
            if tighter {
                lower = Some((bound, c.strict));
            }
        }
    }
    if let (Some((l, ls)), Some((u, us))) = (&lower, &upper) {
        if l > u || (l == u && (*ls || *us)) {
            return Ok(LpValue::Infeasible);
        }
    }
    Ok(match lower {
        None => LpValue::Unbounded,
        Some((value, strict)) => LpValue::Min { value, attained: !strict },
    })
}

fn solve_square(rows: &[&Ineq], n: usize) -> Option<Vec<Rational>> {
    // rows: a·x + c = 0
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            let mut row = r.coeffs[..n].to_vec();
            row.push(-r.constant.clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|r| !m[*r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in &mut m[col] {
            *x /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

fn boxed_vertex_min(n: usize, constraints: &[Ineq], cost: &[Rational], cost_constant: &Rational, m: i64) -> Option<Rational> {
    let mut all: Vec<Ineq> = constraints.to_vec();
    let big = Rational::from_integer(m.into());
    for i in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        all.push(Ineq { coeffs: e.clone(), constant: -big.clone(), strict: false });
        e[i] = -Rational::one();
        all.push(Ineq { coeffs: e, constant: -big.clone(), strict: false });
    }
    let mut best: Option<Rational> = None;
    for subset in (0..all.len()).combinations(n) {
        let rows: Vec<&Ineq> = subset.iter().map(|i| &all[*i]).collect();
        let Some(x) = solve_square(&rows, n) else { continue };
        let feasible = all.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum::<Rational>() + &c.constant;
            !lhs.is_positive()
        });
        if feasible {
            let value: Rational = cost.iter().zip(&x).map(|(a, v)| a * v).sum::<Rational>() + cost_constant;
            if best.as_ref().is_none_or(|b| value < *b) {
                best = Some(value);
            }
        }
    }
    best
}

/// Minimum over the vertices of `{x : constraints} ∩ [-m, m]ⁿ`, which must
/// contain every vertex of the unboxed polyhedron.
///
/// Constraints must be non-strict. The problem is unbounded when it is
/// feasible and some direction `d` with `A·d ≤ 0` has `c·d < 0`; that is
/// decided by the same enumeration over the recession cone cut to `[-1, 1]ⁿ`.
pub fn vertex_minimize(n: usize, constraints: &[Ineq], cost: &[Rational], cost_constant: &Rational, m: i64) -> Result<LpValue> {
    assert!(constraints.iter().all(|c| !c.strict), "vertex enumeration needs non-strict constraints");
    let Some(value) = boxed_vertex_min(n, constraints, cost, cost_constant, m) else {
        return Ok(LpValue::Infeasible);
    };
    let cone: Vec<Ineq> = constraints
        .iter()
        .map(|c| Ineq { coeffs: c.coeffs.clone(), constant: Rational::zero(), strict: false })
        .collect();
    let descent = boxed_vertex_min(n, &cone, cost, &Rational::zero(), 1).expect("the origin is in the cone");
    if descent.is_negative() {
        return Ok(LpValue::Unbounded);
    }
    Ok(LpValue::Min { value, attained: true })
}

/// All total assignments over the atoms of `cnf` that satisfy every clause.
pub fn satisfying_assignments(cnf: &CnfFormula, limit: usize) -> Result<Vec<TruthAssignment>> {
    let n = cnf.num_atoms();
    let mut out = Vec::new();
    let mut values: Vec<Option<bool>> = vec![None; n];
    fn falsified(c: &[Literal], values: &[Option<bool>]) -> bool {
        c.iter().all(|l| values[l.atom.index()] == Some(!l.polarity))
    }
    fn go(
        i: usize,
        cnf: &CnfFormula,
        values: &mut Vec<Option<bool>>,
        out: &mut Vec<TruthAssignment>,
        limit: usize,
    ) -> Result<()> {
        if cnf.clauses.iter().any(|c| falsified(c, values)) {
            return Ok(());
        }
        if i == values.len() {
            if out.len() == limit {
                return Err(Error::OracleTooLarge(format!("more than {limit} satisfying assignments")));
            }
            out.push(TruthAssignment::from_literals(
                values.iter().enumerate().map(|(a, v)| Literal::new(AtomId(a as u32), v.unwrap())),
            ));
            return Ok(());
        }
        for b in [true, false] {
            values[i] = Some(b);
            go(i + 1, cnf, values, out, limit)?;
        }
        values[i] = None;
        Ok(())
    }
    go(0, cnf, &mut values, &mut out, limit)?;
    Ok(out)
}

/// Inclusive integer range per variable name, for grid scans.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarBox {
    pub ranges: BTreeMap<String, (i64, i64)>,
    pub default: Option<(i64, i64)>,
}

impl VarBox {
    pub fn uniform(lo: i64, hi: i64) -> Self {
        VarBox { ranges: BTreeMap::new(), default: Some((lo, hi)) }
    }

    /// `x=0..10,y=-3..3,*=-5..5`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut b = VarBox::default();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || Error::Config(format!("bad box entry `{part}`"));
            let (name, range) = part.split_once('=').ok_or_else(bad)?;
            let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
            let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            if name.trim() == "*" {
                b.default = Some((lo, hi));
            } else {
                b.ranges.insert(name.trim().to_string(), (lo, hi));
            }
        }
        Ok(b)
    }

    pub fn range(&self, name: &str) -> Option<(i64, i64)> {
        self.ranges.get(name).copied().or(self.default)
    }
}

pub const MAX_GRID: u64 = 10_000;
pub const MAX_ASSIGNMENTS: usize = 4096;

/// Reference optimum: enumerate satisfying assignments of the skeleton,
/// minimize each exactly, and keep the best. Integer variables are scanned
/// over `bounds`, which must cover every one of them.
pub fn brute_force_omt(problem: &Problem, bounds: &VarBox) -> Result<LpValue> {
    let n = problem.num_vars();
    let ints: Vec<VarId> = problem.integer_vars().into_iter().collect();
    let mut axes = Vec::new();
    let mut grid: u64 = 1;
    for v in &ints {
        let (lo, hi) = bounds
            .range(problem.var_name(*v))
            .ok_or_else(|| Error::Config(format!("no box for integer variable `{}`", problem.var_name(*v))))?;
        grid = grid.saturating_mul((hi - lo + 1) as u64);
        axes.push(lo..=hi);
    }
    if grid > MAX_GRID {
        return Err(Error::OracleTooLarge(format!("integer grid of {grid} points")));
    }
    let points: Vec<Vec<i64>> = if ints.is_empty() {
        vec![Vec::new()]
    } else {
        axes.into_iter().multi_cartesian_product().collect()
    };
    let cost = Ineq::from_term(&problem.objective, n, false);
    let mut best = LpValue::Infeasible;
    for eta in satisfying_assignments(&problem.cnf, MAX_ASSIGNMENTS)? {
        let mut rows = Vec::new();
        for l in eta.literals() {
            if !problem.cnf.atoms.is_theory(l.atom) {
                continue;
            }
            let a = problem.cnf.atoms.literal_constraint(l)?.ok_or(Error::NonTheoryLiteral(l))?;
            match a.rel {
                Rel::Le => rows.push(Ineq::from_term(&a.term, n, false)),
                Rel::Lt => rows.push(Ineq::from_term(&a.term, n, true)),
                Rel::Eq => {
                    rows.push(Ineq::from_term(&a.term, n, false));
                    rows.push(Ineq::from_term(&a.term.negated(), n, false));
                }
            }
        }
        if !ints.is_empty() && fm_minimize(n, &rows, &cost.coeffs, &cost.constant)? == LpValue::Infeasible {
            continue;
        }
        for p in &points {
            let mut fixed = rows.clone();
            for (v, x) in ints.iter().zip(p) {
                let mut e = vec![Rational::zero(); n];
                e[v.index()] = Rational::one();
                let k = Rational::from_integer((*x).into());
                fixed.push(Ineq { coeffs: e.clone(), constant: -k.clone(), strict: false });
                fixed.push(Ineq { coeffs: e.iter().map(|c| -c.clone()).collect(), constant: k, strict: false });
            }
            best = best.min(fm_minimize(n, &fixed, &cost.coeffs, &cost.constant)?);
            if best == LpValue::Unbounded {
                return Ok(best);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn ineq(cs: &[i64], k: i64, strict: bool) -> Ineq {
        Ineq { coeffs: cs.iter().map(|c| q(*c, 1)).collect(), constant: q(k, 1), strict }
    }

    #[test]
    fn fm_basics() {
        // x ≥ 1, x ≤ 3, minimize x
        let cs = [ineq(&[-1], 1, false), ineq(&[1], -3, false)];
        assert_eq!(fm_minimize(1, &cs, &[q(1, 1)], &q(0, 1)).unwrap(), LpValue::Min { value: q(1, 1), attained: true });
        let cs = [ineq(&[-1], 1, true)];
        assert_eq!(fm_minimize(1, &cs, &[q(1, 1)], &q(0, 1)).unwrap(), LpValue::Min { value: q(1, 1), attained: false });
        assert_eq!(fm_minimize(1, &cs, &[q(-1, 1)], &q(0, 1)).unwrap(), LpValue::Unbounded);
        let cs = [ineq(&[-1], 1, false), ineq(&[1], -1, true)];
        assert_eq!(fm_minimize(1, &cs, &[q(1, 1)], &q(0, 1)).unwrap(), LpValue::Infeasible);
        assert_eq!(fm_minimize(1, &[], &[q(0, 1)], &q(7, 1)).unwrap(), LpValue::Min { value: q(7, 1), attained: true });
    }

    #[test]
    fn three_constraint_core_is_infeasible() {
        // x ≤ 0, y ≤ 0, x + y ≥ 1
        let cs = [ineq(&[1, 0], 0, false), ineq(&[0, 1], 0, false), ineq(&[-1, -1], 1, false)];
        assert_eq!(fm_minimize(2, &cs, &[q(0, 1), q(0, 1)], &q(0, 1)).unwrap(), LpValue::Infeasible);
    }

    #[test]
    fn vertices_agree_with_projection() {
        // 2x − 3y ≤ 6, y ≤ 2, 3x + y ≤ 9, x ≤ 4, minimize −2x → −6
        let cs = [ineq(&[2, -3], -6, false), ineq(&[0, 1], -2, false), ineq(&[3, 1], -9, false), ineq(&[1, 0], -4, false)];
        let cost = [q(-2, 1), q(0, 1)];
        let expected = LpValue::Min { value: q(-6, 1), attained: true };
        assert_eq!(fm_minimize(2, &cs, &cost, &q(0, 1)).unwrap(), expected);
        assert_eq!(vertex_minimize(2, &cs, &cost, &q(0, 1), 1_000_000).unwrap(), expected);
        assert_eq!(vertex_minimize(2, &cs[..2], &cost, &q(0, 1), 1_000_000).unwrap(), LpValue::Min { value: q(-12, 1), attained: true });
        assert_eq!(vertex_minimize(2, &cs[1..2], &cost, &q(0, 1), 1_000_000).unwrap(), LpValue::Unbounded);
    }

    #[test]
    fn example_formula() {
        let p = parse(
            "(declare-const x Real)(declare-const y Real)
             (assert (or (<= (- (* 2 x) (* 3 y)) 6) (<= x 4)))
             (assert (or (<= y 2) (<= y (+ (* (- 3) x) 9)) (< x (- 2))))
             (minimize (* (- 2) x))",
        )
        .unwrap();
        assert_eq!(satisfying_assignments(&p.cnf, 100).unwrap().len(), 21);
        assert_eq!(brute_force_omt(&p, &VarBox::default()).unwrap(), LpValue::Min { value: q(-12, 1), attained: true });
    }

    #[test]
    fn unsat_toy() {
        let p = parse("(declare-const x Real)(assert (< x 0))(assert (> x 0))(minimize x)").unwrap();
        assert_eq!(brute_force_omt(&p, &VarBox::default()).unwrap(), LpValue::Infeasible);
    }

    #[test]
    fn integer_grid() {
        let p = parse(
            "(declare-const x Int)(declare-const y Int)
             (assert (>= (+ (* 2 x) (* 3 y)) 7))(assert (>= x 0))(assert (>= y 0))(minimize (+ x y))",
        )
        .unwrap();
        assert_eq!(brute_force_omt(&p, &VarBox::uniform(0, 7)).unwrap(), LpValue::Min { value: q(3, 1), attained: true });
        assert!(matches!(brute_force_omt(&p, &VarBox::uniform(0, 1000)), Err(Error::OracleTooLarge(_))));
        assert!(brute_force_omt(&p, &VarBox::default()).is_err());
    }

    #[test]
    fn box_specs() {
        let b = VarBox::parse("x=0..10, *=-5..5").unwrap();
        assert_eq!(b.range("x"), Some((0, 10)));
        assert_eq!(b.range("y"), Some((-5, 5)));
        assert!(VarBox::parse("x=3..1").is_err());
        assert!(VarBox::parse("x").is_err());
    }
}
