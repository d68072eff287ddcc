//! Atoms, literals, clauses and truth assignments.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::VarId;
use crate::num::choose_delta;
use crate::{ArithModel, DeltaRational, LinearTerm, Rational};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Relation of a normalized linear atom against zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

/// Relation as written in the input, before normalization.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RawRel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

/// `term rel 0`, with the constant folded into `term`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearAtom {
    pub term: LinearTerm,
    pub rel: Rel,
}

impl LinearAtom {
    /// The complement as a single linear atom; `None` for equalities.
    pub fn negated(&self) -> Option<LinearAtom> {
        let rel = match self.rel {
            Rel::Le => Rel::Lt,
            Rel::Lt => Rel::Le,
            Rel::Eq => return None,
        };
        Some(LinearAtom { term: self.term.negated(), rel })
    }

    pub fn holds(&self, value: &Rational) -> bool {
        match self.rel {
            Rel::Le => !value.is_positive(),
            Rel::Lt => value.is_negative(),
            Rel::Eq => value.is_zero(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Bool(String),
    Linear(LinearAtom),
}

impl Atom {
    pub fn is_theory(&self) -> bool {
        matches!(self, Atom::Linear(_))
    }

    pub fn as_linear(&self) -> Option<&LinearAtom> {
        match self {
            Atom::Linear(a) => Some(a),
            Atom::Bool(_) => None,
        }
    }
}

/// Canonical form of `lhs raw_rel rhs`.
///
/// The difference is moved to the left, `≥`/`>` are flipped, the coefficient
/// vector is scaled to coprime integers, and equalities get a positive leading
/// coefficient. Constant relations collapse to `0 ≤ 0` (true) or `0 < 0`
/// (false).
pub fn normalize_atom(lhs: &LinearTerm, raw: RawRel, rhs: &LinearTerm) -> LinearAtom {
    let diff = lhs.minus(rhs);
    let (term, rel) = match raw {
        RawRel::Le => (diff, Rel::Le),
        RawRel::Lt => (diff, Rel::Lt),
        RawRel::Ge => (diff.negated(), Rel::Le),
        RawRel::Gt => (diff.negated(), Rel::Lt),
        RawRel::Eq => (diff, Rel::Eq),
    };
    normalize_linear(LinearAtom { term, rel })
}

pub fn normalize_linear(atom: LinearAtom) -> LinearAtom {
    let LinearAtom { term, rel } = atom;
    if term.is_constant() {
        let truth = LinearAtom { term: term.clone(), rel }.holds(term.constant_part());
        let rel = if truth { Rel::Le } else { Rel::Lt };
        return LinearAtom { term: LinearTerm::zero(), rel };
    }
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for c in term.coeffs().values() {
        num_gcd = num_gcd.gcd(c.numer());
        den_lcm = den_lcm.lcm(c.denom());
    }
    let mut scale = BigRational::new(den_lcm, num_gcd);
    if rel == Rel::Eq && term.leading_coeff().is_some_and(|c| c.is_negative()) {
        scale = -scale;
    }
    LinearAtom { term: term.scaled(&scale), rel }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal {
    pub atom: AtomId,
    pub polarity: bool,
}

impl Literal {
    pub fn new(atom: AtomId, polarity: bool) -> Self {
        Literal { atom, polarity }
    }

    pub fn pos(atom: AtomId) -> Self {
        Literal { atom, polarity: true }
    }

    pub fn neg(atom: AtomId) -> Self {
        Literal { atom, polarity: false }
    }

    pub fn complement(self) -> Self {
        Literal { atom: self.atom, polarity: !self.polarity }
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        self.complement()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity {
            write!(f, "a{}", self.atom.0)
        } else {
            write!(f, "~a{}", self.atom.0)
        }
    }
}

/// Interned atoms. Identical normalized atoms share one id; ids follow
/// first-appearance order.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    atoms: Vec<Atom>,
    index: HashMap<Atom, AtomId>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, atom: Atom) -> AtomId {
        if let Some(id) = self.index.get(&atom) {
            return *id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(atom.clone());
        self.index.insert(atom, id);
        id
    }

    pub fn intern_linear(&mut self, atom: LinearAtom) -> AtomId {
        self.intern(Atom::Linear(normalize_linear(atom)))
    }

    pub fn lookup(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn get(&self, id: AtomId) -> &Atom {
        &self.atoms[id.index()]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_theory(&self, id: AtomId) -> bool {
        self.get(id).is_theory()
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> {
        (0..self.atoms.len() as u32).map(AtomId)
    }

    /// The linear constraint a literal stands for, with negation applied.
    /// `Ok(None)` for negated equalities, which have no single-atom form.
    pub fn literal_constraint(&self, lit: Literal) -> Result<Option<LinearAtom>> {
        let atom = self.get(lit.atom).as_linear().ok_or(Error::NonTheoryLiteral(lit))?;
        Ok(if lit.polarity { Some(atom.clone()) } else { atom.negated() })
    }
}

/// Exact truth value of a theory literal under a rational model.
pub fn eval_literal(lit: Literal, atoms: &AtomTable, model: &ArithModel) -> Result<bool> {
    let atom = atoms.get(lit.atom).as_linear().ok_or(Error::NonTheoryLiteral(lit))?;
    let value = atom.term.eval(model).map_err(Error::UnassignedVariable)?;
    Ok(atom.holds(&value) == lit.polarity)
}

/// Replace δ by a small enough positive rational so that every literal that
/// holds in δ-arithmetic still holds.
pub fn concretize(
    delta_model: &BTreeMap<VarId, DeltaRational>,
    literals: &[Literal],
    atoms: &AtomTable,
) -> Result<ArithModel> {
    let zero = DeltaRational::zero();
    let mut pairs: Vec<(DeltaRational, DeltaRational)> = Vec::new();
    for &lit in literals {
        let atom = atoms.get(lit.atom).as_linear().ok_or(Error::NonTheoryLiteral(lit))?;
        let value = atom.term.eval_delta(delta_model).map_err(Error::UnassignedVariable)?;
        match (atom.rel, lit.polarity) {
            (Rel::Le, true) | (Rel::Lt, true) => pairs.push((value, zero.clone())),
            (Rel::Le, false) | (Rel::Lt, false) => pairs.push((zero.clone(), value)),
            (Rel::Eq, true) => {}
            (Rel::Eq, false) => {
                if value > zero {
                    pairs.push((zero.clone(), value));
                } else {
                    pairs.push((value, zero.clone()));
                }
            }
        }
    }
    let delta = choose_delta(pairs.iter().filter(|(l, r)| l <= r).map(|(l, r)| (l, r)));
    Ok(delta_model.iter().map(|(v, x)| (*v, x.at(&delta))).collect())
}

pub type Clause = Vec<Literal>;

/// Clauses over an atom table. Tautologies are removed and duplicate literals
/// merged as clauses are added.
#[derive(Clone, Debug, Default)]
pub struct CnfFormula {
    pub clauses: Vec<Clause>,
    pub atoms: AtomTable,
}

impl CnfFormula {
    pub fn new(atoms: AtomTable) -> Self {
        CnfFormula { clauses: Vec::new(), atoms }
    }

    /// Returns false when the clause was a tautology and got dropped.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Literal>) -> bool {
        match canonical_clause(lits) {
            Some(c) => {
                self.clauses.push(c);
                true
            }
            None => false,
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn theory_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.atoms.ids().filter(|id| self.atoms.is_theory(*id))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.atoms.len(), self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let v = l.atom.0 as i64 + 1;
                out.push_str(&format!("{} ", if l.polarity { v } else { -v }));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Dedup literals keeping first-occurrence order; `None` for tautologies.
pub fn canonical_clause(lits: impl IntoIterator<Item = Literal>) -> Option<Clause> {
    let mut out: Clause = Vec::new();
    for l in lits {
        if out.contains(&!l) {
            return None;
        }
        if !out.contains(&l) {
            out.push(l);
        }
    }
    Some(out)
}

/// A partial map from atoms to truth values.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TruthAssignment {
    values: BTreeMap<AtomId, bool>,
}

impl TruthAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_literals(lits: impl IntoIterator<Item = Literal>) -> Self {
        let mut t = Self::new();
        for l in lits {
            t.assign(l);
        }
        t
    }

    pub fn assign(&mut self, lit: Literal) {
        self.values.insert(lit.atom, lit.polarity);
    }

    pub fn unassign(&mut self, atom: AtomId) -> Option<bool> {
        self.values.remove(&atom)
    }

    pub fn value(&self, atom: AtomId) -> Option<bool> {
        self.values.get(&atom).copied()
    }

    /// True if the literal is assigned true.
    pub fn holds(&self, lit: Literal) -> bool {
        self.value(lit.atom) == Some(lit.polarity)
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.values.iter().map(|(a, p)| Literal::new(*a, *p))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_subset_of(&self, other: &TruthAssignment) -> bool {
        self.values.iter().all(|(a, p)| other.values.get(a) == Some(p))
    }

    pub fn is_total_over(&self, num_atoms: usize) -> bool {
        (0..num_atoms as u32).all(|a| self.values.contains_key(&AtomId(a)))
    }

    /// Keep only atoms with id below `num_atoms`.
    pub fn restricted(&self, num_atoms: usize) -> TruthAssignment {
        TruthAssignment {
            values: self.values.range(..AtomId(num_atoms as u32)).map(|(a, p)| (*a, *p)).collect(),
        }
    }
}
