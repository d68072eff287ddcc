use std::collections::HashMap;

use crate::logic::{Atom, AtomId, CnfFormula, Literal, TruthAssignment};

/// Boolean structure over interned atoms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Lit(Literal),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(id: AtomId) -> Self {
        Formula::Lit(Literal::pos(id))
    }

    pub fn negate(self) -> Self {
        Formula::Not(Box::new(self))
    }

    /// Truth value under a (total over the mentioned atoms) assignment.
    pub fn eval(&self, mu: &TruthAssignment) -> Option<bool> {
        Some(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Lit(l) => mu.value(l.atom)? == l.polarity,
            Formula::Not(f) => !f.eval(mu)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(mu)? {
                        return Some(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(mu)? {
                        return Some(true);
                    }
                }
                false
            }
        })
    }

    /// Negation normal form with constants folded and nested connectives
    /// flattened. The result contains no `Not`.
    pub fn nnf(&self) -> Formula {
        nnf(self, true)
    }
}

fn nnf(f: &Formula, positive: bool) -> Formula {
    match f {
        Formula::True => if positive { Formula::True } else { Formula::False },
        Formula::False => if positive { Formula::False } else { Formula::True },
        Formula::Lit(l) => Formula::Lit(if positive { *l } else { !*l }),
        Formula::Not(g) => nnf(g, !positive),
        Formula::And(gs) | Formula::Or(gs) => {
            let conj = matches!(f, Formula::And(_)) == positive;
            let mut out = Vec::new();
            for g in gs {
                match (nnf(g, positive), conj) {
                    (Formula::True, true) | (Formula::False, false) => {}
                    (Formula::False, true) => return Formula::False,
                    (Formula::True, false) => return Formula::True,
                    (Formula::And(hs), true) | (Formula::Or(hs), false) => out.extend(hs),
                    (h, _) => out.push(h),
                }
            }
            match (out.len(), conj) {
                (0, true) => Formula::True,
                (0, false) => Formula::False,
                (1, _) => out.pop().unwrap(),
                (_, true) => Formula::And(out),
                (_, false) => Formula::Or(out),
            }
        }
    }
}

/// Plaisted-Greenbaum clausifier. After NNF every subformula occurs
/// positively, so each nested conjunction `g` gets one auxiliary atom `a`
/// and only the clauses `a → conjunct`. Identical subformulas share `a`.
#[derive(Debug, Default)]
pub struct CnfBuilder {
    defs: HashMap<Formula, Literal>,
    next_aux: usize,
}

impl CnfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Conjoin `f` to `cnf`.
    pub fn add(&mut self, cnf: &mut CnfFormula, f: &Formula) {
        match f.nnf() {
            Formula::True => {}
            Formula::False => {
                cnf.add_clause([]);
            }
            Formula::And(gs) => {
                for g in &gs {
                    let c = self.clause_of(cnf, g);
                    cnf.add_clause(c);
                }
            }
            g => {
                let c = self.clause_of(cnf, &g);
                cnf.add_clause(c);
            }
        }
    }

    fn clause_of(&mut self, cnf: &mut CnfFormula, f: &Formula) -> Vec<Literal> {
        match f {
            Formula::Lit(l) => vec![*l],
            Formula::Or(gs) => gs.iter().flat_map(|g| self.clause_of(cnf, g)).collect(),
            Formula::And(gs) => {
                if let Some(l) = self.defs.get(f) {
                    return vec![*l];
                }
                let a = Literal::pos(self.fresh(cnf));
                for g in gs {
                    let mut c = vec![!a];
                    c.extend(self.clause_of(cnf, g));
                    cnf.add_clause(c);
                }
                self.defs.insert(f.clone(), a);
                vec![a]
            }
            Formula::True | Formula::False | Formula::Not(_) => unreachable!("input is in simplified NNF"),
        }
    }

    fn fresh(&mut self, cnf: &mut CnfFormula) -> AtomId {
        loop {
            self.next_aux += 1;
            let atom = Atom::Bool(format!("#aux{}", self.next_aux));
            if cnf.atoms.lookup(&atom).is_none() {
                return cnf.atoms.intern(atom);
            }
        }
    }
}

/// Clausify a single formula into `cnf`.
pub fn cnf_convert(cnf: &mut CnfFormula, f: &Formula) {
    CnfBuilder::new().add(cnf, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::AtomTable;
    use crate::sat::{SatSolver, satisfies_all_clauses};
    use proptest::prelude::*;

    fn table(n: usize) -> (CnfFormula, Vec<Formula>) {
        let mut atoms = AtomTable::new();
        let fs = (0..n).map(|i| Formula::atom(atoms.intern(Atom::Bool(format!("p{i}"))))).collect();
        (CnfFormula::new(atoms), fs)
    }

    #[test]
    fn flat_cnf_needs_no_aux() {
        let (mut cnf, p) = table(5);
        let f = Formula::And(vec![
            Formula::Or(vec![p[0].clone(), p[1].clone()]),
            Formula::Or(vec![p[2].clone(), p[3].clone(), p[4].clone()]),
        ]);
        cnf_convert(&mut cnf, &f);
        assert_eq!(cnf.clauses.len(), 2);
        assert_eq!(cnf.num_atoms(), 5);
    }

    #[test]
    fn de_morgan() {
        let (mut cnf, p) = table(2);
        cnf_convert(&mut cnf, &Formula::And(vec![p[0].clone(), p[1].clone()]).negate());
        assert_eq!(cnf.clauses, vec![vec![Literal::neg(AtomId(0)), Literal::neg(AtomId(1))]]);
    }

    #[test]
    fn disjunction_of_conjunctions() {
        let (mut cnf, p) = table(4);
        let f = Formula::Or(vec![
            Formula::And(vec![p[0].clone(), p[1].clone()]),
            Formula::And(vec![p[2].clone(), p[3].clone()]),
        ]);
        cnf_convert(&mut cnf, &f);
        assert_eq!(cnf.num_atoms(), 6);
        assert_eq!(cnf.clauses.len(), 5);
        assert_equisatisfiable(&f, &cnf, 4);
    }

    #[test]
    fn shared_subformula_reuses_definition() {
        let (mut cnf, p) = table(3);
        let g = Formula::And(vec![p[0].clone(), p[1].clone()]);
        let mut b = CnfBuilder::new();
        b.add(&mut cnf, &Formula::Or(vec![g.clone(), p[2].clone()]));
        b.add(&mut cnf, &Formula::Or(vec![g, p[2].clone().negate()]));
        assert_eq!(cnf.num_atoms(), 4);
    }

    #[test]
    fn constants_fold() {
        let (mut cnf, p) = table(1);
        cnf_convert(&mut cnf, &Formula::Or(vec![p[0].clone(), Formula::True]));
        assert!(cnf.clauses.is_empty());
        cnf_convert(&mut cnf, &Formula::And(vec![p[0].clone(), Formula::False]));
        assert_eq!(cnf.clauses, vec![Vec::<Literal>::new()]);
    }

    fn assert_equisatisfiable(f: &Formula, cnf: &CnfFormula, n: usize) {
        let mut solver = SatSolver::new(0);
        solver.ensure_vars(cnf.num_atoms());
        for c in &cnf.clauses {
            solver.add_clause(c);
        }
        for bits in 0u32..1 << n {
            let lits: Vec<Literal> = (0..n).map(|i| Literal::new(AtomId(i as u32), bits >> i & 1 == 1)).collect();
            let mu = TruthAssignment::from_literals(lits.iter().copied());
            let expected = f.eval(&mu).unwrap();
            let got = solver.solve_with_assumptions(&lits);
            assert_eq!(expected, got.is_sat(), "assignment {bits:b}");
            if let crate::sat::SatResult::Sat(m) = got {
                assert!(satisfies_all_clauses(&cnf.clauses, &m));
            }
        }
    }

    fn arb_formula(n: u32) -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            8 => (0..n, any::<bool>()).prop_map(|(a, p)| Formula::Lit(Literal::new(AtomId(a), p))),
            1 => Just(Formula::True),
            1 => Just(Formula::False),
        ];
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::negate),
                prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::And),
                prop::collection::vec(inner, 0..4).prop_map(Formula::Or),
            ]
        })
    }

    proptest! {
        #[test]
        fn clausification_is_equisatisfiable(f in arb_formula(6)) {
            let (mut cnf, _) = table(6);
            cnf_convert(&mut cnf, &f);
            assert_equisatisfiable(&f, &cnf, 6);
        }

        #[test]
        fn nnf_preserves_truth(f in arb_formula(5), bits in 0u32..32) {
            let mu = TruthAssignment::from_literals((0..5).map(|i| Literal::new(AtomId(i), bits >> i & 1 == 1)));
            let g = f.nnf();
            prop_assert_eq!(f.eval(&mu), g.eval(&mu));
            fn has_not(f: &Formula) -> bool {
                match f {
                    Formula::Not(_) => true,
                    Formula::And(gs) | Formula::Or(gs) => gs.iter().any(has_not),
                    _ => false,
                }
            }
            prop_assert!(!has_not(&g));
        }
    }
}
