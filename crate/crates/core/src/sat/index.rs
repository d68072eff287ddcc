//! Clause-satisfaction bookkeeping for assignment reduction.

use crate::logic::{Clause, CnfFormula, Literal, TruthAssignment};

/// True iff every clause has a literal assigned true by `mu`.
pub fn satisfies_all_clauses(clauses: &[Clause], mu: &TruthAssignment) -> bool {
    clauses.iter().all(|c| c.iter().any(|l| mu.holds(*l)))
}

/// Per-clause counts of true literals under a shrinking assignment.
///
/// Built once from a satisfying assignment; `can_drop` and `drop` then cost
/// O(occurrences of the literal).
#[derive(Clone, Debug)]
pub struct SatisfactionIndex {
    occurrences: Vec<[Vec<usize>; 2]>,
    true_count: Vec<usize>,
    current: TruthAssignment,
}

impl SatisfactionIndex {
    pub fn new(cnf: &CnfFormula, mu: &TruthAssignment) -> Self {
        let mut occurrences = vec![[Vec::new(), Vec::new()]; cnf.num_atoms()];
        let mut true_count = vec![0; cnf.clauses.len()];
        for (ci, clause) in cnf.clauses.iter().enumerate() {
            let mut lits = clause.clone();
            lits.sort();
            lits.dedup();
            for l in &lits {
                occurrences[l.atom.index()][usize::from(l.polarity)].push(ci);
                if mu.holds(*l) {
                    true_count[ci] += 1;
                }
            }
        }
        SatisfactionIndex { occurrences, true_count, current: mu.clone() }
    }

    pub fn all_satisfied(&self) -> bool {
        self.true_count.iter().all(|c| *c > 0)
    }

    fn clauses_of(&self, lit: Literal) -> &[usize] {
        self.occurrences
            .get(lit.atom.index())
            .map(|o| o[usize::from(lit.polarity)].as_slice())
            .unwrap_or(&[])
    }

    /// Would every clause stay satisfied without `lit`?
    pub fn can_drop(&self, lit: Literal) -> bool {
        if !self.current.holds(lit) {
            return true;
        }
        self.clauses_of(lit).iter().all(|ci| self.true_count[*ci] >= 2)
    }

    /// Remove `lit` from the assignment; returns false if it was not assigned.
    pub fn drop(&mut self, lit: Literal) -> bool {
        if !self.current.holds(lit) {
            return false;
        }
        self.current.unassign(lit.atom);
        let clauses = self.occurrences.get(lit.atom.index()).map(|o| o[usize::from(lit.polarity)].clone());
        for ci in clauses.unwrap_or_default() {
            self.true_count[ci] -= 1;
        }
        true
    }

    pub fn assignment(&self) -> &TruthAssignment {
        &self.current
    }

    pub fn into_assignment(self) -> TruthAssignment {
        self.current
    }
}
