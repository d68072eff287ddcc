//! Small random problems for cross-checking against the oracle.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::bench::oracle::VarBox;
use crate::frontend::{Formula, Problem, ProblemBuilder};
use crate::logic::RawRel;
use crate::{LinearTerm, Rational, VarId, VarType};

#[derive(Clone, Debug)]
pub struct RandomShape {
    pub max_vars: usize,
    pub max_atoms: usize,
    pub max_clauses: usize,
    pub max_clause_len: usize,
    pub coeff: i64,
    pub constant: i64,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape { max_vars: 4, max_atoms: 8, max_clauses: 5, max_clause_len: 3, coeff: 5, constant: 10 }
    }
}

fn int(k: i64) -> Rational {
    Rational::from_integer(k.into())
}

fn random_term(rng: &mut SplitMix64, vars: &[VarId], coeff: i64) -> LinearTerm {
    loop {
        let t = LinearTerm::from_terms(vars.iter().map(|v| (*v, int(rng.gen_range(-coeff..=coeff)))), int(0));
        if !t.is_constant() {
            return t;
        }
    }
}

const RELS: [RawRel; 4] = [RawRel::Le, RawRel::Lt, RawRel::Ge, RawRel::Gt];

fn random_clauses(b: &mut ProblemBuilder, rng: &mut SplitMix64, vars: &[VarId], shape: &RandomShape, strict: bool) {
    let n_atoms = rng.gen_range(1..=shape.max_atoms);
    let atoms: Vec<Formula> = (0..n_atoms)
        .map(|_| {
            let lhs = random_term(rng, vars, shape.coeff);
            let rel = if strict { RELS[rng.gen_range(0..4)] } else { [RawRel::Le, RawRel::Ge][rng.gen_range(0..2)] };
            let rhs = LinearTerm::constant(int(rng.gen_range(-shape.constant..=shape.constant)));
            b.relation(&lhs, rel, &rhs)
        })
        .collect();
    for _ in 0..rng.gen_range(1..=shape.max_clauses) {
        let len = rng.gen_range(1..=shape.max_clause_len.min(n_atoms));
        let lits = (0..len)
            .map(|_| {
                let a = atoms[rng.gen_range(0..n_atoms)].clone();
                if rng.gen_bool(0.3) { a.negate() } else { a }
            })
            .collect();
        b.assert(&Formula::Or(lits));
    }
}

/// Random CNF over real variables with a random linear objective.
pub fn random_lra(seed: u64, shape: &RandomShape) -> Problem {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut b = ProblemBuilder::new(format!("lra-{seed}"));
    b.set_logic("QF_LRA");
    let n = rng.gen_range(1..=shape.max_vars);
    let vars: Vec<VarId> = (0..n).map(|i| b.declare(&format!("x{i}"), VarType::Real)).collect();
    random_clauses(&mut b, &mut rng, &vars, shape, true);
    let obj = random_term(&mut rng, &vars, shape.coeff);
    b.minimize(obj).unwrap();
    b.build().unwrap()
}

/// Random mixed problem with every variable boxed by unit clauses; the
/// returned box covers the integer grid.
pub fn random_lira(seed: u64, shape: &RandomShape, lo: i64, hi: i64) -> (Problem, VarBox) {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut b = ProblemBuilder::new(format!("lira-{seed}"));
    b.set_logic("QF_LIRA");
    let n = rng.gen_range(1..=shape.max_vars);
    let first_int = rng.gen_range(0..n);
    let vars: Vec<VarId> = (0..n)
        .map(|i| {
            let ty = if i == first_int || rng.gen_bool(0.5) { VarType::Int } else { VarType::Real };
            b.declare(&format!("x{i}"), ty)
        })
        .collect();
    for v in &vars {
        let f = b.relation(&LinearTerm::var(*v), RawRel::Ge, &LinearTerm::constant(int(lo)));
        b.assert(&f);
        let f = b.relation(&LinearTerm::var(*v), RawRel::Le, &LinearTerm::constant(int(hi)));
        b.assert(&f);
    }
    random_clauses(&mut b, &mut rng, &vars, shape, true);
    let obj = random_term(&mut rng, &vars, shape.coeff);
    if rng.gen_bool(0.5) {
        b.minimize(obj).unwrap();
    } else {
        b.maximize(obj).unwrap();
    }
    (b.build().unwrap(), VarBox::uniform(lo, hi))
}
