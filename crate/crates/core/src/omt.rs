//! Linear-search OMT: enumerate assignments, reduce, minimize, tighten.

use std::collections::BTreeSet;
use std::time::Instant;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::VarId;
use crate::frontend::Problem;
use crate::lia::{minimize_mixed, BnbConfig, BnbMode};
use crate::logic::{normalize_linear, Atom, AtomId, AtomTable, LinearAtom, Literal, Rel, TruthAssignment};
use crate::lra::{CheckOutcome, LraSolver, OptResult, OptStatus};
use crate::reduce::{reduce_basic, reduce_guided, reduce_none, theory_literals, LiteralFilter, ReductionStrategy};
use crate::sat::{SatResult, SatSolver};
use crate::{ArithModel, DeltaRational, LinearTerm};

#[derive(Clone, Debug, PartialEq)]
pub struct OmtConfig {
    pub strategy: ReductionStrategy,
    /// Candidates for basic reduction.
    pub basic_filter: LiteralFilter,
    pub lia: BnbConfig,
    pub learn_block_lemma: bool,
    /// Wall-clock budget in seconds.
    pub time_budget: f64,
    /// Stop after this many iterations.
    pub max_iterations: Option<usize>,
    pub seed: u64,
    /// Preferred polarities for the SAT solver's first decisions.
    pub phase_hints: Vec<Literal>,
}

impl Default for OmtConfig {
    fn default() -> Self {
        OmtConfig {
            strategy: ReductionStrategy::None,
            basic_filter: LiteralFilter::TheoryOnly,
            lia: BnbConfig::default(),
            learn_block_lemma: false,
            time_budget: f64::INFINITY,
            max_iterations: None,
            seed: 0,
            phase_hints: Vec::new(),
        }
    }
}

impl OmtConfig {
    pub fn with_strategy(strategy: ReductionStrategy) -> Self {
        OmtConfig { strategy, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OmtStatus {
    Optimum,
    Unsat,
    Unbounded,
    BudgetExhausted,
}

/// One SAT answer that was theory-consistent and got minimized.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub index: usize,
    pub elapsed_s: f64,
    pub ub: DeltaRational,
    pub dropped: Vec<Literal>,
    pub minimize_calls: usize,
    pub approx_values: Vec<Option<DeltaRational>>,
    pub reduced_size: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OmtTrace {
    pub iterations: Vec<IterationRecord>,
    pub sat_calls: usize,
    pub theory_conflicts: usize,
    pub lemmas_learned: usize,
    pub lemmas_refused: usize,
    pub total_s: f64,
}

impl OmtTrace {
    pub fn num_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn final_ub(&self) -> Option<&DeltaRational> {
        self.iterations.last().map(|r| &r.ub)
    }

    /// Upper bound after `k` iterations (the last one if fewer ran).
    pub fn ub_at(&self, k: usize) -> Option<&DeltaRational> {
        self.iterations[..k.min(self.iterations.len())].last().map(|r| &r.ub)
    }

    /// Iterations needed to reach the final upper bound.
    pub fn iterations_to_final(&self) -> usize {
        self.iterations.len()
    }

    /// A copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> OmtTrace {
        let mut t = self.clone();
        t.total_s = 0.0;
        for r in &mut t.iterations {
            r.elapsed_s = 0.0;
        }
        t
    }
}

#[derive(Clone, Debug)]
pub struct OmtOutcome {
    pub status: OmtStatus,
    pub model: Option<ArithModel>,
    /// Best objective value found, in minimization orientation.
    pub value: Option<DeltaRational>,
    pub trace: OmtTrace,
}

/// The atom `objective < ub`. A value with a positive infinitesimal part is
/// an unattained infimum; anything strictly better is then `≤` its real part.
pub fn objective_bound_atom(objective: &LinearTerm, ub: &DeltaRational) -> LinearAtom {
    let mut term = objective.clone();
    term.add_constant(&-ub.real.clone());
    let rel = if ub.delta.is_positive() { Rel::Le } else { Rel::Lt };
    normalize_linear(LinearAtom { term, rel })
}

/// Lazy SMT state shared by the OMT loop and plain satisfiability checks.
struct Engine<'a> {
    problem: &'a Problem,
    atoms: AtomTable,
    sat: SatSolver,
    lra: LraSolver,
    int_vars: BTreeSet<VarId>,
}

impl<'a> Engine<'a> {
    fn new(problem: &'a Problem, seed: u64) -> Self {
        let mut sat = SatSolver::new(seed);
        sat.ensure_vars(problem.cnf.num_atoms());
        sat.add_clauses(&problem.cnf.clauses);
        Engine { problem, atoms: problem.cnf.atoms.clone(), sat, lra: LraSolver::new(), int_vars: problem.integer_vars() }
    }

    fn intern_bound(&mut self, ub: &DeltaRational) -> AtomId {
        let id = self.atoms.intern(Atom::Linear(objective_bound_atom(&self.problem.objective, ub)));
        self.sat.ensure_vars(id.index() + 1);
        id
    }

    fn learn(&mut self, clause: Vec<Literal>) {
        self.sat.add_clause(&clause);
    }

    /// Propositional model that is also theory-consistent, learning theory
    /// conflicts until one is found. The LRA check ignores integrality.
    fn next_consistent(&mut self, assumptions: &[Literal], trace: &mut OmtTrace) -> Result<Option<TruthAssignment>> {
        loop {
            trace.sat_calls += 1;
            let eta = match self.sat.solve_with_assumptions(assumptions) {
                SatResult::Unsat(_) => return Ok(None),
                SatResult::Sat(eta) => eta,
            };
            let mut lits = theory_literals(&eta.restricted(self.problem.cnf.num_atoms()), &self.atoms);
            lits.extend_from_slice(assumptions);
            match self.lra.check_scoped(&lits, &self.atoms)? {
                CheckOutcome::Sat => return Ok(Some(eta)),
                CheckOutcome::Unsat(core) => {
                    trace.theory_conflicts += 1;
                    self.learn(core.iter().map(|l| !*l).collect());
                }
            }
        }
    }

    fn minimize(&mut self, lits: &[Literal], mode: &BnbConfig) -> Result<OptResult> {
        if self.int_vars.is_empty() {
            self.lra.minimize_scoped(lits, &self.atoms, &self.problem.objective)
        } else {
            minimize_mixed(&mut self.lra, lits, &self.atoms, &self.problem.objective, &self.int_vars, mode)
        }
    }

    fn complete_model(&self, model: ArithModel) -> ArithModel {
        let mut m = model;
        for i in 0..self.problem.num_vars() {
            let v = VarId(i as u32);
            if m.get(v).is_none() {
                m.set(v, crate::Rational::zero());
            }
        }
        m
    }
}

/// The blocking lemma `¬bound ∨ ¬l₁ ∨ … ∨ ¬lₙ` for an optimum `r` that
/// established the bound. Truncated results are refused.
pub fn block_lemma(r: &OptResult, bound: Literal, previous_bound: Option<Literal>) -> Result<Vec<Literal>> {
    if r.possibly_suboptimal || r.status != OptStatus::Optimum {
        return Err(Error::LemmaRefused);
    }
    let explanation = r.explanation.as_ref().ok_or(Error::LemmaRefused)?;
    let mut clause = vec![!bound];
    clause.extend(explanation.iter().filter(|l| Some(**l) != previous_bound && **l != bound).map(|l| !*l));
    Ok(clause)
}

/// Linear-search OMT over `problem`.
pub fn solve(problem: &Problem, cfg: &OmtConfig) -> Result<OmtOutcome> {
    if cfg.time_budget.is_nan() || cfg.time_budget <= 0.0 {
        return Err(Error::Config("time budget must be positive".into()));
    }
    let start = Instant::now();
    let mut engine = Engine::new(problem, cfg.seed);
    for l in &cfg.phase_hints {
        engine.sat.set_phase(*l);
    }
    let mut trace = OmtTrace::default();
    let mut best: Option<(ArithModel, DeltaRational)> = None;
    let mut bound: Option<Literal> = None;
    let out_of_budget = |trace: &OmtTrace| {
        start.elapsed().as_secs_f64() > cfg.time_budget
            || cfg.max_iterations.is_some_and(|k| trace.iterations.len() >= k)
    };

    let status = loop {
        if out_of_budget(&trace) {
            break OmtStatus::BudgetExhausted;
        }
        let assumptions: Vec<Literal> = bound.into_iter().collect();
        let Some(eta) = engine.next_consistent(&assumptions, &mut trace)? else {
            break if best.is_some() { OmtStatus::Optimum } else { OmtStatus::Unsat };
        };
        let eta = eta.restricted(problem.cnf.num_atoms());
        let report = match cfg.strategy {
            ReductionStrategy::None => reduce_none(&problem.cnf, &eta)?,
            ReductionStrategy::Basic => reduce_basic(&problem.cnf, &eta, cfg.basic_filter)?,
            ReductionStrategy::Guided => reduce_guided(&problem.cnf, &eta, &problem.objective, &mut engine.lra)?,
        };
        if out_of_budget(&trace) {
            break OmtStatus::BudgetExhausted;
        }
        let mut lits = theory_literals(&report.reduced, &engine.atoms);
        lits.extend(bound);
        let r = engine.minimize(&lits, &cfg.lia)?;
        match r.status {
            OptStatus::Unbounded => {
                trace.total_s = start.elapsed().as_secs_f64();
                return Ok(OmtOutcome { status: OmtStatus::Unbounded, model: None, value: None, trace });
            }
            OptStatus::Infeasible => {
                trace.theory_conflicts += 1;
                engine.learn(r.core.iter().map(|l| !*l).collect());
                continue;
            }
            OptStatus::ResourceOut if r.model.is_none() => break OmtStatus::BudgetExhausted,
            OptStatus::Optimum | OptStatus::ResourceOut => {}
        }
        let value = r.value.clone().expect("optimum has a value");
        let model = engine.complete_model(r.model.clone().expect("optimum has a model"));
        let new_bound = Literal::pos(engine.intern_bound(&value));
        if let Some(old) = bound {
            engine.learn(vec![!new_bound, old]);
        }
        if cfg.learn_block_lemma {
            match block_lemma(&r, new_bound, bound) {
                Ok(clause) => {
                    engine.learn(clause);
                    trace.lemmas_learned += 1;
                }
                Err(_) => trace.lemmas_refused += 1,
            }
        }
        bound = Some(new_bound);
        trace.iterations.push(IterationRecord {
            index: trace.iterations.len() + 1,
            elapsed_s: start.elapsed().as_secs_f64(),
            ub: value.clone(),
            dropped: report.dropped,
            minimize_calls: report.minimize_calls + 1,
            approx_values: report.approx_values,
            reduced_size: report.reduced.len(),
        });
        best = Some((model, value));
    };
    trace.total_s = start.elapsed().as_secs_f64();
    let (model, value) = match best {
        Some((m, v)) => (Some(m), Some(v)),
        None => (None, None),
    };
    Ok(OmtOutcome { status, model, value, trace })
}

/// Plain lazy SMT: is `problem`'s formula satisfiable together with
/// `objective < ub`? Integrality is decided by full branch and bound.
pub fn satisfiable_below(problem: &Problem, ub: Option<&DeltaRational>) -> Result<bool> {
    let mut engine = Engine::new(problem, 0);
    let mut trace = OmtTrace::default();
    let assumptions: Vec<Literal> = ub.map(|u| Literal::pos(engine.intern_bound(u))).into_iter().collect();
    let full = BnbConfig { mode: BnbMode::Full, ..BnbConfig::default() };
    loop {
        let Some(eta) = engine.next_consistent(&assumptions, &mut trace)? else { return Ok(false) };
        if engine.int_vars.is_empty() {
            return Ok(true);
        }
        let mut lits = theory_literals(&eta.restricted(problem.cnf.num_atoms()), &engine.atoms);
        lits.extend_from_slice(&assumptions);
        let zero = LinearTerm::zero();
        let r = minimize_mixed(&mut engine.lra, &lits, &engine.atoms, &zero, &engine.int_vars, &full)?;
        match r.status {
            OptStatus::Infeasible => engine.learn(r.core.iter().map(|l| !*l).collect()),
            _ => return Ok(true),
        }
    }
}
