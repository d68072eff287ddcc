//! CDCL with two watched literals, first-UIP learning, VSIDS activities,
//! phase saving, Luby restarts and solving under assumptions.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::logic::{AtomId, Clause, Literal, TruthAssignment};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Value {
    True,
    False,
    Undef,
}

#[derive(Clone, Debug)]
struct ClauseData {
    lits: Vec<Literal>,
    learnt: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// Total assignment over every variable known to the solver.
    Sat(TruthAssignment),
    /// Subset of the assumptions that is already contradictory.
    Unsat(Vec<Literal>),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SatStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt_clauses: u64,
}

#[derive(Clone, Debug)]
pub struct SatSolver {
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Value>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Literal>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    seed: u64,
    pub stats: SatStats,
}

fn code(l: Literal) -> usize {
    2 * l.atom.index() + usize::from(!l.polarity)
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq as i32)
}

impl Default for SatSolver {
    fn default() -> Self {
        Self::new(0)
    }
}

impl SatSolver {
    /// `seed` perturbs the initial activities; seed 0 leaves them all zero.
    pub fn new(seed: u64) -> Self {
        SatSolver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            seed,
            stats: SatStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    /// Make sure variables `0..n` exist.
    pub fn ensure_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            let v = self.assigns.len();
            self.assigns.push(Value::Undef);
            self.level.push(0);
            self.reason.push(None);
            let jitter = if self.seed == 0 {
                0.0
            } else {
                SplitMix64::seed_from_u64(self.seed ^ (v as u64).wrapping_mul(0x2545_F491_4F6C_DD1D)).gen::<f64>() * 1e-3
            };
            self.activity.push(jitter);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
        }
    }

    /// Preferred polarity for the next decision on `lit`'s atom.
    pub fn set_phase(&mut self, lit: Literal) {
        self.ensure_vars(lit.atom.index() + 1);
        self.phase[lit.atom.index()] = lit.polarity;
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    fn value(&self, l: Literal) -> Value {
        match self.assigns[l.atom.index()] {
            Value::Undef => Value::Undef,
            Value::True if l.polarity => Value::True,
            Value::False if !l.polarity => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Literal, reason: Option<usize>) {
        let v = l.atom.index();
        self.assigns[v] = if l.polarity { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Add a permanent clause. Must be called between solves.
    pub fn add_clause(&mut self, clause: &[Literal]) {
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let max_var = clause.iter().map(|l| l.atom.index() + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        let mut lits: Vec<Literal> = Vec::with_capacity(clause.len());
        for &l in clause {
            match self.value(l) {
                Value::True => return,
                Value::False => {}
                Value::Undef => {
                    if lits.contains(&!l) {
                        return;
                    }
                    if !lits.contains(&l) {
                        lits.push(l);
                    }
                }
            }
        }
        match lits.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(lits[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(lits, false);
            }
        }
    }

    pub fn add_clauses<'a>(&mut self, clauses: impl IntoIterator<Item = &'a Clause>) {
        for c in clauses {
            self.add_clause(c);
        }
    }

    fn attach(&mut self, lits: Vec<Literal>, learnt: bool) -> usize {
        let idx = self.clauses.len();
        self.watches[code(!lits[0])].push(idx);
        self.watches[code(!lits[1])].push(idx);
        self.clauses.push(ClauseData { lits, learnt });
        idx
    }

    /// Unit propagation; returns a conflicting clause index.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            // clauses watching ¬p as one of their first two literals
            let mut ws = std::mem::take(&mut self.watches[code(p)]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let false_lit = !p;
                {
                    let lits = &mut self.clauses[ci].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[ci].lits[0];
                if self.value(first) == Value::True {
                    i += 1;
                    continue;
                }
                let len = self.clauses[ci].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[ci].lits[k];
                    if self.value(l) != Value::False {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[code(!l)].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if self.value(first) == Value::False {
                    conflict = Some(ci);
                    self.qhead = self.trail.len();
                    break;
                }
                self.enqueue(first, Some(ci));
                i += 1;
            }
            let rest = std::mem::take(&mut self.watches[code(p)]);
            ws.extend(rest);
            self.watches[code(p)] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis: learnt clause (asserting literal first)
    /// and backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Literal>, usize) {
        let mut learnt: Vec<Literal> = vec![Literal::pos(AtomId(0))];
        let mut path = 0usize;
        let mut p: Option<Literal> = None;
        let mut index = self.trail.len();
        loop {
            let lits = self.clauses[confl].lits.clone();
            let start = if p.is_some() { 1 } else { 0 };
            for &q in &lits[start..] {
                let v = q.atom.index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].atom.index()] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            self.seen[pl.atom.index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.atom.index()].expect("implied literal has a reason");
            // reason clauses keep the implied literal first
            let lits = &mut self.clauses[confl].lits;
            if lits[0] != pl {
                let pos = lits.iter().position(|l| *l == pl).unwrap();
                lits.swap(0, pos);
            }
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.atom.index()] = false;
        }
        let bt = if learnt.len() == 1 {
            0
        } else {
            let (mut max_i, mut max_lvl) = (1, self.level[learnt[1].atom.index()]);
            for (i, l) in learnt.iter().enumerate().skip(2) {
                let lvl = self.level[l.atom.index()];
                if lvl > max_lvl {
                    max_i = i;
                    max_lvl = lvl;
                }
            }
            learnt.swap(1, max_i);
            max_lvl
        };
        (learnt, bt)
    }

    /// Assumptions responsible for assumption `a` being false, `a` included.
    fn analyze_final(&mut self, a: Literal) -> Vec<Literal> {
        let mut core = vec![a];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[a.atom.index()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.atom.index();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => core.push(l),
                Some(ci) => {
                    for &q in &self.clauses[ci].lits[1..] {
                        if self.level[q.atom.index()] > 0 {
                            self.seen[q.atom.index()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[a.atom.index()] = false;
        core
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let mark = self.trail_lim[lvl];
        for i in (mark..self.trail.len()).rev() {
            let v = self.trail[i].atom.index();
            self.phase[v] = self.trail[i].polarity;
            self.assigns[v] = Value::Undef;
            self.reason[v] = None;
        }
        self.trail.truncate(mark);
        self.trail_lim.truncate(lvl);
        self.qhead = self.trail.len();
    }

    fn pick_branch(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.assigns.len() {
            if self.assigns[v] != Value::Undef {
                continue;
            }
            if best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best
    }

    /// Solve the clause set under `assumptions`.
    pub fn solve_with_assumptions(&mut self, assumptions: &[Literal]) -> SatResult {
        let max_var = assumptions.iter().map(|l| l.atom.index() + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        if !self.ok {
            return SatResult::Unsat(Vec::new());
        }
        let mut restarts = 0u64;
        let result = loop {
            let budget = (luby(2.0, restarts) * 100.0) as u64;
            match self.search(assumptions, budget) {
                Some(r) => break r,
                None => {
                    restarts += 1;
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                }
            }
        };
        self.cancel_until(0);
        result
    }

    fn search(&mut self, assumptions: &[Literal], budget: u64) -> Option<SatResult> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SatResult::Unsat(Vec::new()));
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                self.stats.learnt_clauses += 1;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let ci = self.attach(learnt, true);
                    self.enqueue(asserting, Some(ci));
                }
                self.var_inc /= 0.95;
                continue;
            }
            if conflicts >= budget {
                return None;
            }
            let dl = self.decision_level();
            let next = if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.value(a) {
                    Value::True => {
                        // already implied: open an empty level to keep levels aligned
                        self.trail_lim.push(self.trail.len());
                        continue;
                    }
                    Value::False => {
                        let core = self.analyze_final(a);
                        return Some(SatResult::Unsat(dedup(core)));
                    }
                    Value::Undef => a,
                }
            } else {
                self.stats.decisions += 1;
                match self.pick_branch() {
                    None => return Some(SatResult::Sat(self.model())),
                    Some(v) => Literal::new(AtomId(v as u32), self.phase[v]),
                }
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, None);
        }
    }

    fn model(&self) -> TruthAssignment {
        TruthAssignment::from_literals(
            self.assigns
                .iter()
                .enumerate()
                .map(|(v, val)| Literal::new(AtomId(v as u32), *val == Value::True)),
        )
    }

    pub fn num_learnt(&self) -> usize {
        self.clauses.iter().filter(|c| c.learnt).count()
    }
}

fn dedup(mut v: Vec<Literal>) -> Vec<Literal> {
    let mut out = Vec::with_capacity(v.len());
    for l in v.drain(..) {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}
