//! Problem files: an SMT-LIB subset with one objective.
//!
//! ```text
//! (set-logic QF_LRA)
//! (declare-const x Real)
//! (declare-const y Real)
//! (assert (or (<= (- (* 2 x) (* 3 y)) 6) (<= x 4)))
//! (minimize (* (- 2) x))
//! (check-sat)
//! ```

mod cnf;
mod print;
mod sexpr;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use num_traits::{One, Zero};

pub use cnf::{cnf_convert, CnfBuilder, Formula};
pub use print::{print, render_term};
pub use sexpr::{read_all, Pos, SExpr};

use crate::error::{Error, Result};
use crate::expr::VarId;
use crate::logic::{eval_literal, normalize_atom, Atom, CnfFormula, LinearAtom, RawRel, Rel};
use crate::num::parse_rational;
use crate::{ArithModel, DeltaRational, LinearTerm, Rational};
use sexpr::syntax;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarType {
    Real,
    Int,
}

/// An objective and a formula in CNF over interned atoms.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub logic: Option<String>,
    pub cnf: CnfFormula,
    /// Always minimized; a `maximize` objective is stored negated.
    pub objective: LinearTerm,
    pub maximize: bool,
    pub var_names: Vec<String>,
    pub var_types: BTreeMap<VarId, VarType>,
}

impl Problem {
    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_names.iter().position(|n| n == name).map(|i| VarId(i as u32))
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.index()]
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn is_integer(&self, v: VarId) -> bool {
        self.var_types.get(&v) == Some(&VarType::Int)
    }

    pub fn integer_vars(&self) -> BTreeSet<VarId> {
        self.var_types.iter().filter(|(_, t)| **t == VarType::Int).map(|(v, _)| *v).collect()
    }

    pub fn has_integers(&self) -> bool {
        self.var_types.values().any(|t| *t == VarType::Int)
    }

    /// Does `model` satisfy every clause. Boolean atoms are free, so a clause
    /// mentioning one is taken as satisfied.
    pub fn satisfied_by(&self, model: &ArithModel) -> Result<bool> {
        for c in &self.cnf.clauses {
            let mut any = false;
            for l in c {
                let holds = if self.cnf.atoms.is_theory(l.atom) {
                    eval_literal(*l, &self.cnf.atoms, model)?
                } else {
                    true
                };
                if holds {
                    any = true;
                    break;
                }
            }
            if !any {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Objective value in the user's orientation.
    pub fn user_value(&self, internal: &DeltaRational) -> DeltaRational {
        if self.maximize {
            -internal.clone()
        } else {
            internal.clone()
        }
    }
}

/// Incremental construction of a [`Problem`]; the parser drives one.
#[derive(Debug)]
pub struct ProblemBuilder {
    name: String,
    logic: Option<String>,
    cnf: CnfFormula,
    clausifier: CnfBuilder,
    names: HashMap<String, Decl>,
    var_names: Vec<String>,
    var_types: BTreeMap<VarId, VarType>,
    objective: Option<(LinearTerm, bool)>,
}

#[derive(Clone, Copy, Debug)]
enum Decl {
    Arith(VarId),
    Bool(crate::logic::AtomId),
}

impl ProblemBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ProblemBuilder {
            name: name.into(),
            logic: None,
            cnf: CnfFormula::default(),
            clausifier: CnfBuilder::new(),
            names: HashMap::new(),
            var_names: Vec::new(),
            var_types: BTreeMap::new(),
            objective: None,
        }
    }

    pub fn set_logic(&mut self, logic: impl Into<String>) {
        self.logic = Some(logic.into());
    }

    /// Declare an arithmetic variable; redeclaring returns the existing id.
    pub fn declare(&mut self, name: &str, ty: VarType) -> VarId {
        if let Some(Decl::Arith(v)) = self.names.get(name) {
            return *v;
        }
        let v = VarId(self.var_names.len() as u32);
        self.var_names.push(name.to_string());
        self.var_types.insert(v, ty);
        self.names.insert(name.to_string(), Decl::Arith(v));
        v
    }

    pub fn declare_bool(&mut self, name: &str) -> Formula {
        let id = self.cnf.atoms.intern(Atom::Bool(name.to_string()));
        self.names.insert(name.to_string(), Decl::Bool(id));
        Formula::atom(id)
    }

    /// `lhs rel rhs` as a formula. Constant relations fold to true/false and
    /// equalities split into two non-strict atoms.
    pub fn relation(&mut self, lhs: &LinearTerm, rel: RawRel, rhs: &LinearTerm) -> Formula {
        let atom = normalize_atom(lhs, rel, rhs);
        if atom.term.is_constant() {
            return if atom.rel == Rel::Le { Formula::True } else { Formula::False };
        }
        if atom.rel == Rel::Eq {
            let up = LinearAtom { term: atom.term.clone(), rel: Rel::Le };
            let down = LinearAtom { term: atom.term.negated(), rel: Rel::Le };
            return Formula::And(vec![
                Formula::atom(self.cnf.atoms.intern_linear(up)),
                Formula::atom(self.cnf.atoms.intern_linear(down)),
            ]);
        }
        Formula::atom(self.cnf.atoms.intern_linear(atom))
    }

    pub fn assert(&mut self, f: &Formula) {
        self.clausifier.add(&mut self.cnf, f);
    }

    pub fn minimize(&mut self, t: LinearTerm) -> Result<()> {
        self.set_objective(t, false)
    }

    pub fn maximize(&mut self, t: LinearTerm) -> Result<()> {
        self.set_objective(t.negated(), true)
    }

    fn set_objective(&mut self, t: LinearTerm, maximize: bool) -> Result<()> {
        if self.objective.is_some() {
            return Err(Error::MultipleObjectives);
        }
        self.objective = Some((t, maximize));
        Ok(())
    }

    pub fn build(self) -> Result<Problem> {
        let (objective, maximize) = self.objective.ok_or(Error::MissingObjective)?;
        Ok(Problem {
            name: self.name,
            logic: self.logic,
            cnf: self.cnf,
            objective,
            maximize,
            var_names: self.var_names,
            var_types: self.var_types,
        })
    }
}

pub fn parse(text: &str) -> Result<Problem> {
    parse_named(text, "")
}

pub fn parse_named(text: &str, name: &str) -> Result<Problem> {
    let mut p = Parser { b: ProblemBuilder::new(name), in_objective: false };
    for cmd in read_all(text)? {
        p.command(&cmd)?;
    }
    p.b.build()
}

/// Parse a file, naming the problem after the file stem.
pub fn parse_file(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_named(&text, &name)
}

struct Parser {
    b: ProblemBuilder,
    /// Undeclared symbols in the objective are taken as fresh reals.
    in_objective: bool,
}

fn head(e: &SExpr) -> Option<(&str, &[SExpr])> {
    match e {
        SExpr::List(items, _) => items.first()?.as_symbol().map(|h| (h, &items[1..])),
        SExpr::Symbol(..) => None,
    }
}

fn arity(e: &SExpr, args: &[SExpr], n: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(syntax(e.pos(), format!("expected {n} argument(s), found {}", args.len())))
    }
}

impl Parser {
    fn command(&mut self, e: &SExpr) -> Result<()> {
        let Some((cmd, args)) = head(e) else {
            return Err(syntax(e.pos(), "expected a command"));
        };
        match cmd {
            "set-logic" => {
                arity(e, args, 1)?;
                let logic = args[0].as_symbol().ok_or_else(|| syntax(args[0].pos(), "expected a logic name"))?;
                self.b.set_logic(logic);
            }
            "declare-const" => {
                arity(e, args, 2)?;
                self.declare(&args[0], &args[1])?;
            }
            "declare-fun" => {
                arity(e, args, 3)?;
                if !matches!(&args[1], SExpr::List(v, _) if v.is_empty()) {
                    return Err(syntax(args[1].pos(), "only nullary functions are supported"));
                }
                self.declare(&args[0], &args[2])?;
            }
            "assert" => {
                arity(e, args, 1)?;
                let f = self.formula(&args[0])?;
                self.b.assert(&f);
            }
            "minimize" | "maximize" => {
                let Some(t) = args.first() else {
                    return Err(syntax(e.pos(), "missing objective term"));
                };
                self.in_objective = true;
                let t = self.term(t);
                self.in_objective = false;
                let t = t?;
                if cmd == "minimize" { self.b.minimize(t)? } else { self.b.maximize(t)? }
            }
            "check-sat" | "set-info" | "set-option" | "get-model" | "get-value" | "get-objectives" | "exit" => {}
            other => return Err(syntax(e.pos(), format!("unsupported command `{other}`"))),
        }
        Ok(())
    }

    fn declare(&mut self, name: &SExpr, sort: &SExpr) -> Result<()> {
        let n = name.as_symbol().ok_or_else(|| syntax(name.pos(), "expected a symbol"))?;
        if self.b.names.contains_key(n) {
            return Err(syntax(name.pos(), format!("`{n}` is already declared")));
        }
        match sort.as_symbol() {
            Some("Real") => {
                self.b.declare(n, VarType::Real);
            }
            Some("Int") => {
                self.b.declare(n, VarType::Int);
            }
            Some("Bool") => {
                self.b.declare_bool(n);
            }
            _ => return Err(syntax(sort.pos(), "expected sort Real, Int or Bool")),
        }
        Ok(())
    }

    fn is_formula(&self, e: &SExpr) -> bool {
        match e {
            SExpr::Symbol(s, _) => matches!(s.as_str(), "true" | "false") || matches!(self.b.names.get(s), Some(Decl::Bool(_))),
            SExpr::List(..) => matches!(
                head(e),
                Some(("not" | "and" | "or" | "=>" | "<=" | "<" | ">=" | ">" | "=", _))
            ),
        }
    }

    fn formula(&mut self, e: &SExpr) -> Result<Formula> {
        match e {
            SExpr::Symbol(s, pos) => match (s.as_str(), self.b.names.get(s)) {
                ("true", _) => Ok(Formula::True),
                ("false", _) => Ok(Formula::False),
                (_, Some(Decl::Bool(id))) => Ok(Formula::atom(*id)),
                (_, Some(Decl::Arith(_))) => Err(syntax(*pos, format!("`{s}` is not a Boolean"))),
                (_, None) => Err(Error::UndeclaredVariable { line: pos.line, col: pos.col, name: s.clone() }),
            },
            SExpr::List(..) => {
                let Some((op, args)) = head(e) else {
                    return Err(syntax(e.pos(), "expected a formula"));
                };
                let rel = match op {
                    "not" => {
                        arity(e, args, 1)?;
                        return Ok(self.formula(&args[0])?.negate());
                    }
                    "and" | "or" => {
                        let fs = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>>>()?;
                        return Ok(if op == "and" { Formula::And(fs) } else { Formula::Or(fs) });
                    }
                    "=>" => {
                        arity(e, args, 2)?;
                        let a = self.formula(&args[0])?;
                        let b = self.formula(&args[1])?;
                        return Ok(Formula::Or(vec![a.negate(), b]));
                    }
                    "=" if args.first().is_some_and(|a| self.is_formula(a)) => {
                        let fs = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>>>()?;
                        let iffs = fs
                            .windows(2)
                            .map(|w| {
                                Formula::Or(vec![
                                    Formula::And(vec![w[0].clone(), w[1].clone()]),
                                    Formula::And(vec![w[0].clone().negate(), w[1].clone().negate()]),
                                ])
                            })
                            .collect();
                        return Ok(Formula::And(iffs));
                    }
                    "<=" => RawRel::Le,
                    "<" => RawRel::Lt,
                    ">=" => RawRel::Ge,
                    ">" => RawRel::Gt,
                    "=" => RawRel::Eq,
                    other => return Err(syntax(e.pos(), format!("unknown connective `{other}`"))),
                };
                if args.len() < 2 {
                    return Err(syntax(e.pos(), "relation needs at least two arguments"));
                }
                let ts = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>>>()?;
                let parts: Vec<Formula> = ts.windows(2).map(|w| self.b.relation(&w[0], rel, &w[1])).collect();
                Ok(if parts.len() == 1 { parts.into_iter().next().unwrap() } else { Formula::And(parts) })
            }
        }
    }

    fn term(&mut self, e: &SExpr) -> Result<LinearTerm> {
        match e {
            SExpr::Symbol(s, pos) => {
                if let Some(q) = s.chars().next().filter(|c| c.is_ascii_digit() || *c == '-').and(parse_rational(s)) {
                    return Ok(LinearTerm::constant(q));
                }
                match self.b.names.get(s) {
                    Some(Decl::Arith(v)) => Ok(LinearTerm::var(*v)),
                    Some(Decl::Bool(_)) => Err(syntax(*pos, format!("`{s}` is not arithmetic"))),
                    None if self.in_objective => Ok(LinearTerm::var(self.b.declare(s, VarType::Real))),
                    None => Err(Error::UndeclaredVariable { line: pos.line, col: pos.col, name: s.clone() }),
                }
            }
            SExpr::List(..) => {
                let Some((op, args)) = head(e) else {
                    return Err(syntax(e.pos(), "expected a term"));
                };
                let ts = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>>>()?;
                let pos = e.pos();
                match op {
                    "+" => Ok(ts.iter().fold(LinearTerm::zero(), |acc, t| acc.plus(t))),
                    "-" => match ts.split_first() {
                        None => Err(syntax(pos, "`-` needs an argument")),
                        Some((t, [])) => Ok(t.negated()),
                        Some((t, rest)) => Ok(rest.iter().fold(t.clone(), |acc, u| acc.minus(u))),
                    },
                    "*" => {
                        let mut k = Rational::one();
                        let mut var_part: Option<LinearTerm> = None;
                        for t in ts {
                            if t.is_constant() {
                                k *= t.constant_part();
                            } else if var_part.is_some() {
                                return Err(Error::NonLinear { line: pos.line, col: pos.col });
                            } else {
                                var_part = Some(t);
                            }
                        }
                        Ok(match var_part {
                            Some(t) => t.scaled(&k),
                            None => LinearTerm::constant(k),
                        })
                    }
                    "/" => {
                        let Some((t, rest)) = ts.split_first() else {
                            return Err(syntax(pos, "`/` needs arguments"));
                        };
                        let mut acc = t.clone();
                        for d in rest {
                            if !d.is_constant() {
                                return Err(Error::NonLinear { line: pos.line, col: pos.col });
                            }
                            if d.constant_part().is_zero() {
                                return Err(syntax(pos, "division by zero"));
                            }
                            acc = acc.scaled(&d.constant_part().recip());
                        }
                        Ok(acc)
                    }
                    "to_real" => {
                        arity(e, args, 1)?;
                        Ok(ts.into_iter().next().unwrap())
                    }
                    other => Err(syntax(pos, format!("unknown function `{other}`"))),
                }
            }
        }
    }
}
