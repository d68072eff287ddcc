use std::fmt::Write;

use num_traits::{One, Signed, Zero};

use super::{Problem, VarType};
use crate::logic::{Atom, Literal, Rel};
use crate::{LinearTerm, Rational};

fn rational(q: &Rational) -> String {
    let mag = if q.is_integer() { q.numer().abs().to_string() } else { format!("(/ {} {})", q.numer().abs(), q.denom()) };
    if q.is_negative() { format!("(- {mag})") } else { mag }
}

fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple { name.to_string() } else { format!("|{name}|") }
}

/// SMT-LIB text of a linear term, constant included.
pub fn render_term(t: &LinearTerm, name: &dyn Fn(crate::VarId) -> String) -> String {
    let mut parts: Vec<String> = t
        .coeffs()
        .iter()
        .map(|(v, c)| {
            let v = symbol(&name(*v));
            if c.is_one() {
                v
            } else if (-c).is_one() {
                format!("(- {v})")
            } else {
                format!("(* {} {v})", rational(c))
            }
        })
        .collect();
    if !t.constant_part().is_zero() || parts.is_empty() {
        parts.push(rational(t.constant_part()));
    }
    if parts.len() == 1 { parts.pop().unwrap() } else { format!("(+ {})", parts.join(" ")) }
}

fn literal(p: &Problem, l: Literal) -> String {
    let name = |v| p.var_name(v).to_string();
    let atom = match p.cnf.atoms.get(l.atom) {
        Atom::Bool(b) => symbol(b),
        Atom::Linear(a) => {
            let rel = match a.rel {
                Rel::Le => "<=",
                Rel::Lt => "<",
                Rel::Eq => "=",
            };
            let lhs = render_term(&a.term.homogeneous(), &name);
            format!("({rel} {lhs} {})", rational(&-a.term.constant_part().clone()))
        }
    };
    if l.polarity { atom } else { format!("(not {atom})") }
}

/// Emit `p` in the input format. Clauses are printed one per `assert`.
pub fn print(p: &Problem) -> String {
    let mut out = String::new();
    if !p.name.is_empty() {
        writeln!(out, "; {}", p.name).unwrap();
    }
    let logic = p.logic.clone().unwrap_or_else(|| if p.has_integers() { "QF_LIRA" } else { "QF_LRA" }.into());
    writeln!(out, "(set-logic {logic})").unwrap();
    for (i, n) in p.var_names.iter().enumerate() {
        let sort = match p.var_types[&crate::VarId(i as u32)] {
            VarType::Real => "Real",
            VarType::Int => "Int",
        };
        writeln!(out, "(declare-const {} {sort})", symbol(n)).unwrap();
    }
    for id in p.cnf.atoms.ids() {
        if let Atom::Bool(b) = p.cnf.atoms.get(id) {
            writeln!(out, "(declare-const {} Bool)", symbol(b)).unwrap();
        }
    }
    for c in &p.cnf.clauses {
        let body = match c.as_slice() {
            [] => "false".to_string(),
            [l] => literal(p, *l),
            ls => format!("(or {})", ls.iter().map(|l| literal(p, *l)).collect::<Vec<_>>().join(" ")),
        };
        writeln!(out, "(assert {body})").unwrap();
    }
    let name = |v| p.var_name(v).to_string();
    if p.maximize {
        writeln!(out, "(maximize {})", render_term(&p.objective.negated(), &name)).unwrap();
    } else {
        writeln!(out, "(minimize {})", render_term(&p.objective, &name)).unwrap();
    }
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse, tests::TWO_CLAUSES};
    use super::*;
    use crate::logic::RawRel;
    use crate::frontend::{Formula, ProblemBuilder};
    use proptest::prelude::*;

    fn shape(p: &Problem) -> Vec<Vec<(Atom, bool)>> {
        p.cnf
            .clauses
            .iter()
            .map(|c| c.iter().map(|l| (p.cnf.atoms.get(l.atom).clone(), l.polarity)).collect())
            .collect()
    }

    fn same(a: &Problem, b: &Problem) {
        assert_eq!(shape(a), shape(b));
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.maximize, b.maximize);
        assert_eq!(a.var_names, b.var_names);
        assert_eq!(a.var_types, b.var_types);
    }

    #[test]
    fn round_trip_example() {
        let p = parse(TWO_CLAUSES).unwrap();
        let text = print(&p);
        same(&p, &parse(&text).unwrap());
        assert_eq!(text, print(&parse(&text).unwrap()));
    }

    #[test]
    fn round_trip_with_aux_and_quoting() {
        let p = parse(
            "(declare-const |a b| Real)(declare-const b Bool)(declare-const k Int)
             (assert (or (and (<= |a b| 1/2) b) (and (> k 3) (not b))))
             (assert false)
             (maximize (- (/ |a b| 3) k 7))",
        )
        .unwrap();
        same(&p, &parse(&print(&p)).unwrap());
    }

    fn arb_problem() -> impl Strategy<Value = Problem> {
        let coeff = -5i64..=5;
        let atom = (prop::collection::vec(coeff.clone(), 3), coeff.clone(), 0usize..5);
        let clause = prop::collection::vec((atom, any::<bool>()), 1..4);
        (prop::collection::vec(clause, 0..5), prop::collection::vec(coeff, 3), any::<bool>()).prop_map(
            |(clauses, obj, max)| {
                let mut b = ProblemBuilder::new("rt");
                let vs = [
                    b.declare("x", VarType::Real),
                    b.declare("y", VarType::Int),
                    b.declare("z", VarType::Real),
                ];
                let term = |cs: &[i64], k: i64| {
                    LinearTerm::from_terms(vs.iter().zip(cs).map(|(v, c)| (*v, Rational::from_integer((*c).into()))), Rational::from_integer(k.into()))
                };
                for c in clauses {
                    let lits = c
                        .into_iter()
                        .map(|((cs, k, r), pol)| {
                            let rel = [RawRel::Le, RawRel::Lt, RawRel::Ge, RawRel::Gt, RawRel::Eq][r];
                            let f = b.relation(&term(&cs, 0), rel, &LinearTerm::constant(Rational::from_integer(k.into())));
                            if pol { f } else { f.negate() }
                        })
                        .collect();
                    b.assert(&Formula::Or(lits));
                }
                let t = term(&obj, 1);
                if max { b.maximize(t).unwrap() } else { b.minimize(t).unwrap() }
                b.build().unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn printed_problems_parse_back(p in arb_problem()) {
            let back = parse(&print(&p)).unwrap();
            same(&p, &back);
            prop_assert!(back.cnf.atoms.ids().all(|a| p.cnf.atoms.lookup(back.cnf.atoms.get(a)).is_some()));
        }
    }
}
