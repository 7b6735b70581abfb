//! SMT-LIB2 export and parsing of solver responses.
//!
//! State variables are declared as `x1 … xn`. The zero variable becomes a
//! free variable `z0`; difference constraints are shift invariant, so models
//! are normalized by subtracting its value rather than pinning it.

use std::fmt::Write;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::formula::{BoolFormula, DlAtom, DlVar, Rel};
use crate::maxplus::{parse_rational, Rational};

use super::{Model, SolveResult};

const ZERO_NAME: &str = "z0";

fn var_name(v: DlVar) -> String {
    match v {
        DlVar::Zero => ZERO_NAME.to_string(),
        DlVar::X(i) => format!("x{}", i + 1),
    }
}

fn number(q: Rational) -> String {
    let abs = q.abs();
    let body = if abs.is_integer() {
        abs.numer().to_string()
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn atom(a: &DlAtom) -> String {
    let op = match a.rel {
        Rel::Ge => ">=",
        Rel::Gt => ">",
    };
    format!("({op} (- {} {}) {})", var_name(a.lhs), var_name(a.rhs), number(a.bound))
}

fn term(f: &BoolFormula, out: &mut String) {
    match f {
        BoolFormula::True => out.push_str("true"),
        BoolFormula::False => out.push_str("false"),
        BoolFormula::Atom(a) => out.push_str(&atom(a)),
        BoolFormula::Not(inner) => {
            out.push_str("(not ");
            term(inner, out);
            out.push(')');
        }
        BoolFormula::And(parts) | BoolFormula::Or(parts) => {
            out.push_str(if matches!(f, BoolFormula::And(_)) { "(and" } else { "(or" });
            for p in parts {
                out.push(' ');
                term(p, out);
            }
            out.push(')');
        }
    }
}

/// A complete script: declarations, one assertion, `check-sat`, `get-model`.
pub fn to_smtlib(f: &BoolFormula) -> String {
    to_smtlib_in(f, 0)
}

/// As [`to_smtlib`], declaring at least `dim` state variables.
pub fn to_smtlib_in(f: &BoolFormula, dim: usize) -> String {
    let mut s = String::from("(set-logic QF_RDL)\n");
    for i in 0..dim.max(f.var_count()) {
        writeln!(s, "(declare-fun x{} () Real)", i + 1).expect("string write");
    }
    if f.mentions_zero() {
        writeln!(s, "(declare-fun {ZERO_NAME} () Real)").expect("string write");
    }
    s.push_str("(assert ");
    term(f, &mut s);
    s.push_str(")\n(check-sat)\n(get-model)\n");
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_string = false;
    for ch in text.chars() {
        if in_string {
            cur.push(ch);
            if ch == '"' {
                in_string = false;
            }
            continue;
        }
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            '"' => {
                cur.push(ch);
                in_string = true;
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_sexps(tokens: &[String]) -> Result<Vec<Sexp>> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in tokens {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().filter(|_| !stack.is_empty());
                let done = done.ok_or_else(|| Error::External("unbalanced ')' in solver output".into()))?;
                stack.last_mut().expect("outer level").push(Sexp::List(done));
            }
            _ => stack.last_mut().expect("outer level").push(Sexp::Atom(t.clone())),
        }
    }
    if stack.len() != 1 {
        return Err(Error::External("unbalanced '(' in solver output".into()));
    }
    Ok(stack.pop().expect("outer level"))
}

fn decimal(s: &str) -> Option<Rational> {
    if let Some(q) = parse_rational(s) {
        return Some(q);
    }
    let (int, frac) = s.split_once('.')?;
    let digits = frac.trim_end_matches('?');
    let scale = 10i64.checked_pow(u32::try_from(digits.len()).ok()?)?;
    let whole: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let part: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    Some(Rational::from_integer(whole) + Rational::new(part, scale))
}

fn value(e: &Sexp) -> Option<Rational> {
    match e {
        Sexp::Atom(a) => decimal(a),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => value(x).map(|v| -v),
            [Sexp::Atom(op), x, y] if op == "-" => Some(value(x)? - value(y)?),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = value(y)?;
                (!d.is_zero()).then(|| value(x).map(|n| n / d)).flatten()
            }
            [Sexp::Atom(op), rest @ ..] if op == "+" => {
                rest.iter().map(value).try_fold(Rational::zero(), |acc, v| Some(acc + v?))
            }
            _ => None,
        },
    }
}

fn collect_defs(e: &Sexp, out: &mut Vec<(String, Rational)>) -> Result<()> {
    let Sexp::List(items) = e else { return Ok(()) };
    match items.as_slice() {
        [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), _sort, body] if kw == "define-fun" && args.is_empty() => {
            let v = value(body).ok_or_else(|| Error::External(format!("cannot read value of {name}")))?;
            out.push((name.clone(), v));
        }
        _ => {
            for item in items {
                collect_defs(item, out)?;
            }
        }
    }
    Ok(())
}

/// Read `sat`/`unsat` and, for `sat`, the model. Values are shifted so the
/// zero variable is 0; undeclared state variables default to 0.
pub fn parse_response(text: &str, dim: usize) -> Result<SolveResult> {
    let items = parse_sexps(&tokenize(text))?;
    let verdict = items.iter().find_map(|e| match e {
        Sexp::Atom(a) if a == "sat" || a == "unsat" || a == "unknown" => Some(a.as_str()),
        _ => None,
    });
    match verdict {
        Some("unsat") => return Ok(SolveResult::Unsat),
        Some("sat") => {}
        Some(other) => return Err(Error::External(format!("solver answered {other}"))),
        None => return Err(Error::External(format!("no verdict in solver output: {}", text.trim()))),
    }
    let mut defs = Vec::new();
    for e in &items {
        collect_defs(e, &mut defs)?;
    }
    let zero = defs
        .iter()
        .find(|(n, _)| n == ZERO_NAME)
        .map_or(Rational::zero(), |(_, v)| *v);
    let mut values = vec![Rational::zero(); dim];
    for (name, v) in defs {
        let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) else { continue };
        if idx == 0 {
            continue;
        }
        if idx > values.len() {
            values.resize(idx, Rational::zero());
        }
        values[idx - 1] = v - zero;
    }
    Ok(SolveResult::Sat(Model::new(values)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn atoms_and_numbers() {
        let f: BoolFormula = "x1 - x2 >= 1".parse().unwrap();
        let s = to_smtlib(&f);
        assert!(s.contains("(assert (>= (- x1 x2) 1))"));
        assert!(s.starts_with("(set-logic QF_RDL)\n(declare-fun x1 () Real)\n(declare-fun x2 () Real)\n"));
        assert_eq!(number(q(-3, 1)), "(- 3)");
        assert_eq!(number(q(1, 2)), "(/ 1 2)");
        assert_eq!(number(q(-7, 3)), "(- (/ 7 3))");
    }

    #[test]
    fn zero_and_connectives() {
        let f: BoolFormula = "x1 >= 5 | !(x2 - x1 > -1/2)".parse().unwrap();
        let s = to_smtlib(&f.nnf());
        assert!(s.contains("(declare-fun z0 () Real)"));
        assert!(s.contains("(assert (or (>= (- x1 z0) 5) (>= (- x1 x2) (/ 1 2))))"));
        assert!(to_smtlib(&BoolFormula::True).contains("(assert true)"));
    }

    #[test]
    fn deterministic_text() {
        let f: BoolFormula = "(x1 - x3 >= 5 | x2 - x3 >= 5) & x2 < 7".parse().unwrap();
        assert_eq!(to_smtlib(&f), to_smtlib(&f.clone()));
    }

    #[test]
    fn responses() {
        assert_eq!(parse_response("unsat\n", 2).unwrap(), SolveResult::Unsat);
        let z3 = "sat\n(\n  (define-fun x2 () Real\n    (- (/ 1.0 2.0)))\n  (define-fun z0 () Real\n    1.0)\n  (define-fun x1 () Real\n    3.5)\n)\n";
        match parse_response(z3, 2).unwrap() {
            SolveResult::Sat(m) => assert_eq!(m.values(), &[q(5, 2), q(-3, 2)]),
            SolveResult::Unsat => panic!(),
        }
        let old = "sat (model (define-fun x1 () Real 4) )";
        match parse_response(old, 3).unwrap() {
            SolveResult::Sat(m) => assert_eq!(m.values(), &[q(4, 1), q(0, 1), q(0, 1)]),
            SolveResult::Unsat => panic!(),
        }
        assert!(parse_response("unknown", 1).is_err());
        assert!(parse_response("(error \"boom\")", 1).is_err());
    }
}
