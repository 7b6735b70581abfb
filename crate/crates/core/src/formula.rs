//! Boolean combinations of difference atoms `x_i − x_j ⋈ c`.
//!
//! A distinguished [`DlVar::Zero`] stands for the constant 0, so unary
//! bounds `x_i ⋈ c` are ordinary difference atoms `x_i − zero ⋈ c`.
//!
//! Text form (also the region-file grammar):
//!
//! ```text
//! formula := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | '(' formula ')' | 'true' | 'false' | atom
//! atom    := xI ['-' xJ] ('>=' | '>' | '<=' | '<') const
//! const   := ['-'] int ['/' int]
//! ```
//!
//! Variables are printed 1-based (`x1`, `x2`, …) and stored 0-based.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::maxplus::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DlVar {
    Zero,
    X(usize),
}

impl DlVar {
    fn value(self, x: &[Rational]) -> Rational {
        match self {
            DlVar::Zero => Rational::zero(),
            DlVar::X(i) => x[i],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Ge,
    Gt,
}

impl Rel {
    pub fn is_strict(self) -> bool {
        self == Rel::Gt
    }

    pub fn holds(self, lhs: Rational, rhs: Rational) -> bool {
        match self {
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }
}

/// `lhs − rhs rel bound`, with `lhs ≠ rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DlAtom {
    pub lhs: DlVar,
    pub rhs: DlVar,
    pub rel: Rel,
    pub bound: Rational,
}

impl DlAtom {
    pub fn new(lhs: DlVar, rhs: DlVar, rel: Rel, bound: Rational) -> Self {
        assert_ne!(lhs, rhs, "difference atom over a single variable");
        Self { lhs, rhs, rel, bound }
    }

    /// ¬(a − b ≥ c) is (b − a > −c); ¬(a − b > c) is (b − a ≥ −c).
    pub fn negate(&self) -> Self {
        let rel = match self.rel {
            Rel::Ge => Rel::Gt,
            Rel::Gt => Rel::Ge,
        };
        Self {
            lhs: self.rhs,
            rhs: self.lhs,
            rel,
            bound: -self.bound,
        }
    }

    /// Evaluate under `x` (indexed by state variable; zero is 0).
    pub fn holds(&self, x: &[Rational]) -> bool {
        self.rel
            .holds(self.lhs.value(x) - self.rhs.value(x), self.bound)
    }

    pub fn max_var(&self) -> Option<usize> {
        [self.lhs, self.rhs]
            .into_iter()
            .filter_map(|v| match v {
                DlVar::X(i) => Some(i),
                DlVar::Zero => None,
            })
            .max()
    }

    pub fn mentions_zero(&self) -> bool {
        self.lhs == DlVar::Zero || self.rhs == DlVar::Zero
    }
}

impl fmt::Display for DlAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lhs, self.rhs) {
            (DlVar::X(i), DlVar::X(j)) => write!(
                f,
                "x{} - x{} {} {}",
                i + 1,
                j + 1,
                self.rel.symbol(),
                self.bound
            ),
            (DlVar::X(i), DlVar::Zero) => {
                write!(f, "x{} {} {}", i + 1, self.rel.symbol(), self.bound)
            }
            (DlVar::Zero, DlVar::X(j)) => {
                let op = if self.rel.is_strict() { "<" } else { "<=" };
                write!(f, "x{} {} {}", j + 1, op, -self.bound)
            }
            (DlVar::Zero, DlVar::Zero) => unreachable!("atom over zero alone"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolFormula {
    True,
    False,
    Atom(DlAtom),
    Not(Box<BoolFormula>),
    And(Vec<BoolFormula>),
    Or(Vec<BoolFormula>),
}

impl BoolFormula {
    /// `lhs − rhs rel bound`, folded to a constant when both sides coincide.
    pub fn diff(lhs: DlVar, rhs: DlVar, rel: Rel, bound: Rational) -> Self {
        if lhs == rhs {
            return Self::constant(rel.holds(Rational::zero(), bound));
        }
        BoolFormula::Atom(DlAtom::new(lhs, rhs, rel, bound))
    }

    /// `x_i − x_j rel bound` over state variables.
    pub fn vars(i: usize, j: usize, rel: Rel, bound: Rational) -> Self {
        Self::diff(DlVar::X(i), DlVar::X(j), rel, bound)
    }

    pub fn constant(b: bool) -> Self {
        if b {
            BoolFormula::True
        } else {
            BoolFormula::False
        }
    }

    /// Conjunction with constant folding and flattening.
    pub fn and(parts: impl IntoIterator<Item = BoolFormula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                BoolFormula::True => {}
                BoolFormula::False => return BoolFormula::False,
                BoolFormula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        dedup_in_order(&mut out);
        match out.len() {
            0 => BoolFormula::True,
            1 => out.pop().expect("one element"),
            _ => BoolFormula::And(out),
        }
    }

    /// Disjunction with constant folding and flattening.
    pub fn or(parts: impl IntoIterator<Item = BoolFormula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                BoolFormula::False => {}
                BoolFormula::True => return BoolFormula::True,
                BoolFormula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        dedup_in_order(&mut out);
        match out.len() {
            0 => BoolFormula::False,
            1 => out.pop().expect("one element"),
            _ => BoolFormula::Or(out),
        }
    }

    /// Negation, pushed down to the atoms.
    pub fn negate(&self) -> Self {
        match self {
            BoolFormula::True => BoolFormula::False,
            BoolFormula::False => BoolFormula::True,
            BoolFormula::Atom(a) => BoolFormula::Atom(a.negate()),
            BoolFormula::Not(inner) => inner.nnf(),
            BoolFormula::And(parts) => BoolFormula::or(parts.iter().map(Self::negate)),
            BoolFormula::Or(parts) => BoolFormula::and(parts.iter().map(Self::negate)),
        }
    }

    /// Equivalent formula without any `Not` node.
    pub fn nnf(&self) -> Self {
        match self {
            BoolFormula::Not(inner) => inner.negate(),
            BoolFormula::And(parts) => BoolFormula::and(parts.iter().map(Self::nnf)),
            BoolFormula::Or(parts) => BoolFormula::or(parts.iter().map(Self::nnf)),
            other => other.clone(),
        }
    }

    /// `Not` appears only directly above atoms.
    pub fn is_nnf(&self) -> bool {
        match self {
            BoolFormula::Not(inner) => matches!(**inner, BoolFormula::Atom(_)),
            BoolFormula::And(parts) | BoolFormula::Or(parts) => parts.iter().all(Self::is_nnf),
            _ => true,
        }
    }

    pub fn eval(&self, x: &[Rational]) -> bool {
        match self {
            BoolFormula::True => true,
            BoolFormula::False => false,
            BoolFormula::Atom(a) => a.holds(x),
            BoolFormula::Not(inner) => !inner.eval(x),
            BoolFormula::And(parts) => parts.iter().all(|p| p.eval(x)),
            BoolFormula::Or(parts) => parts.iter().any(|p| p.eval(x)),
        }
    }

    pub fn for_each_atom(&self, f: &mut impl FnMut(&DlAtom)) {
        match self {
            BoolFormula::Atom(a) => f(a),
            BoolFormula::Not(inner) => inner.for_each_atom(f),
            BoolFormula::And(parts) | BoolFormula::Or(parts) => {
                for p in parts {
                    p.for_each_atom(f);
                }
            }
            BoolFormula::True | BoolFormula::False => {}
        }
    }

    pub fn atoms(&self) -> Vec<DlAtom> {
        let mut out = Vec::new();
        self.for_each_atom(&mut |a| out.push(*a));
        out
    }

    /// Number of state variables needed to evaluate the formula.
    pub fn var_count(&self) -> usize {
        let mut n = 0;
        self.for_each_atom(&mut |a| {
            if let Some(i) = a.max_var() {
                n = n.max(i + 1);
            }
        });
        n
    }

    pub fn mentions_zero(&self) -> bool {
        let mut z = false;
        self.for_each_atom(&mut |a| z |= a.mentions_zero());
        z
    }

    pub fn size(&self) -> usize {
        match self {
            BoolFormula::Not(inner) => 1 + inner.size(),
            BoolFormula::And(parts) | BoolFormula::Or(parts) => {
                1 + parts.iter().map(Self::size).sum::<usize>()
            }
            _ => 1,
        }
    }
}

fn dedup_in_order(parts: &mut Vec<BoolFormula>) {
    if parts.len() < 2 {
        return;
    }
    let mut seen = HashSet::with_capacity(parts.len());
    parts.retain(|p| seen.insert(p.clone()));
}

impl fmt::Display for BoolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolFormula::True => f.write_str("true"),
            BoolFormula::False => f.write_str("false"),
            BoolFormula::Atom(a) => write!(f, "{a}"),
            BoolFormula::Not(inner) => write!(f, "!({inner})"),
            BoolFormula::And(parts) | BoolFormula::Or(parts) => {
                let sep = if matches!(self, BoolFormula::And(_)) {
                    " & "
                } else {
                    " | "
                };
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "({p})")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(usize),
    Num(i64),
    Minus,
    Slash,
    Ge,
    Gt,
    Le,
    Lt,
    And,
    Or,
    Not,
    LParen,
    RParen,
    True,
    False,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    for (lno, line) in src.lines().enumerate() {
        let line_no = lno + 1;
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let two = |next: char| chars.get(i + 1) == Some(&next);
            let (tok, len) = match c {
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '-' => (Tok::Minus, 1),
                '/' => (Tok::Slash, 1),
                '&' | '∧' => (Tok::And, if two('&') { 2 } else { 1 }),
                '|' | '∨' => (Tok::Or, if two('|') { 2 } else { 1 }),
                '!' | '¬' => (Tok::Not, 1),
                '≥' => (Tok::Ge, 1),
                '≤' => (Tok::Le, 1),
                '>' if two('=') => (Tok::Ge, 2),
                '>' => (Tok::Gt, 1),
                '<' if two('=') => (Tok::Le, 2),
                '<' => (Tok::Lt, 1),
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    let v = s
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("number `{s}` out of range")))?;
                    out.push((Tok::Num(v), line_no));
                    continue;
                }
                c if c.is_ascii_alphabetic() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    let tok = match word.as_str() {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "and" => Tok::And,
                        "or" => Tok::Or,
                        "not" => Tok::Not,
                        w => match w.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                            Some(k) if k >= 1 => Tok::Var(k - 1),
                            _ => {
                                return Err(Error::parse(line_no, format!("unknown word `{w}`")))
                            }
                        },
                    };
                    out.push((tok, line_no));
                    continue;
                }
                other => {
                    return Err(Error::parse(line_no, format!("unexpected character `{other}`")))
                }
            };
            out.push((tok, line_no));
            i += len;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let line = self.line();
        match self.next() {
            Some(t) if t == want => Ok(()),
            got => Err(Error::parse(line, format!("expected {want:?}, found {got:?}"))),
        }
    }

    fn formula(&mut self) -> Result<BoolFormula> {
        let mut parts = vec![self.conj()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one")
        } else {
            BoolFormula::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<BoolFormula> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one")
        } else {
            BoolFormula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<BoolFormula> {
        let line = self.line();
        match self.next() {
            Some(Tok::Not) => Ok(BoolFormula::Not(Box::new(self.unary()?))),
            Some(Tok::LParen) => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::True) => Ok(BoolFormula::True),
            Some(Tok::False) => Ok(BoolFormula::False),
            Some(Tok::Var(i)) => self.atom(i),
            got => Err(Error::parse(line, format!("expected a formula, found {got:?}"))),
        }
    }

    fn atom(&mut self, i: usize) -> Result<BoolFormula> {
        let rhs = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let line = self.line();
            match self.next() {
                Some(Tok::Var(j)) => DlVar::X(j),
                got => return Err(Error::parse(line, format!("expected a variable, found {got:?}"))),
            }
        } else {
            DlVar::Zero
        };
        let line = self.line();
        let op = self.next();
        let c = self.constant()?;
        let lhs = DlVar::X(i);
        if lhs == rhs {
            return Err(Error::parse(line, "atom compares a variable with itself"));
        }
        Ok(match op {
            Some(Tok::Ge) => BoolFormula::Atom(DlAtom::new(lhs, rhs, Rel::Ge, c)),
            Some(Tok::Gt) => BoolFormula::Atom(DlAtom::new(lhs, rhs, Rel::Gt, c)),
            Some(Tok::Le) => BoolFormula::Atom(DlAtom::new(rhs, lhs, Rel::Ge, -c)),
            Some(Tok::Lt) => BoolFormula::Atom(DlAtom::new(rhs, lhs, Rel::Gt, -c)),
            got => return Err(Error::parse(line, format!("expected a comparison, found {got:?}"))),
        })
    }

    fn constant(&mut self) -> Result<Rational> {
        let line = self.line();
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let Some(Tok::Num(n)) = self.next() else {
            return Err(Error::parse(line, "expected a number"));
        };
        let mut q = Rational::from_integer(n);
        if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(d)) if d != 0 => q = Rational::new(n, d),
                _ => return Err(Error::parse(line, "expected a nonzero denominator")),
            }
        }
        Ok(if neg { -q } else { q })
    }
}

impl FromStr for BoolFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = tokenize(s)?;
        if toks.is_empty() {
            return Err(Error::parse(1, "empty formula"));
        }
        let mut p = Parser { toks, pos: 0 };
        let f = p.formula()?;
        if p.pos < p.toks.len() {
            return Err(Error::parse(p.line(), "trailing tokens"));
        }
        Ok(f)
    }
}
