//! Exact max-plus scalars and dense matrices.
//!
//! Scalars are either `eps` (the semiring zero, −∞) or an exact rational.
//! Nothing in this module rounds: every ⊕ is a comparison and every ⊗ an
//! exact rational sum.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_traits::Zero;

use crate::error::{Error, Result};

/// Exact rational used for every finite quantity in the crate.
pub type Rational = num_rational::Rational64;

/// An element of ℝ_max with rational finite part.
///
/// The derived order puts `Eps` below every finite value, which is exactly
/// the order ⊕ takes the maximum over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum MaxPlusValue {
    #[default]
    Eps,
    Fin(Rational),
}

impl MaxPlusValue {
    pub const ZERO: MaxPlusValue = MaxPlusValue::Eps;

    /// The multiplicative unit, 0.
    pub fn unit() -> Self {
        MaxPlusValue::Fin(Rational::zero())
    }

    pub fn int(v: i64) -> Self {
        MaxPlusValue::Fin(Rational::from_integer(v))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        MaxPlusValue::Fin(Rational::new(numer, denom))
    }

    pub fn is_eps(&self) -> bool {
        matches!(self, MaxPlusValue::Eps)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_eps()
    }

    pub fn finite(&self) -> Option<Rational> {
        match *self {
            MaxPlusValue::Eps => None,
            MaxPlusValue::Fin(q) => Some(q),
        }
    }

    /// a ⊕ b = max(a, b).
    pub fn oplus(self, other: Self) -> Self {
        self.max(other)
    }

    /// a ⊗ b = a + b, with `eps` absorbing.
    pub fn otimes(self, other: Self) -> Self {
        match (self, other) {
            (MaxPlusValue::Fin(a), MaxPlusValue::Fin(b)) => MaxPlusValue::Fin(a + b),
            _ => MaxPlusValue::Eps,
        }
    }

    /// Compare under `≥` or `>` where `eps ≥ eps` holds and `eps > eps` does not.
    pub fn satisfies(self, strict: bool, other: Self) -> bool {
        match self.cmp(&other) {
            Ordering::Greater => true,
            Ordering::Equal => !strict,
            Ordering::Less => false,
        }
    }
}

impl From<Rational> for MaxPlusValue {
    fn from(q: Rational) -> Self {
        MaxPlusValue::Fin(q)
    }
}

impl From<i64> for MaxPlusValue {
    fn from(v: i64) -> Self {
        MaxPlusValue::int(v)
    }
}

impl fmt::Display for MaxPlusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxPlusValue::Eps => f.write_str("eps"),
            MaxPlusValue::Fin(q) => write!(f, "{q}"),
        }
    }
}

impl FromStr for MaxPlusValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "eps" {
            return Ok(MaxPlusValue::Eps);
        }
        parse_rational(s)
            .map(MaxPlusValue::Fin)
            .ok_or_else(|| Error::parse(0, format!("bad scalar `{s}`")))
    }
}

/// Parse `p/q` or an integer into a normalized rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Rational::from_integer),
    }
}

/// Dense row-major max-plus matrix. Never 0×0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaxPlusMatrix {
    rows: usize,
    cols: usize,
    data: Vec<MaxPlusValue>,
}

/// Column vectors are matrices with a single column.
pub type MaxPlusVector = MaxPlusMatrix;

impl MaxPlusMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<MaxPlusValue>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: MaxPlusValue) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    /// Max-plus identity: 0 on the diagonal, `eps` elsewhere.
    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::filled(n, n, MaxPlusValue::Eps)?;
        for i in 0..n {
            m.set(i, i, MaxPlusValue::unit());
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<MaxPlusValue>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::BadShape {
                rows: r,
                cols: c,
                got: bad.len(),
            });
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn column_vector(values: Vec<MaxPlusValue>) -> Result<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    pub fn from_rationals(values: &[Rational]) -> Result<Self> {
        Self::column_vector(values.iter().copied().map(MaxPlusValue::Fin).collect())
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::column_vector(values.iter().copied().map(MaxPlusValue::int).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> MaxPlusValue {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: MaxPlusValue) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[MaxPlusValue] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> MaxPlusVector {
        let data = (0..self.rows).map(|i| self.get(i, j)).collect();
        Self {
            rows: self.rows,
            cols: 1,
            data,
        }
    }

    pub fn entries(&self) -> &[MaxPlusValue] {
        &self.data
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Every row has at least one finite entry.
    pub fn is_regular(&self) -> bool {
        self.first_empty_row().is_none()
    }

    pub fn first_empty_row(&self) -> Option<usize> {
        (0..self.rows).find(|&i| self.row(i).iter().all(MaxPlusValue::is_eps))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(MaxPlusValue::is_finite)
    }

    /// Finite entries of a single-column vector, in order.
    pub fn to_rationals(&self) -> Result<Vec<Rational>> {
        self.data
            .iter()
            .enumerate()
            .map(|(i, v)| v.finite().ok_or(Error::NonFinite(i)))
            .collect()
    }

    pub fn otimes(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "otimes",
                left: self.dims(),
                right: other.dims(),
            });
        }
        let mut out = vec![MaxPlusValue::Eps; self.rows * other.cols];
        for i in 0..self.rows {
            let out_row = &mut out[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                let MaxPlusValue::Fin(a) = a else { continue };
                for (slot, &b) in out_row.iter_mut().zip(other.row(k)) {
                    if let MaxPlusValue::Fin(b) = b {
                        let v = MaxPlusValue::Fin(a + b);
                        if v > *slot {
                            *slot = v;
                        }
                    }
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    pub fn oplus(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                op: "oplus",
                left: self.dims(),
                right: other.dims(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a.oplus(b))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// α ⊗ A, entrywise shift.
    pub fn scale(&self, alpha: MaxPlusValue) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| alpha.otimes(a)).collect(),
        }
    }

    /// A^{⊗t} by repeated squaring. Use [`PowerLadder`] when many
    /// consecutive powers of the same matrix are needed.
    pub fn pow(&self, mut t: u64) -> Result<Self> {
        let n = self.require_square()?;
        let mut result = Self::identity(n)?;
        let mut base = self.clone();
        while t > 0 {
            if t & 1 == 1 {
                result = result.otimes(&base)?;
            }
            t >>= 1;
            if t > 0 {
                base = base.otimes(&base)?;
            }
        }
        Ok(result)
    }

    /// `self == s ⊗ other` entrywise, without materializing the shift.
    pub fn is_shift_of(&self, other: &Self, s: Rational) -> bool {
        self.dims() == other.dims()
            && self.data.iter().zip(&other.data).all(|(a, b)| match (a, b) {
                (MaxPlusValue::Eps, MaxPlusValue::Eps) => true,
                (MaxPlusValue::Fin(a), MaxPlusValue::Fin(b)) => *a == *b + s,
                _ => false,
            })
    }

    /// Trajectory `x(0), …, x(steps)` of `x(k+1) = self ⊗ x(k)`.
    pub fn trajectory(&self, x0: &MaxPlusVector, steps: usize) -> Result<Vec<MaxPlusVector>> {
        self.require_square()?;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(x0.clone());
        for _ in 0..steps {
            let next = self.otimes(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Largest |finite entry|, used for simulation tolerances.
    pub fn max_abs_entry(&self) -> Rational {
        self.data
            .iter()
            .filter_map(MaxPlusValue::finite)
            .map(|q| if q < Rational::zero() { -q } else { q })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// The cone member `V ⊗ w` for a finite weight vector `w`.
pub fn cone_apply(basis: &MaxPlusMatrix, w: &MaxPlusVector) -> Result<MaxPlusVector> {
    if w.cols() != 1 {
        return Err(Error::DimensionMismatch {
            op: "cone_apply",
            left: basis.dims(),
            right: w.dims(),
        });
    }
    if let Some(i) = w.entries().iter().position(MaxPlusValue::is_eps) {
        return Err(Error::NonFinite(i));
    }
    if let Some(row) = basis.first_empty_row() {
        return Err(Error::NotRegular(row));
    }
    basis.otimes(w)
}

/// Matrix text format: a header `rows cols`, then one line per row of
/// whitespace-separated tokens (`p/q`, an integer, or `eps`).
impl fmt::Display for MaxPlusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for MaxPlusMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(hline, format!("bad dimension `{t}`"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::parse(hline, "header must be `rows cols`"));
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| Error::parse(hline, format!("expected {rows} rows")))?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v = tok
                    .parse::<MaxPlusValue>()
                    .map_err(|_| Error::parse(lno, format!("bad entry `{tok}`")))?;
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(Error::parse(
                    lno,
                    format!("expected {cols} entries, found {}", data.len() - before),
                ));
            }
        }
        if let Some((lno, _)) = lines.next() {
            return Err(Error::parse(lno, "trailing content after matrix rows"));
        }
        Self::new(rows, cols, data)
    }
}

/// Memoized ladder `A^{⊗0}, A^{⊗1}, …` grown on demand.
///
/// Shared by the transient algorithms and the synthesis queries, which all
/// ask for consecutive powers of one matrix. Internally synchronized.
#[derive(Debug)]
pub struct PowerLadder {
    base: Arc<MaxPlusMatrix>,
    powers: Mutex<Vec<Arc<MaxPlusMatrix>>>,
}

impl PowerLadder {
    pub fn new(base: MaxPlusMatrix) -> Result<Self> {
        let n = base.require_square()?;
        let identity = Arc::new(MaxPlusMatrix::identity(n)?);
        Ok(Self {
            base: Arc::new(base),
            powers: Mutex::new(vec![identity]),
        })
    }

    pub fn base(&self) -> &MaxPlusMatrix {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    /// A^{⊗t}.
    pub fn power(&self, t: usize) -> Arc<MaxPlusMatrix> {
        let mut powers = self.powers.lock().expect("power ladder poisoned");
        while powers.len() <= t {
            let next = powers
                .last()
                .expect("ladder starts with identity")
                .otimes(&self.base)
                .expect("square base");
            powers.push(Arc::new(next));
        }
        Arc::clone(&powers[t])
    }

    pub fn cached(&self) -> usize {
        self.powers.lock().expect("power ladder poisoned").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> MaxPlusMatrix {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> MaxPlusValue {
        MaxPlusValue::ratio(n, d)
    }

    #[test]
    fn scalar_ops() {
        let i = MaxPlusValue::int;
        assert_eq!(i(2).oplus(i(5)), i(5));
        assert_eq!(MaxPlusValue::Eps.oplus(i(3)), i(3));
        assert_eq!(q(1, 2).oplus(q(1, 3)), q(1, 2));
        assert_eq!(i(3).otimes(i(3)), i(6));
        assert_eq!(MaxPlusValue::Eps.otimes(i(7)), MaxPlusValue::Eps);
        assert_eq!(q(1, 2).otimes(q(1, 3)), q(5, 6));
    }

    #[test]
    fn rationals_are_normalized() {
        assert_eq!("4/2".parse::<MaxPlusValue>().unwrap(), MaxPlusValue::int(2));
        assert_eq!("-3/6".parse::<MaxPlusValue>().unwrap(), q(-1, 2));
        assert!("1/0".parse::<MaxPlusValue>().is_err());
        assert!("x".parse::<MaxPlusValue>().is_err());
    }

    #[test]
    fn railway_step() {
        let a = m("2 2\n2 5\n3 3");
        let x = MaxPlusMatrix::from_ints(&[0, 0]).unwrap();
        assert_eq!(a.otimes(&x).unwrap(), MaxPlusMatrix::from_ints(&[5, 3]).unwrap());
        assert_eq!(a.otimes(&MaxPlusMatrix::identity(2).unwrap()).unwrap(), a);
        assert_eq!(
            MaxPlusMatrix::from_ints(&[5, 3]).unwrap().scale(MaxPlusValue::int(8)),
            MaxPlusMatrix::from_ints(&[13, 11]).unwrap()
        );
        assert_eq!(a.scale(MaxPlusValue::unit()), a);
    }

    #[test]
    fn oplus_with_eps() {
        let l = m("1 2\n2 eps");
        let r = m("1 2\neps 1");
        assert_eq!(l.oplus(&r).unwrap(), m("1 2\n2 1"));
        assert!(l.oplus(&m("2 1\n0\n0")).is_err());
    }

    #[test]
    fn powers_of_reducible_example() {
        let b = m("3 3\n2 8 eps\n10 5 eps\n3 eps 8");
        assert_eq!(b.pow(0).unwrap(), MaxPlusMatrix::identity(3).unwrap());
        assert_eq!(b.pow(2).unwrap(), m("3 3\n18 13 eps\n15 18 eps\n11 11 16"));
        assert_eq!(b.pow(3).unwrap(), m("3 3\n23 26 eps\n28 23 eps\n21 19 24"));
        let ladder = PowerLadder::new(b.clone()).unwrap();
        for t in 0..6 {
            assert_eq!(*ladder.power(t), b.pow(t as u64).unwrap());
        }
        assert_eq!(ladder.cached(), 6);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(MaxPlusMatrix::new(0, 0, vec![]), Err(Error::EmptyMatrix)));
        assert!(m("2 3\n1 2 3\n4 5 6").pow(2).is_err());
        assert!(m("2 2\n1 2\n3 4").otimes(&m("3 1\n0\n0\n0")).is_err());
        assert!("2 2\n1 2\n3".parse::<MaxPlusMatrix>().is_err());
        assert!("2 2\n1 2\n3 4\n5 6".parse::<MaxPlusMatrix>().is_err());
    }

    #[test]
    fn cone_members() {
        let w = MaxPlusMatrix::from_ints(&[4, 2]).unwrap();
        let id = MaxPlusMatrix::identity(2).unwrap();
        assert_eq!(cone_apply(&id, &w).unwrap(), w);
        let ray = m("2 1\n0\n1");
        assert_eq!(
            cone_apply(&ray, &MaxPlusMatrix::from_ints(&[3]).unwrap()).unwrap(),
            MaxPlusMatrix::from_ints(&[3, 4]).unwrap()
        );
        // max(0+0, 5+0), max(3+0, 0+0)
        let v = m("2 2\n0 5\n3 0");
        assert_eq!(
            cone_apply(&v, &MaxPlusMatrix::from_ints(&[0, 0]).unwrap()).unwrap(),
            MaxPlusMatrix::from_ints(&[5, 3]).unwrap()
        );
        let bad = MaxPlusMatrix::column_vector(vec![MaxPlusValue::Eps, MaxPlusValue::int(0)]).unwrap();
        assert!(matches!(cone_apply(&id, &bad), Err(Error::NonFinite(0))));
        assert!(matches!(cone_apply(&m("2 1\neps\n0"), &MaxPlusMatrix::from_ints(&[1]).unwrap()), Err(Error::NotRegular(0))));
    }

    #[test]
    fn text_round_trip() {
        let text = "3 3\n2 8 eps\n-10/3 5 eps\n3 eps 1/2\n";
        let parsed: MaxPlusMatrix = text.parse().unwrap();
        assert_eq!(parsed.to_string(), text);
        assert_eq!(parsed.get(1, 0), q(-10, 3));
    }

    #[test]
    fn regularity() {
        assert!(!m("2 2\neps eps\n0 0").is_regular());
        assert!(m("2 2\neps 0\n0 eps").is_regular());
    }
}
