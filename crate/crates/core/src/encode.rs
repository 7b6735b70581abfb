//! Translation of max-plus (in)equalities into difference-logic formulas.
//!
//! A row inequality `max_i(x_i + a_i) ∼ max_j(x_j + b_j)` is first reduced
//! so that no index appears on both sides, then expanded into the CNF
//! `⋀_{j∈S2} ⋁_{i∈S1} (x_i − x_j ∼ b_j − a_i)`.

use crate::error::{Error, Result};
use crate::formula::{BoolFormula, DlVar, Rel};
use crate::maxplus::{MaxPlusMatrix, MaxPlusValue};

/// An inequality after dropping indices that cannot decide it.
///
/// `s1` keeps left indices with finite `a_k` and `a_k ∼ b_k`; `s2` keeps
/// right indices with finite `b_k` and `¬(a_k ∼ b_k)`. The two sets are
/// disjoint by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedIneq {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub a: Vec<MaxPlusValue>,
    pub b: Vec<MaxPlusValue>,
    pub rel: Rel,
}

pub fn reduce_inequality(a: &[MaxPlusValue], b: &[MaxPlusValue], rel: Rel) -> Result<ReducedIneq> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyRow);
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            op: "reduce_inequality",
            left: (1, a.len()),
            right: (1, b.len()),
        });
    }
    let strict = rel.is_strict();
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    for (k, (&ak, &bk)) in a.iter().zip(b).enumerate() {
        let dominates = ak.satisfies(strict, bk);
        if ak.is_finite() && dominates {
            s1.push(k);
        }
        if bk.is_finite() && !dominates {
            s2.push(k);
        }
    }
    debug_assert!(s1.iter().all(|k| !s2.contains(k)));
    Ok(ReducedIneq {
        s1,
        s2,
        a: a.to_vec(),
        b: b.to_vec(),
        rel,
    })
}

impl ReducedIneq {
    /// CNF expansion of the reduced inequality.
    pub fn to_dl(&self) -> BoolFormula {
        match (self.s1.is_empty(), self.s2.is_empty()) {
            // eps ∼ eps
            (true, true) => BoolFormula::constant(!self.rel.is_strict()),
            (true, false) => BoolFormula::False,
            (false, true) => BoolFormula::True,
            (false, false) => BoolFormula::and(self.s2.iter().map(|&j| {
                let bj = self.b[j].finite().expect("s2 holds finite entries");
                BoolFormula::or(self.s1.iter().map(|&i| {
                    let ai = self.a[i].finite().expect("s1 holds finite entries");
                    BoolFormula::vars(i, j, self.rel, bj - ai)
                }))
            })),
        }
    }

    /// The coefficient rows restricted to `s1` and `s2` (all else `eps`).
    pub fn masked_rows(&self) -> (Vec<MaxPlusValue>, Vec<MaxPlusValue>) {
        let mask = |row: &[MaxPlusValue], keep: &[usize]| {
            (0..row.len())
                .map(|k| if keep.contains(&k) { row[k] } else { MaxPlusValue::Eps })
                .collect()
        };
        (mask(&self.a, &self.s1), mask(&self.b, &self.s2))
    }
}

/// `max_i(x_i + a_i) ∼ max_j(x_j + b_j)` as a DL formula.
pub fn inequality(a: &[MaxPlusValue], b: &[MaxPlusValue], rel: Rel) -> Result<BoolFormula> {
    Ok(reduce_inequality(a, b, rel)?.to_dl())
}

/// Which side of the comparison the constant sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `max_i(x_i + a_i) ∼ c`
    VarsLeft,
    /// `c ∼ max_i(x_i + a_i)`
    ConstLeft,
}

/// Row against a constant, using the zero variable for unary bounds.
pub fn encode_vs_constant(
    coeffs: &[MaxPlusValue],
    constant: MaxPlusValue,
    side: Side,
    rel: Rel,
) -> BoolFormula {
    let strict = rel.is_strict();
    let finite = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.finite().map(|q| (i, q)));
    match (side, constant) {
        // Left side is eps only when every coefficient is eps.
        (Side::VarsLeft, MaxPlusValue::Eps) => {
            if coeffs.iter().any(MaxPlusValue::is_finite) {
                BoolFormula::True
            } else {
                BoolFormula::constant(!strict)
            }
        }
        (Side::VarsLeft, MaxPlusValue::Fin(c)) => BoolFormula::or(
            finite.map(|(i, ai)| BoolFormula::diff(DlVar::X(i), DlVar::Zero, rel, c - ai)),
        ),
        (Side::ConstLeft, MaxPlusValue::Eps) => {
            if coeffs.iter().any(MaxPlusValue::is_finite) {
                BoolFormula::False
            } else {
                BoolFormula::constant(!strict)
            }
        }
        (Side::ConstLeft, MaxPlusValue::Fin(c)) => BoolFormula::and(
            finite.map(|(i, ai)| BoolFormula::diff(DlVar::Zero, DlVar::X(i), rel, ai - c)),
        ),
    }
}

/// `R ⊗ x = S ⊗ x` for every `x`: per row, both `≥` directions.
pub fn eq_func(r: &MaxPlusMatrix, s: &MaxPlusMatrix) -> Result<BoolFormula> {
    if r.dims() != s.dims() {
        return Err(Error::DimensionMismatch {
            op: "eq_func",
            left: r.dims(),
            right: s.dims(),
        });
    }
    let mut parts = Vec::with_capacity(2 * r.rows());
    for k in 0..r.rows() {
        let (rk, sk) = (r.row(k), s.row(k));
        let ge = inequality(rk, sk, Rel::Ge)?;
        if ge == BoolFormula::False {
            return Ok(BoolFormula::False);
        }
        let le = inequality(sk, rk, Rel::Ge)?;
        parts.push(ge);
        parts.push(le);
    }
    Ok(BoolFormula::and(parts))
}
