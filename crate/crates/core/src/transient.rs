//! Transient and cyclicity of `x(k+1) = A ⊗ x(k)` over a set of initial
//! states, and synthesis of the states sharing a given pair.
//!
//! Three interchangeable searches:
//! - [`trans_cone`] iterates `A^{⊗k} ⊗ V` until some iterate is a shift of
//!   an earlier one.
//! - [`trans_cone_smt`] guesses `(k0, c)`, asks the solver whether
//!   `A^{⊗k0+c} ⊗ V = λc ⊗ A^{⊗k0} ⊗ V` holds on the whole cone, and refines
//!   the guess from each counterexample.
//! - [`trans_smt`] does the same over an arbitrary region given as a
//!   difference-logic formula.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::encode::eq_func;
use crate::error::{Error, Result};
use crate::formula::BoolFormula;
use crate::graph;
use crate::maxplus::{cone_apply, MaxPlusMatrix, MaxPlusValue, PowerLadder, Rational};
use crate::smt::{self, Backend, BuiltinSolver, SolveResult, Validity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MatrixPower,
    SmtCone,
    SmtSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Found,
    /// No pair with `k0 + c` within the bound.
    BoundExceeded(usize),
    /// The cycle-time vector is not constant, so no trajectory is periodic.
    NoTransient,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Found => f.write_str("found"),
            Status::BoundExceeded(_) => f.write_str("bound_exceeded"),
            Status::NoTransient => f.write_str("no_transient"),
        }
    }
}

/// `k0` and `c` are meaningful only when `status` is [`Status::Found`];
/// otherwise they hold the last guess (or 0 for [`Status::NoTransient`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransientResult {
    pub k0: usize,
    pub c: usize,
    pub method: Method,
    /// Guesses checked by the solver, in order.
    pub refinements: Vec<(usize, usize)>,
    pub status: Status,
}

impl TransientResult {
    fn new(method: Method, k0: usize, c: usize, status: Status) -> Self {
        Self {
            k0,
            c,
            method,
            refinements: Vec::new(),
            status,
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == Status::Found
    }

    pub fn pair(&self) -> Option<(usize, usize)> {
        self.is_found().then_some((self.k0, self.c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialSet {
    ConeBasis(MaxPlusMatrix),
    /// `True` means all of `ℝⁿ`.
    Region(BoolFormula),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeOptions {
    /// For irreducible matrices, only test shifts up to the graph cyclicity.
    pub use_graph_cyclicity: bool,
}

impl Default for ConeOptions {
    fn default() -> Self {
        Self {
            use_graph_cyclicity: true,
        }
    }
}

fn scalar(q: Rational) -> MaxPlusValue {
    MaxPlusValue::Fin(q)
}

fn times(lambda: Rational, k: usize) -> Rational {
    lambda * Rational::from_integer(k as i64)
}

fn check_system(a: &MaxPlusMatrix) -> Result<usize> {
    let n = a.require_square()?;
    if let Some(row) = a.first_empty_row() {
        return Err(Error::NotRegular(row));
    }
    Ok(n)
}

fn has_constant_cycle_time(a: &MaxPlusMatrix) -> Result<bool> {
    let chi = graph::cycle_time_vector(a)?;
    Ok(chi.windows(2).all(|w| w[0] == w[1]))
}

/// Matrix-power search for the transient and cyclicity of `A` on `cone(V)`.
///
/// Iterates `M_t = A^{⊗t} ⊗ V` and stops at the first `t` with
/// `M_t = (λm) ⊗ M_{t−m}` for some `1 ≤ m ≤ t`, returning `(t − m, m)`.
pub fn trans_cone(a: &MaxPlusMatrix, v: &MaxPlusMatrix, bound: usize, options: ConeOptions) -> Result<TransientResult> {
    let n = check_system(a)?;
    if v.rows() != n {
        return Err(Error::DimensionMismatch {
            op: "trans_cone",
            left: a.dims(),
            right: v.dims(),
        });
    }
    if !has_constant_cycle_time(a)? {
        return Ok(TransientResult::new(Method::MatrixPower, 0, 0, Status::NoTransient));
    }
    let lambda = graph::max_cycle_mean(a)?;
    let max_shift = if options.use_graph_cyclicity {
        graph::graph_cyclicity(a)?.map(|c| c as usize)
    } else {
        None
    };

    let mut iterates = vec![v.clone()];
    for it in 1..=bound {
        let next = a.otimes(&iterates[it - 1])?;
        let top = max_shift.map_or(it, |c| c.min(it));
        for m in 1..=top {
            if next.is_shift_of(&iterates[it - m], times(lambda, m)) {
                return Ok(TransientResult::new(Method::MatrixPower, it - m, m, Status::Found));
            }
        }
        iterates.push(next);
    }
    Ok(TransientResult::new(Method::MatrixPower, 0, 0, Status::BoundExceeded(bound)))
}

/// Shared refinement loop of the two solver-driven searches.
struct Refinement<'a> {
    a: &'a MaxPlusMatrix,
    ladder: PowerLadder,
    lambda: Rational,
    bound: usize,
    options: ConeOptions,
    result: TransientResult,
}

enum Step {
    Done(TransientResult),
    Continue,
}

impl<'a> Refinement<'a> {
    fn new(a: &'a MaxPlusMatrix, bound: usize, method: Method, options: ConeOptions) -> Result<Self> {
        Ok(Self {
            a,
            ladder: PowerLadder::new(a.clone())?,
            lambda: graph::max_cycle_mean(a)?,
            bound,
            options,
            result: TransientResult::new(method, 0, 1, Status::Found),
        })
    }

    /// Fold the counterexample state `x` (at time 0) into the guess.
    fn refine(&mut self, x: &MaxPlusMatrix) -> Result<Step> {
        let (k0, c) = (self.result.k0, self.result.c);
        let advanced = self.ladder.power(k0).otimes(x)?;
        let local = trans_cone(self.a, &advanced, self.bound, self.options)?;
        if !local.is_found() {
            let mut out = self.result.clone();
            out.status = local.status;
            return Ok(Step::Done(out));
        }
        let next = (k0 + local.k0, c.lcm(&local.c));
        if next.0 + next.1 <= k0 + c {
            return Err(Error::Internal(format!(
                "refinement did not grow: ({k0}, {c}) -> {next:?}"
            )));
        }
        self.result.k0 = next.0;
        self.result.c = next.1;
        Ok(Step::Continue)
    }

    fn within_bound(&self) -> bool {
        self.result.k0 + self.result.c <= self.bound
    }

    fn exhausted(mut self) -> TransientResult {
        self.result.status = Status::BoundExceeded(self.bound);
        self.result
    }

    /// `A^{⊗k0+c}` and `λc ⊗ A^{⊗k0}` for the current guess.
    fn sides(&self) -> (MaxPlusMatrix, MaxPlusMatrix) {
        let (k0, c) = (self.result.k0, self.result.c);
        let left = (*self.ladder.power(k0 + c)).clone();
        let right = self.ladder.power(k0).scale(scalar(times(self.lambda, c)));
        (left, right)
    }
}

/// Solver-driven search on `cone(V)` with the built-in solver.
pub fn trans_cone_smt(a: &MaxPlusMatrix, v: &MaxPlusMatrix, bound: usize) -> Result<TransientResult> {
    trans_cone_smt_with(a, v, bound, &BuiltinSolver, ConeOptions::default())
}

pub fn trans_cone_smt_with(
    a: &MaxPlusMatrix,
    v: &MaxPlusMatrix,
    bound: usize,
    backend: &dyn Backend,
    options: ConeOptions,
) -> Result<TransientResult> {
    let n = check_system(a)?;
    if v.rows() != n {
        return Err(Error::DimensionMismatch {
            op: "trans_cone_smt",
            left: a.dims(),
            right: v.dims(),
        });
    }
    if !has_constant_cycle_time(a)? {
        return Ok(TransientResult::new(Method::SmtCone, 0, 0, Status::NoTransient));
    }
    let p = v.cols();
    let mut r = Refinement::new(a, bound, Method::SmtCone, options)?;
    while r.within_bound() {
        r.result.refinements.push((r.result.k0, r.result.c));
        let (left, right) = r.sides();
        let f = eq_func(&left.otimes(v)?, &right.otimes(v)?)?;
        match smt::check_valid_with(backend, &f, p)? {
            Validity::Valid => return Ok(r.result),
            Validity::CounterModel(m) => {
                let w = MaxPlusMatrix::from_rationals(&smt::extract_vector(&m, p)?)?;
                let x = cone_apply(v, &w)?;
                if let Step::Done(out) = r.refine(&x)? {
                    return Ok(out);
                }
            }
        }
    }
    Ok(r.exhausted())
}

/// Solver-driven search over the region `X` with the built-in solver.
pub fn trans_smt(a: &MaxPlusMatrix, region: &BoolFormula, bound: usize) -> Result<TransientResult> {
    trans_smt_with(a, region, bound, &BuiltinSolver, ConeOptions::default())
}

pub fn trans_smt_with(
    a: &MaxPlusMatrix,
    region: &BoolFormula,
    bound: usize,
    backend: &dyn Backend,
    options: ConeOptions,
) -> Result<TransientResult> {
    let n = check_system(a)?;
    if region.var_count() > n {
        return Err(Error::DimensionMismatch {
            op: "trans_smt",
            left: a.dims(),
            right: (region.var_count(), 1),
        });
    }
    let region = region.nnf();
    if !backend.solve(&region, n)?.is_sat() {
        return Err(Error::UnsatisfiableInitialSet);
    }
    if !has_constant_cycle_time(a)? {
        return Ok(TransientResult::new(Method::SmtSet, 0, 0, Status::NoTransient));
    }
    let mut r = Refinement::new(a, bound, Method::SmtSet, options)?;
    while r.within_bound() {
        r.result.refinements.push((r.result.k0, r.result.c));
        let (left, right) = r.sides();
        let f = eq_func(&left, &right)?;
        let query = BoolFormula::and([region.clone(), f.negate()]);
        match backend.solve(&query, n)? {
            SolveResult::Unsat => return Ok(r.result),
            SolveResult::Sat(m) => {
                let x = MaxPlusMatrix::from_rationals(&smt::extract_vector(&m, n)?)?;
                if let Step::Done(out) = r.refine(&x)? {
                    return Ok(out);
                }
            }
        }
    }
    Ok(r.exhausted())
}

/// Dispatch on the kind of initial set.
pub fn transient_of(a: &MaxPlusMatrix, set: &InitialSet, bound: usize) -> Result<TransientResult> {
    match set {
        InitialSet::ConeBasis(v) => trans_cone_smt(a, v, bound),
        InitialSet::Region(f) => trans_smt(a, f, bound),
    }
}

/// Proper divisors of `q` in increasing order.
pub fn proper_divisors(q: usize) -> Vec<usize> {
    (1..q).filter(|d| q.is_multiple_of(*d)).collect()
}

/// `A^{⊗p+c} ⊗ x = λc ⊗ A^{⊗p} ⊗ x`.
fn periodic_at(ladder: &PowerLadder, lambda: Rational, p: usize, c: usize) -> Result<BoolFormula> {
    let left = ladder.power(p + c);
    let right = ladder.power(p).scale(scalar(times(lambda, c)));
    eq_func(&left, &right)
}

fn synthesis_setup(a: &MaxPlusMatrix, cyclicity: Option<usize>) -> Result<Option<(PowerLadder, Rational, usize)>> {
    check_system(a)?;
    let lambda = graph::max_cycle_mean(a)?;
    if graph::eigenspace_basis(a, lambda)?.is_none() {
        return Ok(None);
    }
    let c = match cyclicity {
        Some(c) => c,
        None => graph::graph_cyclicity(a)?.ok_or(Error::MissingCyclicity)? as usize,
    };
    if c == 0 {
        return Err(Error::MissingCyclicity);
    }
    Ok(Some((PowerLadder::new(a.clone())?, lambda, c)))
}

/// States whose transient is exactly `p`, given the global cyclicity (taken
/// from the precedence graph when `None`). Never-periodic systems give
/// `False`.
pub fn synth_sp(a: &MaxPlusMatrix, p: usize, cyclicity: Option<usize>) -> Result<BoolFormula> {
    let Some((ladder, lambda, c)) = synthesis_setup(a, cyclicity)? else {
        return Ok(BoolFormula::False);
    };
    let settled = periodic_at(&ladder, lambda, p, c)?;
    if p == 0 {
        return Ok(settled);
    }
    let earlier = periodic_at(&ladder, lambda, p - 1, c)?;
    Ok(BoolFormula::and([settled, earlier.negate()]))
}

/// States whose transient is exactly `p` and cyclicity exactly `q`.
pub fn synth_spq(a: &MaxPlusMatrix, p: usize, q: usize, cyclicity: Option<usize>) -> Result<BoolFormula> {
    if q == 0 {
        return Err(Error::InvalidSpec("cyclicity q must be positive".into()));
    }
    let Some((ladder, lambda, _)) = synthesis_setup(a, cyclicity)? else {
        return Ok(BoolFormula::False);
    };
    let mut parts = vec![periodic_at(&ladder, lambda, p, q)?];
    if p > 0 {
        parts.push(periodic_at(&ladder, lambda, p - 1, q)?.negate());
    }
    for d in proper_divisors(q) {
        parts.push(periodic_at(&ladder, lambda, p, d)?.negate());
    }
    Ok(BoolFormula::and(parts))
}

/// Is the region described by `f` empty?
pub fn region_empty(f: &BoolFormula) -> Result<bool> {
    Ok(!smt::solve(&f.nnf())?.is_sat())
}
