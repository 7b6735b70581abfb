//! Transient and cyclicity analysis of max-plus linear (MPL) systems.
//!
//! An MPL system evolves as `x(k+1) = A ⊗ x(k)` over the (max, +) semiring.
//! From some step on, every periodic trajectory satisfies
//! `x(k+c) = (λ·c) ⊗ x(k)`; the first such `k` is the transient and the
//! smallest such `c` the cyclicity. This crate computes both, either by
//! iterating matrix powers or by refining guesses with a difference-logic
//! solver, and it synthesizes the regions of initial states that share a
//! given transient/cyclicity pair.
//!
//! Module map:
//! - [`maxplus`]: exact scalars, matrices, power ladders and the matrix text format.
//! - [`graph`]: precedence graph, eigenvalue, eigenspace, cycle-time vector, cyclicity, classification.
//! - [`formula`] and [`encode`]: difference-logic formulas and the max-plus to DL translation.
//! - [`smt`]: the built-in DPLL(T) difference-logic solver, SMT-LIB2 export and external solver bridge.
//! - [`transient`]: the three transient algorithms and region synthesis.
//! - [`bench`]: random instance generation and the benchmark harness.

pub mod bench;
pub mod encode;
pub mod error;
pub mod formula;
pub mod graph;
pub mod maxplus;
pub mod smt;
pub mod transient;

pub use error::{Error, Result};
pub use formula::{BoolFormula, DlAtom, DlVar, Rel};
pub use maxplus::{MaxPlusMatrix, MaxPlusValue, MaxPlusVector, PowerLadder, Rational};
