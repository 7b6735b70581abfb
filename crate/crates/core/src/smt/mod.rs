//! Satisfiability of difference-logic formulas with exact rational models.
//!
//! [`solve`] runs the built-in engine: clause learning over the Boolean
//! skeleton, with every assignment checked against a constraint graph for
//! negative cycles. [`to_smtlib`] and [`ExternalSolver`] give an SMT-LIB2
//! channel to any conforming solver for cross-checking.

mod cdcl;
pub mod external;
pub mod smtlib;
pub mod theory;

use crate::error::{Error, Result};
use crate::formula::BoolFormula;
use crate::maxplus::Rational;

pub use external::ExternalSolver;
pub use smtlib::{parse_response, to_smtlib};
pub use theory::{ConstraintGraph, StrictWeight, TheoryEdge};

/// Assignment to state variables `x1, x2, …` (the zero variable is 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<Rational>,
}

impl Model {
    pub fn new(values: Vec<Rational>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<Rational> {
        self.values.get(i).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    CounterModel(Model),
}

/// A decision procedure for difference-logic formulas.
pub trait Backend: Sync {
    /// Decide `f`; a model covers at least `dim` state variables.
    fn solve(&self, f: &BoolFormula, dim: usize) -> Result<SolveResult>;
}

/// The built-in engine.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinSolver;

impl Backend for BuiltinSolver {
    fn solve(&self, f: &BoolFormula, dim: usize) -> Result<SolveResult> {
        solve_in(f, dim)
    }
}

/// Decide a formula in negation normal form.
pub fn solve(f: &BoolFormula) -> Result<SolveResult> {
    solve_in(f, 0)
}

/// Like [`solve`], with the model padded to at least `dim` variables.
pub fn solve_in(f: &BoolFormula, dim: usize) -> Result<SolveResult> {
    if !f.is_nnf() {
        return Err(Error::NotNnf);
    }
    let vars = dim.max(f.var_count());
    match cdcl::Search::new(f, vars)?.run()? {
        cdcl::Outcome::Unsat => Ok(SolveResult::Unsat),
        cdcl::Outcome::Sat(values) => {
            if !f.eval(&values) {
                return Err(Error::Internal(format!("model does not satisfy {f}")));
            }
            Ok(SolveResult::Sat(Model::new(values)))
        }
    }
}

/// Is `f` true everywhere? Otherwise return a point where it fails.
pub fn check_valid(f: &BoolFormula) -> Result<Validity> {
    check_valid_with(&BuiltinSolver, f, 0)
}

pub fn check_valid_with(backend: &dyn Backend, f: &BoolFormula, dim: usize) -> Result<Validity> {
    Ok(match backend.solve(&f.negate(), dim)? {
        SolveResult::Unsat => Validity::Valid,
        SolveResult::Sat(m) => Validity::CounterModel(m),
    })
}

/// The first `dim` model values as a finite vector.
pub fn extract_vector(model: &Model, dim: usize) -> Result<Vec<Rational>> {
    if dim > model.len() {
        return Err(Error::MissingVariable(model.len()));
    }
    Ok(model.values[..dim].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Rel;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn f(s: &str) -> BoolFormula {
        s.parse().unwrap()
    }

    fn sat_model(s: &str) -> Vec<Rational> {
        match solve(&f(s)).unwrap() {
            SolveResult::Sat(m) => m.values().to_vec(),
            SolveResult::Unsat => panic!("expected sat: {s}"),
        }
    }

    #[test]
    fn simple_verdicts() {
        assert_eq!(solve(&f("x1 - x2 >= 1 & x2 - x1 >= 0")).unwrap(), SolveResult::Unsat);
        assert_eq!(solve(&f("x1 - x2 > 0 & x2 - x1 >= 0")).unwrap(), SolveResult::Unsat);
        let x = sat_model("x1 - x2 >= 1 | x2 - x1 >= 1");
        assert!(x[0] - x[1] >= q(1) || x[1] - x[0] >= q(1));
        assert!(solve(&BoolFormula::True).unwrap().is_sat());
        assert_eq!(solve(&BoolFormula::False).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn unary_bounds_use_zero() {
        let x = sat_model("x1 >= 5 & x1 < 6 & x2 - x1 > 0");
        assert!(x[0] >= q(5) && x[0] < q(6) && x[1] > x[0]);
        assert_eq!(solve(&f("x1 >= 5 & x1 < 5")).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn needs_backtracking() {
        let clauses = "(x1 - x2 >= 3 | x2 - x3 >= 3) & (x1 - x2 < 3 | x3 - x1 >= 0) & (x2 - x3 < 3 | x3 - x1 >= -1)";
        let s = format!("{clauses} & x1 - x3 >= 1");
        let x = sat_model(&s);
        assert!(f(&s).eval(&x));
        assert_eq!(x[0] - x[2], q(1));
        let t = format!("{clauses} & x1 - x3 >= 2");
        assert_eq!(solve(&f(&t)).unwrap(), SolveResult::Unsat);
        let u = "(x1 - x2 >= 1 | x1 - x3 >= 1) & x2 - x1 >= 0 & x3 - x1 >= 0";
        assert_eq!(solve(&f(u)).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn validity() {
        assert_eq!(check_valid(&BoolFormula::True).unwrap(), Validity::Valid);
        match check_valid(&BoolFormula::vars(0, 1, Rel::Ge, q(0))).unwrap() {
            Validity::CounterModel(m) => assert!(m.values()[1] > m.values()[0]),
            Validity::Valid => panic!("not a tautology"),
        }
        assert_eq!(check_valid(&f("x1 - x2 >= 0 | x2 - x1 > 0")).unwrap(), Validity::Valid);
    }

    #[test]
    fn extraction() {
        let m = Model::new(vec![q(1), q(0)]);
        assert_eq!(extract_vector(&m, 2).unwrap(), vec![q(1), q(0)]);
        assert!(matches!(extract_vector(&m, 3), Err(Error::MissingVariable(2))));
        match solve_in(&f("x1 >= 5"), 3).unwrap() {
            SolveResult::Sat(m) => {
                let w = extract_vector(&m, 3).unwrap();
                assert!(w[0] >= q(5));
            }
            SolveResult::Unsat => panic!(),
        }
    }

    #[test]
    fn rejects_non_nnf() {
        let g = BoolFormula::Not(Box::new(f("x1 >= 1 | x2 >= 1")));
        assert!(matches!(solve(&g), Err(Error::NotNnf)));
        let h = BoolFormula::Not(Box::new(f("x1 >= 1")));
        assert_eq!(solve(&BoolFormula::and([h, f("x1 >= 1")])).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn deterministic_models() {
        let s = "(x1 - x2 > 1 | x2 - x3 > 2) & (x3 - x1 >= -4 | x1 >= 7)";
        assert_eq!(sat_model(s), sat_model(s));
    }
}
