//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use mpl_transient::formula::{BoolFormula, DlAtom, DlVar, Rel};
use mpl_transient::{MaxPlusMatrix, MaxPlusValue, Rational};
use num_traits::{Signed, Zero};
use rand::Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn mat(s: &str) -> MaxPlusMatrix {
    s.parse().unwrap()
}

pub fn railway() -> MaxPlusMatrix {
    mat("2 2\n2 5\n3 3")
}

pub fn reducible(a: i64) -> MaxPlusMatrix {
    mat(&format!("3 3\n2 8 eps\n10 5 eps\n3 eps {a}"))
}

/// `Σ coeffs·x + constant (≥ | >) 0`.
#[derive(Clone, Debug)]
struct Linear {
    coeffs: Vec<Rational>,
    constant: Rational,
    strict: bool,
}

/// Feasibility of a conjunction of atoms over ℚ by Fourier–Motzkin
/// elimination. The zero variable is the constant 0.
pub fn conjunction_feasible(atoms: &[DlAtom], vars: usize) -> bool {
    let mut rows: Vec<Linear> = atoms
        .iter()
        .map(|a| {
            let mut coeffs = vec![Rational::zero(); vars];
            if let DlVar::X(i) = a.lhs {
                coeffs[i] += q(1);
            }
            if let DlVar::X(j) = a.rhs {
                coeffs[j] -= q(1);
            }
            Linear {
                coeffs,
                constant: -a.bound,
                strict: a.rel == Rel::Gt,
            }
        })
        .collect();
    for k in 0..vars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.coeffs[k].is_positive() {
                pos.push(r);
            } else if r.coeffs[k].is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        for p in &pos {
            for n in &neg {
                let (sp, sn) = (-n.coeffs[k], p.coeffs[k]);
                rest.push(Linear {
                    coeffs: p.coeffs.iter().zip(&n.coeffs).map(|(a, b)| *a * sp + *b * sn).collect(),
                    constant: p.constant * sp + n.constant * sn,
                    strict: p.strict || n.strict,
                });
            }
        }
        rows = rest;
    }
    rows.iter().all(|r| if r.strict { r.constant.is_positive() } else { !r.constant.is_negative() })
}

fn eval_with(f: &BoolFormula, truth: &dyn Fn(&DlAtom) -> bool) -> bool {
    match f {
        BoolFormula::True => true,
        BoolFormula::False => false,
        BoolFormula::Atom(a) => truth(a),
        BoolFormula::Not(inner) => !eval_with(inner, truth),
        BoolFormula::And(ps) => ps.iter().all(|p| eval_with(p, truth)),
        BoolFormula::Or(ps) => ps.iter().any(|p| eval_with(p, truth)),
    }
}

/// Brute-force satisfiability: try every truth pattern of the distinct
/// atoms and check the matching polyhedral cell for a point.
pub fn brute_force_sat(f: &BoolFormula) -> bool {
    let mut atoms = f.atoms();
    atoms.sort();
    atoms.dedup();
    let vars = f.var_count();
    for mask in 0u32..(1 << atoms.len()) {
        let truth = |a: &DlAtom| {
            let k = atoms.iter().position(|b| b == a).unwrap();
            mask >> k & 1 == 1
        };
        if !eval_with(f, &truth) {
            continue;
        }
        let cell: Vec<DlAtom> = atoms
            .iter()
            .enumerate()
            .map(|(k, a)| if mask >> k & 1 == 1 { *a } else { a.negate() })
            .collect();
        if conjunction_feasible(&cell, vars) {
            return true;
        }
    }
    false
}

fn random_var(rng: &mut impl Rng, vars: usize, allow_zero: bool) -> DlVar {
    if allow_zero && rng.gen_bool(0.15) {
        DlVar::Zero
    } else {
        DlVar::X(rng.gen_range(0..vars))
    }
}

pub fn random_atom(rng: &mut impl Rng, vars: usize) -> DlAtom {
    let lhs = random_var(rng, vars, true);
    let rhs = loop {
        let r = random_var(rng, vars, true);
        if r != lhs {
            break r;
        }
    };
    let rel = if rng.gen_bool(0.5) { Rel::Ge } else { Rel::Gt };
    DlAtom::new(lhs, rhs, rel, q(rng.gen_range(-5..=5)))
}

/// Random formula with at most `max_atoms` atom occurrences over at most
/// `vars` state variables (at least 2).
pub fn random_formula(rng: &mut impl Rng, vars: usize, max_atoms: usize) -> BoolFormula {
    let atoms = rng.gen_range(1..=max_atoms);
    build(rng, vars, atoms, 0)
}

fn build(rng: &mut impl Rng, vars: usize, atoms: usize, depth: usize) -> BoolFormula {
    if atoms == 1 || depth >= 3 {
        let parts: Vec<BoolFormula> = (0..atoms)
            .map(|_| {
                let a = BoolFormula::Atom(random_atom(rng, vars));
                if rng.gen_bool(0.2) {
                    BoolFormula::Not(Box::new(a))
                } else {
                    a
                }
            })
            .collect();
        return if parts.len() == 1 {
            parts.into_iter().next().unwrap()
        } else if rng.gen_bool(0.7) {
            BoolFormula::And(parts)
        } else {
            BoolFormula::Or(parts)
        };
    }
    let split = rng.gen_range(1..atoms);
    let left = build(rng, vars, split, depth + 1);
    let right = build(rng, vars, atoms - split, depth + 1);
    if rng.gen_bool(0.7) {
        BoolFormula::And(vec![left, right])
    } else {
        BoolFormula::Or(vec![left, right])
    }
}

/// Evaluate `max_i(x_i + a_i) ∼ max_j(x_j + b_j)` directly.
pub fn row_inequality_holds(a: &[MaxPlusValue], b: &[MaxPlusValue], rel: Rel, x: &[Rational]) -> bool {
    let side = |coeffs: &[MaxPlusValue]| {
        coeffs
            .iter()
            .zip(x)
            .map(|(c, xi)| c.otimes(MaxPlusValue::Fin(*xi)))
            .fold(MaxPlusValue::Eps, MaxPlusValue::oplus)
    };
    side(a).satisfies(rel == Rel::Gt, side(b))
}

pub fn random_value(rng: &mut impl Rng, eps_prob: f64) -> MaxPlusValue {
    if rng.gen_bool(eps_prob) {
        MaxPlusValue::Eps
    } else {
        MaxPlusValue::int(rng.gen_range(-4..=4))
    }
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| Rational::new(rng.gen_range(-20..=20), rng.gen_range(1..=2))).collect()
}

/// Step-by-step simulation of `x(k+1) = A ⊗ x(k)`.
pub fn simulate(a: &MaxPlusMatrix, x0: &[Rational], steps: usize) -> Vec<Vec<MaxPlusValue>> {
    let n = a.rows();
    let mut out = vec![x0.iter().map(|v| MaxPlusValue::Fin(*v)).collect::<Vec<_>>()];
    for _ in 0..steps {
        let prev = out.last().unwrap();
        let next = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| a.get(i, j).otimes(prev[j]))
                    .fold(MaxPlusValue::Eps, MaxPlusValue::oplus)
            })
            .collect();
        out.push(next);
    }
    out
}

/// Smallest `(k, c)` (lexicographically in `k + c`, then `c`) with
/// `x(k + c) = λc + x(k)` along a simulated trajectory, scanning up to
/// `horizon` steps.
pub fn simulated_local_pair(a: &MaxPlusMatrix, lambda: Rational, x0: &[Rational], horizon: usize) -> Option<(usize, usize)> {
    let traj = simulate(a, x0, horizon);
    for t in 1..=horizon {
        for c in 1..=t {
            let k = t - c;
            let shift = MaxPlusValue::Fin(lambda * q(c as i64));
            if traj[t].iter().zip(&traj[k]).all(|(u, v)| *u == v.otimes(shift)) {
                return Some((k, c));
            }
        }
    }
    None
}

/// Random regular matrix with integer entries in `[-9, 9]` and roughly
/// `density` of the entries finite.
pub fn random_regular(rng: &mut impl Rng, n: usize, density: f64) -> MaxPlusMatrix {
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row: Vec<MaxPlusValue> = (0..n)
            .map(|_| if rng.gen_bool(density) { MaxPlusValue::int(rng.gen_range(-9..=9)) } else { MaxPlusValue::Eps })
            .collect();
        if row.iter().all(|v| v.is_eps()) {
            let j = rng.gen_range(0..n);
            row[j] = MaxPlusValue::int(rng.gen_range(-9..=9));
        }
        rows.push(row);
    }
    MaxPlusMatrix::from_rows(rows).unwrap()
}

/// `f` and `g` describe the same set (checked with the built-in solver).
pub fn equivalent(f: &BoolFormula, g: &BoolFormula) -> bool {
    use mpl_transient::smt::solve;
    let a = BoolFormula::and([f.clone(), g.negate()]);
    let b = BoolFormula::and([g.clone(), f.negate()]);
    !solve(&a.nnf()).unwrap().is_sat() && !solve(&b.nnf()).unwrap().is_sat()
}

/// Formulas the encoder and synthesis produce, plus hand-written cases.
pub fn regression_corpus() -> Vec<BoolFormula> {
    use mpl_transient::encode::eq_func;
    use mpl_transient::transient::{synth_sp, synth_spq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    let b: MaxPlusMatrix = "3 3\n2 8 eps\n10 5 eps\n3 eps 8".parse().unwrap();
    let mut out: Vec<BoolFormula> = [
        "x1 - x2 >= 1 & x2 - x1 >= 0",
        "x1 - x2 > 0 & x2 - x1 >= 0",
        "x1 - x2 >= 1 | x2 - x1 >= 1",
        "x1 >= 5 & x1 < 6 & x2 - x1 > 1/2",
        "(x1 - x3 >= 3 & x1 - x3 < 5) & x2 - x3 < 5",
        "true",
        "x1 >= -3/2 & x1 <= -3/2",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    for p in 0..6 {
        out.push(synth_sp(&b, p, Some(2)).unwrap().nnf());
        out.push(synth_spq(&b, p, 1, Some(2)).unwrap().nnf());
        out.push(synth_spq(&b, p, 2, Some(2)).unwrap().nnf());
    }
    let a = railway();
    out.push(eq_func(&a, &MaxPlusMatrix::identity(2).unwrap().scale(MaxPlusValue::int(4))).unwrap());
    out.push(eq_func(&a.pow(2).unwrap(), &MaxPlusMatrix::identity(2).unwrap().scale(MaxPlusValue::int(8))).unwrap().negate());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        out.push(random_formula(&mut rng, 4, 6).nnf());
    }
    out
}
