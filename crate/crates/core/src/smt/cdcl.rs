//! Clause-learning search over the Boolean abstraction of a difference-logic
//! formula, with the constraint graph checked on every assignment.
//!
//! Each non-strict atom gets one Boolean variable; a strict atom is the
//! negative literal of its (non-strict) negation. Structure is encoded with
//! one-sided definitional clauses, which suffices because the input is in
//! negation normal form.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::formula::{BoolFormula, DlAtom, DlVar, Rel};
use crate::maxplus::Rational;

use super::theory::{ConstraintGraph, TheoryEdge};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, positive: bool) -> Self {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn negated(self) -> Self {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

enum Propagation {
    Done,
    Conflict(Vec<Lit>),
}

pub(super) struct Search {
    clauses: Vec<Vec<Lit>>,
    original: usize,
    watches: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    /// Theory edge for the positive and negative literal of each atom variable.
    edges: Vec<Option<(usize, usize)>>,
    /// Literal asserted by each theory edge.
    edge_owner: Vec<Lit>,
    graph: ConstraintGraph,
    atom_vars: HashMap<DlAtom, usize>,
    state_vars: usize,
    trivially_unsat: bool,
}

pub(super) enum Outcome {
    Sat(Vec<Rational>),
    Unsat,
}

impl Search {
    /// `state_vars` fixes the index of the zero node (it sits right after
    /// the state variables).
    pub(super) fn new(f: &BoolFormula, state_vars: usize) -> Result<Self> {
        let mut s = Self {
            clauses: Vec::new(),
            original: 0,
            watches: Vec::new(),
            value: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            edges: Vec::new(),
            edge_owner: Vec::new(),
            graph: ConstraintGraph::new(state_vars + 1),
            atom_vars: HashMap::new(),
            state_vars,
            trivially_unsat: false,
        };
        match f {
            BoolFormula::True => {}
            BoolFormula::False => s.trivially_unsat = true,
            _ => {
                let root = s.encode(f)?;
                s.clauses.push(vec![root]);
            }
        }
        s.original = s.clauses.len();
        s.watches = vec![Vec::new(); 2 * s.value.len()];
        for c in 0..s.clauses.len() {
            s.attach(c);
        }
        Ok(s)
    }

    fn new_var(&mut self) -> usize {
        self.value.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.edges.push(None);
        self.value.len() - 1
    }

    fn node(&self, v: DlVar) -> usize {
        match v {
            DlVar::X(i) => i,
            DlVar::Zero => self.state_vars,
        }
    }

    fn atom_lit(&mut self, atom: &DlAtom) -> Lit {
        let (key, positive) = match atom.rel {
            Rel::Ge => (*atom, true),
            Rel::Gt => (atom.negate(), false),
        };
        if let Some(&v) = self.atom_vars.get(&key) {
            return Lit::new(v, positive);
        }
        let v = self.new_var();
        let (from, to) = (self.node(key.lhs), self.node(key.rhs));
        let pos = self.graph.add_edge(TheoryEdge::for_atom(from, to, key.bound, false));
        let neg = self.graph.add_edge(TheoryEdge::for_atom(to, from, -key.bound, true));
        self.edges[v] = Some((pos, neg));
        self.edge_owner.extend([Lit::new(v, true), Lit::new(v, false)]);
        self.atom_vars.insert(key, v);
        Lit::new(v, positive)
    }

    fn encode(&mut self, f: &BoolFormula) -> Result<Lit> {
        Ok(match f {
            BoolFormula::Atom(a) => self.atom_lit(a),
            BoolFormula::Not(inner) => match &**inner {
                BoolFormula::Atom(a) => self.atom_lit(a).negated(),
                _ => return Err(Error::NotNnf),
            },
            BoolFormula::True | BoolFormula::False => {
                let v = self.new_var();
                let lit = Lit::new(v, true);
                let unit = if matches!(f, BoolFormula::True) { lit } else { lit.negated() };
                self.clauses.push(vec![unit]);
                lit
            }
            BoolFormula::And(parts) => {
                let children = parts.iter().map(|p| self.encode(p)).collect::<Result<Vec<_>>>()?;
                let g = Lit::new(self.new_var(), true);
                for c in children {
                    self.clauses.push(vec![g.negated(), c]);
                }
                g
            }
            BoolFormula::Or(parts) => {
                let children = parts.iter().map(|p| self.encode(p)).collect::<Result<Vec<_>>>()?;
                let g = Lit::new(self.new_var(), true);
                let mut clause = vec![g.negated()];
                clause.extend(children);
                self.clauses.push(clause);
                g
            }
        })
    }

    fn attach(&mut self, c: usize) {
        let clause = &self.clauses[c];
        self.watches[clause[0].negated().index()].push(c);
        if clause.len() > 1 {
            self.watches[clause[1].negated().index()].push(c);
        }
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[l.var()].map(|v| v == l.positive())
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Assign `l`; for atom literals also assert the theory edge.
    fn enqueue(&mut self, l: Lit, reason: Option<usize>) -> std::result::Result<(), Vec<Lit>> {
        let v = l.var();
        self.value[v] = Some(l.positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
        if let Some((pos, neg)) = self.edges[v] {
            let id = if l.positive() { pos } else { neg };
            if let Err(cycle) = self.graph.activate(id) {
                return Err(cycle.into_iter().map(|e| self.edge_lit(e).negated()).collect());
            }
        }
        Ok(())
    }

    fn edge_lit(&self, edge: usize) -> Lit {
        self.edge_owner[edge]
    }

    fn propagate(&mut self) -> Propagation {
        while self.qhead < self.trail.len() {
            let l = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = l.negated();
            let mut watching = std::mem::take(&mut self.watches[l.index()]);
            let mut i = 0;
            let mut conflict = None;
            while i < watching.len() {
                let c = watching[i];
                let clause = &mut self.clauses[c];
                if clause.len() == 1 {
                    conflict = Some(clause.clone());
                    break;
                }
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if self.value[first.var()].map(|v| v == first.positive()) == Some(true) {
                    i += 1;
                    continue;
                }
                let replacement = (2..clause.len()).find(|&k| {
                    let lk = clause[k];
                    self.value[lk.var()].map(|v| v == lk.positive()) != Some(false)
                });
                if let Some(k) = replacement {
                    clause.swap(1, k);
                    let new_watch = clause[1].negated().index();
                    self.watches[new_watch].push(c);
                    watching.swap_remove(i);
                    continue;
                }
                i += 1;
                match self.lit_value(first) {
                    Some(false) => {
                        conflict = Some(self.clauses[c].clone());
                        break;
                    }
                    _ => {
                        if let Err(theory) = self.enqueue(first, Some(c)) {
                            conflict = Some(theory);
                            break;
                        }
                    }
                }
            }
            self.watches[l.index()].extend(watching);
            if let Some(c) = conflict {
                return Propagation::Conflict(c);
            }
        }
        Propagation::Done
    }

    /// First-UIP learning. Returns the learned clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&self, conflict: Vec<Lit>) -> (Vec<Lit>, usize) {
        let current = self.decision_level();
        let mut seen = vec![false; self.value.len()];
        let mut learned = vec![Lit(0)];
        let mut pending = 0usize;
        let mut reason_lits = conflict;
        let mut idx = self.trail.len();
        let mut skip: Option<Lit> = None;
        loop {
            for &q in &reason_lits {
                if Some(q) == skip {
                    continue;
                }
                let v = q.var();
                if seen[v] || self.level[v] == 0 {
                    continue;
                }
                seen[v] = true;
                if self.level[v] == current {
                    pending += 1;
                } else {
                    learned.push(q);
                }
            }
            let p = loop {
                idx -= 1;
                let p = self.trail[idx];
                if seen[p.var()] {
                    break p;
                }
            };
            pending -= 1;
            if pending == 0 {
                learned[0] = p.negated();
                break;
            }
            seen[p.var()] = false;
            let r = self.reason[p.var()].expect("implied literal has a reason");
            reason_lits = self.clauses[r].clone();
            skip = Some(p);
        }
        let mut back = 0;
        let mut best = 1;
        for (k, l) in learned.iter().enumerate().skip(1) {
            let lv = self.level[l.var()];
            if lv > back {
                back = lv;
                best = k;
            }
        }
        if learned.len() > 1 {
            learned.swap(1, best);
        }
        (learned, back)
    }

    fn backjump(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level];
        for l in self.trail.drain(keep..).rev() {
            let v = l.var();
            if let Some((pos, neg)) = self.edges[v] {
                self.graph.deactivate(if l.positive() { pos } else { neg });
            }
            self.value[v] = None;
            self.reason[v] = None;
        }
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
    }

    /// First unassigned literal of the first original clause not yet
    /// satisfied.
    fn pick(&self) -> Option<Option<Lit>> {
        for clause in &self.clauses[..self.original] {
            if clause.iter().any(|&l| self.lit_value(l) == Some(true)) {
                continue;
            }
            return Some(clause.iter().copied().find(|&l| self.lit_value(l).is_none()));
        }
        None
    }

    /// Handle a conflict; `false` means the formula is unsatisfiable.
    fn resolve(&mut self, conflict: Vec<Lit>) -> bool {
        let max_level = conflict.iter().map(|l| self.level[l.var()]).max().unwrap_or(0);
        if max_level == 0 {
            return false;
        }
        // Theory conflicts can sit entirely below the current level.
        self.backjump(max_level);
        let (learned, back) = self.analyze(conflict);
        self.backjump(back);
        let asserting = learned[0];
        if learned.len() == 1 {
            if let Err(theory) = self.enqueue(asserting, None) {
                return self.resolve(theory);
            }
            return true;
        }
        let c = self.clauses.len();
        self.clauses.push(learned);
        self.attach(c);
        if let Err(theory) = self.enqueue(asserting, Some(c)) {
            return self.resolve(theory);
        }
        true
    }

    pub(super) fn run(mut self) -> Result<Outcome> {
        if self.trivially_unsat {
            return Ok(Outcome::Unsat);
        }
        // Units from the encoding.
        for c in 0..self.original {
            if self.clauses[c].len() == 1 {
                let l = self.clauses[c][0];
                match self.lit_value(l) {
                    Some(true) => {}
                    Some(false) => return Ok(Outcome::Unsat),
                    None => {
                        if self.enqueue(l, Some(c)).is_err() {
                            return Ok(Outcome::Unsat);
                        }
                    }
                }
            }
        }
        loop {
            match self.propagate() {
                Propagation::Conflict(conflict) => {
                    if !self.resolve(conflict) {
                        return Ok(Outcome::Unsat);
                    }
                }
                Propagation::Done => match self.pick() {
                    None => return Ok(Outcome::Sat(self.model())),
                    Some(None) => {
                        return Err(Error::Internal("falsified clause escaped propagation".into()))
                    }
                    Some(Some(l)) => {
                        self.trail_lim.push(self.trail.len());
                        if let Err(theory) = self.enqueue(l, None) {
                            if !self.resolve(theory) {
                                return Ok(Outcome::Unsat);
                            }
                        }
                    }
                },
            }
        }
    }

    fn model(&self) -> Vec<Rational> {
        let x = self.graph.assignment();
        debug_assert!(self.graph.satisfied_by(&x));
        let zero = x[self.state_vars];
        x[..self.state_vars].iter().map(|v| v - zero).collect()
    }
}
