//! Difference-logic theory: a constraint graph kept consistent by an
//! incrementally maintained potential function.
//!
//! Sign convention: the atom `u − v ≥ c` becomes the edge `u → v` with
//! weight `−c`, read as `x_v ≤ x_u − c`. A strict atom `u − v > c` uses the
//! weight `−c − δ` for an infinitesimal `δ > 0`. The asserted atoms are
//! consistent iff the graph has no negative cycle.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::maxplus::Rational;

/// `c + d·δ` with lexicographic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StrictWeight {
    pub c: Rational,
    pub d: i64,
}

impl StrictWeight {
    pub fn new(c: Rational, d: i64) -> Self {
        Self { c, d }
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), 0)
    }

    /// Value once `δ` is fixed.
    pub fn at(self, delta: Rational) -> Rational {
        self.c + delta * Rational::from_integer(self.d)
    }
}

impl Ord for StrictWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c.cmp(&other.c).then(self.d.cmp(&other.d))
    }
}

impl PartialOrd for StrictWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for StrictWeight {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c + o.c, self.d + o.d)
    }
}

impl Sub for StrictWeight {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.c - o.c, self.d - o.d)
    }
}

impl Neg for StrictWeight {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.c, -self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TheoryEdge {
    pub from: usize,
    pub to: usize,
    pub weight: StrictWeight,
}

impl TheoryEdge {
    /// Edge for `x_from − x_to ≥ bound` (or `>` when `strict`).
    pub fn for_atom(from: usize, to: usize, bound: Rational, strict: bool) -> Self {
        Self {
            from,
            to,
            weight: StrictWeight::new(-bound, if strict { -1 } else { 0 }),
        }
    }
}

/// Constraint graph over a fixed universe of candidate edges, any subset of
/// which may be active.
#[derive(Clone, Debug)]
pub struct ConstraintGraph {
    nodes: usize,
    edges: Vec<TheoryEdge>,
    active: Vec<bool>,
    out: Vec<Vec<usize>>,
    /// Feasible potential for the active edges: `pi[to] ≤ pi[from] + w`.
    pi: Vec<StrictWeight>,
}

impl ConstraintGraph {
    pub fn new(nodes: usize) -> Self {
        Self {
            nodes,
            edges: Vec::new(),
            active: Vec::new(),
            out: vec![Vec::new(); nodes],
            pi: vec![StrictWeight::zero(); nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Register a candidate edge (inactive) and return its id.
    pub fn add_edge(&mut self, edge: TheoryEdge) -> usize {
        let id = self.edges.len();
        self.out[edge.from].push(id);
        self.edges.push(edge);
        self.active.push(false);
        id
    }

    pub fn edge(&self, id: usize) -> TheoryEdge {
        self.edges[id]
    }

    pub fn is_active(&self, id: usize) -> bool {
        self.active[id]
    }

    /// Activate an edge. On a negative cycle the edge stays inactive and the
    /// ids of the cycle's edges (including `id`) are returned.
    pub fn activate(&mut self, id: usize) -> Result<(), Vec<usize>> {
        if self.active[id] {
            return Ok(());
        }
        let TheoryEdge { from, to, weight } = self.edges[id];
        if from == to {
            if weight < StrictWeight::zero() {
                return Err(vec![id]);
            }
            self.active[id] = true;
            return Ok(());
        }
        if self.pi[from] + weight >= self.pi[to] {
            self.active[id] = true;
            return Ok(());
        }

        // Label-correcting repair started from `to`. Any new negative cycle
        // runs through the new edge, so it shows up as an improvement of
        // `from`.
        let mut tentative: Vec<Option<StrictWeight>> = vec![None; self.nodes];
        let mut pred: Vec<Option<usize>> = vec![None; self.nodes];
        tentative[to] = Some(self.pi[from] + weight);
        pred[to] = Some(id);
        let mut queue = VecDeque::from([to]);
        let mut queued = vec![false; self.nodes];
        queued[to] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            let du = tentative[u].expect("queued nodes carry a label");
            for &e in &self.out[u] {
                if !self.active[e] {
                    continue;
                }
                let TheoryEdge { to: v, weight: w, .. } = self.edges[e];
                let cand = du + w;
                let current = tentative[v].unwrap_or(self.pi[v]);
                if cand < current {
                    if v == from {
                        return Err(self.trace_cycle(&pred, e, u, to));
                    }
                    tentative[v] = Some(cand);
                    pred[v] = Some(e);
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        for (v, t) in tentative.into_iter().enumerate() {
            if let Some(t) = t {
                self.pi[v] = t;
            }
        }
        self.active[id] = true;
        Ok(())
    }

    fn trace_cycle(&self, pred: &[Option<usize>], closing: usize, mut at: usize, start: usize) -> Vec<usize> {
        let mut cycle = vec![closing];
        loop {
            let e = pred[at].expect("predecessor chain reaches the new edge");
            cycle.push(e);
            if at == start {
                break;
            }
            at = self.edges[e].from;
        }
        cycle
    }

    pub fn deactivate(&mut self, id: usize) {
        // The potential stays feasible for any subset of active edges.
        self.active[id] = false;
    }

    /// A concrete assignment satisfying every active edge, with `δ` fixed
    /// to half the tightest slack (or 1 if nothing is tight).
    pub fn assignment(&self) -> Vec<Rational> {
        let mut delta = Rational::one();
        for (e, edge) in self.edges.iter().enumerate() {
            if !self.active[e] {
                continue;
            }
            let slack = self.pi[edge.from] + edge.weight - self.pi[edge.to];
            if slack.d < 0 {
                debug_assert!(slack.c.is_positive());
                let bound = slack.c / Rational::from_integer(-slack.d);
                let half = bound / Rational::from_integer(2);
                if half < delta {
                    delta = half;
                }
            }
        }
        self.pi.iter().map(|p| p.at(delta)).collect()
    }

    /// Does the assignment satisfy every active edge?
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        self.edges.iter().enumerate().filter(|(e, _)| self.active[*e]).all(|(_, edge)| {
            let lhs = x[edge.from] - x[edge.to];
            let bound = -edge.weight.c;
            if edge.weight.d < 0 {
                lhs > bound
            } else {
                lhs >= bound
            }
        })
    }
}
