//! Structural and spectral analysis of a square max-plus matrix.
//!
//! The precedence graph has an edge `j → i` of weight `A(i,j)` for every
//! finite entry, so `x_i(k+1)` reads from the sources of the edges entering
//! `i`. Growth rates therefore flow along edges: a node grows at the largest
//! cycle mean among the strongly connected components upstream of it.

use std::collections::{HashMap, VecDeque};

use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxplus::{MaxPlusMatrix, MaxPlusValue, Rational};
use crate::transient::{self, ConeOptions, Status};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecedenceGraph {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    /// `incoming[i]` lists indices into `edges` that end at `i`.
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl PrecedenceGraph {
    pub fn successors(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.outgoing[v].iter().map(move |&e| &self.edges[e])
    }

    pub fn predecessors(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.incoming[v].iter().map(move |&e| &self.edges[e])
    }

    fn from_edges(nodes: usize, edges: Vec<Edge>) -> Self {
        let mut incoming = vec![Vec::new(); nodes];
        let mut outgoing = vec![Vec::new(); nodes];
        for (k, e) in edges.iter().enumerate() {
            incoming[e.target].push(k);
            outgoing[e.source].push(k);
        }
        Self {
            nodes,
            edges,
            incoming,
            outgoing,
        }
    }

    /// Strongly connected components (Tarjan), in reverse topological order
    /// of the condensation.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let adj: Vec<Vec<usize>> = (0..self.nodes)
            .map(|v| self.successors(v).map(|e| e.target).collect())
            .collect();
        tarjan_scc(&adj)
    }

    /// Is there a circuit through `v` using only edges inside `component`?
    fn has_circuit(&self, component: &[usize]) -> bool {
        component.len() > 1
            || self
                .successors(component[0])
                .any(|e| e.target == component[0])
    }
}

pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

pub fn precedence_graph(a: &MaxPlusMatrix) -> Result<PrecedenceGraph> {
    let n = a.require_square()?;
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if let MaxPlusValue::Fin(w) = a.get(i, j) {
                edges.push(Edge {
                    source: j,
                    target: i,
                    weight: w,
                });
            }
        }
    }
    Ok(PrecedenceGraph::from_edges(n, edges))
}

pub fn is_irreducible(a: &MaxPlusMatrix) -> Result<bool> {
    Ok(precedence_graph(a)?.sccs().len() == 1)
}

pub fn is_regular(a: &MaxPlusMatrix) -> bool {
    a.is_regular()
}

/// A strongly connected component with its maximum circuit mean, if it
/// contains a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub nodes: Vec<usize>,
    pub cycle_mean: Option<Rational>,
}

/// Karp's maximum cycle mean restricted to one strongly connected component.
fn karp_max_mean(g: &PrecedenceGraph, component: &[usize]) -> Option<Rational> {
    if !g.has_circuit(component) {
        return None;
    }
    let s = component.len();
    let local: HashMap<usize, usize> = component.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    // d[k][v]: heaviest walk of exactly k edges from component[0] to v.
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; s]; s + 1];
    d[0][0] = Some(Rational::zero());
    for k in 1..=s {
        for (vi, &v) in component.iter().enumerate() {
            let mut best: Option<Rational> = None;
            for e in g.predecessors(v) {
                let Some(&ui) = local.get(&e.source) else { continue };
                if let Some(prev) = d[k - 1][ui] {
                    let cand = prev + e.weight;
                    if best.is_none_or(|b| cand > b) {
                        best = Some(cand);
                    }
                }
            }
            d[k][vi] = best;
        }
    }
    let mut lambda: Option<Rational> = None;
    for (v, &last) in d[s].iter().enumerate() {
        let Some(ds) = last else { continue };
        let worst = (0..s)
            .filter_map(|k| d[k][v].map(|dk| (ds - dk) / Rational::from_integer((s - k) as i64)))
            .min();
        if let Some(w) = worst {
            if lambda.is_none_or(|l| w > l) {
                lambda = Some(w);
            }
        }
    }
    lambda
}

pub fn components(a: &MaxPlusMatrix) -> Result<Vec<Component>> {
    let g = precedence_graph(a)?;
    Ok(g.sccs()
        .into_iter()
        .map(|nodes| {
            let cycle_mean = karp_max_mean(&g, &nodes);
            Component { nodes, cycle_mean }
        })
        .collect())
}

/// Maximum circuit mean λ over all components.
pub fn max_cycle_mean(a: &MaxPlusMatrix) -> Result<Rational> {
    components(a)?
        .iter()
        .filter_map(|c| c.cycle_mean)
        .max()
        .ok_or(Error::NoCircuit)
}

/// Kleene plus of `(−λ) ⊗ A` via a Floyd–Warshall style closure.
///
/// Requires that `(−λ) ⊗ A` has no positive circuit, which holds whenever
/// λ is the maximum circuit mean.
pub fn kleene_plus(a: &MaxPlusMatrix, lambda: Rational) -> Result<MaxPlusMatrix> {
    let n = a.require_square()?;
    let mut c = a.scale(MaxPlusValue::Fin(-lambda));
    for k in 0..n {
        for i in 0..n {
            let MaxPlusValue::Fin(cik) = c.get(i, k) else { continue };
            for j in 0..n {
                if let MaxPlusValue::Fin(ckj) = c.get(k, j) {
                    let cand = MaxPlusValue::Fin(cik + ckj);
                    if cand > c.get(i, j) {
                        c.set(i, j, cand);
                    }
                }
            }
        }
    }
    Ok(c)
}

/// Generators of the finite eigenspace for eigenvalue λ.
///
/// Returns the columns of `A_λ⁺` at indices with a zero diagonal. The cone
/// they span contains finite vectors exactly when every row has a finite
/// entry in some column; otherwise `None`.
pub fn eigenspace_basis(a: &MaxPlusMatrix, lambda: Rational) -> Result<Option<MaxPlusMatrix>> {
    let n = a.require_square()?;
    let plus = kleene_plus(a, lambda)?;
    let critical: Vec<usize> = (0..n)
        .filter(|&i| plus.get(i, i) == MaxPlusValue::unit())
        .collect();
    if critical.is_empty() {
        return Ok(None);
    }
    let mut data = Vec::with_capacity(n * critical.len());
    for i in 0..n {
        data.extend(critical.iter().map(|&j| plus.get(i, j)));
    }
    let basis = MaxPlusMatrix::new(n, critical.len(), data)?;
    Ok(basis.is_regular().then_some(basis))
}

/// Per-node asymptotic growth rate `lim x_j(k)/k`.
pub fn cycle_time_vector(a: &MaxPlusMatrix) -> Result<Vec<Rational>> {
    let n = a.require_square()?;
    if let Some(row) = a.first_empty_row() {
        return Err(Error::NotRegular(row));
    }
    let g = precedence_graph(a)?;
    let comps = g.sccs();
    let mut comp_of = vec![0; n];
    for (c, nodes) in comps.iter().enumerate() {
        for &v in nodes {
            comp_of[v] = c;
        }
    }
    let means: Vec<Option<Rational>> = comps.iter().map(|c| karp_max_mean(&g, c)).collect();

    let mut chi = Vec::with_capacity(n);
    for target in 0..n {
        // Walk edges backwards to find every node upstream of `target`.
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([target]);
        seen[target] = true;
        let mut best: Option<Rational> = None;
        while let Some(v) = queue.pop_front() {
            if let Some(m) = means[comp_of[v]] {
                if best.is_none_or(|b| m > b) {
                    best = Some(m);
                }
            }
            for e in g.predecessors(v) {
                if !seen[e.source] {
                    seen[e.source] = true;
                    queue.push_back(e.source);
                }
            }
        }
        chi.push(best.ok_or(Error::NoUpstreamCircuit(target))?);
    }
    Ok(chi)
}

/// Cyclicity of the critical graph: lcm over its strongly connected
/// components of the gcd of their circuit lengths.
pub fn critical_cyclicity(a: &MaxPlusMatrix) -> Result<u64> {
    let n = a.require_square()?;
    let lambda = max_cycle_mean(a)?;
    let plus = kleene_plus(a, lambda)?;
    let g = precedence_graph(a)?;
    // Edge j → i is critical when it closes a circuit of mean λ.
    let critical: Vec<&Edge> = g
        .edges
        .iter()
        .filter(|e| {
            let back = if e.source == e.target {
                MaxPlusValue::unit()
            } else {
                plus.get(e.source, e.target)
            };
            MaxPlusValue::Fin(e.weight - lambda).otimes(back) == MaxPlusValue::unit()
        })
        .collect();

    let mut adj = vec![Vec::new(); n];
    for e in &critical {
        adj[e.source].push(e.target);
    }
    let mut comp_of = vec![usize::MAX; n];
    let comps = tarjan_scc(&adj);
    for (c, nodes) in comps.iter().enumerate() {
        for &v in nodes {
            comp_of[v] = c;
        }
    }

    let mut total = 1u64;
    for (c, nodes) in comps.iter().enumerate() {
        let root = nodes[0];
        let mut level = vec![usize::MAX; n];
        level[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if comp_of[w] == c && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut period = 0u64;
        for e in critical.iter().filter(|e| comp_of[e.source] == c && comp_of[e.target] == c) {
            let diff = (level[e.source] as i64 + 1 - level[e.target] as i64).unsigned_abs();
            period = period.gcd(&diff);
        }
        if period > 0 {
            total = total.lcm(&period);
        }
    }
    Ok(total)
}

/// Graph cyclicity for irreducible matrices; `None` when reducible.
pub fn graph_cyclicity(a: &MaxPlusMatrix) -> Result<Option<u64>> {
    if !is_irreducible(a)? {
        return Ok(None);
    }
    critical_cyclicity(a).map(Some)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicityClass {
    NeverPeriodic,
    BoundedlyPeriodic,
    UnboundedlyPeriodic,
}

/// First column-level periodicity of `A^{⊗k}(·, col)`: returns `(k, c, μ)`
/// with `A^{⊗k+c}(·,col) = (μ·c) ⊗ A^{⊗k}(·,col)`, searching `k + c ≤ bound`.
pub fn column_rate(a: &MaxPlusMatrix, col: usize, bound: usize) -> Result<Option<(usize, usize, Rational)>> {
    let n = a.require_square()?;
    let mut current = MaxPlusMatrix::identity(n)?.column(col);
    // Shape of each iterate up to a scalar shift, keyed to its step.
    let mut seen: HashMap<Vec<MaxPlusValue>, (usize, Rational)> = HashMap::new();
    for it in 0..=bound {
        let Some(anchor) = current.entries().iter().find_map(MaxPlusValue::finite) else {
            return Ok(None);
        };
        let key: Vec<MaxPlusValue> = current
            .entries()
            .iter()
            .map(|v| v.otimes(MaxPlusValue::Fin(-anchor)))
            .collect();
        if let Some(&(prev, prev_anchor)) = seen.get(&key) {
            let c = it - prev;
            let mu = (anchor - prev_anchor) / Rational::from_integer(c as i64);
            return Ok(Some((prev, c, mu)));
        }
        seen.insert(key, (it, anchor));
        current = a.otimes(&current)?;
    }
    Ok(None)
}

/// Never / boundedly / unboundedly periodic.
///
/// Fails with [`Error::BoundExceeded`] when every column settles at rate λ
/// but no global transient shows up within `bound` steps.
pub fn classify(a: &MaxPlusMatrix, bound: usize) -> Result<PeriodicityClass> {
    let n = a.require_square()?;
    if let Some(row) = a.first_empty_row() {
        return Err(Error::NotRegular(row));
    }
    let lambda = max_cycle_mean(a)?;
    if eigenspace_basis(a, lambda)?.is_none() {
        return Ok(PeriodicityClass::NeverPeriodic);
    }
    for col in 0..n {
        if let Some((_, _, mu)) = column_rate(a, col, bound)? {
            if mu < lambda {
                return Ok(PeriodicityClass::UnboundedlyPeriodic);
            }
        }
    }
    let identity = MaxPlusMatrix::identity(n)?;
    let result = transient::trans_cone(a, &identity, bound, ConeOptions::default())?;
    match result.status {
        Status::Found => Ok(PeriodicityClass::BoundedlyPeriodic),
        Status::BoundExceeded(b) => Err(Error::BoundExceeded(b)),
        Status::NoTransient => Err(Error::Internal(
            "nonempty eigenspace but cycle-time entries differ".into(),
        )),
    }
}

/// Everything the `analyze` command reports about a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralData {
    pub lambda: Rational,
    pub eigenspace_basis: Option<MaxPlusMatrix>,
    pub cycle_time: Vec<Rational>,
    /// `None` when the bounded search could not decide.
    pub class: Option<PeriodicityClass>,
    pub global_cyclicity: Option<u64>,
}

pub fn analyze(a: &MaxPlusMatrix, bound: usize) -> Result<SpectralData> {
    let lambda = max_cycle_mean(a)?;
    let class = match classify(a, bound) {
        Ok(c) => Some(c),
        Err(Error::BoundExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(SpectralData {
        lambda,
        eigenspace_basis: eigenspace_basis(a, lambda)?,
        cycle_time: cycle_time_vector(a)?,
        class,
        global_cyclicity: graph_cyclicity(a)?,
    })
}
