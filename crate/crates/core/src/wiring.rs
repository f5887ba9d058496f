//! Wiring digraph, cycle detection, feedback arc sets and the first-stage
//! pinning partition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::PbnModel;

/// Edge `(tail, head)`: the tail is a functional variable of some
/// positive-probability candidate of the head.
pub type Edge = (usize, usize);

/// Largest edge count accepted by [`FasStrategy::ExhaustiveMin`].
pub const EXHAUSTIVE_FAS_EDGE_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WiringDigraph {
    pub n: usize,
    pub edges: BTreeSet<Edge>,
}

impl WiringDigraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        assert!(edges.iter().all(|&(j, i)| j < n && i < n), "edge endpoint out of range");
        WiringDigraph { n, edges }
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(j, i) in &self.edges {
            adj[j].push(i);
        }
        adj
    }

    pub fn without(&self, removed: &BTreeSet<Edge>) -> WiringDigraph {
        WiringDigraph {
            n: self.n,
            edges: self.edges.difference(removed).copied().collect(),
        }
    }

    pub fn self_loops(&self) -> BTreeSet<Edge> {
        self.edges.iter().filter(|(j, i)| j == i).copied().collect()
    }
}

pub fn build_wiring_digraph(model: &PbnModel) -> WiringDigraph {
    let mut edges = BTreeSet::new();
    for (i, node) in model.nodes.iter().enumerate() {
        for c in &node.candidates {
            if c.probability.is_zero() {
                continue;
            }
            edges.extend(c.functional_vars.iter().map(|&j| (j, i)));
        }
    }
    WiringDigraph { n: model.len(), edges }
}

/// Kahn's algorithm.
pub fn is_acyclic(g: &WiringDigraph) -> bool {
    let mut indeg = vec![0usize; g.n];
    for &(_, i) in &g.edges {
        indeg[i] += 1;
    }
    let adj = g.successors();
    let mut queue: Vec<usize> = (0..g.n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    seen == g.n
}

/// Depth-first search in ascending node order with ascending successor lists.
/// Returns the back edges together with the cycle each one closes.
fn dfs_back_edges(g: &WiringDigraph) -> Vec<(Edge, Vec<usize>)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    let adj = g.successors();
    let mut mark = vec![Mark::White; g.n];
    let mut out = Vec::new();
    for root in 0..g.n {
        if mark[root] != Mark::White {
            continue;
        }
        // (node, next successor position)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Gray;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                match mark[w] {
                    Mark::White => {
                        mark[w] = Mark::Gray;
                        stack.push((w, 0));
                    }
                    Mark::Gray => {
                        let start = stack
                            .iter()
                            .position(|&(u, _)| u == w)
                            .expect("gray node is on the stack");
                        let cycle = stack[start..].iter().map(|&(u, _)| u).collect();
                        out.push(((v, w), cycle));
                    }
                    Mark::Black => {}
                }
            } else {
                mark[v] = Mark::Black;
                stack.pop();
            }
        }
    }
    out
}

/// One cycle per DFS back edge; self-loops appear as length-1 cycles. The
/// list is empty exactly when the graph is acyclic.
pub fn find_cycles(g: &WiringDigraph) -> Vec<Vec<usize>> {
    dfs_back_edges(g).into_iter().map(|(_, c)| c).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FasStrategy {
    DfsBackEdges,
    ExhaustiveMin,
    UserSupplied(Vec<Edge>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FasError {
    #[error("exhaustive FAS search refused: {edges} edges exceed the cap of {cap}")]
    EdgeCap { edges: usize, cap: usize },
    #[error("edge {0:?} is not in the wiring digraph")]
    NotAnEdge(Edge),
    #[error("removing the given edges leaves a cycle through nodes {0:?}")]
    NotAcyclic(Vec<usize>),
}

/// A validated feedback arc set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fas {
    pub edges: BTreeSet<Edge>,
}

/// Checks that removing `edges` from `g` leaves it acyclic.
pub fn validate_fas(g: &WiringDigraph, edges: BTreeSet<Edge>) -> Result<Fas, FasError> {
    if let Some(&e) = edges.iter().find(|e| !g.edges.contains(e)) {
        return Err(FasError::NotAnEdge(e));
    }
    let rest = g.without(&edges);
    if let Some(cycle) = find_cycles(&rest).into_iter().next() {
        return Err(FasError::NotAcyclic(cycle));
    }
    Ok(Fas { edges })
}

pub fn compute_fas(g: &WiringDigraph, strategy: &FasStrategy) -> Result<Fas, FasError> {
    let edges = match strategy {
        FasStrategy::DfsBackEdges => dfs_back_edges(g).into_iter().map(|(e, _)| e).collect(),
        FasStrategy::ExhaustiveMin => exhaustive_min(g)?,
        FasStrategy::UserSupplied(list) => list.iter().copied().collect(),
    };
    validate_fas(g, edges)
}

fn exhaustive_min(g: &WiringDigraph) -> Result<BTreeSet<Edge>, FasError> {
    if g.edges.len() > EXHAUSTIVE_FAS_EDGE_CAP {
        return Err(FasError::EdgeCap {
            edges: g.edges.len(),
            cap: EXHAUSTIVE_FAS_EDGE_CAP,
        });
    }
    let loops = g.self_loops();
    let rest: Vec<Edge> = g.edges.difference(&loops).copied().collect();
    for size in 0..=rest.len() {
        let mut chosen = Vec::with_capacity(size);
        if let Some(found) = subsets_of_size(&rest, size, 0, &mut chosen, &mut |pick| {
            let mut removed = loops.clone();
            removed.extend(pick.iter().copied());
            is_acyclic(&g.without(&removed)).then_some(removed)
        }) {
            return Ok(found);
        }
    }
    unreachable!("removing every edge leaves an acyclic graph")
}

fn subsets_of_size<T: Copy, R>(
    items: &[T],
    size: usize,
    from: usize,
    chosen: &mut Vec<T>,
    visit: &mut impl FnMut(&[T]) -> Option<R>,
) -> Option<R> {
    if chosen.len() == size {
        return visit(chosen);
    }
    let needed = size - chosen.len();
    for k in from..=items.len().saturating_sub(needed) {
        chosen.push(items[k]);
        let r = subsets_of_size(items, size, k + 1, chosen, visit);
        chosen.pop();
        if r.is_some() {
            return r;
        }
    }
    None
}

/// Pinning data for one ending node of the FAS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinnedNode {
    pub node: usize,
    /// `N★`: tails of FAS edges ending here.
    pub deleted: Vec<usize>,
    /// `N° = N_i \ N★`.
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinningPlan {
    pub fas: Fas,
    /// `Λ`, ascending.
    pub pinned: Vec<PinnedNode>,
}

impl PinningPlan {
    pub fn pinned_nodes(&self) -> Vec<usize> {
        self.pinned.iter().map(|p| p.node).collect()
    }

    pub fn get(&self, node: usize) -> Option<&PinnedNode> {
        self.pinned.iter().find(|p| p.node == node)
    }
}

pub fn pinning_partition(model: &PbnModel, fas: &Fas) -> PinningPlan {
    let mut deleted: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(j, i) in &fas.edges {
        deleted.entry(i).or_default().insert(j);
    }
    let pinned = deleted
        .into_iter()
        .map(|(node, star)| {
            let kept = model.nodes[node]
                .neighbors
                .iter()
                .copied()
                .filter(|j| !star.contains(j))
                .collect();
            PinnedNode {
                node,
                deleted: star.into_iter().collect(),
                kept,
            }
        })
        .collect();
    PinningPlan {
        fas: fas.clone(),
        pinned,
    }
}

/// Graphviz rendering; FAS edges are red and pinned nodes filled.
pub fn to_dot(g: &WiringDigraph, names: &[String], fas: Option<&Fas>, pinned: &[usize]) -> String {
    let mut out = String::from("digraph wiring {\n");
    for (v, name) in names.iter().enumerate().take(g.n) {
        let style = if pinned.contains(&v) { " style=filled" } else { "" };
        let _ = writeln!(out, "    n{v} [label=\"{name}\"{style}];");
    }
    for &(j, i) in &g.edges {
        let red = fas.is_some_and(|f| f.edges.contains(&(j, i)));
        let attr = if red { " [color=red]" } else { "" };
        let _ = writeln!(out, "    n{j} -> n{i}{attr};");
    }
    out.push_str("}\n");
    out
}

/// Reads `tail -> head` lines (node names, `#` comments) into edges.
pub fn parse_fas_edges(model: &PbnModel, text: &str) -> Result<Vec<Edge>, String> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (tail, head) = line
            .split_once("->")
            .ok_or_else(|| format!("line {}: expected `tail -> head`", k + 1))?;
        let lookup = |name: &str| {
            model
                .node_index(name.trim())
                .ok_or_else(|| format!("line {}: unknown node `{}`", k + 1, name.trim()))
        };
        out.push((lookup(tail)?, lookup(head)?));
    }
    Ok(out)
}
