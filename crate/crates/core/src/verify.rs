//! Exhaustive oracle: mode enumeration, attractors of each deterministic mode,
//! and the global stability verdict for a prescribed state.
//!
//! States are handled as zero-based columns internally (`index - 1`) and
//! reported with canonical 1-based indices.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{column_bit, column_of};
use crate::model::{state_values, Limits, ModelError, PbnModel};
use crate::stp::{LogicalMatrix, Matrix, Rational, StochasticMatrix};
use crate::wiring::{build_wiring_digraph, is_acyclic, WiringDigraph};

/// Candidates of a node with identical truth tables merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedCandidate {
    pub table: LogicalMatrix,
    pub probability: Rational,
    /// Original candidate indices folded into this one.
    pub sources: Vec<usize>,
}

/// Distinct positive-probability update functions per node, over `N_i`.
pub fn merged_candidates(model: &PbnModel) -> Vec<Vec<MergedCandidate>> {
    model
        .nodes
        .iter()
        .map(|node| {
            let mut merged: Vec<MergedCandidate> = Vec::new();
            for (k, c) in node.active_candidates() {
                let table = node.extended_structure(k);
                match merged.iter_mut().find(|m| m.table == table) {
                    Some(m) => {
                        m.probability += &c.probability;
                        m.sources.push(k);
                    }
                    None => merged.push(MergedCandidate {
                        table,
                        probability: c.probability.clone(),
                        sources: vec![k],
                    }),
                }
            }
            merged
        })
        .collect()
}

/// One deterministic constituent network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeModel {
    /// 1-based position in the enumeration.
    pub index: usize,
    /// Chosen merged candidate per node.
    pub choice: Vec<usize>,
    pub probability: Rational,
}

pub fn mode_count(merged: &[Vec<MergedCandidate>]) -> BigUint {
    merged.iter().map(|m| BigUint::from(m.len())).product()
}

pub fn enumerate_modes(model: &PbnModel, limits: &Limits) -> Result<Vec<ModeModel>, ModelError> {
    let merged = merged_candidates(model);
    let count = mode_count(&merged);
    if count > BigUint::from(limits.max_modes) {
        return Err(ModelError::ModeCap {
            count: count.to_string(),
            cap: limits.max_modes,
        });
    }
    let total = count.to_usize().expect("bounded by the cap");
    let mut out = Vec::with_capacity(total);
    let mut choice = vec![0usize; merged.len()];
    for index in 1..=total {
        let probability = choice
            .iter()
            .zip(&merged)
            .map(|(&c, m)| m[c].probability.clone())
            .product();
        out.push(ModeModel {
            index,
            choice: choice.clone(),
            probability,
        });
        // odometer, last node fastest
        for i in (0..choice.len()).rev() {
            choice[i] += 1;
            if choice[i] < merged[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
    Ok(out)
}

fn check_nodes(model: &PbnModel, limits: &Limits) -> Result<(), ModelError> {
    if model.len() > limits.max_nodes {
        return Err(ModelError::NodeCap {
            n: model.len(),
            cap: limits.max_nodes,
        });
    }
    Ok(())
}

fn neighbor_column(neighbors: &[usize], state: usize, n: usize) -> usize {
    neighbors
        .iter()
        .fold(0usize, |acc, &j| (acc << 1) | usize::from(!column_bit(state, j, n)))
}

/// Next-state map of a mode over zero-based state columns.
pub fn mode_transitions(model: &PbnModel, merged: &[Vec<MergedCandidate>], mode: &ModeModel) -> Vec<usize> {
    let n = model.len();
    (0..1usize << n)
        .map(|s| {
            model.nodes.iter().enumerate().fold(0usize, |acc, (i, node)| {
                let table = &merged[i][mode.choice[i]].table;
                let next_true = table.index(neighbor_column(&node.neighbors, s, n)) == 1;
                (acc << 1) | usize::from(!next_true)
            })
        })
        .collect()
}

/// Cycles of a functional graph; fixed points are 1-cycles. Each cycle starts
/// at its smallest state; the list is sorted.
pub fn functional_graph_cycles(next: &[usize]) -> Vec<Vec<usize>> {
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut mark = vec![0u8; next.len()];
    let mut cycles = Vec::new();
    for start in 0..next.len() {
        let mut path = Vec::new();
        let mut s = start;
        while mark[s] == 0 {
            mark[s] = 1;
            path.push(s);
            s = next[s];
        }
        if mark[s] == 1 {
            let pos = path.iter().position(|&p| p == s).expect("state on current path");
            let mut cyc = path[pos..].to_vec();
            let min = cyc
                .iter()
                .enumerate()
                .min_by_key(|(_, &v)| v)
                .map(|(k, _)| k)
                .unwrap_or(0);
            cyc.rotate_left(min);
            cycles.push(cyc);
        }
        for p in path {
            mark[p] = 2;
        }
    }
    cycles.sort();
    cycles
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attractor {
    /// Canonical 1-based state indices along the cycle.
    pub states: Vec<usize>,
    pub tuples: Vec<Vec<u8>>,
}

impl Attractor {
    fn from_columns(cycle: &[usize], n: usize) -> Self {
        Attractor {
            states: cycle.iter().map(|&c| c + 1).collect(),
            tuples: cycle
                .iter()
                .map(|&c| state_values(c + 1, n).into_iter().map(u8::from).collect())
                .collect(),
        }
    }

    pub fn is_fixed_point(&self) -> bool {
        self.states.len() == 1
    }
}

/// Attractors of a deterministic network given by its next-state map.
pub fn attractors(next: &[usize], n: usize) -> Vec<Attractor> {
    functional_graph_cycles(next)
        .iter()
        .map(|c| Attractor::from_columns(c, n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeReport {
    pub index: usize,
    /// Chosen original candidate per node (first of each merged group, 1-based).
    pub candidates: Vec<usize>,
    pub probability: String,
    pub attractors: Vec<Attractor>,
    pub fixes_target: bool,
    /// The target is this mode's only attractor.
    pub unique_attractor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub target: Vec<u8>,
    pub target_index: usize,
    pub modes: Vec<ModeReport>,
    /// Every mode maps the target to itself.
    pub target_fixed_in_every_mode: bool,
    /// Every state reaches the target in the union transition graph.
    pub reachability: bool,
    pub stable: bool,
    /// Every mode has the target as its only attractor.
    pub unique_in_every_mode: bool,
    /// States fixed by every mode.
    pub steady_states: Vec<usize>,
    /// Acyclic wiring digraph with a common fixed point at the target.
    pub acyclic_sufficient_check: bool,
    pub diagnostics: Vec<String>,
}

/// States mapped to themselves by every mode.
pub fn common_fixed_points(maps: &[Vec<usize>]) -> Vec<usize> {
    let size = maps.first().map_or(0, Vec::len);
    (0..size).filter(|&s| maps.iter().all(|m| m[s] == s)).collect()
}

/// Backward search from `target` over the union of the given maps.
pub fn reaches_everywhere(maps: &[Vec<usize>], target: usize) -> Vec<bool> {
    let size = maps.first().map_or(0, Vec::len);
    let mut preds = vec![Vec::new(); size];
    for m in maps {
        for (s, &t) in m.iter().enumerate() {
            preds[t].push(s);
        }
    }
    let mut seen = vec![false; size];
    let mut queue = VecDeque::from([target]);
    seen[target] = true;
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

pub fn check_global_stability(
    model: &PbnModel,
    epsilon: &[bool],
    limits: &Limits,
) -> Result<VerificationReport, ModelError> {
    check_nodes(model, limits)?;
    if epsilon.len() != model.len() {
        return Err(ModelError::TargetLength {
            got: epsilon.len(),
            expected: model.len(),
        });
    }
    let n = model.len();
    let merged = merged_candidates(model);
    let modes = enumerate_modes(model, limits)?;
    let target = column_of(epsilon);
    let maps: Vec<Vec<usize>> = modes.iter().map(|m| mode_transitions(model, &merged, m)).collect();

    let mut diagnostics = Vec::new();
    let mut reports = Vec::with_capacity(modes.len());
    for (mode, next) in modes.iter().zip(&maps) {
        let atts = attractors(next, n);
        let fixes = next[target] == target;
        let unique = fixes && atts.len() == 1;
        if !fixes {
            diagnostics.push(format!(
                "mode {} maps the target to state {}",
                mode.index,
                next[target] + 1
            ));
        }
        reports.push(ModeReport {
            index: mode.index,
            candidates: mode
                .choice
                .iter()
                .zip(&merged)
                .map(|(&c, m)| m[c].sources[0] + 1)
                .collect(),
            probability: mode.probability.to_string(),
            attractors: atts,
            fixes_target: fixes,
            unique_attractor: unique,
        });
    }
    let fixed_everywhere = reports.iter().all(|r| r.fixes_target);
    let reach = reaches_everywhere(&maps, target);
    let stuck: Vec<usize> = (0..reach.len()).filter(|&s| !reach[s]).collect();
    if !stuck.is_empty() {
        diagnostics.push(format!(
            "{} states cannot reach the target (first: {})",
            stuck.len(),
            stuck[0] + 1
        ));
    }
    let reachability = stuck.is_empty();
    let acyclic = is_acyclic(&build_wiring_digraph(model));
    Ok(VerificationReport {
        target: epsilon.iter().map(|&b| u8::from(b)).collect(),
        target_index: target + 1,
        unique_in_every_mode: reports.iter().all(|r| r.unique_attractor),
        modes: reports,
        target_fixed_in_every_mode: fixed_everywhere,
        reachability,
        stable: fixed_everywhere && reachability,
        steady_states: common_fixed_points(&maps).into_iter().map(|s| s + 1).collect(),
        acyclic_sufficient_check: acyclic && fixed_everywhere,
        diagnostics,
    })
}

/// Next-state distribution built by summing mode probabilities, one column
/// per state.
pub fn mode_distribution(model: &PbnModel, limits: &Limits) -> Result<StochasticMatrix, ModelError> {
    check_nodes(model, limits)?;
    let merged = merged_candidates(model);
    let modes = enumerate_modes(model, limits)?;
    let size = 1usize << model.len();
    let mut m = Matrix::zeros(size, size);
    for mode in &modes {
        for (s, t) in mode_transitions(model, &merged, mode).into_iter().enumerate() {
            let v = m.get(t, s) + &mode.probability;
            m.set(t, s, v);
        }
    }
    Ok(StochasticMatrix::try_from_matrix(m).expect("mode probabilities sum to one"))
}

/// Wiring digraph of a single mode.
pub fn mode_digraph(model: &PbnModel, merged: &[Vec<MergedCandidate>], mode: &ModeModel) -> WiringDigraph {
    let edges = model.nodes.iter().enumerate().flat_map(|(i, node)| {
        let k = merged[i][mode.choice[i]].sources[0];
        node.candidates[k].functional_vars.iter().map(move |&j| (j, i))
    });
    WiringDigraph::new(model.len(), edges)
}

/// Random trajectory; each node draws its candidate independently per step.
pub fn simulate(model: &PbnModel, x0: &[bool], steps: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<f64>> = model
        .nodes
        .iter()
        .map(|node| {
            node.candidates
                .iter()
                .map(|c| c.probability.to_f64().unwrap_or(0.0))
                .collect()
        })
        .collect();
    let mut state = x0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for _ in 0..steps {
        let next: Vec<bool> = model
            .nodes
            .iter()
            .zip(&weights)
            .map(|(node, w)| {
                let k = if w.len() == 1 { 0 } else { draw(&mut rng, w) };
                node.candidates[k].expr.eval_state(&state)
            })
            .collect();
        state = next;
        out.push(state.clone());
    }
    out
}

fn draw(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return k;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Exact probability-one check used by callers that only need the verdict.
pub fn is_stable(model: &PbnModel, epsilon: &[bool], limits: &Limits) -> Result<bool, ModelError> {
    Ok(check_global_stability(model, epsilon, limits)?.stable)
}

pub fn total_probability(modes: &[ModeModel]) -> Rational {
    modes.iter().map(|m| m.probability.clone()).sum()
}
