//! Probabilistic Boolean network model: candidate functions, functional
//! variables, structure matrices, expected dynamics and the global
//! transition matrix used by the verification oracle.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{column_bit, BoolExpr};
use crate::stp::{LogicalMatrix, Matrix, Rational, StochasticMatrix};

/// Enumeration caps. Synthesis is bounded by `max_indegree`; the exhaustive
/// oracle by `max_nodes` and `max_modes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_indegree: usize,
    pub max_nodes: usize,
    pub max_modes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_indegree: 20,
            max_nodes: 12,
            max_modes: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model has no nodes")]
    Empty,
    #[error("duplicate node name `{0}`")]
    DuplicateName(String),
    #[error("node `{0}` has no candidate functions")]
    NoCandidates(String),
    #[error("node `{node}`: probability {value} outside [0, 1]")]
    ProbabilityRange { node: String, value: String },
    #[error("node `{node}`: candidate probabilities sum to {sum}, expected exactly 1")]
    ProbabilitySum { node: String, sum: String },
    #[error("node `{node}` references unknown node index {index}")]
    UnknownReference { node: String, index: usize },
    #[error("{count} input variables exceed the in-degree cap of {cap}")]
    InDegreeCap { count: usize, cap: usize },
    #[error("{n} nodes exceed the exhaustive-analysis cap of {cap}")]
    NodeCap { n: usize, cap: usize },
    #[error("{count} modes exceed the mode-enumeration cap of {cap}")]
    ModeCap { count: String, cap: usize },
    #[error("target has {got} values for a {expected}-node model")]
    TargetLength { got: usize, expected: usize },
}

impl ModelError {
    /// True for errors raised by an enumeration cap rather than by bad input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            ModelError::InDegreeCap { .. } | ModelError::NodeCap { .. } | ModelError::ModeCap { .. }
        )
    }
}

/// One candidate update function `f_i^κ` with its selection probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateFunction {
    pub expr: BoolExpr,
    pub probability: Rational,
    /// Functional variables `N_{i,κ}`, ascending.
    pub functional_vars: Vec<usize>,
    /// Truth table over `functional_vars`.
    pub structure: LogicalMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbnNode {
    pub name: String,
    pub candidates: Vec<CandidateFunction>,
    /// In-neighbours `N_i`: union of the candidates' functional variables.
    pub neighbors: Vec<usize>,
}

impl PbnNode {
    /// Structure matrix of candidate `k` extended to `N_i`.
    pub fn extended_structure(&self, k: usize) -> LogicalMatrix {
        let c = &self.candidates[k];
        extend_structure_matrix(&c.structure, &c.functional_vars, &self.neighbors)
    }

    /// Candidates that can actually be selected.
    pub fn active_candidates(&self) -> impl Iterator<Item = (usize, &CandidateFunction)> {
        self.candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.probability.is_zero())
    }
}

/// Input form of a node for [`PbnModel::new`].
#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub name: String,
    pub candidates: Vec<(BoolExpr, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbnModel {
    pub name: String,
    pub nodes: Vec<PbnNode>,
    /// Optional desired steady state, one value per node.
    pub target: Option<Vec<bool>>,
}

impl PbnModel {
    pub fn new(name: impl Into<String>, specs: Vec<NodeSpec>, limits: &Limits) -> Result<Self, ModelError> {
        if specs.is_empty() {
            return Err(ModelError::Empty);
        }
        let n = specs.len();
        let mut seen = BTreeSet::new();
        for s in &specs {
            if !seen.insert(s.name.as_str()) {
                return Err(ModelError::DuplicateName(s.name.clone()));
            }
        }
        let mut nodes = Vec::with_capacity(n);
        for spec in specs {
            if spec.candidates.is_empty() {
                return Err(ModelError::NoCandidates(spec.name));
            }
            let mut sum = Rational::zero();
            let mut candidates = Vec::with_capacity(spec.candidates.len());
            let mut neighbors = BTreeSet::new();
            for (expr, probability) in spec.candidates {
                if probability < Rational::zero() || probability > Rational::one() {
                    return Err(ModelError::ProbabilityRange {
                        node: spec.name,
                        value: probability.to_string(),
                    });
                }
                let refs: Vec<usize> = expr.referenced().into_iter().collect();
                if let Some(&bad) = refs.iter().find(|&&i| i >= n) {
                    return Err(ModelError::UnknownReference {
                        node: spec.name,
                        index: bad,
                    });
                }
                let functional_vars = functional_variables(&expr, &refs, limits.max_indegree)?;
                let structure = structure_matrix(&expr, &functional_vars);
                neighbors.extend(functional_vars.iter().copied());
                sum += &probability;
                candidates.push(CandidateFunction {
                    expr,
                    probability,
                    functional_vars,
                    structure,
                });
            }
            if !sum.is_one() {
                return Err(ModelError::ProbabilitySum {
                    node: spec.name,
                    sum: sum.to_string(),
                });
            }
            if neighbors.len() > limits.max_indegree {
                return Err(ModelError::InDegreeCap {
                    count: neighbors.len(),
                    cap: limits.max_indegree,
                });
            }
            nodes.push(PbnNode {
                name: spec.name,
                candidates,
                neighbors: neighbors.into_iter().collect(),
            });
        }
        Ok(PbnModel {
            name: name.into(),
            nodes,
            target: None,
        })
    }

    pub fn with_target(mut self, target: Option<Vec<bool>>) -> Result<Self, ModelError> {
        if let Some(t) = &target {
            if t.len() != self.nodes.len() {
                return Err(ModelError::TargetLength {
                    got: t.len(),
                    expected: self.nodes.len(),
                });
            }
        }
        self.target = target;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.name.clone()).collect()
    }

    /// Re-specifies the model, e.g. after rewriting candidate expressions.
    pub fn specs(&self) -> Vec<NodeSpec> {
        self.nodes
            .iter()
            .map(|n| NodeSpec {
                name: n.name.clone(),
                candidates: n
                    .candidates
                    .iter()
                    .map(|c| (c.expr.clone(), c.probability.clone()))
                    .collect(),
            })
            .collect()
    }

    /// Semantic equality: same names, same candidate truth tables and probabilities in order.
    pub fn semantically_eq(&self, other: &PbnModel) -> bool {
        self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| {
                a.name == b.name
                    && a.candidates.len() == b.candidates.len()
                    && a.candidates.iter().zip(&b.candidates).all(|(x, y)| {
                        x.probability == y.probability
                            && x.functional_vars == y.functional_vars
                            && x.structure == y.structure
                    })
            })
    }
}

/// Functional variables of `expr` among `candidates` (ascending), by exhaustive
/// enumeration of all `2^|candidates|` assignments.
pub fn functional_variables(
    expr: &BoolExpr,
    candidates: &[usize],
    max_indegree: usize,
) -> Result<Vec<usize>, ModelError> {
    if candidates.len() > max_indegree {
        return Err(ModelError::InDegreeCap {
            count: candidates.len(),
            cap: max_indegree,
        });
    }
    let k = candidates.len();
    let table: Vec<bool> = (0..1usize << k)
        .map(|col| eval_on_column(expr, candidates, col))
        .collect();
    Ok(candidates
        .iter()
        .enumerate()
        .filter(|&(pos, _)| {
            let flip = 1usize << (k - 1 - pos);
            (0..table.len()).any(|col| table[col] != table[col ^ flip])
        })
        .map(|(_, &v)| v)
        .collect())
}

/// Variables outside `vars` read as 0; they must not be functional.
fn eval_on_column(expr: &BoolExpr, vars: &[usize], col: usize) -> bool {
    let k = vars.len();
    expr.eval(&|i| {
        vars.iter()
            .position(|&v| v == i)
            .is_some_and(|pos| column_bit(col, pos, k))
    })
}

/// Structure matrix `H_f` of `expr` over `ordered_vars` (first variable is the
/// highest-order factor). `ordered_vars` must contain every functional variable.
pub fn structure_matrix(expr: &BoolExpr, ordered_vars: &[usize]) -> LogicalMatrix {
    let k = ordered_vars.len();
    let indices = (0..1usize << k)
        .map(|col| if eval_on_column(expr, ordered_vars, col) { 1 } else { 2 })
        .collect();
    LogicalMatrix::new(2, indices).expect("indices are 1 or 2")
}

/// For every column of a truth table over `to` (zero-based), the column of a
/// table over `from` that reads the same variable values. Requires `from ⊆ to`.
pub fn column_projection(from: &[usize], to: &[usize]) -> Vec<usize> {
    let positions: Vec<usize> = from
        .iter()
        .map(|v| {
            to.iter()
                .position(|w| w == v)
                .unwrap_or_else(|| panic!("variable {v} missing from target ordering"))
        })
        .collect();
    let k_to = to.len();
    let k_from = from.len();
    (0..1usize << k_to)
        .map(|col| {
            positions.iter().enumerate().fold(0usize, |acc, (i, &p)| {
                let bit = (col >> (k_to - 1 - p)) & 1;
                acc | (bit << (k_from - 1 - i))
            })
        })
        .collect()
}

/// Extended structure matrix: `F̂ ⋉_{j∈to} x_j = F ⋉_{j∈from} x_j`.
pub fn extend_structure_matrix(f: &LogicalMatrix, from: &[usize], to: &[usize]) -> LogicalMatrix {
    assert_eq!(f.cols(), 1usize << from.len(), "structure matrix width mismatch");
    let indices = column_projection(from, to).into_iter().map(|c| f.index(c)).collect();
    LogicalMatrix::new(f.rows(), indices).expect("indices copied from a valid matrix")
}

/// Re-expresses the columns of `m` (over `from`) as a matrix over `to`, where
/// `from ⊆ to`; covers both extension and permutation of inputs.
pub fn remap_columns(m: &StochasticMatrix, from: &[usize], to: &[usize]) -> StochasticMatrix {
    let probs = column_projection(from, to)
        .into_iter()
        .map(|c| m.prob_true(c).clone())
        .collect();
    StochasticMatrix::from_true_probabilities(probs).expect("columns copied from a stochastic matrix")
}

/// Expected dynamics `F̂_i = Σ_κ p_i^κ F̂_i^κ` over `N_i`.
pub fn expected_matrix(node: &PbnNode) -> StochasticMatrix {
    let cols = 1usize << node.neighbors.len();
    let mut probs = vec![Rational::zero(); cols];
    for (k, cand) in node.candidates.iter().enumerate() {
        if cand.probability.is_zero() {
            continue;
        }
        let ext = node.extended_structure(k);
        for (c, p) in probs.iter_mut().enumerate() {
            if ext.index(c) == 1 {
                *p += &cand.probability;
            }
        }
    }
    StochasticMatrix::from_true_probabilities(probs).expect("probabilities sum to one")
}

/// Canonical state index (1-based): `1 + Σ (1 - x_i) 2^{n-i}`.
pub fn state_index(values: &[bool]) -> usize {
    crate::expr::column_of(values) + 1
}

/// Inverse of [`state_index`].
pub fn state_values(index: usize, n: usize) -> Vec<bool> {
    assert!(index >= 1 && index <= 1usize << n, "state index out of range");
    (0..n).map(|p| column_bit(index - 1, p, n)).collect()
}

fn check_node_cap(model: &PbnModel, limits: &Limits) -> Result<(), ModelError> {
    if model.len() > limits.max_nodes {
        return Err(ModelError::NodeCap {
            n: model.len(),
            cap: limits.max_nodes,
        });
    }
    Ok(())
}

/// Retrieval matrix `Υ_i` with `Υ_i ⋉_{j=1..n} x_j = ⋉_{j∈N_i} x_j`.
pub fn retrieval_matrix(neighbors: &[usize], n: usize) -> LogicalMatrix {
    let all: Vec<usize> = (0..n).collect();
    let indices = column_projection(neighbors, &all).into_iter().map(|c| c + 1).collect();
    LogicalMatrix::new(1usize << neighbors.len(), indices).expect("projection stays in range")
}

/// State transition matrix `L = (F̂_1 Υ_1) ∗ ⋯ ∗ (F̂_n Υ_n)`.
pub fn transition_matrix(model: &PbnModel, limits: &Limits) -> Result<StochasticMatrix, ModelError> {
    check_node_cap(model, limits)?;
    let n = model.len();
    let mut acc: Option<Matrix> = None;
    for node in &model.nodes {
        let f_hat = expected_matrix(node);
        let upsilon = retrieval_matrix(&node.neighbors, n).to_matrix();
        let factor = f_hat.as_matrix().mul(&upsilon).expect("Υ_i has 2^|N_i| rows");
        acc = Some(match acc {
            None => factor,
            Some(prev) => prev.khatri_rao(&factor).expect("all factors have 2^n columns"),
        });
    }
    let l = acc.expect("model is non-empty");
    Ok(StochasticMatrix::try_from_matrix(l).expect("Khatri-Rao of stochastic factors is stochastic"))
}

/// Transition matrix built column by column from the per-node next-state
/// probabilities (independent selection across nodes).
pub fn transition_matrix_by_states(model: &PbnModel, limits: &Limits) -> Result<StochasticMatrix, ModelError> {
    check_node_cap(model, limits)?;
    let n = model.len();
    let size = 1usize << n;
    let expected: Vec<StochasticMatrix> = model.nodes.iter().map(expected_matrix).collect();
    let mut m = Matrix::zeros(size, size);
    for s in 0..size {
        let state = state_values(s + 1, n);
        let p_true: Vec<Rational> = model
            .nodes
            .iter()
            .zip(&expected)
            .map(|(node, e)| {
                let vals: Vec<bool> = node.neighbors.iter().map(|&j| state[j]).collect();
                e.prob_true(crate::expr::column_of(&vals)).clone()
            })
            .collect();
        for t in 0..size {
            let mut prob = Rational::one();
            for (i, p) in p_true.iter().enumerate() {
                let factor = if column_bit(t, i, n) {
                    p.clone()
                } else {
                    Rational::one() - p
                };
                if factor.is_zero() {
                    prob = Rational::zero();
                    break;
                }
                prob *= factor;
            }
            m.set(t, s, prob);
        }
    }
    Ok(StochasticMatrix::try_from_matrix(m).expect("product distributions are stochastic"))
}
