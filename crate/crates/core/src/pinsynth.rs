//! First-stage controller synthesis for the ending nodes of a feedback arc set.
//!
//! Each pinned node's inputs are reordered so the kept inputs `N°` lead and the
//! deleted inputs `N★` trail. A target `G` over `N°` is chosen, expanded to `T`
//! over all inputs, and a controller `x⁺ = f ⊙ u` with `u = Ψ̂(x)` is built so
//! that the controlled dynamics equal `T` column by column.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::BoolExpr;
use crate::model::{expected_matrix, extend_structure_matrix, remap_columns, PbnModel};
use crate::stp::{LogicalMatrix, Rational, StochasticMatrix};
use crate::wiring::{PinnedNode, PinningPlan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("internal consistency check failed for node {node}: {detail}")]
    Internal { node: usize, detail: String },
}

/// Pinned node dynamics with inputs ordered `N°` ascending, then `N★` ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReorderedDynamics {
    pub node: usize,
    pub order: Vec<usize>,
    pub kept: usize,
    pub l: StochasticMatrix,
}

impl ReorderedDynamics {
    pub fn deleted(&self) -> usize {
        self.order.len() - self.kept
    }
}

pub fn reorder_inputs(
    node: usize,
    expected: &StochasticMatrix,
    neighbors: &[usize],
    deleted: &[usize],
) -> ReorderedDynamics {
    assert!(
        deleted.iter().all(|d| neighbors.contains(d)),
        "N★ must be a subset of N"
    );
    let mut order: Vec<usize> = neighbors.iter().copied().filter(|j| !deleted.contains(j)).collect();
    let kept = order.len();
    let mut tail = deleted.to_vec();
    tail.sort_unstable();
    order.extend(tail);
    ReorderedDynamics {
        node,
        l: remap_columns(expected, neighbors, &order),
        order,
        kept,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OmegaClass {
    /// Copy: `T = L`.
    Omega1,
    /// Force 1.
    Omega2,
    /// Negate: `T = 1 - L`.
    Omega3,
    /// Force 0.
    Omega4,
}

impl OmegaClass {
    /// Branch function `(α_1, α_2)`: the output for `f = 1` and for `f = 0`.
    pub fn branch(self) -> (bool, bool) {
        match self {
            OmegaClass::Omega1 => (true, false),
            OmegaClass::Omega2 => (true, true),
            OmegaClass::Omega3 => (false, true),
            OmegaClass::Omega4 => (false, false),
        }
    }
}

/// Classes of a column pair, given as probabilities of `true`.
pub fn classify_column(t: &Rational, l: &Rational) -> Vec<OmegaClass> {
    let one = Rational::one();
    let mut out = Vec::with_capacity(2);
    if t == l {
        out.push(OmegaClass::Omega1);
    }
    if t.is_one() {
        out.push(OmegaClass::Omega2);
    }
    if *t == &one - l {
        out.push(OmegaClass::Omega3);
    }
    if t.is_zero() {
        out.push(OmegaClass::Omega4);
    }
    out
}

/// Families tried when covering columns; singletons first so a one-branch
/// controller is preferred when it exists.
pub const COVER_ORDER: [&[OmegaClass]; 10] = {
    use OmegaClass::*;
    [
        &[Omega1],
        &[Omega2],
        &[Omega3],
        &[Omega4],
        &[Omega1, Omega2],
        &[Omega1, Omega3],
        &[Omega1, Omega4],
        &[Omega2, Omega3],
        &[Omega2, Omega4],
        &[Omega3, Omega4],
    ]
};

/// First family of at most two classes hitting every column's class set.
pub fn find_cover(t: &StochasticMatrix, l: &StochasticMatrix) -> Option<Vec<OmegaClass>> {
    assert_eq!(t.cols(), l.cols(), "T and L must have the same width");
    let classes: Vec<Vec<OmegaClass>> = (0..t.cols())
        .map(|c| classify_column(t.prob_true(c), l.prob_true(c)))
        .collect();
    COVER_ORDER
        .iter()
        .find(|fam| classes.iter().all(|cs| cs.iter().any(|c| fam.contains(c))))
        .map(|fam| fam.to_vec())
}

pub fn solvable_uniform(t: &StochasticMatrix, l: &StochasticMatrix) -> bool {
    find_cover(t, l).is_some()
}

/// Target dynamics: `G` over `N°` and its block expansion `T` over all inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetDynamics {
    pub g: StochasticMatrix,
    pub t: StochasticMatrix,
    /// Values of the deleted inputs used to restrict `L` to `G`.
    pub deleted_assignment: Vec<bool>,
}

/// `T = G (I ⊗ 1ᵀ)`: every column of `G` repeated over a block of `2^deleted`.
pub fn expand_target(g: &StochasticMatrix, deleted: usize) -> StochasticMatrix {
    let probs = (0..g.cols() << deleted)
        .map(|c| g.prob_true(c >> deleted).clone())
        .collect();
    StochasticMatrix::from_true_probabilities(probs).expect("columns copied from G")
}

fn restrict(l: &StochasticMatrix, kept: usize, deleted: usize, assignment_col: usize) -> StochasticMatrix {
    let probs = (0..1usize << kept)
        .map(|g| l.prob_true((g << deleted) | assignment_col).clone())
        .collect();
    StochasticMatrix::from_true_probabilities(probs).expect("columns copied from L")
}

fn dependence_count(g: &StochasticMatrix, k: usize) -> usize {
    (0..k)
        .filter(|&pos| {
            let flip = 1usize << (k - 1 - pos);
            (0..g.cols()).any(|c| g.prob_true(c) != g.prob_true(c ^ flip))
        })
        .count()
}

/// Preferred target: `L` with the deleted inputs fixed to the assignment that
/// keeps the most kept inputs functional; ties go to the assignment with more
/// zeros first (largest canonical column).
pub fn preferred_target(l: &ReorderedDynamics) -> TargetDynamics {
    let (kept, deleted) = (l.kept, l.deleted());
    let mut best: Option<(usize, usize, StochasticMatrix)> = None;
    for a in (0..1usize << deleted).rev() {
        let g = restrict(&l.l, kept, deleted, a);
        let score = dependence_count(&g, kept);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, a, g));
        }
    }
    let (_, a, g) = best.expect("at least one assignment");
    TargetDynamics {
        t: expand_target(&g, deleted),
        deleted_assignment: (0..deleted).map(|p| crate::expr::column_bit(a, p, deleted)).collect(),
        g,
    }
}

/// Preferred target together with its Ω cover, or `None` when no uniform
/// controller reaches it.
pub fn choose_target(l: &ReorderedDynamics) -> Option<(TargetDynamics, Vec<OmegaClass>)> {
    let target = preferred_target(l);
    let cover = find_cover(&target.t, &l.l)?;
    Some((target, cover))
}

/// Output of `⊙` with structure matrix `m` for control `u` and
/// `P(f = 1) = xi`. Columns of `m` are ordered `(u, f) = 11, 10, 01, 00`.
pub fn apply_odot(m: &LogicalMatrix, u: bool, xi: &Rational) -> Rational {
    let base = if u { 0 } else { 2 };
    let when_true = m.index(base) == 1;
    let when_false = m.index(base + 1) == 1;
    let mut out = Rational::zero();
    if when_true {
        out += xi;
    }
    if when_false {
        out += Rational::one() - xi;
    }
    out
}

/// Structure matrix of `⊙` from the branch taken for `u = 1` and for `u = 0`.
pub fn odot_matrix(on: (bool, bool), off: (bool, bool)) -> LogicalMatrix {
    let idx = |b: bool| if b { 1 } else { 2 };
    LogicalMatrix::delta(2, &[idx(on.0), idx(on.1), idx(off.0), idx(off.1)])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformController {
    pub m_odot: LogicalMatrix,
    pub psi_hat: LogicalMatrix,
    pub cover: Vec<OmegaClass>,
}

/// Checks `M_⊙ ⋉ Ψ̂_j ⋉ L_j = T_j` for every column.
pub fn controller_identity_holds(
    m_odot: &LogicalMatrix,
    psi_hat: &LogicalMatrix,
    l: &StochasticMatrix,
    t: &StochasticMatrix,
) -> bool {
    psi_hat.cols() == l.cols()
        && l.cols() == t.cols()
        && (0..l.cols()).all(|c| apply_odot(m_odot, psi_hat.index(c) == 1, l.prob_true(c)) == *t.prob_true(c))
}

pub fn synthesize_uniform(
    node: usize,
    t: &StochasticMatrix,
    l: &StochasticMatrix,
    cover: &[OmegaClass],
) -> Result<UniformController, SynthError> {
    let first = cover[0];
    let second = *cover.get(1).unwrap_or(&first);
    let mut psi = Vec::with_capacity(t.cols());
    for c in 0..t.cols() {
        let classes = classify_column(t.prob_true(c), l.prob_true(c));
        if classes.contains(&first) {
            psi.push(1);
        } else if classes.contains(&second) {
            psi.push(2);
        } else {
            return Err(SynthError::Internal {
                node,
                detail: format!("column {} is outside the cover {:?}", c + 1, cover),
            });
        }
    }
    let ctrl = UniformController {
        m_odot: odot_matrix(first.branch(), second.branch()),
        psi_hat: LogicalMatrix::new(2, psi).expect("indices are 1 or 2"),
        cover: cover.to_vec(),
    };
    if !controller_identity_holds(&ctrl.m_odot, &ctrl.psi_hat, l, t) {
        return Err(SynthError::Internal {
            node,
            detail: "uniform controller does not reproduce T".into(),
        });
    }
    Ok(ctrl)
}

/// Pass-through when `u = 1`, negation when `u = 0`.
pub fn select_odot() -> LogicalMatrix {
    LogicalMatrix::delta(2, &[1, 2, 2, 1])
}

/// Per-candidate controller for a logical `L^κ` and target `T^κ`; always exists.
pub fn synthesize_nonuniform(
    node: usize,
    l_k: &LogicalMatrix,
    t_k: &LogicalMatrix,
) -> Result<(LogicalMatrix, LogicalMatrix), SynthError> {
    let psi = (0..l_k.cols())
        .map(|c| if l_k.index(c) == t_k.index(c) { 1 } else { 2 })
        .collect();
    let m = select_odot();
    let psi = LogicalMatrix::new(2, psi).expect("indices are 1 or 2");
    let l = StochasticMatrix::from_logical(l_k);
    let t = StochasticMatrix::from_logical(t_k);
    if !controller_identity_holds(&m, &psi, &l, &t) {
        return Err(SynthError::Internal {
            node,
            detail: "per-candidate controller does not reproduce T".into(),
        });
    }
    Ok((m, psi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeController {
    pub candidate: usize,
    pub m_odot: LogicalMatrix,
    pub psi_hat: LogicalMatrix,
    /// `L^κ` over the reordered inputs.
    pub l: LogicalMatrix,
    /// `G^κ` over `N°`.
    pub g: LogicalMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Controller {
    Uniform(UniformController),
    NonUniform(Vec<ModeController>),
}

/// Stage-1 outcome for one pinned node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinnedSynthesis {
    pub node: usize,
    pub pinned: PinnedNode,
    pub dynamics: ReorderedDynamics,
    pub target: TargetDynamics,
    /// Cover found by the uniform test, if any.
    pub cover: Option<Vec<OmegaClass>>,
    /// Uniform test passed but some candidate still read a deleted input.
    pub demoted: bool,
    pub controller: Controller,
    /// Controlled truth table of every candidate over `N°`.
    pub controlled: Vec<LogicalMatrix>,
    /// Expected controlled dynamics over `N°`.
    pub expected: StochasticMatrix,
}

impl PinnedSynthesis {
    pub fn is_uniform(&self) -> bool {
        matches!(self.controller, Controller::Uniform(_))
    }

    pub fn kept_inputs(&self) -> &[usize] {
        &self.dynamics.order[..self.dynamics.kept]
    }
}

fn reordered_candidate(model: &PbnModel, node: usize, k: usize, order: &[usize]) -> LogicalMatrix {
    let n = &model.nodes[node];
    let ext = n.extended_structure(k);
    extend_structure_matrix(&ext, &n.neighbors, order)
}

/// Composes `⊙` per column; `None` if the result reads a deleted input.
fn compose_block_constant(
    m: &LogicalMatrix,
    psi: &LogicalMatrix,
    l_k: &LogicalMatrix,
    kept: usize,
    deleted: usize,
) -> Option<LogicalMatrix> {
    let out: Vec<usize> = (0..l_k.cols())
        .map(|c| {
            let xi = if l_k.index(c) == 1 {
                Rational::one()
            } else {
                Rational::zero()
            };
            if apply_odot(m, psi.index(c) == 1, &xi).is_one() {
                1
            } else {
                2
            }
        })
        .collect();
    let block = 1usize << deleted;
    if out.chunks(block).any(|b| b.iter().any(|&v| v != b[0])) {
        return None;
    }
    let table = (0..1usize << kept).map(|g| out[g << deleted]).collect();
    Some(LogicalMatrix::new(2, table).expect("indices are 1 or 2"))
}

fn expected_of(model: &PbnModel, node: usize, tables: &[LogicalMatrix]) -> StochasticMatrix {
    let cols = tables[0].cols();
    let mut probs = vec![Rational::zero(); cols];
    for (c, p) in model.nodes[node].candidates.iter().zip(tables) {
        for (col, acc) in probs.iter_mut().enumerate() {
            if p.index(col) == 1 {
                *acc += &c.probability;
            }
        }
    }
    StochasticMatrix::from_true_probabilities(probs).expect("candidate probabilities sum to one")
}

pub fn synthesize_node(model: &PbnModel, pinned: &PinnedNode) -> Result<PinnedSynthesis, SynthError> {
    let i = pinned.node;
    let node = &model.nodes[i];
    let dynamics = reorder_inputs(i, &expected_matrix(node), &node.neighbors, &pinned.deleted);
    let (kept, deleted) = (dynamics.kept, dynamics.deleted());
    let target = preferred_target(&dynamics);
    let cover = find_cover(&target.t, &dynamics.l);
    let candidates: Vec<LogicalMatrix> = (0..node.candidates.len())
        .map(|k| reordered_candidate(model, i, k, &dynamics.order))
        .collect();

    let mut demoted = false;
    if let Some(cov) = &cover {
        let ctrl = synthesize_uniform(i, &target.t, &dynamics.l, cov)?;
        let composed: Option<Vec<LogicalMatrix>> = candidates
            .iter()
            .map(|l_k| compose_block_constant(&ctrl.m_odot, &ctrl.psi_hat, l_k, kept, deleted))
            .collect();
        match composed {
            Some(controlled) => {
                let expected = expected_of(model, i, &controlled);
                if expected != target.g {
                    return Err(SynthError::Internal {
                        node: i,
                        detail: "expected controlled dynamics differ from G".into(),
                    });
                }
                return Ok(PinnedSynthesis {
                    node: i,
                    pinned: pinned.clone(),
                    dynamics,
                    target,
                    cover,
                    demoted: false,
                    controller: Controller::Uniform(ctrl),
                    controlled,
                    expected,
                });
            }
            None => demoted = true,
        }
    }

    let a = target
        .deleted_assignment
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | usize::from(!b));
    let mut modes = Vec::with_capacity(candidates.len());
    let mut controlled = Vec::with_capacity(candidates.len());
    for (k, l_k) in candidates.into_iter().enumerate() {
        let g: Vec<usize> = (0..1usize << kept).map(|g| l_k.index((g << deleted) | a)).collect();
        let t: Vec<usize> = (0..l_k.cols()).map(|c| g[c >> deleted]).collect();
        let g = LogicalMatrix::new(2, g).expect("indices copied from L");
        let t = LogicalMatrix::new(2, t).expect("indices copied from G");
        let (m_odot, psi_hat) = synthesize_nonuniform(i, &l_k, &t)?;
        controlled.push(g.clone());
        modes.push(ModeController {
            candidate: k,
            m_odot,
            psi_hat,
            l: l_k,
            g,
        });
    }
    let expected = expected_of(model, i, &controlled);
    Ok(PinnedSynthesis {
        node: i,
        pinned: pinned.clone(),
        dynamics,
        target,
        cover,
        demoted,
        controller: Controller::NonUniform(modes),
        controlled,
        expected,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOne {
    pub plan: PinningPlan,
    pub nodes: Vec<PinnedSynthesis>,
}

impl StageOne {
    /// `Λ₁`: nodes with a uniform controller.
    pub fn uniform(&self) -> Vec<usize> {
        self.nodes.iter().filter(|s| s.is_uniform()).map(|s| s.node).collect()
    }

    /// `Λ₂`: nodes with per-candidate controllers.
    pub fn nonuniform(&self) -> Vec<usize> {
        self.nodes.iter().filter(|s| !s.is_uniform()).map(|s| s.node).collect()
    }

    pub fn get(&self, node: usize) -> Option<&PinnedSynthesis> {
        self.nodes.iter().find(|s| s.node == node)
    }
}

pub fn stage_one(model: &PbnModel, plan: &PinningPlan) -> Result<StageOne, SynthError> {
    let nodes = plan
        .pinned
        .iter()
        .map(|p| synthesize_node(model, p))
        .collect::<Result<_, _>>()?;
    Ok(StageOne {
        plan: plan.clone(),
        nodes,
    })
}

/// Boolean formula of a feedback law given by its truth table over `inputs`.
pub fn law_formula(psi: &LogicalMatrix, inputs: &[usize]) -> BoolExpr {
    let table: Vec<bool> = psi.indices().iter().map(|&i| i == 1).collect();
    crate::expr::formula_from_table(inputs, &table)
}
