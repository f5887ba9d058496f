//! Second-stage pinning: forces the prescribed steady state `ε` to be a fixed
//! point of every mode, pinning as few nodes as possible, and assembles the
//! controlled network.

use num_traits::{One, Zero};

use crate::expr::{column_of, formula_from_table};
use crate::model::{expected_matrix, NodeSpec, PbnModel};
use crate::pinsynth::{apply_odot, controller_identity_holds, odot_matrix, OmegaClass, StageOne, SynthError};
use crate::stp::{LogicalMatrix, Rational, StochasticMatrix};

/// Desired steady state with its canonical index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteadyTarget {
    pub epsilon: Vec<bool>,
    pub index: usize,
}

impl SteadyTarget {
    pub fn new(epsilon: Vec<bool>) -> Self {
        let index = crate::model::state_index(&epsilon);
        SteadyTarget { epsilon, index }
    }
}

/// Dynamics of one node after the first stage: `G_i` over `inputs` (`N°_i`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDynamics {
    pub inputs: Vec<usize>,
    pub g: StochasticMatrix,
}

/// Second-stage controller for a node in `Γ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteadyController {
    pub node: usize,
    pub q: LogicalMatrix,
    pub m_oplus: LogicalMatrix,
    pub upsilon: LogicalMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteadyPlan {
    pub target: SteadyTarget,
    pub lambda: Vec<bool>,
    pub xi: usize,
    /// `Γ`, ascending.
    pub gamma: Vec<usize>,
    pub dynamics: Vec<NodeDynamics>,
    pub controllers: Vec<SteadyController>,
}

impl SteadyPlan {
    pub fn controller(&self, node: usize) -> Option<&SteadyController> {
        self.controllers.iter().find(|c| c.node == node)
    }
}

/// `G_i` for every node: the stage-1 expected dynamics over `N°_i` for pinned
/// nodes and `F̂_i` over `N_i` otherwise.
pub fn post_stage_one_dynamics(model: &PbnModel, stage: &StageOne) -> Vec<NodeDynamics> {
    model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| match stage.get(i) {
            Some(s) => NodeDynamics {
                inputs: s.kept_inputs().to_vec(),
                g: s.expected.clone(),
            },
            None => NodeDynamics {
                inputs: node.neighbors.clone(),
                g: expected_matrix(node),
            },
        })
        .collect()
}

fn steady_column(inputs: &[usize], epsilon: &[bool]) -> usize {
    let vals: Vec<bool> = inputs.iter().map(|&j| epsilon[j]).collect();
    column_of(&vals)
}

/// Whether `G_i` already maps `ε` restricted to `N°_i` onto `ε_i` with certainty.
pub fn already_steady(d: &NodeDynamics, epsilon: &[bool], i: usize) -> bool {
    let p = d.g.prob_true(steady_column(&d.inputs, epsilon));
    if epsilon[i] {
        p.is_one()
    } else {
        p.is_zero()
    }
}

/// Minimal pinning set for the steady-state constraints. The constraints are
/// independent per node, so each `λ_i` is forced individually.
pub fn minimal_steady_pinning(dynamics: Vec<NodeDynamics>, target: SteadyTarget) -> SteadyPlan {
    let lambda: Vec<bool> = dynamics
        .iter()
        .enumerate()
        .map(|(i, d)| !already_steady(d, &target.epsilon, i))
        .collect();
    let gamma: Vec<usize> = (0..lambda.len()).filter(|&i| lambda[i]).collect();
    SteadyPlan {
        xi: gamma.len(),
        target,
        lambda,
        gamma,
        dynamics,
        controllers: Vec::new(),
    }
}

/// Solves `M_⊕ Υ (I ⊗ G_i) Φ = Q_i` for the constant `Q_i` forcing `value`.
pub fn synthesize_steady_controller(
    node: usize,
    g: &StochasticMatrix,
    value: bool,
) -> Result<SteadyController, SynthError> {
    let cols = g.cols();
    let q = LogicalMatrix::constant(if value { 1 } else { 2 }, cols);
    let class = if value { OmegaClass::Omega2 } else { OmegaClass::Omega4 };
    let m_oplus = odot_matrix(class.branch(), class.branch());
    let upsilon = LogicalMatrix::constant(1, cols);
    if !controller_identity_holds(&m_oplus, &upsilon, g, &StochasticMatrix::from_logical(&q)) {
        return Err(SynthError::Internal {
            node,
            detail: "steady-state controller does not reproduce Q".into(),
        });
    }
    Ok(SteadyController {
        node,
        q,
        m_oplus,
        upsilon,
    })
}

pub fn synthesize_steady_controllers(plan: &mut SteadyPlan) -> Result<(), SynthError> {
    plan.controllers = plan
        .gamma
        .iter()
        .map(|&i| synthesize_steady_controller(i, &plan.dynamics[i].g, plan.target.epsilon[i]))
        .collect::<Result<_, _>>()?;
    Ok(())
}

fn bool_of(idx: usize) -> Rational {
    if idx == 1 {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// Builds the controlled network. Each candidate of a pinned node becomes its
/// controlled truth table over `N°_i`, optionally followed by `⊕ v_i`;
/// probabilities are kept.
pub fn assemble_controlled_pbn(
    model: &PbnModel,
    stage: &StageOne,
    plan: &SteadyPlan,
) -> Result<PbnModel, crate::model::ModelError> {
    let mut specs: Vec<NodeSpec> = model.specs();
    for (i, spec) in specs.iter_mut().enumerate() {
        let s1 = stage.get(i);
        let s2 = plan.controller(i);
        if s1.is_none() && s2.is_none() {
            continue;
        }
        let node = &model.nodes[i];
        let inputs: Vec<usize> = match s1 {
            Some(s) => s.kept_inputs().to_vec(),
            None => node.neighbors.clone(),
        };
        for (k, cand) in spec.candidates.iter_mut().enumerate() {
            let stage_one_table = match s1 {
                Some(s) => s.controlled[k].clone(),
                None => node.extended_structure(k),
            };
            let table: Vec<bool> = (0..stage_one_table.cols())
                .map(|c| {
                    let g = stage_one_table.index(c);
                    match s2 {
                        Some(v) => apply_odot(&v.m_oplus, v.upsilon.index(c) == 1, &bool_of(g)).is_one(),
                        None => g == 1,
                    }
                })
                .collect();
            cand.0 = formula_from_table(&inputs, &table);
        }
    }
    PbnModel::new(
        model.name.clone(),
        specs,
        &crate::model::Limits {
            max_indegree: usize::MAX,
            ..crate::model::Limits::default()
        },
    )
    .and_then(|m| m.with_target(Some(plan.target.epsilon.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BoolExpr;
    use crate::model::Limits;
    use crate::stp::ratio;

    fn single(e: BoolExpr) -> PbnModel {
        PbnModel::new(
            "one",
            vec![NodeSpec {
                name: "A".into(),
                candidates: vec![(e, Rational::one())],
            }],
            &Limits::default(),
        )
        .unwrap()
    }

    #[test]
    fn negation_needs_pinning() {
        let m = single(BoolExpr::not(BoolExpr::var(0)));
        let d = vec![NodeDynamics {
            inputs: vec![0],
            g: expected_matrix(&m.nodes[0]),
        }];
        let mut plan = minimal_steady_pinning(d, SteadyTarget::new(vec![true]));
        assert_eq!(plan.xi, 1);
        synthesize_steady_controllers(&mut plan).unwrap();
        let c = &plan.controllers[0];
        assert_eq!(c.q, LogicalMatrix::delta(2, &[1, 1]));
        assert_eq!(c.m_oplus, LogicalMatrix::delta(2, &[1, 1, 1, 1]));
    }

    #[test]
    fn fixed_target_needs_nothing() {
        let m = single(BoolExpr::var(0));
        let d = vec![NodeDynamics {
            inputs: vec![0],
            g: expected_matrix(&m.nodes[0]),
        }];
        let plan = minimal_steady_pinning(d, SteadyTarget::new(vec![false]));
        assert_eq!(plan.xi, 0);
        assert!(plan.gamma.is_empty());
    }

    #[test]
    fn fractional_column_is_pinned() {
        let g = StochasticMatrix::from_true_probabilities(vec![ratio(99, 100), ratio(0, 1)]).unwrap();
        let d = vec![NodeDynamics { inputs: vec![0], g }];
        let plan = minimal_steady_pinning(d, SteadyTarget::new(vec![true]));
        assert_eq!(plan.gamma, vec![0]);
        let c = synthesize_steady_controller(0, &plan.dynamics[0].g, false).unwrap();
        assert_eq!(c.m_oplus, LogicalMatrix::delta(2, &[2, 2, 2, 2]));
    }
}
