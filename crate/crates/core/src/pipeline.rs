//! End-to-end procedure and its JSON report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{state_index, Limits, ModelError, PbnModel};
use crate::parse::serialize;
use crate::pinsynth::{law_formula, stage_one, Controller, OmegaClass, StageOne, SynthError};
use crate::steadypin::{
    assemble_controlled_pbn, minimal_steady_pinning, post_stage_one_dynamics, synthesize_steady_controllers,
    SteadyPlan, SteadyTarget,
};
use crate::stp::{LogicalMatrix, StochasticMatrix};
use crate::verify::{check_global_stability, VerificationReport};
use crate::wiring::{
    build_wiring_digraph, compute_fas, find_cycles, is_acyclic, pinning_partition, FasError, FasStrategy, PinningPlan,
    WiringDigraph,
};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("no target steady state given")]
    MissingTarget,
    #[error(transparent)]
    Fas(#[from] FasError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct Options {
    pub fas: FasStrategy,
    pub limits: Limits,
    /// Run the exhaustive oracle on the controlled network.
    pub verify: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            fas: FasStrategy::DfsBackEdges,
            limits: Limits::default(),
            verify: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub model: PbnModel,
    pub digraph: WiringDigraph,
    pub plan: PinningPlan,
    pub stage_one: StageOne,
    pub steady: SteadyPlan,
    pub controlled: PbnModel,
    pub verification: Option<VerificationReport>,
    fas_strategy: FasStrategy,
}

pub fn synthesize(model: &PbnModel, epsilon: Option<&[bool]>, options: &Options) -> Result<Synthesis, PipelineError> {
    let epsilon = epsilon
        .map(<[bool]>::to_vec)
        .or_else(|| model.target.clone())
        .ok_or(PipelineError::MissingTarget)?;
    if epsilon.len() != model.len() {
        return Err(ModelError::TargetLength {
            got: epsilon.len(),
            expected: model.len(),
        }
        .into());
    }
    let digraph = build_wiring_digraph(model);
    let fas = compute_fas(&digraph, &options.fas)?;
    let plan = pinning_partition(model, &fas);
    let stage = stage_one(model, &plan)?;
    let mut steady = minimal_steady_pinning(
        post_stage_one_dynamics(model, &stage),
        SteadyTarget::new(epsilon.clone()),
    );
    synthesize_steady_controllers(&mut steady)?;
    let controlled = assemble_controlled_pbn(model, &stage, &steady)?;
    let verification = if options.verify {
        Some(check_global_stability(&controlled, &epsilon, &options.limits)?)
    } else {
        None
    };
    Ok(Synthesis {
        model: model.clone(),
        digraph,
        plan,
        stage_one: stage,
        steady,
        controlled,
        verification,
        fas_strategy: options.fas.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub network: String,
    pub nodes: Vec<String>,
    pub target: TargetReport,
    pub digraph: DigraphReport,
    pub fas: FasReport,
    /// `Λ`, 1-based.
    pub pinned: Vec<usize>,
    /// `Λ₁`, 1-based.
    pub uniform: Vec<usize>,
    /// `Λ₂`, 1-based.
    pub nonuniform: Vec<usize>,
    pub controllers: Vec<ControllerReport>,
    pub steady: SteadyReport,
    pub controlled_model: String,
    pub verification: Option<VerificationReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetReport {
    pub values: Vec<u8>,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigraphReport {
    pub edges: Vec<[usize; 2]>,
    pub acyclic: bool,
    pub cycles: Vec<Vec<usize>>,
    pub controlled_acyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FasReport {
    pub strategy: String,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeControllerReport {
    pub candidate: usize,
    pub m_odot: Vec<usize>,
    pub psi_hat: Vec<usize>,
    pub u: String,
    pub g: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerReport {
    pub node: usize,
    pub kind: String,
    /// Deleted inputs `N★`, 1-based.
    pub deleted: Vec<usize>,
    /// Kept inputs `N°`, 1-based.
    pub kept: Vec<usize>,
    /// Column order of `Ψ̂`: kept inputs, then deleted inputs.
    pub input_order: Vec<usize>,
    pub deleted_assignment: Vec<u8>,
    pub cover: Option<Vec<OmegaClass>>,
    pub demoted: bool,
    pub m_odot: Option<Vec<usize>>,
    pub psi_hat: Option<Vec<usize>>,
    pub u: Option<String>,
    pub modes: Vec<ModeControllerReport>,
    /// `G` as probabilities of 1, over the kept inputs.
    pub g: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteadyControllerReport {
    pub node: usize,
    pub inputs: Vec<usize>,
    pub q: Vec<usize>,
    pub m_oplus: Vec<usize>,
    pub upsilon: Vec<usize>,
    pub v: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteadyReport {
    pub lambda: Vec<u8>,
    pub xi: usize,
    pub gamma: Vec<usize>,
    pub controllers: Vec<SteadyControllerReport>,
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn cols(m: &LogicalMatrix) -> Vec<usize> {
    m.indices().to_vec()
}

fn probs(m: &StochasticMatrix) -> Vec<String> {
    (0..m.cols()).map(|c| m.prob_true(c).to_string()).collect()
}

impl Synthesis {
    pub fn fas_strategy(&self) -> &FasStrategy {
        &self.fas_strategy
    }

    pub fn report(&self) -> Report {
        let names = self.model.names();
        let render = |e: &crate::expr::BoolExpr| e.render(&|i| names[i].clone());
        let edges = |it: &mut dyn Iterator<Item = &(usize, usize)>| it.map(|&(j, i)| [j + 1, i + 1]).collect();
        let controllers = self
            .stage_one
            .nodes
            .iter()
            .map(|s| {
                let order = &s.dynamics.order;
                let base = ControllerReport {
                    node: s.node + 1,
                    kind: if s.is_uniform() { "uniform" } else { "nonuniform" }.into(),
                    deleted: one_based(&s.pinned.deleted),
                    kept: one_based(s.kept_inputs()),
                    input_order: one_based(order),
                    deleted_assignment: s.target.deleted_assignment.iter().map(|&b| u8::from(b)).collect(),
                    cover: s.cover.clone(),
                    demoted: s.demoted,
                    m_odot: None,
                    psi_hat: None,
                    u: None,
                    modes: Vec::new(),
                    g: probs(&s.target.g),
                };
                match &s.controller {
                    Controller::Uniform(c) => ControllerReport {
                        m_odot: Some(cols(&c.m_odot)),
                        psi_hat: Some(cols(&c.psi_hat)),
                        u: Some(render(&law_formula(&c.psi_hat, order))),
                        ..base
                    },
                    Controller::NonUniform(modes) => ControllerReport {
                        modes: modes
                            .iter()
                            .map(|m| ModeControllerReport {
                                candidate: m.candidate + 1,
                                m_odot: cols(&m.m_odot),
                                psi_hat: cols(&m.psi_hat),
                                u: render(&law_formula(&m.psi_hat, order)),
                                g: cols(&m.g),
                            })
                            .collect(),
                        ..base
                    },
                }
            })
            .collect();
        let steady = SteadyReport {
            lambda: self.steady.lambda.iter().map(|&b| u8::from(b)).collect(),
            xi: self.steady.xi,
            gamma: one_based(&self.steady.gamma),
            controllers: self
                .steady
                .controllers
                .iter()
                .map(|c| {
                    let inputs = &self.steady.dynamics[c.node].inputs;
                    SteadyControllerReport {
                        node: c.node + 1,
                        inputs: one_based(inputs),
                        q: cols(&c.q),
                        m_oplus: cols(&c.m_oplus),
                        upsilon: cols(&c.upsilon),
                        v: render(&law_formula(&c.upsilon, inputs)),
                    }
                })
                .collect(),
        };
        let epsilon = &self.steady.target.epsilon;
        Report {
            schema: REPORT_SCHEMA,
            network: self.model.name.clone(),
            nodes: names.clone(),
            target: TargetReport {
                values: epsilon.iter().map(|&b| u8::from(b)).collect(),
                index: state_index(epsilon),
            },
            digraph: DigraphReport {
                edges: edges(&mut self.digraph.edges.iter()),
                acyclic: is_acyclic(&self.digraph),
                cycles: find_cycles(&self.digraph).iter().map(|c| one_based(c)).collect(),
                controlled_acyclic: is_acyclic(&build_wiring_digraph(&self.controlled)),
            },
            fas: FasReport {
                strategy: match &self.fas_strategy {
                    FasStrategy::DfsBackEdges => "dfs",
                    FasStrategy::ExhaustiveMin => "min",
                    FasStrategy::UserSupplied(_) => "user",
                }
                .into(),
                edges: edges(&mut self.plan.fas.edges.iter()),
            },
            pinned: one_based(&self.plan.pinned_nodes()),
            uniform: one_based(&self.stage_one.uniform()),
            nonuniform: one_based(&self.stage_one.nonuniform()),
            controllers,
            steady,
            controlled_model: serialize(&self.controlled),
            verification: self.verification.clone(),
        }
    }
}
