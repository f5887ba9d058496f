//! Inputs shared by the benchmarks.

use pbnpin::random::{random_pbn, RandomPbnConfig};
use pbnpin::wiring::{parse_fas_edges, FasStrategy};
use pbnpin::PbnModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CELL_CYCLE: &str = include_str!("../../core/fixtures/mammalian_cell_cycle.pbn");
const CELL_CYCLE_FAS: &str = include_str!("../../core/fixtures/mammalian_cell_cycle.fas");

pub fn cell_cycle() -> (PbnModel, FasStrategy) {
    let model = pbnpin::parse(CELL_CYCLE).expect("fixture parses");
    let fas = parse_fas_edges(&model, CELL_CYCLE_FAS).expect("fixture FAS is valid");
    (model, FasStrategy::UserSupplied(fas))
}

/// Sparse random network: at most three inputs and two candidates per node.
pub fn sparse_network(nodes: usize, seed: u64) -> PbnModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = RandomPbnConfig {
        max_candidates: 2,
        ..RandomPbnConfig::new(nodes)
    };
    random_pbn(&mut rng, &cfg)
}
