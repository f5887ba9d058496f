//! Random networks for property tests and benchmarks.

use rand::seq::index::sample;
use rand::Rng;

use crate::expr::{formula_from_table, BoolExpr};
use crate::model::{Limits, NodeSpec, PbnModel};
use crate::stp::Rational;

#[derive(Debug, Clone, Copy)]
pub struct RandomPbnConfig {
    pub nodes: usize,
    /// Upper bound on each candidate's referenced inputs.
    pub max_inputs: usize,
    /// Upper bound on candidates per node; 1 gives a deterministic network.
    pub max_candidates: usize,
    /// Draw inputs only from lower-indexed nodes, so the wiring is acyclic.
    pub acyclic: bool,
}

impl RandomPbnConfig {
    pub fn new(nodes: usize) -> Self {
        RandomPbnConfig {
            nodes,
            max_inputs: 3,
            max_candidates: 3,
            acyclic: false,
        }
    }
}

/// Random function of `inputs` drawn uniformly from all truth tables.
pub fn random_function<R: Rng + ?Sized>(rng: &mut R, inputs: &[usize]) -> BoolExpr {
    let table: Vec<bool> = (0..1usize << inputs.len()).map(|_| rng.random()).collect();
    formula_from_table(inputs, &table)
}

/// Weights in 1..=4 normalised to exact probabilities.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<Rational> {
    let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    weights
        .into_iter()
        .map(|w| Rational::new(w.into(), total.into()))
        .collect()
}

pub fn random_pbn<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomPbnConfig) -> PbnModel {
    let specs = (0..cfg.nodes)
        .map(|i| {
            let pool = if cfg.acyclic { i } else { cfg.nodes };
            let count = rng.random_range(1..=cfg.max_candidates.max(1));
            let probs = random_distribution(rng, count);
            let candidates = probs
                .into_iter()
                .map(|p| {
                    let k = rng.random_range(0..=cfg.max_inputs.min(pool));
                    let mut inputs = sample(rng, pool, k).into_vec();
                    inputs.sort_unstable();
                    (random_function(rng, &inputs), p)
                })
                .collect();
            NodeSpec {
                name: format!("x{}", i + 1),
                candidates,
            }
        })
        .collect();
    PbnModel::new("random", specs, &Limits::default()).expect("generated models are valid")
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiring::{build_wiring_digraph, is_acyclic};
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn acyclic_option_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = RandomPbnConfig {
            acyclic: true,
            ..RandomPbnConfig::new(7)
        };
        for _ in 0..50 {
            assert!(is_acyclic(&build_wiring_digraph(&random_pbn(&mut rng, &cfg))));
        }
    }

    #[test]
    fn distributions_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..6 {
            let d = random_distribution(&mut rng, k);
            assert!(d.iter().sum::<Rational>().is_one());
        }
    }
}
