use std::collections::BTreeSet;

use pbnpin::expr::column_of;
use pbnpin::model::{state_index, state_values, transition_matrix, transition_matrix_by_states, Limits};
use pbnpin::random::{random_pbn, RandomPbnConfig};
use pbnpin::verify::mode_distribution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn functional_variables_match_flip_test(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_pbn(&mut rng, &RandomPbnConfig { max_inputs: 4, ..RandomPbnConfig::new(n) });
        for node in &model.nodes {
            let mut union = BTreeSet::new();
            for c in &node.candidates {
                let flips: Vec<usize> = (0..n)
                    .filter(|&j| {
                        (0..1usize << n).any(|s| {
                            let mut x = state_values(s + 1, n);
                            let before = c.expr.eval_state(&x);
                            x[j] = !x[j];
                            before != c.expr.eval_state(&x)
                        })
                    })
                    .collect();
                prop_assert_eq!(&c.functional_vars, &flips);
                union.extend(flips);
                for s in 1..=1usize << n {
                    let x = state_values(s, n);
                    let vals: Vec<bool> = c.functional_vars.iter().map(|&j| x[j]).collect();
                    prop_assert_eq!(c.structure.index(column_of(&vals)) == 1, c.expr.eval_state(&x));
                }
            }
            prop_assert_eq!(node.neighbors.clone(), union.into_iter().collect::<Vec<_>>());
            for k in 0..node.candidates.len() {
                let ext = node.extended_structure(k);
                for s in 1..=1usize << n {
                    let x = state_values(s, n);
                    let vals: Vec<bool> = node.neighbors.iter().map(|&j| x[j]).collect();
                    prop_assert_eq!(ext.index(column_of(&vals)) == 1, node.candidates[k].expr.eval_state(&x));
                }
            }
        }
    }

    #[test]
    fn state_index_round_trip(values in prop::collection::vec(any::<bool>(), 1..=12)) {
        let i = state_index(&values);
        prop_assert!(i >= 1 && i <= 1usize << values.len());
        prop_assert_eq!(state_values(i, values.len()), values);
    }

    #[test]
    fn transition_matrix_three_ways(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_pbn(&mut rng, &RandomPbnConfig::new(n));
        let limits = Limits::default();
        let kr = transition_matrix(&model, &limits).unwrap();
        prop_assert_eq!(&kr, &transition_matrix_by_states(&model, &limits).unwrap());
        prop_assert_eq!(&kr, &mode_distribution(&model, &limits).unwrap());
    }
}

#[test]
fn first_variable_is_highest_order() {
    assert_eq!(state_index(&[true, true, true]), 1);
    assert_eq!(state_index(&[false, true, true]), 5);
    assert_eq!(state_index(&[true, true, false]), 2);
    assert_eq!(
        state_index(&[true, true, true, false, false, false, true, false, false]),
        60
    );
}
