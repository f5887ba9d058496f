#![allow(dead_code)]

use std::path::PathBuf;

use pbnpin::stp::{LogicalMatrix, Matrix, Rational, StochasticMatrix};
use pbnpin::wiring::{parse_fas_edges, FasStrategy};
use pbnpin::PbnModel;
use rand::Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn cell_cycle() -> PbnModel {
    let text = std::fs::read_to_string(fixture_path("mammalian_cell_cycle.pbn")).unwrap();
    pbnpin::parse(&text).unwrap()
}

pub fn cell_cycle_fas(model: &PbnModel) -> FasStrategy {
    let text = std::fs::read_to_string(fixture_path("mammalian_cell_cycle.fas")).unwrap();
    FasStrategy::UserSupplied(parse_fas_edges(model, &text).unwrap())
}

/// The published steady state (1,1,1,0,0,0,1,0,0).
pub fn cell_cycle_target() -> Vec<bool> {
    vec![true, true, true, false, false, false, true, false, false]
}

pub fn r(n: i64, d: i64) -> Rational {
    pbnpin::stp::ratio(n, d)
}

fn pick_prob<R: Rng>(rng: &mut R) -> Rational {
    const P: [(i64, i64); 6] = [(0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (1, 4)];
    let (n, d) = P[rng.random_range(0..P.len())];
    r(n, d)
}

/// Random `(T, L)` pair of width `2^inputs`. `T` mostly follows two random
/// Ω branches of `L` so both solvable and unsolvable instances are common.
pub fn random_tl<R: Rng>(rng: &mut R, inputs: usize) -> (StochasticMatrix, StochasticMatrix) {
    let cols = 1usize << inputs;
    let l: Vec<Rational> = (0..cols)
        .map(|_| {
            if rng.random_bool(0.5) {
                pick_prob(rng)
            } else {
                r(rng.random_range(0..=1), 1)
            }
        })
        .collect();
    let families = [rng.random_range(0..4), rng.random_range(0..4)];
    let noise = [0.0, 0.05, 0.3][rng.random_range(0..3)];
    let t: Vec<Rational> = l
        .iter()
        .map(|x| {
            if rng.random_bool(noise) {
                return pick_prob(rng);
            }
            match families[rng.random_range(0..2)] {
                0 => x.clone(),
                1 => r(1, 1),
                2 => r(1, 1) - x,
                _ => r(0, 1),
            }
        })
        .collect();
    (
        StochasticMatrix::from_true_probabilities(t).unwrap(),
        StochasticMatrix::from_true_probabilities(l).unwrap(),
    )
}

fn column(m: &StochasticMatrix, c: usize) -> Matrix {
    let p = m.prob_true(c).clone();
    Matrix::new(2, 1, vec![p.clone(), r(1, 1) - p]).unwrap()
}

/// Exhaustive search over every logical `M_⊙` (2×4) and every logical `Ψ̂`
/// (2×cols) for `M_⊙ ⋉ Ψ̂_j ⋉ L_j = T_j` in all columns, using plain
/// matrix products.
pub fn brute_force_uniform(t: &StochasticMatrix, l: &StochasticMatrix) -> Option<(LogicalMatrix, LogicalMatrix)> {
    let cols = l.cols();
    let units = [Matrix::unit_vector(2, 1), Matrix::unit_vector(2, 2)];
    for mcode in 0..16usize {
        let idx: Vec<usize> = (0..4).map(|b| 1 + ((mcode >> b) & 1)).collect();
        let m = LogicalMatrix::delta(2, &idx);
        let mm = m.to_matrix();
        // ok[c][v]: Ψ̂ column c = δ₂^{v+1} satisfies column c
        let ok: Vec<[bool; 2]> = (0..cols)
            .map(|c| {
                let (lc, tc) = (column(l, c), column(t, c));
                [0, 1].map(|v| mm.stp(&units[v]).stp(&lc) == tc)
            })
            .collect();
        for psi in 0..1usize << cols {
            if (0..cols).all(|c| ok[c][(psi >> c) & 1]) {
                let p: Vec<usize> = (0..cols).map(|c| 1 + ((psi >> c) & 1)).collect();
                return Some((m, LogicalMatrix::delta(2, &p)));
            }
        }
    }
    None
}

/// Checks a controller identity with plain matrix products.
pub fn identity_by_products(
    m: &LogicalMatrix,
    psi: &LogicalMatrix,
    l: &StochasticMatrix,
    t: &StochasticMatrix,
) -> bool {
    let mm = m.to_matrix();
    (0..l.cols()).all(|c| {
        let u = Matrix::unit_vector(2, psi.index(c));
        mm.stp(&u).stp(&column(l, c)) == column(t, c)
    })
}
