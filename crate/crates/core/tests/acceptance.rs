//! Acceptance run: one PASS/FAIL line per criterion, with wall-clock limits.
//! Exits non-zero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_force_uniform, cell_cycle, cell_cycle_fas, cell_cycle_target, identity_by_products, random_tl};
use num_traits::One;
use pbnpin::expr::column_of;
use pbnpin::model::{state_index, state_values, transition_matrix, Limits, NodeSpec, PbnModel};
use pbnpin::pinsynth::{find_cover, solvable_uniform, synthesize_uniform, Controller};
use pbnpin::pipeline::{synthesize, Options, Report, Synthesis};
use pbnpin::random::{random_pbn, random_state, RandomPbnConfig};
use pbnpin::steadypin::{assemble_controlled_pbn, synthesize_steady_controller};
use pbnpin::stp::{power_reducing_matrix, power_reducing_matrix_by_factors, swap_matrix, unit_kron_index, Matrix};
use pbnpin::verify::{
    attractors, check_global_stability, enumerate_modes, merged_candidates, mode_distribution, mode_transitions,
};
use pbnpin::wiring::{build_wiring_digraph, is_acyclic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Index printed in the published walkthrough for the target state.
const PUBLISHED_TARGET_INDEX: usize = 44;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn cell_cycle_synthesis() -> Synthesis {
    let model = cell_cycle();
    let options = Options {
        fas: cell_cycle_fas(&model),
        ..Options::default()
    };
    synthesize(&model, Some(&cell_cycle_target()), &options).unwrap()
}

/// Deterministic network where every node uses its candidate `k`.
fn joint_form(model: &PbnModel, k: usize) -> PbnModel {
    let specs = model
        .specs()
        .into_iter()
        .map(|s| NodeSpec {
            candidates: vec![(s.candidates[k].0.clone(), common::r(1, 1))],
            name: s.name,
        })
        .collect();
    PbnModel::new(
        model.name.clone(),
        specs,
        &Limits {
            max_indegree: usize::MAX,
            ..Limits::default()
        },
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let s = cell_cycle_synthesis();
    let got = one_based(&s.plan.pinned_nodes());
    outcome(
        got == vec![1, 4, 5, 6, 8, 9],
        format!("pinned nodes {got:?}, expected [1, 4, 5, 6, 8, 9]"),
    )
}

fn criterion_2() -> Outcome {
    let s = cell_cycle_synthesis();
    let uniform = one_based(&s.stage_one.uniform());
    let nonuniform = one_based(&s.stage_one.nonuniform());
    let node1 = s.stage_one.get(0).unwrap();
    let direct = !solvable_uniform(&node1.target.t, &node1.dynamics.l) && !node1.demoted;
    outcome(
        uniform == vec![4, 5, 6, 8, 9] && nonuniform == vec![1] && direct,
        format!("uniform {uniform:?}, non-uniform {nonuniform:?}, node 1 cover test fails: {direct}"),
    )
}

/// Controlled dynamics of the published uniform controllers as formulas over
/// the state (0-based variables).
fn published_controlled(node: usize, x: &[bool]) -> bool {
    match node {
        3 => !x[5],
        4 => !x[3] && !x[8],
        7 => !(!x[3] && !x[5] && x[6] && !x[8]),
        8 => !x[5],
        _ => unreachable!(),
    }
}

fn criterion_3() -> Outcome {
    let s = cell_cycle_synthesis();
    let n6 = s.stage_one.get(5).unwrap();
    let literal = match &n6.controller {
        Controller::Uniform(c) => c.m_odot.indices() == [2, 2, 2, 2] && c.psi_hat.indices() == [1, 1],
        Controller::NonUniform(_) => false,
    };
    let mut mismatches = Vec::new();
    for node in [3usize, 4, 7, 8] {
        let p = s.stage_one.get(node).unwrap();
        let kept = p.kept_inputs();
        let same = p.is_uniform()
            && p.controlled.iter().all(|table| {
                (1..=512).all(|idx| {
                    let x = state_values(idx, 9);
                    let vals: Vec<bool> = kept.iter().map(|&j| x[j]).collect();
                    (table.index(column_of(&vals)) == 1) == published_controlled(node, &x)
                })
            });
        if !same {
            mismatches.push(node + 1);
        }
    }
    outcome(
        literal && mismatches.is_empty(),
        format!("node 6 literal match: {literal}; nodes 4,5,8,9 behavioral mismatches: {mismatches:?}"),
    )
}

fn criterion_4() -> Outcome {
    let s = cell_cycle_synthesis();
    let eps = cell_cycle_target();
    let gamma = one_based(&s.steady.gamma);
    let expected = vec![1, 2, 3, 4, 5, 7, 8, 9];
    let pass = s.steady.xi == 8 && gamma == expected;
    let mut detail = format!(
        "computed Xi = {}, Gamma = {gamma:?}; expected Xi = 8, Gamma = {expected:?}",
        s.steady.xi
    );
    if !pass {
        let names = s.model.names();
        for i in [6usize, 7] {
            let d = &s.steady.dynamics[i];
            let vals: Vec<bool> = d.inputs.iter().map(|&j| eps[j]).collect();
            let p = d.g.prob_true(column_of(&vals));
            detail.push_str(&format!(
                "\n    {} (node {}): P(next = 1) at the target = {p}, target value {}; already steady, so pinning it is not required",
                names[i],
                i + 1,
                u8::from(eps[i])
            ));
        }
        // the larger published set is still a valid (non-minimal) choice
        let mut plan = s.steady.clone();
        plan.gamma = expected.iter().map(|i| i - 1).collect();
        plan.lambda = (0..9).map(|i| plan.gamma.contains(&i)).collect();
        plan.xi = plan.gamma.len();
        plan.controllers = plan
            .gamma
            .iter()
            .map(|&i| synthesize_steady_controller(i, &plan.dynamics[i].g, eps[i]).unwrap())
            .collect();
        let controlled = assemble_controlled_pbn(&s.model, &s.stage_one, &plan).unwrap();
        let stable = check_global_stability(&controlled, &eps, &Limits::default())
            .unwrap()
            .stable;
        let alt = state_values(PUBLISHED_TARGET_INDEX, 9);
        let alt_gamma = synthesize(
            &s.model,
            Some(&alt),
            &Options {
                fas: cell_cycle_fas(&s.model),
                verify: false,
                ..Options::default()
            },
        )
        .map(|a| one_based(&a.steady.gamma))
        .unwrap();
        detail.push_str(&format!(
            "\n    the state with the published index {PUBLISHED_TARGET_INDEX} gives Gamma = {alt_gamma:?}, so it does not explain the gap either"
        ));
        detail.push_str(&format!(
            "\n    the published 8-node set also stabilizes the network: {stable}; the minimum under the per-node constraint is {}",
            s.steady.xi
        ));
    }
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let s = cell_cycle_synthesis();
    let eps = cell_cycle_target();
    let v = s.verification.as_ref().unwrap();
    let joint_ok: Vec<bool> = (0..3)
        .map(|k| {
            let bn = joint_form(&s.controlled, k);
            let merged = merged_candidates(&bn);
            let modes = enumerate_modes(&bn, &Limits::default()).unwrap();
            let atts = attractors(&mode_transitions(&bn, &merged, &modes[0]), 9);
            atts.len() == 1 && atts[0].states == vec![state_index(&eps)]
        })
        .collect();
    let pass = v.stable
        && v.unique_in_every_mode
        && v.reachability
        && joint_ok.iter().all(|&b| b)
        && v.target_index == state_index(&eps);
    let published = state_values(PUBLISHED_TARGET_INDEX, 9);
    let bits: Vec<u8> = published.iter().map(|&b| u8::from(b)).collect();
    outcome(
        pass,
        format!(
            "stable {}, distinct modes {} (unique attractor in each: {}), per-candidate joint forms {joint_ok:?}, all 512 states reach the target: {}\n    \
             target index {} from the bijection; the published index {PUBLISHED_TARGET_INDEX} decodes to {bits:?}, \
             which differs from the target tuple in x5, so the tuple is used",
            v.stable,
            v.modes.len(),
            v.unique_in_every_mode,
            v.reachability,
            v.target_index
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    for p in 1..=8 {
        for d in 1..=8 {
            let w = swap_matrix(p, d);
            for a in 1..=p {
                for b in 1..=d {
                    if w.apply(unit_kron_index(a, d, b)) != unit_kron_index(b, p, a) {
                        failures.push(format!("swap p={p} d={d}"));
                    }
                }
            }
        }
    }
    for n in 1..=6u32 {
        let size = 1usize << n;
        let phi = power_reducing_matrix(n);
        if (1..=size).any(|j| phi.apply(j) != unit_kron_index(j, size, j)) {
            failures.push(format!("power-reducing n={n}"));
        }
    }
    for n in 1..=4 {
        if power_reducing_matrix_by_factors(n) != power_reducing_matrix(n).to_matrix() {
            failures.push(format!("factor product n={n}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let random = |r: usize, c: usize, rng: &mut ChaCha8Rng| {
        let v: Vec<i64> = (0..r * c).map(|_| rng.random_range(-3..=3)).collect();
        Matrix::from_i64(r, c, &v)
    };
    for _ in 0..300 {
        let dims: Vec<usize> = (0..6).map(|_| rng.random_range(1..=4)).collect();
        let a = random(dims[0], dims[1], &mut rng);
        let b = random(dims[2], dims[3], &mut rng);
        let c = random(dims[4], dims[5], &mut rng);
        if a.stp(&b).stp(&c) != a.stp(&b.stp(&c)) {
            failures.push("associativity".into());
        }
        let col = random(dims[0], 1, &mut rng);
        if col.stp(&b) != Matrix::identity(dims[0]).kron(&b).stp(&col) {
            failures.push("pull-through".into());
        }
    }
    outcome(
        failures.is_empty(),
        format!("swap 64 size pairs, power-reducing n<=6, factor form n<=4, 300 random associativity and pull-through cases; failures {failures:?}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut agree, mut solvable, mut identity_ok) = (0usize, 0usize, true);
    let total = 600;
    for i in 0..total {
        let (t, l) = random_tl(&mut rng, i % 4);
        let fast = solvable_uniform(&t, &l);
        let brute = brute_force_uniform(&t, &l).is_some();
        if fast == brute {
            agree += 1;
        }
        if let Some(cover) = find_cover(&t, &l) {
            solvable += 1;
            let c = synthesize_uniform(0, &t, &l, &cover).unwrap();
            identity_ok &= identity_by_products(&c.m_odot, &c.psi_hat, &l, &t);
        }
    }
    outcome(
        agree == total && identity_ok,
        format!("{agree}/{total} agree ({solvable} solvable, {} unsolvable); synthesized controllers satisfy the identity: {identity_ok}", total - solvable),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut single = 0;
    let bns = 250;
    for i in 0..bns {
        let n = 1 + i % 8;
        let cfg = RandomPbnConfig {
            max_candidates: 1,
            acyclic: true,
            ..RandomPbnConfig::new(n)
        };
        let bn = random_pbn(&mut rng, &cfg);
        let merged = merged_candidates(&bn);
        let modes = enumerate_modes(&bn, &Limits::default()).unwrap();
        let atts = attractors(&mode_transitions(&bn, &merged, &modes[0]), n);
        if atts.len() == 1 && atts[0].is_fixed_point() {
            single += 1;
        }
    }
    let (mut checked, mut stable) = (0, 0);
    let pbns = 120;
    for i in 0..pbns {
        let n = 2 + i % 7;
        let cfg = RandomPbnConfig {
            max_candidates: if n == 8 { 2 } else { 3 },
            ..RandomPbnConfig::new(n)
        };
        let model = random_pbn(&mut rng, &cfg);
        let eps = random_state(&mut rng, n);
        let s = synthesize(&model, Some(&eps), &Options::default()).unwrap();
        let v = s.verification.unwrap();
        if v.acyclic_sufficient_check {
            checked += 1;
            if v.stable && is_acyclic(&build_wiring_digraph(&s.controlled)) {
                stable += 1;
            }
        }
    }
    outcome(
        single == bns && checked == pbns && stable == checked,
        format!("{single}/{bns} acyclic BNs have one fixed-point attractor; {checked}/{pbns} controlled PBNs pass the sufficient check, {stable} verified stable"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let total = 120;
    let mut equal = 0;
    for i in 0..total {
        let n = 1 + i % 8;
        let cfg = RandomPbnConfig {
            max_candidates: if n >= 7 { 2 } else { 3 },
            ..RandomPbnConfig::new(n)
        };
        let model = random_pbn(&mut rng, &cfg);
        let limits = Limits::default();
        let kr = transition_matrix(&model, &limits).unwrap();
        let modes = mode_distribution(&model, &limits).unwrap();
        let sums_ok = (0..kr.cols()).all(|c| {
            (0..kr.rows())
                .map(|r| kr.get(r, c).clone())
                .sum::<pbnpin::Rational>()
                .is_one()
        });
        if kr == modes && sums_ok {
            equal += 1;
        }
    }
    outcome(
        equal == total,
        format!("{equal}/{total} networks (n <= 8) match column for column"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let total = 120;
    let mut same = 0;
    for i in 0..total {
        let n = 1 + i % 7;
        let model = random_pbn(&mut rng, &RandomPbnConfig::new(n));
        let eps = random_state(&mut rng, n);
        let s = synthesize(&model, Some(&eps), &Options::default()).unwrap();
        let json = serde_json::to_string(&s.report()).unwrap();
        let report: Report = serde_json::from_str(&json).unwrap();
        let reparsed = pbnpin::parse(&report.controlled_model).unwrap();
        let eps_back: Vec<bool> = report.target.values.iter().map(|&b| b == 1).collect();
        let verdict = check_global_stability(&reparsed, &eps_back, &Limits::default())
            .unwrap()
            .stable;
        if reparsed.semantically_eq(&s.controlled)
            && reparsed.target.as_deref() == Some(&eps[..])
            && Some(verdict) == report.verification.map(|v| v.stable)
        {
            same += 1;
        }
    }
    outcome(
        same == total,
        format!("{same}/{total} reports re-parse and re-verify to the same verdict"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "pinning set with the published feedback arc set",
            Duration::from_secs(1),
            criterion_1,
        ),
        ("uniform and non-uniform split", Duration::from_secs(1), criterion_2),
        ("controller spot checks", Duration::from_secs(1), criterion_3),
        ("steady-state pinning set", Duration::from_secs(1), criterion_4),
        ("end-to-end global stability", Duration::from_secs(5), criterion_5),
        ("algebra identities", Duration::from_secs(30), criterion_6),
        (
            "cover test against exhaustive controller search",
            Duration::from_secs(60),
            criterion_7,
        ),
        (
            "acyclic fixed points and sufficient stability check",
            Duration::from_secs(120),
            criterion_8,
        ),
        (
            "transition matrix against mode enumeration",
            Duration::from_secs(60),
            criterion_9,
        ),
        ("report round trip", Duration::from_secs(120), criterion_10),
    ];
    let mut failed = BTreeSet::new();
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= limit;
        if !pass {
            failed.insert(i + 1);
        }
        println!(
            "criterion {:>2}: {} {name} ({:.3}s, limit {}s): {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            result.detail
        );
    }
    if failed.is_empty() {
        println!("all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
