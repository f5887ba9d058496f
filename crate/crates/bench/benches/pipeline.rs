use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pbnpin::model::{transition_matrix, Limits};
use pbnpin::pipeline::{synthesize, Options};
use pbnpin::verify::check_global_stability;
use pbnpin_bench::{cell_cycle, sparse_network};

fn cell_cycle_pipeline(c: &mut Criterion) {
    let (model, fas) = cell_cycle();
    let with_fas = Options {
        fas,
        ..Options::default()
    };
    c.bench_function("cell_cycle/synthesize_and_verify", |b| {
        b.iter(|| synthesize(black_box(&model), None, &with_fas).unwrap())
    });
    let target = model.target.clone().unwrap();
    c.bench_function("cell_cycle/verify_uncontrolled", |b| {
        b.iter(|| check_global_stability(black_box(&model), &target, &Limits::default()).unwrap())
    });
    c.bench_function("cell_cycle/transition_matrix", |b| {
        b.iter(|| transition_matrix(black_box(&model), &Limits::default()).unwrap())
    });
}

fn sparse_synthesis(c: &mut Criterion) {
    let mut group = c.benchmark_group("sparse/synthesize");
    let options = Options {
        verify: false,
        ..Options::default()
    };
    for n in [25usize, 50, 100, 200] {
        let model = sparse_network(n, n as u64);
        let target = vec![false; n];
        group.bench_with_input(BenchmarkId::from_parameter(n), &model, |b, m| {
            b.iter(|| synthesize(black_box(m), Some(&target), &options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, cell_cycle_pipeline, sparse_synthesis);
criterion_main!(benches);
