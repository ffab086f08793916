use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lpo_core::cnf::{build_phi, Window};
use lpo_core::momcts::{hypervolume, Mcts};
use lpo_core::momdp::{MoMdp, Restrictions};
use lpo_core::oracle::Oracle;
use lpo_core::{GoodnessTuple, MctsConfig, Solver};
use lpo_bench::load;

fn bench_hypervolume(c: &mut Criterion) {
    let front: Vec<[f64; 2]> = (0..20)
        .map(|i| {
            let x = i as f64 / 20.0;
            [x, 1.0 - x * x]
        })
        .collect();
    c.bench_function("hypervolume_20", |b| {
        b.iter(|| hypervolume(black_box(&front), [0.0, 0.0]).unwrap())
    });
}

fn bench_encoding(c: &mut Criterion) {
    let (space, data) = load("rand3x2");
    let window = Window::above(
        GoodnessTuple::new(31, 11),
        2,
        5,
        data.len(),
        space.max_explainability(),
    );
    c.bench_function("build_phi_rand3x2", |b| {
        b.iter(|| build_phi(&space, &data, black_box(window)).unwrap())
    });
    let instance = build_phi(&space, &data, window).unwrap();
    c.bench_function("solve_rand3x2_window", |b| {
        b.iter(|| Solver::Builtin.check_sat(&instance.cnf, Duration::from_secs(60)))
    });
}

fn bench_search(c: &mut Criterion) {
    let (space, data) = load("rand3x2");
    let mdp = MoMdp::new(&space, &data, Restrictions::default());
    c.bench_function("mcts_1000_iterations", |b| {
        b.iter(|| {
            let mut search = Mcts::new(
                &mdp,
                MctsConfig {
                    prune_exhausted: false,
                    ..MctsConfig::default()
                },
            );
            for _ in 0..1000 {
                search.iterate();
            }
            search.archive().len()
        })
    });
    c.bench_function("oracle_rand3x2", |b| {
        b.iter(|| Oracle::build(&space, &data).unwrap().front())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_hypervolume, bench_encoding, bench_search
}
criterion_main!(benches);
