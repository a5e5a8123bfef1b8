//! Throughput benchmarks for the three engines. The sizes are chosen so a
//! full criterion run finishes in minutes: the solver case covers the
//! dense-system path, the sampler case the alias tables, and the simulator
//! case a population large enough for the tracked-set bookkeeping to matter.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use gossip_age::{
    disconnected_pairs, event_sampler, fully_connected, simulate, solve_all, solve_level,
    validate, PositionSet, SimConfig,
};

fn solver(c: &mut Criterion) {
    let small = validate(fully_connected(8, 1.0, 1.0, true, 1.0).unwrap()).unwrap();
    c.bench_function("solve_all fully_connected n=8", |b| {
        b.iter(|| solve_all(black_box(&small)).unwrap())
    });

    // one mid-lattice level of a 12-position clique: 924 coupled unknowns
    let net = validate(fully_connected(12, 1.0, 1.0, true, 1.0).unwrap()).unwrap();
    let full = solve_all(&net).unwrap();
    let upper: std::collections::BTreeMap<PositionSet, f64> = full
        .level_ages
        .iter()
        .filter(|(s, _)| s.len() == 7)
        .map(|(s, v)| (*s, *v))
        .collect();
    c.bench_function("solve_level k=6 of n=12", |b| {
        b.iter(|| solve_level(black_box(&net), 6, black_box(&upper)).unwrap())
    });
}

fn sampler(c: &mut Criterion) {
    let net = validate(fully_connected(64, 1.0, 1.0, true, 1.0).unwrap()).unwrap();
    let s = event_sampler(&net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("draw 1024 events n=64", |b| {
        b.iter(|| {
            for _ in 0..1024 {
                black_box(s.draw(&mut rng));
            }
        })
    });
}

fn simulator(c: &mut Criterion) {
    let net = validate(disconnected_pairs(32, 1.0, 1.0, 1.0 / 32.0).unwrap()).unwrap();
    let mut cfg = SimConfig::new(200.0, 3);
    cfg.replications = 1;
    c.bench_function("simulate pairs n=32 horizon 200", |b| {
        b.iter(|| simulate(black_box(&net), black_box(&cfg)).unwrap())
    });
}

criterion_group!(benches, solver, sampler, simulator);
criterion_main!(benches);
