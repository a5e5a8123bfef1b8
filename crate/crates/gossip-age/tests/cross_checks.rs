//! Structural cross-checks between the engines on randomized networks.

use gossip_age::{
    no_mobility_reference, random_network, simulate, solve_all, validate, NetworkSpec,
    PositionSet, SimConfig,
};

fn scaled(spec: &NetworkSpec, age_scale: f64, rate_scale: f64) -> NetworkSpec {
    let mut out = spec.clone();
    out.lambda_e *= age_scale * rate_scale;
    for v in &mut out.source_rates {
        *v *= rate_scale;
    }
    for row in out.gossip_rates.iter_mut().chain(&mut out.mobility_rates) {
        for v in row {
            *v *= rate_scale;
        }
    }
    out
}

#[test]
fn ages_are_homogeneous_in_the_rates() {
    // v is linear in λ_e and inverse-linear in a common rate scale
    for seed in [1, 2, 3] {
        let spec = random_network(5, seed);
        let base = solve_all(&validate(spec.clone()).unwrap()).unwrap();
        let fast = solve_all(&validate(scaled(&spec, 3.5, 8.0)).unwrap()).unwrap();
        for (a, b) in base.position_ages.iter().zip(&fast.position_ages) {
            assert!((a * 3.5 - b).abs() / a < 1e-12);
        }
    }
}

#[test]
fn solver_is_permutation_equivariant() {
    let perm = [3, 0, 4, 1, 2];
    for seed in [4, 5] {
        let spec = random_network(5, seed);
        let base = solve_all(&validate(spec.clone()).unwrap()).unwrap();
        let moved = solve_all(&validate(spec.permuted(&perm)).unwrap()).unwrap();
        for i in 0..5 {
            let rel = (base.position_ages[i] - moved.position_ages[perm[i]]).abs()
                / base.position_ages[i];
            assert!(rel < 1e-12, "seed {seed} position {i}");
        }
        // set ages move the same way
        let s = PositionSet::from_members([0, 2]);
        let mapped = PositionSet::from_members([perm[0], perm[2]]);
        let a = base.age_of(s).unwrap();
        let b = moved.age_of(mapped).unwrap();
        assert!((a - b).abs() / a < 1e-12);
    }
}

#[test]
fn larger_sets_are_never_older() {
    for seed in [6, 7, 8] {
        let table = solve_all(&validate(random_network(5, seed)).unwrap()).unwrap();
        for (&s, &vs) in &table.level_ages {
            for (&t, &vt) in &table.level_ages {
                if s.is_subset_of(t) {
                    assert!(
                        vt <= vs * (1.0 + 1e-12),
                        "seed {seed}: v_{t} = {vt} > v_{s} = {vs}"
                    );
                }
            }
        }
    }
}

#[test]
fn reference_recursion_agrees_with_the_solver_when_nothing_moves() {
    for seed in 0..10 {
        let mut spec = random_network(4 + (seed as usize % 3), seed);
        for row in &mut spec.mobility_rates {
            row.fill(0.0);
        }
        let net = validate(spec).unwrap();
        let solved = solve_all(&net).unwrap();
        let reference = no_mobility_reference(&net).unwrap();
        for (a, b) in solved
            .position_ages
            .iter()
            .zip(&reference.position_ages)
        {
            assert!((a - b).abs() / a < 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn simulation_approaches_the_solved_ages() {
    for (seed, n) in [(21u64, 4usize), (22, 5), (23, 5), (24, 6)] {
        let net = validate(random_network(n, seed)).unwrap();
        let exact = solve_all(&net).unwrap();
        let mut config = SimConfig::new(20_000.0, seed.wrapping_mul(977));
        config.replications = 6;
        let est = simulate(&net, &config).unwrap();
        for i in 0..n {
            let rel = (est.per_position_mean[i] - exact.position_ages[i]).abs()
                / exact.position_ages[i];
            assert!(
                rel < 0.025,
                "seed {seed} position {}: sim {} exact {} rel {rel}",
                i + 1,
                est.per_position_mean[i],
                exact.position_ages[i]
            );
        }
    }
}
