//! Exact limiting set ages by cardinality-level descent.
//!
//! The full set is immediate: v_N = λ_e / λ_0(N). Gossip only references
//! strictly larger sets, while node exchange couples sets of the same size,
//! so each cardinality level k = n-1 .. 1 forms one linear system:
//!
//! ```text
//! [λ_0(S) + Σ_{i∈N(S)} λ_i(S) + Σ_{(i,j)∈exits(S)} λm_ij] v_S
//!     - Σ_{(i,j)∈exits(S)} λm_ij v_{S∪{j}\{i}}
//!   = λ_e + Σ_{i∈N(S)} λ_i(S) v_{S∪{i}}
//! ```
//!
//! with the size-(k+1) ages already known. Every row is weakly diagonally
//! dominant: diagonal minus off-diagonal mass equals λ_0(S) + Σ λ_i(S) ≥ 0.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::ValidatedNetwork;
use crate::set::{sets_of_size, PositionSet};

/// Hard cap for exact solving; the level systems grow like C(n, n/2).
/// The simulator handles anything larger.
pub const EXACT_SOLVE_CAP: usize = 24;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Levels with at most this many sets use a direct dense LU solve;
    /// larger levels fall back to the iterative sweep.
    pub dense_cutoff: usize,
    /// The sweep stops once the max residual is below `residual_factor·λ_e`.
    pub residual_factor: f64,
    /// Sweep budget per level.
    pub max_sweeps: u64,
    /// Under-relaxation for the sweep; 1 is plain Gauss-Seidel, which the
    /// diagonally dominant levels always tolerate.
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            dense_cutoff: 4096,
            residual_factor: 1e-12,
            max_sweeps: 1_000_000,
            damping: 1.0,
        }
    }
}

/// Limiting average version age of every nonempty set of positions.
#[derive(Clone, Debug, PartialEq)]
pub struct AgeTable {
    /// v_S for every nonempty S, keyed by bitmask.
    pub level_ages: BTreeMap<PositionSet, f64>,
    /// v_{{i}} in position order.
    pub position_ages: Vec<f64>,
    /// Arithmetic mean of the singleton ages. By the renewal argument this
    /// is both the position average and the node average.
    pub mean_age: f64,
}

impl AgeTable {
    pub fn age_of(&self, s: PositionSet) -> Option<f64> {
        self.level_ages.get(&s).copied()
    }

    /// Full table as CSV, ordered by (cardinality, bitmask).
    /// Columns: `set_bitmask,set_members,cardinality,v_S`.
    pub fn set_csv(&self) -> String {
        let mut rows: Vec<(PositionSet, f64)> =
            self.level_ages.iter().map(|(&s, &v)| (s, v)).collect();
        rows.sort_by_key(|(s, _)| (s.len(), s.bits()));
        let mut out = String::from("set_bitmask,set_members,cardinality,v_S\n");
        for (s, v) in rows {
            out.push_str(&format!("{},{},{},{v}\n", s.bits(), s.members_label(), s.len()));
        }
        out
    }

    /// Singleton summary as CSV. Columns: `position,v_i`. 1-based positions.
    pub fn position_csv(&self) -> String {
        let mut out = String::from("position,v_i\n");
        for (i, v) in self.position_ages.iter().enumerate() {
            out.push_str(&format!("{},{v}\n", i + 1));
        }
        out
    }
}

/// The node-average limiting age (equals the position average).
pub fn mean_node_age(table: &AgeTable) -> f64 {
    table.mean_age
}

struct LevelSystem {
    sets: Vec<PositionSet>,
    diag: Vec<f64>,
    rhs: Vec<f64>,
    /// Mobility couplings per row: (column, weight), entering negated.
    off: Vec<Vec<(u32, f64)>>,
}

fn assemble(
    net: &ValidatedNetwork,
    k: usize,
    upper_ages: &BTreeMap<PositionSet, f64>,
) -> Result<LevelSystem> {
    let n = net.n();
    let sets = sets_of_size(n, k);
    let mut diag = Vec::with_capacity(sets.len());
    let mut rhs = Vec::with_capacity(sets.len());
    let mut off = Vec::with_capacity(sets.len());
    for &s in &sets {
        let lam0 = net.source_rate_into(s);
        let mut gossip_sum = 0.0;
        let mut row_rhs = net.lambda_e();
        for i in net.neighbors_of(s) {
            let gi = net.gossip_rate_into(i, s);
            let up = *upper_ages
                .get(&s.with(i))
                .expect("upper_ages must contain every set one position larger");
            gossip_sum += gi;
            row_rhs += gi * up;
        }
        let mut mobility_sum = 0.0;
        let mut row_off: Vec<(u32, f64)> = Vec::new();
        for (i, j, rate) in net.mobility_exits(s) {
            mobility_sum += rate;
            let target = s.swapped(i, j);
            let col = sets
                .binary_search_by_key(&target.bits(), |t| t.bits())
                .expect("swap target has the same cardinality");
            row_off.push((col as u32, rate));
        }
        let d = lam0 + gossip_sum + mobility_sum;
        // weak diagonal dominance, with equality only when the set hears
        // neither the source nor any gossip
        assert!(
            d.is_finite() && lam0 + gossip_sum >= 0.0,
            "level row lost diagonal dominance"
        );
        if d == 0.0 {
            return Err(Error::SingularLevelSystem { level: k });
        }
        diag.push(d);
        rhs.push(row_rhs);
        off.push(row_off);
    }
    Ok(LevelSystem {
        sets,
        diag,
        rhs,
        off,
    })
}

fn solve_dense(sys: &LevelSystem, level: usize) -> Result<Vec<f64>> {
    let m = sys.sets.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for r in 0..m {
        a[(r, r)] = sys.diag[r];
        for &(c, w) in &sys.off[r] {
            a[(r, c as usize)] -= w;
        }
    }
    let b = DVector::from_column_slice(&sys.rhs);
    match a.lu().solve(&b) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x.iter().copied().collect()),
        _ => Err(Error::SingularLevelSystem { level }),
    }
}

fn solve_sweep(
    sys: &LevelSystem,
    lambda_e: f64,
    opts: &SolveOptions,
    level: usize,
) -> Result<Vec<f64>> {
    let m = sys.sets.len();
    // mobility-free ages are the natural starting point
    let mut v: Vec<f64> = (0..m).map(|r| sys.rhs[r] / sys.diag[r]).collect();
    let tol = opts.residual_factor * lambda_e;
    let mut residual = f64::INFINITY;
    for _sweep in 0..opts.max_sweeps {
        for r in 0..m {
            let mut acc = sys.rhs[r];
            for &(c, w) in &sys.off[r] {
                acc += w * v[c as usize];
            }
            let fresh = acc / sys.diag[r];
            v[r] += opts.damping * (fresh - v[r]);
        }
        residual = 0.0;
        for r in 0..m {
            let mut acc = sys.rhs[r];
            for &(c, w) in &sys.off[r] {
                acc += w * v[c as usize];
            }
            residual = residual.max((acc - sys.diag[r] * v[r]).abs());
        }
        if residual <= tol {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence {
        level,
        residual,
        sweeps: opts.max_sweeps,
    })
}

/// Solves one cardinality level given every age one level up.
/// For k = n the upper map may be empty.
pub fn solve_level(
    net: &ValidatedNetwork,
    k: usize,
    upper_ages: &BTreeMap<PositionSet, f64>,
) -> Result<BTreeMap<PositionSet, f64>> {
    solve_level_with(net, k, upper_ages, &SolveOptions::default())
}

pub fn solve_level_with(
    net: &ValidatedNetwork,
    k: usize,
    upper_ages: &BTreeMap<PositionSet, f64>,
    opts: &SolveOptions,
) -> Result<BTreeMap<PositionSet, f64>> {
    assert!(k >= 1 && k <= net.n(), "cardinality out of range");
    let sys = assemble(net, k, upper_ages)?;
    let solution = if sys.sets.len() <= opts.dense_cutoff {
        solve_dense(&sys, k)?
    } else {
        solve_sweep(&sys, net.lambda_e(), opts, k)?
    };
    Ok(sys
        .sets
        .iter()
        .zip(solution)
        .map(|(&s, v)| (s, v))
        .collect())
}

/// Solves every level from the full set down to the singletons.
pub fn solve_all(net: &ValidatedNetwork) -> Result<AgeTable> {
    solve_all_with(net, &SolveOptions::default())
}

pub fn solve_all_with(net: &ValidatedNetwork, opts: &SolveOptions) -> Result<AgeTable> {
    let n = net.n();
    if n > EXACT_SOLVE_CAP {
        return Err(Error::CapExceeded {
            n,
            cap: EXACT_SOLVE_CAP,
        });
    }
    let mut all = BTreeMap::new();
    let mut upper = BTreeMap::new();
    for k in (1..=n).rev() {
        let level = solve_level_with(net, k, &upper, opts)?;
        all.append(&mut level.clone());
        upper = level;
    }
    let position_ages: Vec<f64> = (0..n)
        .map(|i| all[&PositionSet::singleton(i)])
        .collect();
    let mean_age = position_ages.iter().sum::<f64>() / n as f64;
    Ok(AgeTable {
        level_ages: all,
        position_ages,
        mean_age,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{validate, NetworkSpec};
    use crate::scenarios::{
        disconnected_pairs, fc_plus_single, random_network, toy_variant_12, toy_variant_13,
    };

    fn relerr(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(1.0)
    }

    fn solved(spec: NetworkSpec) -> AgeTable {
        solve_all(&validate(spec).unwrap()).unwrap()
    }

    fn set(bits: u64) -> PositionSet {
        PositionSet::from_bits(bits)
    }

    #[test]
    fn toy_exchange_13_at_unit_rates() {
        let t = solved(toy_variant_13(1.0, 1.0, 1.0).unwrap());
        // hand-derivable: v1 = (1 + 5/2)/(1/2 + 3/2), v3 = (3/4 + 5/2)/2
        assert!(relerr(t.position_ages[0], 7.0 / 4.0) < 1e-12);
        assert!(relerr(t.position_ages[1], 2.0) < 1e-12);
        assert!(relerr(t.position_ages[2], 13.0 / 8.0) < 1e-12);
        assert!(relerr(t.age_of(set(0b011)).unwrap(), 4.0 / 3.0) < 1e-12);
        assert!(relerr(t.age_of(set(0b110)).unwrap(), 4.0 / 3.0) < 1e-12);
        assert!(relerr(t.age_of(set(0b101)).unwrap(), 1.0) < 1e-12);
        assert!(relerr(t.age_of(set(0b111)).unwrap(), 1.0) < 1e-12);
    }

    #[test]
    fn toy_exchange_12_at_unit_rates() {
        let t = solved(toy_variant_12(1.0, 1.0, 1.0).unwrap());
        assert!(relerr(t.position_ages[0], 65.0 / 33.0) < 1e-12);
        assert!(relerr(t.position_ages[1], 43.0 / 22.0) < 1e-12);
        assert!(relerr(t.position_ages[2], 25.0 / 16.0) < 1e-12);
        assert!(relerr(t.age_of(set(0b011)).unwrap(), 4.0 / 3.0) < 1e-12);
        assert!(relerr(t.age_of(set(0b101)).unwrap(), 9.0 / 8.0) < 1e-12);
        assert!(relerr(t.age_of(set(0b110)).unwrap(), 5.0 / 4.0) < 1e-12);
    }

    #[test]
    fn variants_coincide_without_mobility() {
        let a = solved(toy_variant_13(1.0, 1.0, 0.0).unwrap());
        let b = solved(toy_variant_12(1.0, 1.0, 0.0).unwrap());
        for (x, want) in a.position_ages.iter().zip([2.0, 2.0, 1.5]) {
            assert!(relerr(*x, want) < 1e-12);
        }
        assert_eq!(a.position_ages, b.position_ages);
        assert!(relerr(mean_node_age(&a), 11.0 / 6.0) < 1e-12);
    }

    #[test]
    fn full_set_age_is_lambda_e_over_total_source() {
        let net = validate(random_network(5, 3)).unwrap();
        let t = solve_all(&net).unwrap();
        let want = net.lambda_e() / net.total_source_rate();
        assert!(relerr(t.age_of(PositionSet::full(5)).unwrap(), want) < 1e-14);
    }

    #[test]
    fn fc_plus_single_frozen_lattice_values() {
        // frozen from an independent dense solve of the full 2^6-1 system
        let t = solved(fc_plus_single(6, 1.0, 1.0).unwrap());
        for (bits, want) in [
            (1u64, 2.5116604927134301),
            (0b000011, 1.8093411322314497),
            (0b011111, 1.178082191780822),
            (0b100000, 2.4651459024667535),
            (0b111110, 1.0958904109589043),
            (0b111111, 1.0),
        ] {
            assert!(
                relerr(t.age_of(set(bits)).unwrap(), want) < 1e-9,
                "set {bits:#b}"
            );
        }
        assert!(relerr(t.mean_age, 2.5039080610056508) < 1e-9);
    }

    #[test]
    fn disconnected_pairs_frozen_lattice_values() {
        // frozen from an independent dense solve of the full 2^6-1 system
        let t = solved(disconnected_pairs(6, 1.0, 1.0, 1.0 / 6.0).unwrap());
        for (bits, want) in [
            (1u64, 2.5600381270106043),
            (0b000011, 1.9867111481790394),
            (0b000101, 1.733388935223799),
            (0b001111, 1.3036363636363644),
            (0b111111, 1.0),
        ] {
            assert!(
                relerr(t.age_of(set(bits)).unwrap(), want) < 1e-9,
                "set {bits:#b}"
            );
        }
    }

    #[test]
    fn sweep_matches_dense() {
        let force_sweep = SolveOptions {
            dense_cutoff: 0,
            ..SolveOptions::default()
        };
        for spec in [
            toy_variant_13(1.0, 1.0, 1.0).unwrap(),
            toy_variant_12(1.0, 1.0, 10.0).unwrap(),
            disconnected_pairs(6, 1.0, 1.0, 0.5).unwrap(),
            fc_plus_single(7, 1.0, 1.0).unwrap(),
        ] {
            let net = validate(spec).unwrap();
            let dense = solve_all(&net).unwrap();
            let swept = solve_all_with(&net, &force_sweep).unwrap();
            for (s, v) in &dense.level_ages {
                assert!(relerr(swept.level_ages[s], *v) < 1e-10, "set {s}");
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let net = validate(fully_connected_25()).unwrap();
        assert!(matches!(
            solve_all(&net),
            Err(Error::CapExceeded { n: 25, cap: EXACT_SOLVE_CAP })
        ));
    }

    fn fully_connected_25() -> NetworkSpec {
        crate::scenarios::fully_connected(25, 1.0, 1.0, false, 0.0).unwrap()
    }

    #[test]
    fn unreachable_structure_is_singular() {
        // positions 2 and 3 swap with each other only and hear nothing
        let spec = NetworkSpec {
            n: 3,
            lambda_e: 1.0,
            source_rates: vec![1.0, 0.0, 0.0],
            gossip_rates: vec![vec![0.0; 3]; 3],
            mobility_rates: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.0],
            ],
        };
        let net = validate(spec).unwrap();
        assert!(matches!(
            solve_all(&net),
            Err(Error::SingularLevelSystem { level: 2 })
        ));
    }

    #[test]
    fn sweep_reports_no_convergence_when_starved() {
        let opts = SolveOptions {
            dense_cutoff: 0,
            max_sweeps: 1,
            residual_factor: 1e-15,
            ..SolveOptions::default()
        };
        let net = validate(toy_variant_13(1.0, 1.0, 50.0).unwrap()).unwrap();
        assert!(matches!(
            solve_all_with(&net, &opts),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn mobility_can_rescue_a_sourceless_position() {
        // position 2 hears nothing but swaps with position 1
        let spec = NetworkSpec {
            n: 2,
            lambda_e: 1.0,
            source_rates: vec![1.0, 0.0],
            gossip_rates: vec![vec![0.0; 2]; 2],
            mobility_rates: vec![vec![0.0, 2.0], vec![2.0, 0.0]],
        };
        let t = solved(spec);
        assert!(t.position_ages.iter().all(|v| v.is_finite() && *v > 0.0));
        // the pair as a set still only hears the source through position 1
        assert!(relerr(t.age_of(PositionSet::full(2)).unwrap(), 1.0) < 1e-12);
    }

    #[test]
    fn csv_exports_are_ordered_and_complete() {
        let t = solved(toy_variant_13(1.0, 1.0, 1.0).unwrap());
        let set_csv = t.set_csv();
        let lines: Vec<&str> = set_csv.lines().collect();
        assert_eq!(lines[0], "set_bitmask,set_members,cardinality,v_S");
        assert_eq!(lines.len(), 8);
        assert!(lines[1].starts_with("1,1,1,"));
        assert!(lines[7].starts_with("7,1|2|3,3,"));
        let pos_csv = t.position_csv();
        assert!(pos_csv.starts_with("position,v_i\n1,"));
        assert_eq!(pos_csv.lines().count(), 4);
    }
}
