//! Network data model and the rate queries every engine consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::kahan_sum;
use crate::set::PositionSet;

/// Full parameterization of one gossip network with mobile nodes.
///
/// `source_rates[j]` is the source-to-position-`j` delivery rate λ_0j.
/// `gossip_rates[i][j]` is the directed information rate λ_ij from position
/// `i` to position `j`. `mobility_rates[i][j]` is the swap rate λm_ij of the
/// unordered pair {i,j}: the matrix is stored symmetric and each pair fires
/// as ONE Poisson process of that rate, not two.
///
/// Serializes to/from the JSON document
/// `{"n":…, "lambda_e":…, "source_rates":[…], "gossip_rates":[[…]],
/// "mobility_rates":[[…]]}` with dense row-major matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n: usize,
    pub lambda_e: f64,
    pub source_rates: Vec<f64>,
    pub gossip_rates: Vec<Vec<f64>>,
    pub mobility_rates: Vec<Vec<f64>>,
}

impl NetworkSpec {
    pub fn from_json(doc: &str) -> Result<NetworkSpec> {
        serde_json::from_str(doc).map_err(|e| Error::BadShape(format!("network JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("NetworkSpec serializes infallibly")
    }

    /// Relabels positions: position `i` becomes `perm[i]`. All rate structure
    /// moves with the labels, so solved ages satisfy
    /// v_perm(S)(permuted) = v_S(self).
    pub fn permuted(&self, perm: &[usize]) -> NetworkSpec {
        assert_eq!(perm.len(), self.n, "permutation length must equal n");
        let mut seen = vec![false; self.n];
        for &p in perm {
            assert!(p < self.n && !seen[p], "not a permutation of 0..n");
            seen[p] = true;
        }
        let mut source = vec![0.0; self.n];
        let mut gossip = vec![vec![0.0; self.n]; self.n];
        let mut mobility = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            source[perm[i]] = self.source_rates[i];
            for j in 0..self.n {
                gossip[perm[i]][perm[j]] = self.gossip_rates[i][j];
                mobility[perm[i]][perm[j]] = self.mobility_rates[i][j];
            }
        }
        NetworkSpec {
            n: self.n,
            lambda_e: self.lambda_e,
            source_rates: source,
            gossip_rates: gossip,
            mobility_rates: mobility,
        }
    }
}

/// A `NetworkSpec` that passed validation, plus derived adjacency caches.
/// Immutable; share freely across threads.
#[derive(Clone, Debug)]
pub struct ValidatedNetwork {
    spec: NetworkSpec,
    gossip_in: Vec<Vec<(usize, f64)>>,
    gossip_out: Vec<Vec<(usize, f64)>>,
    mobility_adj: Vec<Vec<(usize, f64)>>,
    mobility_pairs: Vec<(usize, usize, f64)>,
    total_source: f64,
    total_gossip: f64,
    total_mobility: f64,
}

/// Checks the `NetworkSpec` invariants and derives the adjacency caches.
pub fn validate(spec: NetworkSpec) -> Result<ValidatedNetwork> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::BadShape("n must be at least 1".into()));
    }
    if spec.source_rates.len() != n {
        return Err(Error::BadShape(format!(
            "source_rates has {} entries, expected n = {n}",
            spec.source_rates.len()
        )));
    }
    for (name, m) in [
        ("gossip_rates", &spec.gossip_rates),
        ("mobility_rates", &spec.mobility_rates),
    ] {
        if m.len() != n || m.iter().any(|row| row.len() != n) {
            return Err(Error::BadShape(format!("{name} is not an {n}x{n} matrix")));
        }
    }

    let bad = |v: f64| !v.is_finite() || v < 0.0;
    if !spec.lambda_e.is_finite() || spec.lambda_e <= 0.0 {
        return Err(Error::NegativeRate {
            context: format!("lambda_e = {} (must be finite and > 0)", spec.lambda_e),
        });
    }
    for (j, &v) in spec.source_rates.iter().enumerate() {
        if bad(v) {
            return Err(Error::NegativeRate {
                context: format!("source_rates[{}] = {v}", j + 1),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let g = spec.gossip_rates[i][j];
            if bad(g) {
                return Err(Error::NegativeRate {
                    context: format!("gossip_rates[{}][{}] = {g}", i + 1, j + 1),
                });
            }
            let m = spec.mobility_rates[i][j];
            if bad(m) {
                return Err(Error::NegativeRate {
                    context: format!("mobility_rates[{}][{}] = {m}", i + 1, j + 1),
                });
            }
        }
        if spec.gossip_rates[i][i] != 0.0 {
            return Err(Error::NonzeroDiagonal {
                matrix: "gossip_rates",
                i: i + 1,
            });
        }
        if spec.mobility_rates[i][i] != 0.0 {
            return Err(Error::NonzeroDiagonal {
                matrix: "mobility_rates",
                i: i + 1,
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let fwd = spec.mobility_rates[i][j];
            let bwd = spec.mobility_rates[j][i];
            if fwd != bwd {
                return Err(Error::AsymmetricMobility {
                    i: i + 1,
                    j: j + 1,
                    forward: fwd,
                    backward: bwd,
                });
            }
        }
    }
    if spec.source_rates.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroSourceTotal);
    }

    let mut gossip_in = vec![Vec::new(); n];
    let mut gossip_out = vec![Vec::new(); n];
    let mut mobility_adj = vec![Vec::new(); n];
    let mut mobility_pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let g = spec.gossip_rates[i][j];
            if g > 0.0 {
                gossip_out[i].push((j, g));
                gossip_in[j].push((i, g));
            }
        }
        for j in 0..n {
            let m = spec.mobility_rates[i][j];
            if m > 0.0 {
                mobility_adj[i].push((j, m));
                if i < j {
                    mobility_pairs.push((i, j, m));
                }
            }
        }
    }
    let total_source = kahan_sum(spec.source_rates.iter().copied());
    let total_gossip = kahan_sum(spec.gossip_rates.iter().flatten().copied());
    let total_mobility = kahan_sum(mobility_pairs.iter().map(|&(_, _, r)| r));

    Ok(ValidatedNetwork {
        spec,
        gossip_in,
        gossip_out,
        mobility_adj,
        mobility_pairs,
        total_source,
        total_gossip,
        total_mobility,
    })
}

impl ValidatedNetwork {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn lambda_e(&self) -> f64 {
        self.spec.lambda_e
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn source_rate(&self, j: usize) -> f64 {
        self.spec.source_rates[j]
    }

    pub fn gossip_rate(&self, i: usize, j: usize) -> f64 {
        self.spec.gossip_rates[i][j]
    }

    pub fn mobility_rate(&self, i: usize, j: usize) -> f64 {
        self.spec.mobility_rates[i][j]
    }

    /// λ_0(S): total source delivery rate into the set.
    pub fn source_rate_into(&self, s: PositionSet) -> f64 {
        s.iter().map(|j| self.spec.source_rates[j]).sum()
    }

    /// λ_i(S): total gossip rate from position `i` into the set; zero when
    /// `i` is itself a member.
    pub fn gossip_rate_into(&self, i: usize, s: PositionSet) -> f64 {
        if s.contains(i) {
            return 0.0;
        }
        s.iter().map(|j| self.spec.gossip_rates[i][j]).sum()
    }

    /// N(S): positions outside `s` with positive gossip rate into it,
    /// in increasing order.
    pub fn neighbors_of(&self, s: PositionSet) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for j in s.iter() {
            for &(i, _) in &self.gossip_in[j] {
                if !s.contains(i) {
                    out.push(i);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Every swap that moves the set: (member i, non-member j, λm_ij),
    /// ordered by (i, j).
    pub fn mobility_exits(&self, s: PositionSet) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in s.iter() {
            for &(j, r) in &self.mobility_adj[i] {
                if !s.contains(j) {
                    out.push((i, j, r));
                }
            }
        }
        out
    }

    /// Mobility partners of position `i` (the derived set M_i) with rates.
    pub fn mobility_partners(&self, i: usize) -> &[(usize, f64)] {
        &self.mobility_adj[i]
    }

    pub fn gossip_out_of(&self, i: usize) -> &[(usize, f64)] {
        &self.gossip_out[i]
    }

    pub fn gossip_into(&self, j: usize) -> &[(usize, f64)] {
        &self.gossip_in[j]
    }

    /// Unordered mobility pairs (i < j, rate), each firing once.
    pub fn mobility_pair_list(&self) -> &[(usize, usize, f64)] {
        &self.mobility_pairs
    }

    pub fn total_source_rate(&self) -> f64 {
        self.total_source
    }

    pub fn total_gossip_rate(&self) -> f64 {
        self.total_gossip
    }

    pub fn total_mobility_rate(&self) -> f64 {
        self.total_mobility
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{fc_plus_single, toy_variant_13};

    fn toy13(lambda_m: f64) -> ValidatedNetwork {
        validate(toy_variant_13(1.0, 1.0, lambda_m).unwrap()).unwrap()
    }

    #[test]
    fn rate_queries_on_the_toy_network() {
        let net = toy13(0.5);
        // positions are 0-based internally: {1,3} is {0,2}
        let s13 = PositionSet::from_members([0, 2]);
        assert_eq!(net.source_rate_into(s13), 1.0);
        let s12 = PositionSet::from_members([0, 1]);
        assert_eq!(net.gossip_rate_into(2, s12), 1.0);
        assert_eq!(net.gossip_rate_into(0, s12), 0.0, "members contribute 0");
        assert_eq!(net.neighbors_of(s12), vec![2]);
        assert_eq!(net.mobility_exits(s12), vec![(0, 2, 0.5)]);
        let full = PositionSet::full(3);
        assert!(net.neighbors_of(full).is_empty());
        assert!(net.mobility_exits(full).is_empty());
    }

    #[test]
    fn exits_of_the_lone_position() {
        let net = validate(fc_plus_single(4, 1.0, 1.0).unwrap()).unwrap();
        let s = PositionSet::singleton(3);
        assert_eq!(
            net.mobility_exits(s),
            vec![(3, 0, 1.0), (3, 1, 1.0), (3, 2, 1.0)]
        );
    }

    #[test]
    fn swap_membership_consistency() {
        // a pair appears in exits of S iff exactly one endpoint is in S
        let net = toy13(2.0);
        for bits in 1u64..7 {
            let s = PositionSet::from_bits(bits);
            let exits = net.mobility_exits(s);
            let expect = s.contains(0) != s.contains(2);
            assert_eq!(exits.len(), usize::from(expect), "S = {s}");
        }
    }

    #[test]
    fn rejects_asymmetric_mobility() {
        let mut spec = toy_variant_13(1.0, 1.0, 1.0).unwrap();
        spec.mobility_rates[2][0] = 0.0;
        match validate(spec) {
            Err(Error::AsymmetricMobility { i: 1, j: 3, .. }) => {}
            other => panic!("expected AsymmetricMobility, got {other:?}"),
        }
    }

    #[test]
    fn rejects_nonzero_diagonals_and_negative_rates() {
        let mut spec = toy_variant_13(1.0, 1.0, 0.0).unwrap();
        spec.gossip_rates[1][1] = 0.25;
        assert!(matches!(
            validate(spec),
            Err(Error::NonzeroDiagonal {
                matrix: "gossip_rates",
                i: 2
            })
        ));

        let mut spec = toy_variant_13(1.0, 1.0, 0.0).unwrap();
        spec.source_rates[0] = -1.0;
        assert!(matches!(validate(spec), Err(Error::NegativeRate { .. })));

        let mut spec = toy_variant_13(1.0, 1.0, 0.0).unwrap();
        spec.gossip_rates[0][1] = f64::NAN;
        assert!(matches!(validate(spec), Err(Error::NegativeRate { .. })));
    }

    #[test]
    fn rejects_source_starvation_and_bad_shapes() {
        let mut spec = toy_variant_13(1.0, 1.0, 0.0).unwrap();
        spec.source_rates = vec![0.0; 3];
        assert!(matches!(validate(spec), Err(Error::ZeroSourceTotal)));

        let mut spec = toy_variant_13(1.0, 1.0, 0.0).unwrap();
        spec.gossip_rates.pop();
        assert!(matches!(validate(spec), Err(Error::BadShape(_))));

        let mut spec = toy_variant_13(1.0, 1.0, 0.0).unwrap();
        spec.lambda_e = 0.0;
        assert!(matches!(validate(spec), Err(Error::NegativeRate { .. })));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let spec = toy_variant_13(1.0, 0.3, 0.1234567890123).unwrap();
        let doc = spec.to_json();
        let back = NetworkSpec::from_json(&doc).unwrap();
        assert_eq!(spec, back);
        assert!(NetworkSpec::from_json("{\"n\": 2}").is_err());
    }

    #[test]
    fn permutation_moves_rate_structure() {
        let spec = toy_variant_13(1.0, 1.0, 0.7).unwrap();
        let p = spec.permuted(&[2, 0, 1]);
        assert_eq!(p.source_rates, vec![0.0, 1.0 / 2.0, 1.0 / 2.0]);
        // gossip 3->2 (old 2->1) is now 0->... old i=2 -> new 1, old j=1 -> new 0
        assert_eq!(p.gossip_rates[1][0], 1.0);
        assert_eq!(p.mobility_rates[2][1], 0.7);
        assert_eq!(p.mobility_rates[1][2], 0.7);
        let back = p.permuted(&[1, 2, 0]);
        assert_eq!(back, spec);
    }
}
