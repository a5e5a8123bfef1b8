//! Closed forms and scaling bounds: the toy-example ages, the upper-bound
//! recursion for a fully connected cluster with one detached position, the
//! disconnected-pairs full-mobility bound in both mobility regimes, and the
//! mobility-free reference recursion.
//!
//! Fractions are kept as ratios of polynomial evaluations (one division at
//! the end of each term) because λ_m spans many orders of magnitude in the
//! sweeps.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ValidatedNetwork;
use crate::set::PositionSet;
use crate::solver::AgeTable;

const EULER_GAMMA: f64 = 0.5772156649015329;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyVariant {
    /// No node exchange.
    None,
    /// Positions 1 and 3 exchange nodes at λ_m.
    Exchange13,
    /// Positions 1 and 2 exchange nodes at λ_m.
    Exchange12,
}

/// Exact per-position limiting ages of the three-position example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyAges {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub variant: ToyVariant,
}

impl ToyAges {
    pub fn mean(&self) -> f64 {
        (self.v1 + self.v2 + self.v3) / 3.0
    }
}

fn require(cond: bool, what: &str, v: f64) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::NegativeRate {
            context: format!("{what} = {v}"),
        })
    }
}

/// Closed-form toy ages for the chosen exchange variant.
pub fn toy_ages(variant: ToyVariant, lambda_e: f64, lambda: f64, lambda_m: f64) -> Result<ToyAges> {
    require(lambda_e.is_finite() && lambda_e > 0.0, "lambda_e", lambda_e)?;
    require(lambda.is_finite() && lambda > 0.0, "lambda", lambda)?;
    require(lambda_m.is_finite() && lambda_m >= 0.0, "lambda_m", lambda_m)?;
    let r = lambda_e / lambda;
    let (v1, v2, v3) = match variant {
        ToyVariant::None => (2.0 * r, 2.0 * r, 1.5 * r),
        ToyVariant::Exchange13 => {
            let denom = 0.5 * lambda + 1.5 * lambda_m;
            (
                lambda_e * (lambda + 2.5 * lambda_m) / (lambda * denom),
                2.0 * r,
                lambda_e * (0.75 * lambda + 2.5 * lambda_m) / (lambda * denom),
            )
        }
        ToyVariant::Exchange12 => {
            // shared tail: the set chain {1}→{1,2}→… collapses to one factor
            let s = 5.0 / 3.0
                + (2.0 * lambda + 3.0 * lambda_m) / (1.5 * lambda + 2.5 * lambda_m)
                + lambda_m / (0.5 * lambda + lambda_m);
            let v2 = r * (0.5 * lambda + lambda_m) / (0.75 * lambda + 2.0 * lambda_m) * s;
            let v1 = lambda_e / (0.5 * lambda + lambda_m)
                + r * lambda_m / (0.75 * lambda + 2.0 * lambda_m) * s;
            let v3 = lambda_e * (4.5 * lambda + 8.0 * lambda_m) / (lambda * (3.0 * lambda + 5.0 * lambda_m));
            (v1, v2, v3)
        }
    };
    Ok(ToyAges {
        v1,
        v2,
        v3,
        variant,
    })
}

/// Exact age of the set of all n-1 connected positions in `fc_plus_single`
/// (the lone-position family fixes λ_m = λ). At the top two cardinalities
/// every set of the same shape has the same age, so the level system
/// collapses to two unknowns: (all connected, lone out) and (one connected
/// position missing).
pub fn fc_cluster_age(n: usize, lambda_e: f64, lambda: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::BadScale(format!("need n >= 4, got {n}")));
    }
    require(lambda_e.is_finite() && lambda_e > 0.0, "lambda_e", lambda_e)?;
    require(lambda.is_finite() && lambda > 0.0, "lambda", lambda)?;
    let nf = n as f64;
    let lambda_m = lambda;
    let a11 = lambda / 2.0 + (nf - 1.0) * lambda_m;
    let a12 = -(nf - 1.0) * lambda_m;
    let a21 = -lambda_m;
    let a22 = (nf - 2.0) * lambda / (2.0 * (nf - 1.0)) + lambda / 2.0 + lambda + lambda_m;
    let b1 = lambda_e;
    let b2 = 2.0 * lambda_e; // λ_e + λ · v_full, and v_full = λ_e/λ
    let det = a11 * a22 - a12 * a21;
    Ok((b1 * a22 - a12 * b2) / det)
}

/// Upper bound on the limiting age of a connected position in
/// `fc_plus_single(n)`, evaluated by unrolling the chained one-step bounds
/// down from the boundary age of the full connected cluster.
pub fn fc_single_bound_recursion(n: usize, lambda_e: f64, lambda: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::BadScale(format!("need n >= 4, got {n}")));
    }
    require(lambda_e.is_finite() && lambda_e > 0.0, "lambda_e", lambda_e)?;
    require(lambda.is_finite() && lambda > 0.0, "lambda", lambda)?;
    let boundary = fc_cluster_age(n, lambda_e, lambda)?;
    let nf = n as f64;
    let mut total = 0.0;
    let mut prefix = 1.0;
    for a in 1..=n - 2 {
        let af = a as f64;
        let c = (af - 1.0) * lambda / (2.0 * (nf - 1.0))
            + lambda / 2.0
            + (af - 1.0) * (nf - af - 2.0) * lambda / (nf - 2.0)
            + (nf - af - 2.0) * lambda;
        let d = af * lambda / (2.0 * (nf - 1.0))
            + af * (nf - af - 1.0) * lambda / (nf - 2.0)
            + af * lambda;
        let x = c + af * lambda;
        let y = af * (nf - af - 1.0) * lambda * c / (nf - 2.0)
            + af * (af - 1.0) * (nf - af - 2.0) * lambda * lambda / (nf - 2.0);
        let z = c * d - (nf - af - 2.0) * af * lambda * lambda;
        total += lambda_e * (x / z) * prefix;
        prefix *= y / z;
    }
    Ok(total + prefix * boundary)
}

/// Logarithmic relaxation of [`fc_single_bound_recursion`]:
/// (5/2)(λ_e/λ)·ln n plus a constant built from the boundary age and the
/// Euler-Mascheroni constant. Dominates the recursion for every tested n.
pub fn fc_single_log_bound(n: usize, lambda_e: f64, lambda: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::BadScale(format!("need n >= 4, got {n}")));
    }
    require(lambda_e.is_finite() && lambda_e > 0.0, "lambda_e", lambda_e)?;
    require(lambda.is_finite() && lambda > 0.0, "lambda", lambda)?;
    let boundary = fc_cluster_age(n, lambda_e, lambda)?;
    let r = lambda_e / lambda;
    Ok(2.5 * r * (n as f64).ln() + boundary + 2.5 * EULER_GAMMA + 1.25 * r)
}

/// Exact age of the set made of n/2-1 whole pairs in
/// `disconnected_pairs(n, λ_m)` with λ_m = λ/f(n). Shape symmetry collapses
/// the top three cardinalities to scalar equations and one 2x2 system.
pub fn disconnected_half_age(n: usize, lambda_e: f64, lambda: f64, f_of_n: f64) -> Result<f64> {
    check_disconnected_args(n, lambda_e, lambda, f_of_n)?;
    let nf = n as f64;
    let lambda_m = lambda / f_of_n;
    // shape (n/2-1, 1): all pairs but one, plus a lone position of that pair
    let v_one_lone = 2.0 * lambda_e * nf / ((2.0 * nf - 1.0) * lambda);
    let a11 = (nf - 2.0) * lambda / nf + 2.0 * (nf - 2.0) * lambda_m;
    let a12 = -2.0 * (nf - 2.0) * lambda_m;
    let a21 = -2.0 * lambda_m;
    let a22 = (nf - 2.0) * lambda / nf + 2.0 * lambda + 2.0 * lambda_m;
    let b1 = lambda_e;
    let b2 = lambda_e + 2.0 * lambda * v_one_lone;
    let det = a11 * a22 - a12 * a21;
    Ok((b1 * a22 - a12 * b2) / det)
}

fn check_disconnected_args(n: usize, lambda_e: f64, lambda: f64, f_of_n: f64) -> Result<()> {
    if n < 6 || n % 2 != 0 {
        return Err(Error::BadScale(format!("need even n >= 6, got {n}")));
    }
    require(lambda_e.is_finite() && lambda_e > 0.0, "lambda_e", lambda_e)?;
    require(lambda.is_finite() && lambda > 0.0, "lambda", lambda)?;
    require(f_of_n.is_finite() && f_of_n > 0.0, "f_of_n", f_of_n)?;
    Ok(())
}

/// Upper bound on the single-position age in `disconnected_pairs(n, λ/f(n))`,
/// evaluated by unrolling the chained pair-count recursion. The two
/// correction factors fold the same-cardinality couplings back into the
/// chain; both stay in (0, 1].
pub fn disconnected_bound_recursion(
    n: usize,
    lambda_e: f64,
    lambda: f64,
    f_of_n: f64,
) -> Result<f64> {
    check_disconnected_args(n, lambda_e, lambda, f_of_n)?;
    let boundary = disconnected_half_age(n, lambda_e, lambda, f_of_n)?;
    let nf = n as f64;
    let lambda_m = lambda / f_of_n;
    let mut total = 0.0;
    let mut alpha = 1.0;
    for a in 1..=n / 2 - 2 {
        let af = a as f64;
        let b = 2.0 * af * lambda / nf + 2.0 * af * (nf - 2.0 * af) * lambda_m;
        let c = (2.0 * af + 1.0) * lambda / nf
            + lambda
            + 2.0 * af * (nf - 2.0 * (af + 1.0)) * lambda_m;
        let d = 2.0 * af * lambda / nf
            + 2.0 * lambda
            + 2.0 * lambda_m
            + 2.0 * (af - 1.0) * (nf - 2.0 * (af + 1.0)) * lambda_m;
        let f_corr = 1.0 - 2.0 * af * (nf - 2.0 * (af + 1.0)) * lambda_m / c;
        let g_corr = 1.0 - 2.0 * (af - 1.0) * (nf - 2.0 * (af + 1.0)) * lambda_m / d;
        let x = 1.0 / b
            + 2.0 * af * (nf - 2.0 * af) * lambda_m / (b * d * g_corr)
            + 4.0 * af * (nf - 2.0 * af) * lambda_m * lambda / (b * c * d * f_corr * g_corr);
        let y = 4.0 * af * (nf - 2.0 * af) * lambda_m * lambda * lambda
            / (b * c * d * f_corr * g_corr);
        total += lambda_e * x * alpha;
        alpha *= y;
    }
    Ok(lambda_e / lambda + total + boundary)
}

/// Closed scaling form of the disconnected-pairs bound:
/// (λ_e/λ)·(1 + (3/2)·min(f(n), (√π/2)√n)) plus the boundary age.
pub fn disconnected_scaling_bound(
    n: usize,
    lambda_e: f64,
    lambda: f64,
    f_of_n: f64,
) -> Result<f64> {
    check_disconnected_args(n, lambda_e, lambda, f_of_n)?;
    let boundary = disconnected_half_age(n, lambda_e, lambda, f_of_n)?;
    let nf = n as f64;
    let cap = (std::f64::consts::PI.sqrt() / 2.0) * nf.sqrt();
    Ok(lambda_e / lambda * (1.0 + 1.5 * f_of_n.min(cap)) + boundary)
}

/// Mobility-free node age in an isolated uniform clique of `m` positions:
/// total source rate `source_total` split evenly, per-position outbound
/// gossip total `gossip_each` split evenly over the other m-1. Exact 1D
/// recursion, valid for any m >= 1 (m = 1 means a lone position).
pub fn uniform_clique_node_age(
    m: usize,
    lambda_e: f64,
    source_total: f64,
    gossip_each: f64,
) -> Result<f64> {
    if m < 1 {
        return Err(Error::BadScale("clique needs m >= 1".into()));
    }
    require(lambda_e.is_finite() && lambda_e > 0.0, "lambda_e", lambda_e)?;
    require(source_total.is_finite() && source_total > 0.0, "source_total", source_total)?;
    require(gossip_each.is_finite() && gossip_each >= 0.0, "gossip_each", gossip_each)?;
    let mf = m as f64;
    let mut v = lambda_e / source_total;
    for k in (1..m).rev() {
        let kf = k as f64;
        let lam0 = kf * source_total / mf;
        let g = (mf - kf) * kf * gossip_each / (mf - 1.0);
        v = (lambda_e + g * v) / (lam0 + g);
    }
    Ok(v)
}

/// Independent mobility-free reference: zeroes the mobility matrix and
/// evaluates the decoupled recursion directly by memoized descent (no linear
/// systems). Only sets reachable from singletons by adding gossip neighbors
/// are visited, so this stays cheap on sparse topologies; on dense ones it
/// costs up to 2^n and is meant for cross-checking the solver at small n.
pub fn no_mobility_reference(net: &ValidatedNetwork) -> Result<AgeTable> {
    let n = net.n();
    if n > crate::set::MAX_SET_POSITIONS {
        return Err(Error::CapExceeded {
            n,
            cap: crate::set::MAX_SET_POSITIONS,
        });
    }
    let mut memo: HashMap<PositionSet, f64> = HashMap::new();
    let full = PositionSet::full(n);
    for i in 0..n {
        descend(net, PositionSet::singleton(i), full, &mut memo)?;
    }
    let position_ages: Vec<f64> = (0..n)
        .map(|i| memo[&PositionSet::singleton(i)])
        .collect();
    let mean_age = position_ages.iter().sum::<f64>() / n as f64;
    let mut level_ages: std::collections::BTreeMap<PositionSet, f64> = Default::default();
    level_ages.extend(memo);
    Ok(AgeTable {
        level_ages,
        position_ages,
        mean_age,
    })
}

fn descend(
    net: &ValidatedNetwork,
    s: PositionSet,
    full: PositionSet,
    memo: &mut HashMap<PositionSet, f64>,
) -> Result<f64> {
    if let Some(&v) = memo.get(&s) {
        return Ok(v);
    }
    let lam0 = net.source_rate_into(s);
    let mut gossip_sum = 0.0;
    let mut carried = 0.0;
    for i in net.neighbors_of(s) {
        let gi = net.gossip_rate_into(i, s);
        let up = descend(net, s.with(i), full, memo)?;
        gossip_sum += gi;
        carried += gi * up;
    }
    let denom = lam0 + gossip_sum;
    if denom == 0.0 {
        // the set hears nothing at all; with no mobility its age diverges
        return Err(Error::SingularLevelSystem { level: s.len() });
    }
    let v = (net.lambda_e() + carried) / denom;
    memo.insert(s, v);
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    FcSingleExactRecursion,
    FcSingleLogClosedForm,
    DisconnectedRecursion,
    DisconnectedSqrtClosedForm,
    DisconnectedConstantRegime,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::FcSingleExactRecursion => "fc_single_exact_recursion",
            BoundKind::FcSingleLogClosedForm => "fc_single_log_closed_form",
            BoundKind::DisconnectedRecursion => "disconnected_recursion",
            BoundKind::DisconnectedSqrtClosedForm => "disconnected_sqrt_closed_form",
            BoundKind::DisconnectedConstantRegime => "disconnected_constant_regime",
        }
    }
}

/// One bound evaluated across a grid of network sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    pub n_values: Vec<usize>,
    pub bound_values: Vec<f64>,
    pub kind: BoundKind,
    /// Mobility-regime label for the CSV (empty when not applicable).
    pub f_of_n: String,
}

impl BoundCurve {
    /// Columns: `n,bound,kind,f_of_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,bound,kind,f_of_n\n");
        for (n, b) in self.n_values.iter().zip(&self.bound_values) {
            out.push_str(&format!("{n},{b},{},{}\n", self.kind.label(), self.f_of_n));
        }
        out
    }
}
