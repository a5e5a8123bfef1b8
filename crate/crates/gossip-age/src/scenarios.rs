//! Builders for the network families studied in the experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::NetworkSpec;

fn require_rate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeRate {
            context: format!("{name} = {v} (must be finite and > 0)"),
        })
    }
}

fn require_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeRate {
            context: format!("{name} = {v} (must be finite and >= 0)"),
        })
    }
}

/// Writes `total/k` into each listed slot, then replaces the final slot with
/// the Sterbenz-exact remainder so the left-to-right float sum over the slots
/// telescopes to exactly `total`. The partial sum lies in [total/2, total],
/// which makes the final subtraction exact.
fn split_exact(dst: &mut [f64], slots: &[usize], total: f64) {
    let k = slots.len();
    debug_assert!(k >= 1);
    let each = total / k as f64;
    let mut partial = 0.0;
    for &i in &slots[..k - 1] {
        dst[i] = each;
        partial += each;
    }
    dst[slots[k - 1]] = total - partial;
}

fn toy(lambda_e: f64, lambda: f64, lambda_m: f64, pair: Option<(usize, usize)>) -> Result<NetworkSpec> {
    require_rate("lambda_e", lambda_e)?;
    require_rate("lambda", lambda)?;
    require_nonneg("lambda_m", lambda_m)?;
    let mut gossip = vec![vec![0.0; 3]; 3];
    gossip[0][1] = lambda / 2.0;
    gossip[0][2] = lambda / 2.0;
    gossip[2][1] = lambda;
    let mut mobility = vec![vec![0.0; 3]; 3];
    if let Some((a, b)) = pair {
        mobility[a][b] = lambda_m;
        mobility[b][a] = lambda_m;
    }
    Ok(NetworkSpec {
        n: 3,
        lambda_e,
        source_rates: vec![lambda / 2.0, 0.0, lambda / 2.0],
        gossip_rates: gossip,
        mobility_rates: mobility,
    })
}

/// Three-position example: source feeds positions 1 and 3 at λ/2 each,
/// gossip 1→2 at λ/2, 1→3 at λ/2, 3→2 at λ. No mobility.
pub fn toy_no_mobility(lambda_e: f64, lambda: f64) -> Result<NetworkSpec> {
    toy(lambda_e, lambda, 0.0, None)
}

/// The toy network with positions 1 and 3 exchanging nodes at rate λ_m.
pub fn toy_variant_13(lambda_e: f64, lambda: f64, lambda_m: f64) -> Result<NetworkSpec> {
    toy(lambda_e, lambda, lambda_m, Some((0, 2)))
}

/// The toy network with positions 1 and 2 exchanging nodes at rate λ_m.
pub fn toy_variant_12(lambda_e: f64, lambda: f64, lambda_m: f64) -> Result<NetworkSpec> {
    toy(lambda_e, lambda, lambda_m, Some((0, 1)))
}

/// Fully connected network: each position gossips at total rate λ split
/// evenly over the other n-1, and hears the source at λ/n. With
/// `full_mobility` every unordered pair swaps at rate λ_m.
pub fn fully_connected(
    n: usize,
    lambda_e: f64,
    lambda: f64,
    full_mobility: bool,
    lambda_m: f64,
) -> Result<NetworkSpec> {
    if n < 2 {
        return Err(Error::BadScale(format!(
            "fully_connected needs n >= 2, got {n}"
        )));
    }
    require_rate("lambda_e", lambda_e)?;
    require_rate("lambda", lambda)?;
    require_nonneg("lambda_m", lambda_m)?;
    let mut source = vec![0.0; n];
    let slots: Vec<usize> = (0..n).collect();
    split_exact(&mut source, &slots, lambda);
    let g = lambda / (n - 1) as f64;
    let gossip: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { g }).collect())
        .collect();
    let m = if full_mobility { lambda_m } else { 0.0 };
    let mobility: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { m }).collect())
        .collect();
    Ok(NetworkSpec {
        n,
        lambda_e,
        source_rates: source,
        gossip_rates: gossip,
        mobility_rates: mobility,
    })
}

/// Positions 1..n-1 fully connected (per-position gossip total λ, so each
/// edge carries λ/(n-2)); position n is gossip-isolated. The source feeds
/// each connected position at λ/(2(n-1)) and the lone position at λ/2. Every
/// connected position swaps with the lone one at rate λ.
pub fn fc_plus_single(n: usize, lambda_e: f64, lambda: f64) -> Result<NetworkSpec> {
    if n < 3 {
        return Err(Error::BadScale(format!(
            "fc_plus_single needs n >= 3, got {n}"
        )));
    }
    require_rate("lambda_e", lambda_e)?;
    require_rate("lambda", lambda)?;
    let mut source = vec![0.0; n];
    let fc_slots: Vec<usize> = (0..n - 1).collect();
    split_exact(&mut source, &fc_slots, lambda / 2.0);
    source[n - 1] = lambda / 2.0;
    let g = lambda / (n - 2) as f64;
    let mut gossip = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            if i != j {
                gossip[i][j] = g;
            }
        }
    }
    let mut mobility = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        mobility[i][n - 1] = lambda;
        mobility[n - 1][i] = lambda;
    }
    Ok(NetworkSpec {
        n,
        lambda_e,
        source_rates: source,
        gossip_rates: gossip,
        mobility_rates: mobility,
    })
}

/// n/2 isolated pairs (2k-1, 2k) gossiping at rate λ each direction, source
/// rate λ/n per position, and full mobility: every unordered pair of
/// positions swaps at rate λ_m.
pub fn disconnected_pairs(n: usize, lambda_e: f64, lambda: f64, lambda_m: f64) -> Result<NetworkSpec> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::BadScale(format!(
            "disconnected_pairs needs even n >= 2, got {n}"
        )));
    }
    require_rate("lambda_e", lambda_e)?;
    require_rate("lambda", lambda)?;
    require_nonneg("lambda_m", lambda_m)?;
    let mut source = vec![0.0; n];
    let slots: Vec<usize> = (0..n).collect();
    split_exact(&mut source, &slots, lambda);
    let mut gossip = vec![vec![0.0; n]; n];
    for k in 0..n / 2 {
        let (a, b) = (2 * k, 2 * k + 1);
        gossip[a][b] = lambda;
        gossip[b][a] = lambda;
    }
    let mobility: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { lambda_m }).collect())
        .collect();
    Ok(NetworkSpec {
        n,
        lambda_e,
        source_rates: source,
        gossip_rates: gossip,
        mobility_rates: mobility,
    })
}

/// Random network for cross-validation: every position hears the source
/// (rates in [0.1, 2]), each directed gossip edge appears with probability
/// 1/2, and each unordered mobility pair appears with a per-network sparsity
/// drawn uniformly from [0, 1]. Deterministic in `seed`.
pub fn random_network(n: usize, seed: u64) -> NetworkSpec {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = |rng: &mut ChaCha8Rng| 0.1 + 1.9 * rng.random::<f64>();
    let lambda_e = rate(&mut rng);
    let source_rates: Vec<f64> = (0..n).map(|_| rate(&mut rng)).collect();
    let mut gossip = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < 0.5 {
                gossip[i][j] = rate(&mut rng);
            }
        }
    }
    let sparsity = rng.random::<f64>();
    let mut mobility = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < sparsity {
                let r = rate(&mut rng);
                mobility[i][j] = r;
                mobility[j][i] = r;
            }
        }
    }
    NetworkSpec {
        n,
        lambda_e,
        source_rates,
        gossip_rates: gossip,
        mobility_rates: mobility,
    }
}
