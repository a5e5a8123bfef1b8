//! Event-driven simulation of the version-age process.
//!
//! One exponential clock runs at the total event rate R; each tick is then
//! attributed to a category (source counter update, source delivery, gossip
//! transmission, pair swap) and to a specific target within the category.
//! Ages are integers, so every estimate comes from exact counter arithmetic
//! plus compensated time integration.
//!
//! Replication `r` of a run seeded with `s` always consumes stream `r` of
//! the ChaCha generator seeded with `s`, and replications are aggregated in
//! index order, so results are bit-identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::ValidatedNetwork;
use crate::numeric::{compensated_add, kahan_sum};
use crate::set::PositionSet;

/// One atomic change of the network state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    /// The source's own counter increments: every position ages by one.
    SourceUpdate,
    /// The source delivers its current version to position `j`.
    Delivery { j: usize },
    /// Position `i` tells position `j` its version; `j` keeps the newer one.
    Gossip { i: usize, j: usize },
    /// The nodes at positions `i` and `j` trade places (i < j).
    Swap { i: usize, j: usize },
}

/// Vose alias table: O(1) draws from a fixed discrete distribution.
#[derive(Clone, Debug)]
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    fn new(weights: &[f64]) -> AliasTable {
        let n = weights.len();
        assert!(n > 0 && weights.iter().all(|&w| w > 0.0));
        let total = kahan_sum(weights.iter().copied());
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (idx, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(idx as u32);
            } else {
                large.push(idx as u32);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            large.pop();
            prob[s as usize] = scaled[s as usize];
            alias[s as usize] = l;
            scaled[l as usize] = (scaled[l as usize] + scaled[s as usize]) - 1.0;
            if scaled[l as usize] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // entries still queued only drifted off 1.0 by rounding
        AliasTable { prob, alias }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let k = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[k] {
            k
        } else {
            self.alias[k] as usize
        }
    }
}

#[derive(Clone, Debug)]
enum IndexSampler {
    Empty,
    Uniform { items: Vec<u32> },
    Weighted { items: Vec<u32>, table: AliasTable },
}

impl IndexSampler {
    fn new(entries: &[(usize, f64)]) -> IndexSampler {
        if entries.is_empty() {
            return IndexSampler::Empty;
        }
        let items: Vec<u32> = entries.iter().map(|&(i, _)| i as u32).collect();
        if entries.iter().all(|&(_, w)| w == entries[0].1) {
            IndexSampler::Uniform { items }
        } else {
            let weights: Vec<f64> = entries.iter().map(|&(_, w)| w).collect();
            IndexSampler::Weighted {
                items,
                table: AliasTable::new(&weights),
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            IndexSampler::Empty => unreachable!("empty category drawn"),
            IndexSampler::Uniform { items } => items[rng.random_range(0..items.len())] as usize,
            IndexSampler::Weighted { items, table } => items[table.draw(rng)] as usize,
        }
    }
}

/// Pair index k in row-major order over ordered pairs (i, j), i != j.
fn decode_ordered(k: u64, n: u64) -> (usize, usize) {
    let i = k / (n - 1);
    let r = k % (n - 1);
    let j = r + u64::from(r >= i);
    (i as usize, j as usize)
}

/// Pair index k in lexicographic order over unordered pairs (i, j), i < j.
/// The float estimate of the row lands within one of the answer; the integer
/// fixups make it exact.
fn decode_unordered(k: u64, n: u64) -> (usize, usize) {
    let base = |i: u64| i * n - i * (i + 1) / 2;
    let nf = n as f64;
    let est = nf - 0.5 - ((nf - 0.5) * (nf - 0.5) - 2.0 * k as f64).sqrt();
    let mut i = (est.max(0.0) as u64).min(n - 2);
    while i > 0 && base(i) > k {
        i -= 1;
    }
    while i < n - 2 && base(i + 1) <= k {
        i += 1;
    }
    let j = i + 1 + (k - base(i));
    (i as usize, j as usize)
}

#[derive(Clone, Debug)]
enum PairSampler {
    Empty,
    /// Every ordered pair (i != j) at one common rate.
    CompleteOrdered { n: u64 },
    /// Every unordered pair (i < j) at one common rate.
    CompleteUnordered { n: u64 },
    Uniform { pairs: Vec<(u32, u32)> },
    Weighted { pairs: Vec<(u32, u32)>, table: AliasTable },
}

impl PairSampler {
    fn new(pairs: Vec<(u32, u32)>, weights: Vec<f64>, complete_len: usize, n: usize, ordered: bool) -> PairSampler {
        if pairs.is_empty() {
            return PairSampler::Empty;
        }
        let uniform = weights.iter().all(|&w| w == weights[0]);
        if uniform && pairs.len() == complete_len {
            return if ordered {
                PairSampler::CompleteOrdered { n: n as u64 }
            } else {
                PairSampler::CompleteUnordered { n: n as u64 }
            };
        }
        if uniform {
            PairSampler::Uniform { pairs }
        } else {
            PairSampler::Weighted {
                pairs,
                table: AliasTable::new(&weights),
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        match self {
            PairSampler::Empty => unreachable!("empty category drawn"),
            PairSampler::CompleteOrdered { n } => {
                decode_ordered(rng.random_range(0..n * (n - 1)), *n)
            }
            PairSampler::CompleteUnordered { n } => {
                decode_unordered(rng.random_range(0..n * (n - 1) / 2), *n)
            }
            PairSampler::Uniform { pairs } => {
                let (i, j) = pairs[rng.random_range(0..pairs.len())];
                (i as usize, j as usize)
            }
            PairSampler::Weighted { pairs, table } => {
                let (i, j) = pairs[table.draw(rng)];
                (i as usize, j as usize)
            }
        }
    }
}

/// Draws events with the network's exact rate proportions.
#[derive(Clone, Debug)]
pub struct EventSampler {
    total: f64,
    w_update: f64,
    w_delivery: f64,
    w_gossip: f64,
    w_swap: f64,
    delivery: IndexSampler,
    gossip: PairSampler,
    swap: PairSampler,
}

/// Builds the event distribution for a validated network.
pub fn event_sampler(net: &ValidatedNetwork) -> Result<EventSampler> {
    let n = net.n();
    let w_update = net.lambda_e();
    let w_delivery = net.total_source_rate();
    let w_gossip = net.total_gossip_rate();
    let w_swap = net.total_mobility_rate();
    let total = w_update + w_delivery + w_gossip + w_swap;
    if !total.is_finite() {
        return Err(Error::RateOverflow(total));
    }

    let delivery_entries: Vec<(usize, f64)> = (0..n)
        .filter_map(|j| {
            let w = net.source_rate(j);
            (w > 0.0).then_some((j, w))
        })
        .collect();

    let mut gossip_pairs = Vec::new();
    let mut gossip_weights = Vec::new();
    for i in 0..n {
        for &(j, w) in net.gossip_out_of(i) {
            gossip_pairs.push((i as u32, j as u32));
            gossip_weights.push(w);
        }
    }

    let swap_pairs: Vec<(u32, u32)> = net
        .mobility_pair_list()
        .iter()
        .map(|&(i, j, _)| (i as u32, j as u32))
        .collect();
    let swap_weights: Vec<f64> = net.mobility_pair_list().iter().map(|&(_, _, w)| w).collect();

    Ok(EventSampler {
        total,
        w_update,
        w_delivery,
        w_gossip,
        w_swap,
        delivery: IndexSampler::new(&delivery_entries),
        gossip: PairSampler::new(gossip_pairs, gossip_weights, n * (n - 1), n, true),
        swap: PairSampler::new(swap_pairs, swap_weights, n * (n - 1) / 2, n, false),
    })
}

impl EventSampler {
    /// R: the rate of the merged event clock.
    pub fn total_rate(&self) -> f64 {
        self.total
    }

    /// Rates of [source update, delivery, gossip, swap].
    pub fn category_weights(&self) -> [f64; 4] {
        [self.w_update, self.w_delivery, self.w_gossip, self.w_swap]
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Event {
        let mut u = rng.random::<f64>() * self.total;
        if u < self.w_update {
            return Event::SourceUpdate;
        }
        u -= self.w_update;
        if u < self.w_delivery {
            return Event::Delivery {
                j: self.delivery.draw(rng),
            };
        }
        u -= self.w_delivery;
        if u < self.w_gossip {
            let (i, j) = self.gossip.draw(rng);
            return Event::Gossip { i, j };
        }
        u -= self.w_gossip;
        if u < self.w_swap {
            let (i, j) = self.swap.draw(rng);
            return Event::Swap { i, j };
        }
        // the subtraction chain leaked an ulp; the update category always exists
        Event::SourceUpdate
    }
}

/// Monte Carlo run parameters. `tracked_sets` asks for the time-averaged
/// minimum age over each listed set, alongside the per-position means.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
    pub tracked_sets: Vec<PositionSet>,
}

impl SimConfig {
    /// Defaults: 10% warmup, 10 replications, no tracked sets.
    pub fn new(horizon: f64, seed: u64) -> SimConfig {
        SimConfig {
            horizon,
            warmup: horizon * 0.1,
            replications: 10,
            seed,
            tracked_sets: Vec::new(),
        }
    }
}

/// Live state of one replication. Ages are exact integers; the accumulators
/// hold post-warmup time integrals and are only current after a flush.
#[derive(Clone, Debug)]
pub struct SimState {
    pub ages: Vec<u64>,
    pub clock: f64,
    pub accumulators: Vec<f64>,
    pub set_accumulators: Vec<f64>,
    comp: Vec<f64>,
    last_flush: Vec<f64>,
    set_comp: Vec<f64>,
    set_last_flush: Vec<f64>,
    set_masks: Vec<PositionSet>,
    set_members: Vec<Vec<u32>>,
    set_min: Vec<u64>,
    warmup: f64,
}

impl SimState {
    pub fn new(n: usize, config: &SimConfig) -> Result<SimState> {
        for s in &config.tracked_sets {
            if s.is_empty() || s.iter().any(|m| m >= n) {
                return Err(Error::BadShape(format!(
                    "tracked set {s} is not a nonempty subset of 1..={n}"
                )));
            }
        }
        let k = config.tracked_sets.len();
        Ok(SimState {
            ages: vec![0; n],
            clock: 0.0,
            accumulators: vec![0.0; n],
            set_accumulators: vec![0.0; k],
            comp: vec![0.0; n],
            last_flush: vec![0.0; n],
            set_comp: vec![0.0; k],
            set_last_flush: vec![0.0; k],
            set_masks: config.tracked_sets.clone(),
            set_members: config
                .tracked_sets
                .iter()
                .map(|s| s.iter().map(|m| m as u32).collect())
                .collect(),
            set_min: vec![0; k],
            warmup: config.warmup,
        })
    }

    /// Accounts position `i`'s current age up to the current clock.
    #[inline]
    fn flush_position(&mut self, i: usize) {
        let dt = self.clock - self.last_flush[i].max(self.warmup);
        if dt > 0.0 {
            compensated_add(
                &mut self.accumulators[i],
                &mut self.comp[i],
                self.ages[i] as f64 * dt,
            );
        }
        self.last_flush[i] = self.clock;
    }

    #[inline]
    fn flush_set(&mut self, k: usize) {
        let dt = self.clock - self.set_last_flush[k].max(self.warmup);
        if dt > 0.0 {
            compensated_add(
                &mut self.set_accumulators[k],
                &mut self.set_comp[k],
                self.set_min[k] as f64 * dt,
            );
        }
        self.set_last_flush[k] = self.clock;
    }

    fn recompute_min(&self, k: usize) -> u64 {
        self.set_members[k]
            .iter()
            .map(|&m| self.ages[m as usize])
            .min()
            .expect("tracked sets are nonempty")
    }

    /// Settles every accumulator at the current clock (call at the horizon).
    pub fn flush_all(&mut self) {
        for i in 0..self.ages.len() {
            self.flush_position(i);
        }
        for k in 0..self.set_masks.len() {
            self.flush_set(k);
        }
    }

    #[cfg(debug_assertions)]
    fn check_tracked_mins(&self) {
        for k in 0..self.set_masks.len() {
            debug_assert_eq!(self.set_min[k], self.recompute_min(k), "set {k} min cache");
        }
    }
}

/// Applies one event's reset map at the state's current clock, settling the
/// time integrals of everything the event changes first.
pub fn apply_event(state: &mut SimState, event: Event) {
    match event {
        Event::SourceUpdate => {
            for i in 0..state.ages.len() {
                state.flush_position(i);
                state.ages[i] += 1;
            }
            for k in 0..state.set_masks.len() {
                state.flush_set(k);
                state.set_min[k] += 1;
            }
        }
        Event::Delivery { j } => {
            if state.ages[j] != 0 {
                state.flush_position(j);
                state.ages[j] = 0;
                for k in 0..state.set_masks.len() {
                    if state.set_min[k] > 0 && state.set_masks[k].contains(j) {
                        state.flush_set(k);
                        state.set_min[k] = 0;
                    }
                }
            }
        }
        Event::Gossip { i, j } => {
            debug_assert!(i != j);
            let incoming = state.ages[i];
            if incoming < state.ages[j] {
                state.flush_position(j);
                state.ages[j] = incoming;
                for k in 0..state.set_masks.len() {
                    if incoming < state.set_min[k] && state.set_masks[k].contains(j) {
                        state.flush_set(k);
                        state.set_min[k] = incoming;
                    }
                }
            }
        }
        Event::Swap { i, j } => {
            debug_assert!(i != j);
            let ai = state.ages[i];
            let aj = state.ages[j];
            if ai == aj {
                return;
            }
            state.flush_position(i);
            state.flush_position(j);
            state.ages.swap(i, j);
            for k in 0..state.set_masks.len() {
                let has_i = state.set_masks[k].contains(i);
                if has_i == state.set_masks[k].contains(j) {
                    // both in or both out: the member age multiset is unchanged
                    continue;
                }
                let (incoming, outgoing) = if has_i { (aj, ai) } else { (ai, aj) };
                let m = state.set_min[k];
                debug_assert!(outgoing >= m);
                if incoming < m {
                    state.flush_set(k);
                    state.set_min[k] = incoming;
                } else if outgoing == m && incoming > m {
                    // the old minimum may have left; it held up to now
                    state.flush_set(k);
                    state.set_min[k] = state.recompute_min(k);
                }
            }
        }
    }
    #[cfg(debug_assertions)]
    state.check_tracked_mins();
}

/// Aggregated estimates over all replications.
#[derive(Clone, Debug)]
pub struct SimEstimate {
    pub per_position_mean: Vec<f64>,
    pub per_position_stderr: Vec<f64>,
    pub mean_age: f64,
    pub mean_stderr: f64,
    /// Time-averaged minimum age per tracked set, same order as the config.
    pub tracked_set_means: Vec<f64>,
    /// Per-replication, per-position means (replication-major).
    pub replication_means: Vec<Vec<f64>>,
}

impl SimEstimate {
    /// Columns: `position,mean_age,stderr`, positions 1-based, then one
    /// summary row labeled `mean`.
    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from("position,mean_age,stderr\n");
        for (i, (m, s)) in self
            .per_position_mean
            .iter()
            .zip(&self.per_position_stderr)
            .enumerate()
        {
            out.push_str(&format!("{},{m},{s}\n", i + 1));
        }
        out.push_str(&format!("mean,{},{}\n", self.mean_age, self.mean_stderr));
        out
    }

    /// Columns: `replication,position,mean_age`, both indices 1-based.
    pub fn replication_csv(&self) -> String {
        let mut out = String::from("replication,position,mean_age\n");
        for (r, row) in self.replication_means.iter().enumerate() {
            for (i, m) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{m}\n", r + 1, i + 1));
            }
        }
        out
    }
}

fn check_config(config: &SimConfig) -> Result<()> {
    let h = config.horizon;
    let w = config.warmup;
    if !h.is_finite() || h <= 0.0 || !w.is_finite() || w < 0.0 || w >= h {
        return Err(Error::DegenerateHorizon {
            horizon: h,
            warmup: w,
        });
    }
    if config.replications == 0 {
        return Err(Error::BadScale("replications must be at least 1".into()));
    }
    Ok(())
}

struct RepMeans {
    positions: Vec<f64>,
    sets: Vec<f64>,
}

/// Runs all replications (in parallel when a rayon pool is available) and
/// aggregates. Identical inputs give identical outputs on any worker count.
pub fn simulate(net: &ValidatedNetwork, config: &SimConfig) -> Result<SimEstimate> {
    check_config(config)?;
    SimState::new(net.n(), config)?;
    let sampler = event_sampler(net)?;
    let n = net.n();
    let reps: Vec<RepMeans> = (0..config.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(rep);
            let mut state = SimState::new(n, config).expect("config checked above");
            let total = sampler.total_rate();
            loop {
                let step: f64 = rng.sample(Exp1);
                let t = state.clock + step / total;
                if !(t < config.horizon) {
                    state.clock = config.horizon;
                    state.flush_all();
                    break;
                }
                state.clock = t;
                apply_event(&mut state, sampler.draw(&mut rng));
            }
            let window = config.horizon - config.warmup;
            RepMeans {
                positions: state.accumulators.iter().map(|a| a / window).collect(),
                sets: state.set_accumulators.iter().map(|a| a / window).collect(),
            }
        })
        .collect();

    let m = reps.len();
    let mut per_position_mean = Vec::with_capacity(n);
    let mut per_position_stderr = Vec::with_capacity(n);
    for i in 0..n {
        let xs: Vec<f64> = reps.iter().map(|r| r.positions[i]).collect();
        let (mean, se) = mean_and_stderr(&xs);
        per_position_mean.push(mean);
        per_position_stderr.push(se);
    }
    let overall: Vec<f64> = reps
        .iter()
        .map(|r| r.positions.iter().sum::<f64>() / n as f64)
        .collect();
    let (mean_age, mean_stderr) = mean_and_stderr(&overall);
    let tracked_set_means = (0..config.tracked_sets.len())
        .map(|k| reps.iter().map(|r| r.sets[k]).sum::<f64>() / m as f64)
        .collect();
    Ok(SimEstimate {
        per_position_mean,
        per_position_stderr,
        mean_age,
        mean_stderr,
        tracked_set_means,
        replication_means: reps.into_iter().map(|r| r.positions).collect(),
    })
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}
