//! Seeded Monte-Carlo episodes, replication aggregates, and window sweeps.
//!
//! Regret here is *pseudo*-regret: the per-round gap between the best mean
//! and the chosen arm's mean, never the realized rewards. It is the
//! unbiased, lower-variance per-episode estimator of expected dynamic
//! regret, which is defined on means.
//!
//! Determinism is strict. An episode is a pure function of
//! `(policy config, trajectory, seed)`; replication `i` of a batch runs on
//! the seed derived from `(base seed, i)`; a sweep row derives its seeds
//! from the window length itself, so reordering the sweep list cannot move
//! any row's results. Replications execute in parallel but are reduced in
//! fixed index order, making aggregates independent of scheduling.

use crate::policy::{PolicyConfig, PolicyKind};
use crate::reward::{fmt_g17, RewardTrajectory};
use crate::rng::{mix, RngStream};
use crate::{Error, Result};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

// Stream purposes. Policy draws and reward noise never share a stream, so
// policies with different draw counts see identical reward randomness.
const KEY_POLICY: u64 = 0x504f_4c49;
const KEY_REWARD: u64 = 0x5245_5741;
const KEY_SWEEP: u64 = 0x5357_4545;

/// The seed replication `episode` of a batch over `base_seed` runs on.
/// Exposed so any single replication can be reproduced in isolation.
pub fn episode_seed(base_seed: u64, episode: usize) -> u64 {
    mix(base_seed, episode as u64)
}

/// Full trace of one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub seed: u64,
    /// Chosen arm per round, 0-based.
    pub arms: Vec<u32>,
    /// Realized reward per round.
    pub rewards: Vec<f64>,
    /// Per-round mean gap to the best arm; non-negative.
    pub instant_regret: Vec<f64>,
    /// Prefix sums of `instant_regret`; non-decreasing.
    pub cumulative_regret: Vec<f64>,
    /// Per-arm total pull counts; sums to the horizon.
    pub pulls: Vec<u64>,
}

impl EpisodeRecord {
    pub fn final_regret(&self) -> f64 {
        *self.cumulative_regret.last().expect("nonempty horizon")
    }
}

/// Play one seeded episode of `config` against `traj`.
pub fn run_episode(
    config: &PolicyConfig,
    traj: &Arc<RewardTrajectory>,
    seed: u64,
) -> Result<EpisodeRecord> {
    let (mut policy, _warnings) = config.build(traj)?;
    let root = RngStream::new(seed);
    let mut policy_rng = root.derive(KEY_POLICY);
    let mut reward_rng = root.derive(KEY_REWARD);

    let horizon = traj.horizon();
    let mut arms = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let mut instant = Vec::with_capacity(horizon);
    let mut cumulative = Vec::with_capacity(horizon);
    let mut pulls = vec![0u64; traj.arms()];
    let mut total = 0.0f64;

    for t in 1..=horizon {
        let arm = policy.select(t, &mut policy_rng);
        let reward = traj.sample_reward(arm, t, &mut reward_rng);
        policy.observe(t, arm, reward);

        let gap = traj.optimal_mean(t) - traj.mean(arm, t);
        total += gap;
        arms.push(arm as u32);
        rewards.push(reward);
        instant.push(gap);
        cumulative.push(total);
        pulls[arm] += 1;
    }

    Ok(EpisodeRecord {
        seed,
        arms,
        rewards,
        instant_regret: instant,
        cumulative_regret: cumulative,
        pulls,
    })
}

/// Recompute the cumulative pseudo-regret curve of a record from its pull
/// sequence and the trajectory means. Matches the stored curve exactly.
pub fn dynamic_regret(record: &EpisodeRecord, traj: &RewardTrajectory) -> Vec<f64> {
    let mut total = 0.0f64;
    record
        .arms
        .iter()
        .enumerate()
        .map(|(i, &arm)| {
            let t = i + 1;
            total += traj.optimal_mean(t) - traj.mean(arm as usize, t);
            total
        })
        .collect()
}

/// Replication aggregate: per-round mean curve, its standard error, and the
/// per-round arm-pull tallies that let regret be re-derived from pull
/// frequencies alone.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub replications: usize,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean per-arm total pulls.
    pub mean_pulls: Vec<f64>,
    /// How many episodes pulled `arm` at round `t`:
    /// `pull_counts[(t − 1) * K + arm]`.
    pub pull_counts: Vec<u32>,
    arms: usize,
    /// Hash of every input that can change the results.
    pub fingerprint: String,
}

impl Aggregate {
    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> usize {
        self.mean_regret.len()
    }

    pub fn final_mean_regret(&self) -> f64 {
        *self.mean_regret.last().expect("nonempty horizon")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr.last().expect("nonempty horizon")
    }

    /// Empirical probability that round `t` pulled `arm`.
    pub fn pull_frequency(&self, arm: usize, t: usize) -> f64 {
        self.pull_counts[(t - 1) * self.arms + arm] as f64 / self.replications as f64
    }
}

/// FNV-1a, 64-bit: stable fingerprint accumulator.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }

    fn hex(&self) -> String {
        format!("{:016x}", self.0)
    }
}

fn fingerprint(config: &PolicyConfig, traj: &RewardTrajectory, n: usize, base_seed: u64) -> String {
    let mut fnv = Fnv::new();
    fnv.write(serde_json::to_string(config).expect("config serializes").as_bytes());
    fnv.write(serde_json::to_string(&traj.family()).expect("family serializes").as_bytes());
    fnv.write(&(traj.arms() as u64).to_le_bytes());
    fnv.write(&(traj.horizon() as u64).to_le_bytes());
    for arm in 0..traj.arms() {
        for t in 1..=traj.horizon() {
            fnv.write(&traj.mean(arm, t).to_bits().to_le_bytes());
        }
    }
    fnv.write(&(n as u64).to_le_bytes());
    for episode in 0..n {
        fnv.write(&episode_seed(base_seed, episode).to_le_bytes());
    }
    fnv.hex()
}

/// Run `n` seeded replications and aggregate them.
///
/// Episode `i` uses the seed derived from `(base_seed, i)`. Replications run
/// concurrently; the reduction always walks them in index order.
pub fn run_replications(
    config: &PolicyConfig,
    traj: &Arc<RewardTrajectory>,
    n: usize,
    base_seed: u64,
) -> Result<Aggregate> {
    if n < 1 {
        return Err(Error::config("need at least one replication".to_string()));
    }
    // Surface configuration problems once, before any episode runs.
    config.validate(traj.arms(), traj.family())?;

    let records: Vec<EpisodeRecord> = (0..n)
        .into_par_iter()
        .map(|episode| {
            run_episode(config, traj, episode_seed(base_seed, episode))
                .expect("config validated before dispatch")
        })
        .collect();

    let horizon = traj.horizon();
    let arms = traj.arms();
    let mut mean_regret = vec![0.0f64; horizon];
    let mut pull_counts = vec![0u32; horizon * arms];
    let mut mean_pulls = vec![0.0f64; arms];
    for record in &records {
        for t in 0..horizon {
            mean_regret[t] += record.cumulative_regret[t];
            pull_counts[t * arms + record.arms[t] as usize] += 1;
        }
        for (mean, &pulls) in mean_pulls.iter_mut().zip(&record.pulls) {
            *mean += pulls as f64;
        }
    }
    for m in &mut mean_regret {
        *m /= n as f64;
    }
    for p in &mut mean_pulls {
        *p /= n as f64;
    }
    let mut stderr = vec![0.0f64; horizon];
    if n > 1 {
        for record in &records {
            for t in 0..horizon {
                let d = record.cumulative_regret[t] - mean_regret[t];
                stderr[t] += d * d;
            }
        }
        for s in &mut stderr {
            *s = (*s / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();
        }
    }

    Ok(Aggregate {
        replications: n,
        mean_regret,
        stderr,
        mean_pulls,
        pull_counts,
        arms,
        fingerprint: fingerprint(config, traj, n, base_seed),
    })
}

/// One row of a window sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub tau: usize,
    pub final_regret: f64,
    pub stderr: f64,
    pub mean_pulls: Vec<f64>,
}

/// Run the windowed policy family of `template` once per window length.
///
/// Every row derives its seeds from `(base_seed, tau)`, so rows are
/// independent of the order of `taus` and of each other.
pub fn tau_sweep(
    template: &PolicyConfig,
    traj: &Arc<RewardTrajectory>,
    taus: &[usize],
    n: usize,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if !matches!(
        template.policy,
        PolicyKind::BetaSwts | PolicyKind::GammaSwgts
    ) {
        return Err(Error::config(format!(
            "a sweep needs a windowed policy family, got {:?}",
            template.policy
        )));
    }
    if taus.is_empty() {
        return Err(Error::config("sweep needs at least one window length".to_string()));
    }
    // Validate the whole grid before running any of it.
    let configs: Vec<PolicyConfig> = taus
        .iter()
        .map(|&tau| template.clone().with_tau(tau))
        .collect();
    for config in &configs {
        config.validate(traj.arms(), traj.family())?;
    }

    configs
        .iter()
        .zip(taus)
        .map(|(config, &tau)| {
            let row_seed = mix(mix(base_seed, KEY_SWEEP), tau as u64);
            let agg = run_replications(config, traj, n, row_seed)?;
            Ok(SweepRow {
                tau,
                final_regret: agg.final_mean_regret(),
                stderr: agg.final_stderr(),
                mean_pulls: agg.mean_pulls,
            })
        })
        .collect()
}

/// Output decimation stride: curves are written every `⌈T/2048⌉` rounds.
pub fn output_stride(horizon: usize) -> usize {
    horizon.div_ceil(2048)
}

/// Write an aggregate curve as `round,mean_regret,stderr` CSV with LF line
/// endings, decimated to [`output_stride`] and always including the final
/// round. Reals carry 17 significant digits.
pub fn write_regret_csv(aggregate: &Aggregate, path: &Path) -> Result<()> {
    let horizon = aggregate.horizon();
    let stride = output_stride(horizon);
    let mut out = String::from("round,mean_regret,stderr\n");
    for t in 1..=horizon {
        if t % stride == 0 || t == horizon {
            let _ = writeln!(
                out,
                "{t},{},{}",
                fmt_g17(aggregate.mean_regret[t - 1]),
                fmt_g17(aggregate.stderr[t - 1])
            );
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write sweep rows as `tau,final_regret,stderr,pulls_arm_1..K` CSV.
pub fn write_sweep_csv(rows: &[SweepRow], arms: usize, path: &Path) -> Result<()> {
    let mut out = String::from("tau,final_regret,stderr");
    for arm in 1..=arms {
        let _ = write!(out, ",pulls_arm_{arm}");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{},{},{}", row.tau, fmt_g17(row.final_regret), fmt_g17(row.stderr));
        for arm in 0..arms {
            let _ = write!(out, ",{}", fmt_g17(row.mean_pulls[arm]));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
