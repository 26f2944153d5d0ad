//! Fast invariant suite behind the `selftest` command.
//!
//! Four checks, a few seconds total, that catch the failure modes a broken
//! build or a miscompiled dependency would introduce: the Beta/Binomial CDF
//! identity over an integer grid, ring-buffer aggregates against the
//! brute-force recount, the sparse-window counting bound on random
//! instances, and bit-exact determinism of streams and episodes.
//!
//! [`Fault`] deliberately corrupts a check's subject so the reporting path
//! (named failing check, nonzero exit) can be exercised end to end.

use crate::harness::run_episode;
use crate::policy::{PolicyConfig, PolicyKind};
use crate::reward::make_piecewise_constant;
use crate::reward::RewardFamily;
use crate::rng::RngStream;
use crate::window::{recompute, WindowStats};
use crate::{analysis, dist};

/// Deliberate defect injected into a selftest run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Corrupt the sliding-window aggregates mid-run, as a broken eviction
    /// path would.
    WindowEviction,
}

impl Fault {
    pub fn parse(name: &str) -> Option<Fault> {
        match name {
            "window-eviction" => Some(Fault::WindowEviction),
            _ => None,
        }
    }
}

/// Outcome of one selftest check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: false,
            detail,
        }
    }
}

fn check_beta_binomial_identity() -> CheckResult {
    let name = "beta-binomial-identity";
    let mut max_gap: f64 = 0.0;
    for alpha in 1..=20u64 {
        for beta in 1..=20u64 {
            for step in 1..=19 {
                let y = step as f64 * 0.05;
                match dist::beta_binomial_identity_gap(alpha, beta, y) {
                    Ok(gap) => max_gap = max_gap.max(gap),
                    Err(e) => return CheckResult::fail(name, e.to_string()),
                }
            }
        }
    }
    if max_gap <= 1e-9 {
        CheckResult::pass(name, format!("max gap {max_gap:.2e} over the 20x20x19 grid"))
    } else {
        CheckResult::fail(name, format!("max gap {max_gap:.2e} exceeds 1e-9"))
    }
}

fn check_window_stats(fault: Option<Fault>) -> CheckResult {
    let name = "window-stats-oracle";
    let arms = 5;
    for (run, tau) in [(0u64, 1usize), (1, 64)] {
        let mut rng = RngStream::new(0x5e1f + run);
        let mut stats = WindowStats::new(arms, tau);
        let mut history = Vec::new();
        for step in 0..2000usize {
            let arm = rng.next_index(arms);
            let reward = rng.next_f64();
            stats.record(arm, reward);
            history.push((arm, reward));
            if fault == Some(Fault::WindowEviction) && step == 997 {
                // A stuck eviction leaves a stale observation behind; mimic
                // it by recording one the oracle never sees.
                stats.record(arm, reward);
            }
            let oracle = recompute(&history, arms, step + 2, tau);
            for (arm, &(count, sum)) in oracle.iter().enumerate() {
                if stats.pull_count(arm) != count
                    || (stats.reward_sum(arm) - sum).abs() > 1e-12
                {
                    return CheckResult::fail(
                        name,
                        format!(
                            "divergence at step {} (tau {tau}, arm {arm}): \
                             counts {} vs {}, sums {} vs {}",
                            step + 1,
                            stats.pull_count(arm),
                            count,
                            stats.reward_sum(arm),
                            sum
                        ),
                    );
                }
            }
        }
    }
    CheckResult::pass(name, "2 runs x 2000 steps, tau in {1, 64}".to_string())
}

fn check_window_counting_bound() -> CheckResult {
    let name = "window-counting-bound";
    // The equality edge: every round flagged, s = tau.
    let full = analysis::RoundMask::from_intervals(100, &[(1, 100)]);
    let edge = analysis::window_occupancy_bound(&full, 10, 10);
    if !(edge.holds && edge.lhs == 100 && edge.rhs == 100) {
        return CheckResult::fail(name, format!("equality edge case broke: {edge:?}"));
    }
    let mut rng = RngStream::new(0xc0de);
    for i in 0..50 {
        let horizon = 20 + rng.next_index(281);
        let tau = 1 + rng.next_index(60.min(horizon));
        let s = 1 + rng.next_index(2 * tau) as u64;
        let mut mask = analysis::RoundMask::new(horizon);
        for t in 1..=horizon {
            if rng.next_f64() < 0.35 {
                mask.set(t);
            }
        }
        let bound = analysis::window_occupancy_bound(&mask, tau, s);
        if !bound.holds {
            return CheckResult::fail(
                name,
                format!("instance {i} (T={horizon}, tau={tau}, s={s}) violated: {bound:?}"),
            );
        }
    }
    CheckResult::pass(name, "50 random instances plus the equality edge".to_string())
}

fn check_determinism() -> CheckResult {
    let name = "determinism";
    let draws = |seed: u64| -> Vec<u64> {
        let mut rng = RngStream::new(seed);
        let mut out = Vec::new();
        for _ in 0..10 {
            out.push(dist::sample_beta(2.5, 4.0, &mut rng).unwrap().to_bits());
        }
        for _ in 0..10 {
            out.push(dist::sample_gaussian(0.0, 2.0, &mut rng).unwrap().to_bits());
        }
        out
    };
    if draws(1234) != draws(1234) {
        return CheckResult::fail(name, "identical seeds produced different draws".to_string());
    }

    let traj = std::sync::Arc::new(
        make_piecewise_constant(
            200,
            &[101],
            &[vec![0.8, 0.2], vec![0.2, 0.8]],
            RewardFamily::Bernoulli,
        )
        .expect("valid fixture"),
    );
    let config = PolicyConfig::new(PolicyKind::BetaSwts).with_tau(25);
    let a = run_episode(&config, &traj, 99).expect("valid fixture");
    let b = run_episode(&config, &traj, 99).expect("valid fixture");
    if a != b {
        return CheckResult::fail(name, "identical episode inputs diverged".to_string());
    }
    CheckResult::pass(name, "streams and episodes replay bit-exactly".to_string())
}

/// Run the whole suite; `fault` corrupts the targeted check.
pub fn run(fault: Option<Fault>) -> Vec<CheckResult> {
    vec![
        check_beta_binomial_identity(),
        check_window_stats(fault),
        check_window_counting_bound(),
        check_determinism(),
    ]
}
