//! Pilot runs behind the pinned constants in `tests/acceptance.rs`.
//!
//! Prints the measured ratios and margins for the stationary, abrupt and
//! Gaussian scenarios at the exact seeds the acceptance suite uses. Rerun
//! with `cargo run --release -p swbandit --example pilot` whenever those
//! scenarios change, and re-pin the constants from the output.

use std::sync::Arc;
use swbandit::harness::{run_replications, tau_sweep};
use swbandit::policy::{PolicyConfig, PolicyKind};
use swbandit::reward::{make_piecewise_constant, NoiseKind, RewardFamily};

const BASE_SEED: u64 = 0xacce_5701;

fn main() {
    stationary_pilot();
    abrupt_pilot();
    sweep_pilot();
    gaussian_pilot();
}

fn stationary_pilot() {
    let traj = Arc::new(
        make_piecewise_constant(20_000, &[], &[vec![0.9, 0.5]], RewardFamily::Bernoulli).unwrap(),
    );
    let config = PolicyConfig::new(PolicyKind::BetaSwts).with_tau(20_000);
    let agg = run_replications(&config, &traj, 50, BASE_SEED).unwrap();
    let half = agg.mean_regret[10_000 - 1];
    let full = agg.final_mean_regret();
    println!("stationary: regret(T/2) = {half:.3}, regret(T) = {full:.3}, ratio = {:.4}", full / half);
}

fn abrupt_pilot() {
    let traj = Arc::new(
        make_piecewise_constant(
            10_000,
            &[2501, 5001, 7501],
            &[
                vec![0.9, 0.1],
                vec![0.1, 0.9],
                vec![0.9, 0.1],
                vec![0.1, 0.9],
            ],
            RewardFamily::Bernoulli,
        )
        .unwrap(),
    );
    let windowed = PolicyConfig::new(PolicyKind::BetaSwts).with_tau(500);
    let stationary = PolicyConfig::new(PolicyKind::StationaryTs);
    let w = run_replications(&windowed, &traj, 50, BASE_SEED).unwrap();
    let s = run_replications(&stationary, &traj, 50, BASE_SEED).unwrap();
    println!(
        "abrupt: windowed = {:.1} (se {:.1}), stationary = {:.1} (se {:.1}), ratio = {:.4}",
        w.final_mean_regret(),
        w.final_stderr(),
        s.final_mean_regret(),
        s.final_stderr(),
        w.final_mean_regret() / s.final_mean_regret()
    );
}

fn sweep_pilot() {
    let traj = Arc::new(
        make_piecewise_constant(
            10_000,
            &[2501, 5001, 7501],
            &[
                vec![0.9, 0.1],
                vec![0.1, 0.9],
                vec![0.9, 0.1],
                vec![0.1, 0.9],
            ],
            RewardFamily::Bernoulli,
        )
        .unwrap(),
    );
    let template = PolicyConfig::new(PolicyKind::BetaSwts).with_tau(1);
    let taus = [10, 50, 200, 500, 2000, 10_000];
    let rows = tau_sweep(&template, &traj, &taus, 50, BASE_SEED).unwrap();
    for row in &rows {
        println!(
            "sweep: tau = {:5}  regret = {:8.1}  se = {:6.2}",
            row.tau, row.final_regret, row.stderr
        );
    }
    let interior = rows[1..rows.len() - 1]
        .iter()
        .min_by(|a, b| a.final_regret.total_cmp(&b.final_regret))
        .unwrap();
    for end in [&rows[0], &rows[rows.len() - 1]] {
        let pooled = (end.stderr.powi(2) + interior.stderr.powi(2)).sqrt();
        println!(
            "sweep: endpoint tau {} exceeds interior tau {} by {:.1} pooled se",
            end.tau,
            interior.tau,
            (end.final_regret - interior.final_regret) / pooled
        );
    }
}

fn gaussian_pilot() {
    let family = RewardFamily::Subgaussian {
        proxy_variance: 1.0,
        noise: NoiseKind::Gaussian,
    };
    let traj = Arc::new(
        make_piecewise_constant(
            10_000,
            &[2501, 5001, 7501],
            &[
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
            ],
            family,
        )
        .unwrap(),
    );
    let windowed = PolicyConfig::new(PolicyKind::GammaSwgts).with_tau(500);
    let stationary = PolicyConfig::new(PolicyKind::StationaryGts);
    let w = run_replications(&windowed, &traj, 50, BASE_SEED).unwrap();
    let s = run_replications(&stationary, &traj, 50, BASE_SEED).unwrap();
    println!(
        "gaussian: windowed = {:.1} (se {:.1}), stationary = {:.1} (se {:.1}), ratio = {:.4}",
        w.final_mean_regret(),
        w.final_stderr(),
        s.final_mean_regret(),
        s.final_stderr(),
        w.final_mean_regret() / s.final_mean_regret()
    );
}
