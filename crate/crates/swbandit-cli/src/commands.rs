//! Implementations of the five subcommands.
//!
//! Commands never mutate their inputs, and every output file is a pure
//! function of the inputs: rerunning a command over the same config and
//! environment produces byte-identical files.

use crate::config::ExperimentConfig;
use crate::svg::{render_regret_svg, Curve};
use serde::Serialize;
use std::path::Path;
use swbandit::harness::{
    output_stride, run_replications, tau_sweep, write_regret_csv, write_sweep_csv, Aggregate,
};
use swbandit::policy::PolicyConfig;
use swbandit::reward::{load_trajectory, EnvironmentSpec};
use swbandit::selftest::{self, Fault};
use swbandit::{analysis, Error, Result};

#[derive(Serialize)]
struct PolicySummary {
    label: String,
    policy: PolicyConfig,
    fingerprint: String,
    final_mean_regret: f64,
    final_stderr: f64,
    mean_pulls: Vec<f64>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct Summary<'a> {
    timestamp: Option<&'a String>,
    horizon: usize,
    replications: usize,
    seed: u64,
    environment: &'a EnvironmentSpec,
    policies: Vec<PolicySummary>,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn decimated_curve(label: String, aggregate: &Aggregate) -> Curve {
    let horizon = aggregate.horizon();
    let stride = output_stride(horizon);
    let points = (1..=horizon)
        .filter(|t| t % stride == 0 || *t == horizon)
        .map(|t| (t, aggregate.mean_regret[t - 1], aggregate.stderr[t - 1]))
        .collect();
    Curve { label, points }
}

pub fn cmd_simulate(config_path: &Path, out: &Path) -> Result<()> {
    ensure_directory_slot(out)?;
    let config = ExperimentConfig::load(config_path)?;
    let (traj, warnings) = config.resolve()?;
    let seed = config.effective_seed()?;
    for (policy, warns) in config.policies.iter().zip(&warnings) {
        for w in warns {
            eprintln!("warning: {}: {w}", policy.label());
        }
    }

    std::fs::create_dir_all(out)?;
    let mut curves = Vec::new();
    let mut summaries = Vec::new();
    for (i, policy) in config.policies.iter().enumerate() {
        let aggregate = run_replications(policy, &traj, config.replications, seed)?;
        let label = policy.label();
        let csv_path = if i == 0 {
            out.join("regret.csv")
        } else {
            out.join(format!("regret_{label}.csv"))
        };
        write_regret_csv(&aggregate, &csv_path)?;
        curves.push(decimated_curve(label.clone(), &aggregate));
        summaries.push(PolicySummary {
            label,
            policy: policy.clone(),
            fingerprint: aggregate.fingerprint.clone(),
            final_mean_regret: aggregate.final_mean_regret(),
            final_stderr: aggregate.final_stderr(),
            mean_pulls: aggregate.mean_pulls.clone(),
            warnings: warnings[i].clone(),
        });
    }

    let log_y = config.plot.unwrap_or_default().log_y;
    std::fs::write(out.join("regret.svg"), render_regret_svg(&curves, log_y))?;

    write_json(
        &Summary {
            timestamp: config.timestamp.as_ref(),
            horizon: config.horizon,
            replications: config.replications,
            seed,
            environment: &config.environment,
            policies: summaries,
        },
        &out.join("summary.json"),
    )
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    timestamp: Option<&'a String>,
    horizon: usize,
    replications: usize,
    seed: u64,
    environment: &'a EnvironmentSpec,
    policy: &'a PolicyConfig,
    taus: &'a [usize],
    warnings: Vec<String>,
}

pub fn cmd_sweep(config_path: &Path, out: &Path) -> Result<()> {
    ensure_directory_slot(out)?;
    let config = ExperimentConfig::load(config_path)?;
    let (traj, warnings) = config.resolve()?;
    let seed = config.effective_seed()?;
    if config.policies.len() != 1 {
        return Err(Error::Config(format!(
            "sweep needs exactly one policy template, got {}",
            config.policies.len()
        )));
    }
    let template = &config.policies[0];
    let taus = config
        .taus
        .as_deref()
        .ok_or_else(|| Error::Config("sweep needs a `taus` list".to_string()))?;
    for w in &warnings[0] {
        eprintln!("warning: {}: {w}", template.label());
    }

    let rows = tau_sweep(template, &traj, taus, config.replications, seed)?;
    std::fs::create_dir_all(out)?;
    write_sweep_csv(&rows, traj.arms(), &out.join("sweep.csv"))?;
    write_json(
        &SweepSummary {
            timestamp: config.timestamp.as_ref(),
            horizon: config.horizon,
            replications: config.replications,
            seed,
            environment: &config.environment,
            policy: template,
            taus,
            warnings: warnings[0].clone(),
        },
        &out.join("summary.json"),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_analyze(
    traj_path: &Path,
    taus: &[usize],
    delta_prime: Option<f64>,
    cap_f: Option<f64>,
    cap_beta: Option<f64>,
    out: &Path,
) -> Result<()> {
    let cap = match (cap_f, cap_beta) {
        (Some(f), Some(beta)) => Some((f, beta)),
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "--cap-f and --cap-beta must be given together".to_string(),
            ))
        }
    };
    if taus.is_empty() {
        return Err(Error::Config("need at least one --tau".to_string()));
    }
    ensure_directory_slot(out)?;
    let traj = load_trajectory(traj_path)?;
    std::fs::create_dir_all(out)?;
    for &tau in taus {
        let mut options = analysis::StructureOptions::new(tau);
        options.delta_prime = delta_prime;
        options.cap = cap;
        let report = analysis::structure_report(&traj, &options)?;
        write_json(&report, &out.join(format!("structure_tau{tau}.json")))?;
    }
    Ok(())
}

pub fn cmd_validate(config_path: &Path) -> Result<()> {
    let config = ExperimentConfig::load(config_path)?;
    let (traj, warnings) = config.resolve()?;
    config.effective_seed()?;
    for (policy, warns) in config.policies.iter().zip(&warnings) {
        for w in warns {
            eprintln!("warning: {}: {w}", policy.label());
        }
    }
    println!(
        "configuration OK: K = {}, T = {}, {} policies, {} replications",
        traj.arms(),
        traj.horizon(),
        config.policies.len(),
        config.replications
    );
    Ok(())
}

/// Run the invariant suite; returns the process exit code (0 pass, 1 fail).
///
/// `BANDIT_SELFTEST_INJECT` (values: `window-eviction`) corrupts the named
/// subsystem so the failure path itself stays tested.
pub fn cmd_selftest() -> i32 {
    let fault = std::env::var("BANDIT_SELFTEST_INJECT")
        .ok()
        .and_then(|name| Fault::parse(&name));
    let results = selftest::run(fault);
    let mut all_passed = true;
    for check in &results {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        println!("check {}: {verdict} ({})", check.name, check.detail);
        all_passed &= check.passed;
    }
    if all_passed {
        0
    } else {
        1
    }
}

/// Refuse to treat an existing file as the output directory, early and with
/// a clear message.
fn ensure_directory_slot(out: &Path) -> Result<()> {
    if out.exists() && !out.is_dir() {
        return Err(Error::Config(format!(
            "output path {} exists and is not a directory",
            out.display()
        )));
    }
    Ok(())
}
