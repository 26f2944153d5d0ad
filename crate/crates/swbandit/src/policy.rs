//! Bandit policies behind one contract: `select(t, rng) -> arm`, then
//! `observe(t, arm, reward)`.
//!
//! The two windowed Thompson samplers do the real work:
//!
//! - **`beta_swts`** — per arm, draw `θ_i ~ Beta(1 + S_i, 1 + (n_i − S_i))`
//!   from the window successes/failures and play the lowest-index maximizer.
//!   An empty window means `Beta(1, 1)`, the flat prior.
//! - **`gamma_swgts`** — per arm, draw `θ_i ~ N(window mean_i, 1/(γ·n_i))`.
//!   To keep every `n_i` positive it force-plays arms `1..K` in the first
//!   `K` rounds of every length-`τ` block (the first block doubling as
//!   warm-up), which requires `τ >= K`. Forced pulls are recorded exactly
//!   like free ones.
//!
//! Baselines: the same samplers over full-horizon statistics
//! (`stationary_ts`, `stationary_gts`), the clairvoyant `oracle`, `uniform`,
//! and `fixed`.
//!
//! Value-domain errors surface as `Result`s at configuration time; contract
//! violations mid-episode (a non-binary reward offered to a Beta posterior,
//! a zero window count outside a forced slot) are bugs, not data, and panic.

use crate::dist;
use crate::reward::{RewardFamily, RewardTrajectory};
use crate::rng::RngStream;
use crate::window::{Kahan, WindowStats};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Exploration parameter cap `min(1/(4·v), 1)` for proxy variance `v`; the
/// Gaussian sampler's guarantees hold for `γ` at or below this value, and it
/// is the default when no `γ` is configured.
pub fn gamma_cap(proxy_variance: f64) -> f64 {
    if proxy_variance <= 0.0 {
        1.0
    } else {
        (1.0 / (4.0 * proxy_variance)).min(1.0)
    }
}

/// Policy selector, as written in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    BetaSwts,
    GammaSwgts,
    StationaryTs,
    StationaryGts,
    Oracle,
    Uniform,
    Fixed,
}

impl PolicyKind {
    fn name(self) -> &'static str {
        match self {
            PolicyKind::BetaSwts => "beta_swts",
            PolicyKind::GammaSwgts => "gamma_swgts",
            PolicyKind::StationaryTs => "stationary_ts",
            PolicyKind::StationaryGts => "stationary_gts",
            PolicyKind::Oracle => "oracle",
            PolicyKind::Uniform => "uniform",
            PolicyKind::Fixed => "fixed",
        }
    }
}

/// One policy entry of an experiment configuration.
///
/// JSON schema: `{"policy": <kind>, "tau": <int>, "gamma": <real>,
/// "arm": <int>}` with unknown keys rejected; `tau`/`gamma`/`arm` are only
/// accepted where the kind uses them. `arm` is 1-based in files, matching
/// the `mu_1..mu_K` trajectory columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub policy: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<usize>,
}

impl PolicyConfig {
    pub fn new(policy: PolicyKind) -> Self {
        PolicyConfig {
            policy,
            tau: None,
            gamma: None,
            arm: None,
        }
    }

    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_arm(mut self, arm: usize) -> Self {
        self.arm = Some(arm);
        self
    }

    /// Stable label used in output file names and reports.
    pub fn label(&self) -> String {
        let mut label = self.policy.name().to_string();
        if let Some(tau) = self.tau {
            label.push_str(&format!("_tau{tau}"));
        }
        if let Some(gamma) = self.gamma {
            label.push_str(&format!("_g{gamma}"));
        }
        if let Some(arm) = self.arm {
            label.push_str(&format!("_arm{arm}"));
        }
        label
    }

    fn reject_field(&self, field: &str, present: bool) -> Result<()> {
        if present {
            return Err(Error::config(format!(
                "{} does not take the `{field}` key",
                self.policy.name()
            )));
        }
        Ok(())
    }

    /// Validate against an environment shape; returns non-fatal warnings.
    pub fn validate(&self, arms: usize, family: RewardFamily) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        let needs_bernoulli = matches!(self.policy, PolicyKind::BetaSwts | PolicyKind::StationaryTs);
        if needs_bernoulli && !matches!(family, RewardFamily::Bernoulli) {
            return Err(Error::config(format!(
                "{} forms Beta posteriors and requires Bernoulli rewards",
                self.policy.name()
            )));
        }
        match self.policy {
            PolicyKind::BetaSwts => {
                self.reject_field("gamma", self.gamma.is_some())?;
                self.reject_field("arm", self.arm.is_some())?;
                match self.tau {
                    Some(tau) if tau >= 1 => {}
                    Some(tau) => {
                        return Err(Error::config(format!("beta_swts needs tau >= 1, got {tau}")))
                    }
                    None => return Err(Error::config("beta_swts needs a tau".to_string())),
                }
            }
            PolicyKind::GammaSwgts => {
                self.reject_field("arm", self.arm.is_some())?;
                match self.tau {
                    Some(tau) if tau >= arms => {}
                    Some(tau) => {
                        return Err(Error::config(format!(
                            "gamma_swgts needs tau >= K so the forced round-robin fits in a \
                             window; got tau = {tau}, K = {arms}"
                        )))
                    }
                    None => return Err(Error::config("gamma_swgts needs a tau".to_string())),
                }
                self.check_gamma(family, &mut warnings)?;
            }
            PolicyKind::StationaryTs => {
                self.reject_field("tau", self.tau.is_some())?;
                self.reject_field("gamma", self.gamma.is_some())?;
                self.reject_field("arm", self.arm.is_some())?;
            }
            PolicyKind::StationaryGts => {
                self.reject_field("tau", self.tau.is_some())?;
                self.reject_field("arm", self.arm.is_some())?;
                self.check_gamma(family, &mut warnings)?;
            }
            PolicyKind::Oracle | PolicyKind::Uniform => {
                self.reject_field("tau", self.tau.is_some())?;
                self.reject_field("gamma", self.gamma.is_some())?;
                self.reject_field("arm", self.arm.is_some())?;
            }
            PolicyKind::Fixed => {
                self.reject_field("tau", self.tau.is_some())?;
                self.reject_field("gamma", self.gamma.is_some())?;
                match self.arm {
                    Some(arm) if (1..=arms).contains(&arm) => {}
                    Some(arm) => {
                        return Err(Error::config(format!(
                            "fixed arm {arm} outside 1..={arms}"
                        )))
                    }
                    None => return Err(Error::config("fixed needs an `arm`".to_string())),
                }
            }
        }
        Ok(warnings)
    }

    fn check_gamma(&self, family: RewardFamily, warnings: &mut Vec<String>) -> Result<()> {
        if let Some(gamma) = self.gamma {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::config(format!("gamma must be positive, got {gamma}")));
            }
            let cap = gamma_cap(family.proxy_variance());
            if gamma > cap {
                warnings.push(format!(
                    "gamma = {gamma} exceeds min(1/(4 sigma_var^2), 1) = {cap}; the Gaussian \
                     sampler's guarantees assume gamma <= {cap}"
                ));
            }
        }
        Ok(())
    }

    /// Resolve against a trajectory. Returns the ready policy plus warnings.
    pub fn build(&self, traj: &Arc<RewardTrajectory>) -> Result<(Policy, Vec<String>)> {
        Policy::from_parts(
            self,
            traj.arms(),
            traj.horizon(),
            traj.family(),
            Some(Arc::clone(traj)),
        )
    }

    fn effective_gamma(&self, family: RewardFamily) -> f64 {
        self.gamma.unwrap_or_else(|| gamma_cap(family.proxy_variance()))
    }
}

/// Ready-to-run policy state for one episode. Single-owner: distinct
/// episodes get distinct instances and distinct RNG streams.
#[derive(Clone, Debug)]
pub enum Policy {
    BetaSwts {
        window: WindowStats,
    },
    GammaSwgts {
        window: WindowStats,
        gamma: f64,
    },
    StationaryBetaTs {
        pulls: Vec<u64>,
        successes: Vec<u64>,
    },
    StationaryGaussianTs {
        pulls: Vec<u64>,
        sums: Vec<Kahan>,
        gamma: f64,
    },
    Oracle {
        traj: Arc<RewardTrajectory>,
    },
    Uniform {
        arms: usize,
    },
    Fixed {
        arms: usize,
        arm: usize,
    },
}

impl Policy {
    /// Build from a validated configuration. `traj` is required by the
    /// oracle (it needs the means to look up the per-round best arm) and
    /// ignored by everything else.
    pub fn from_parts(
        config: &PolicyConfig,
        arms: usize,
        _horizon: usize,
        family: RewardFamily,
        traj: Option<Arc<RewardTrajectory>>,
    ) -> Result<(Policy, Vec<String>)> {
        let warnings = config.validate(arms, family)?;
        let policy = match config.policy {
            PolicyKind::BetaSwts => Policy::BetaSwts {
                window: WindowStats::new(arms, config.tau.expect("validated")),
            },
            PolicyKind::GammaSwgts => Policy::GammaSwgts {
                window: WindowStats::new(arms, config.tau.expect("validated")),
                gamma: config.effective_gamma(family),
            },
            PolicyKind::StationaryTs => Policy::StationaryBetaTs {
                pulls: vec![0; arms],
                successes: vec![0; arms],
            },
            PolicyKind::StationaryGts => Policy::StationaryGaussianTs {
                pulls: vec![0; arms],
                sums: vec![Kahan::default(); arms],
                gamma: config.effective_gamma(family),
            },
            PolicyKind::Oracle => Policy::Oracle {
                traj: traj.ok_or_else(|| {
                    Error::config("oracle policy requires a trajectory handle".to_string())
                })?,
            },
            PolicyKind::Uniform => Policy::Uniform { arms },
            PolicyKind::Fixed => Policy::Fixed {
                arms,
                arm: config.arm.expect("validated") - 1,
            },
        };
        Ok((policy, warnings))
    }

    pub fn arms(&self) -> usize {
        match self {
            Policy::BetaSwts { window } | Policy::GammaSwgts { window, .. } => window.arms(),
            Policy::StationaryBetaTs { pulls, .. } | Policy::StationaryGaussianTs { pulls, .. } => {
                pulls.len()
            }
            Policy::Oracle { traj } => traj.arms(),
            Policy::Uniform { arms } | Policy::Fixed { arms, .. } => *arms,
        }
    }

    /// The arm a forced slot dictates at round `t`, if any. `gamma_swgts`
    /// forces the first `K` rounds of every length-`τ` block (the first
    /// block doubling as warm-up); `stationary_gts` only warm-ups.
    pub fn forced_arm(&self, t: usize) -> Option<usize> {
        match self {
            Policy::GammaSwgts { window, .. } => {
                let offset = (t - 1) % window.tau();
                (offset < window.arms()).then_some(offset)
            }
            Policy::StationaryGaussianTs { pulls, .. } => (t <= pulls.len()).then(|| t - 1),
            _ => None,
        }
    }

    /// Window statistics backing the posterior, for windowed variants.
    pub fn window(&self) -> Option<&WindowStats> {
        match self {
            Policy::BetaSwts { window } | Policy::GammaSwgts { window, .. } => Some(window),
            _ => None,
        }
    }

    /// Beta posterior `(alpha, beta)` for `arm`, where applicable.
    pub fn beta_posterior(&self, arm: usize) -> Option<(f64, f64)> {
        match self {
            Policy::BetaSwts { window } => {
                let n = window.pull_count(arm) as f64;
                let s = window.reward_sum(arm);
                Some((1.0 + s, 1.0 + (n - s)))
            }
            Policy::StationaryBetaTs { pulls, successes } => Some((
                1.0 + successes[arm] as f64,
                1.0 + (pulls[arm] - successes[arm]) as f64,
            )),
            _ => None,
        }
    }

    /// Gaussian posterior `(mean, variance)` for `arm`, where applicable and
    /// the arm has at least one observation.
    pub fn gaussian_posterior(&self, arm: usize) -> Option<(f64, f64)> {
        match self {
            Policy::GammaSwgts { window, gamma } => {
                let n = window.pull_count(arm);
                (n > 0).then(|| {
                    (
                        window.reward_sum(arm) / n as f64,
                        1.0 / (gamma * n as f64),
                    )
                })
            }
            Policy::StationaryGaussianTs { pulls, sums, gamma } => {
                let n = pulls[arm];
                (n > 0).then(|| (sums[arm].value() / n as f64, 1.0 / (gamma * n as f64)))
            }
            _ => None,
        }
    }

    /// Choose the arm to play at round `t`.
    pub fn select(&mut self, t: usize, rng: &mut RngStream) -> usize {
        match self {
            Policy::BetaSwts { window } => {
                let mut best = 0;
                let mut best_theta = f64::NEG_INFINITY;
                for arm in 0..window.arms() {
                    let n = window.pull_count(arm) as f64;
                    let s = window.reward_sum(arm);
                    let theta = dist::sample_beta(1.0 + s, 1.0 + (n - s), rng)
                        .expect("window posterior parameters are positive");
                    if theta > best_theta {
                        best = arm;
                        best_theta = theta;
                    }
                }
                best
            }
            Policy::GammaSwgts { .. } => {
                if let Some(arm) = self.forced_arm(t) {
                    return arm;
                }
                let Policy::GammaSwgts { window, gamma } = self else {
                    unreachable!()
                };
                let mut best = 0;
                let mut best_theta = f64::NEG_INFINITY;
                for arm in 0..window.arms() {
                    let n = window.pull_count(arm);
                    assert!(
                        n > 0,
                        "gamma_swgts: window count for arm {arm} is zero at round {t} outside a \
                         forced slot; the round-robin schedule is broken"
                    );
                    let mean = window.reward_sum(arm) / n as f64;
                    let theta = dist::sample_gaussian(mean, 1.0 / (*gamma * n as f64), rng)
                        .expect("posterior variance is positive");
                    if theta > best_theta {
                        best = arm;
                        best_theta = theta;
                    }
                }
                best
            }
            Policy::StationaryBetaTs { pulls, successes } => {
                let mut best = 0;
                let mut best_theta = f64::NEG_INFINITY;
                for arm in 0..pulls.len() {
                    let alpha = 1.0 + successes[arm] as f64;
                    let beta = 1.0 + (pulls[arm] - successes[arm]) as f64;
                    let theta = dist::sample_beta(alpha, beta, rng)
                        .expect("posterior parameters are positive");
                    if theta > best_theta {
                        best = arm;
                        best_theta = theta;
                    }
                }
                best
            }
            Policy::StationaryGaussianTs { pulls, sums, gamma } => {
                if t <= pulls.len() {
                    return t - 1;
                }
                let mut best = 0;
                let mut best_theta = f64::NEG_INFINITY;
                for arm in 0..pulls.len() {
                    let n = pulls[arm];
                    assert!(n > 0, "stationary_gts: arm {arm} unexplored after warm-up");
                    let mean = sums[arm].value() / n as f64;
                    let theta = dist::sample_gaussian(mean, 1.0 / (*gamma * n as f64), rng)
                        .expect("posterior variance is positive");
                    if theta > best_theta {
                        best = arm;
                        best_theta = theta;
                    }
                }
                best
            }
            Policy::Oracle { traj } => traj.optimal_arm(t),
            Policy::Uniform { arms } => rng.next_index(*arms),
            Policy::Fixed { arm, .. } => *arm,
        }
    }

    /// Record the observed reward for the arm played at round `t`.
    pub fn observe(&mut self, _t: usize, arm: usize, reward: f64) {
        match self {
            Policy::BetaSwts { window } => {
                assert!(
                    reward == 0.0 || reward == 1.0,
                    "beta_swts requires Bernoulli rewards, got {reward}"
                );
                window.record(arm, reward);
            }
            Policy::GammaSwgts { window, .. } => window.record(arm, reward),
            Policy::StationaryBetaTs { pulls, successes } => {
                assert!(
                    reward == 0.0 || reward == 1.0,
                    "stationary_ts requires Bernoulli rewards, got {reward}"
                );
                pulls[arm] += 1;
                successes[arm] += reward as u64;
            }
            Policy::StationaryGaussianTs { pulls, sums, .. } => {
                pulls[arm] += 1;
                sums[arm].add(reward);
            }
            Policy::Oracle { .. } | Policy::Uniform { .. } | Policy::Fixed { .. } => {}
        }
    }
}
