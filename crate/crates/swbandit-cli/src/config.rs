//! Experiment configuration document.
//!
//! One strict JSON schema for both `simulate` and `sweep`; unknown keys are
//! rejected everywhere so a misspelled `tau` can never silently fall back
//! to a default. The `BANDIT_SEED` environment variable, when set, takes
//! precedence over the configured seed.

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use swbandit::policy::PolicyConfig;
use swbandit::reward::{EnvironmentSpec, RewardTrajectory};
use swbandit::{Error, Result};

/// Plot rendering options.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotOptions {
    /// Log-scale the regret axis.
    #[serde(default)]
    pub log_y: bool,
}

/// Top-level experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    pub policies: Vec<PolicyConfig>,
    /// Window lengths for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<usize>>,
    /// Echoed verbatim into `summary.json`; outputs carry no wall-clock
    /// state, so reruns stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotOptions>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))
    }

    /// The seed after applying the `BANDIT_SEED` override.
    pub fn effective_seed(&self) -> Result<u64> {
        match std::env::var("BANDIT_SEED") {
            Ok(text) => text.trim().parse().map_err(|_| {
                Error::Config(format!("BANDIT_SEED must be an unsigned integer, got {text:?}"))
            }),
            Err(_) => Ok(self.seed),
        }
    }

    /// Build the trajectory and validate every cross-field constraint.
    /// Returns the trajectory and per-policy warnings.
    pub fn resolve(&self) -> Result<(Arc<RewardTrajectory>, Vec<Vec<String>>)> {
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".to_string()));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".to_string()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("need at least one policy".to_string()));
        }
        let traj = Arc::new(self.environment.build(self.horizon)?);
        let mut warnings = Vec::with_capacity(self.policies.len());
        for policy in &self.policies {
            warnings.push(policy.validate(traj.arms(), traj.family())?);
        }
        let mut labels: Vec<String> = self.policies.iter().map(|p| p.label()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config(
                "duplicate policy entries produce colliding output labels".to_string(),
            ));
        }
        if let Some(taus) = &self.taus {
            if taus.is_empty() {
                return Err(Error::Config("taus must not be empty when present".to_string()));
            }
        }
        Ok((traj, warnings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use swbandit::policy::PolicyKind;

    fn minimal_json() -> String {
        r#"{
            "environment": {
                "kind": "piecewise_constant",
                "boundaries": [],
                "phase_means": [[0.9, 0.5]],
                "family": {"family": "bernoulli"}
            },
            "horizon": 100,
            "replications": 2,
            "seed": 7,
            "policies": [{"policy": "oracle"}]
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_resolves() {
        let config: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        assert_eq!(config.policies[0].policy, PolicyKind::Oracle);
        let (traj, warnings) = config.resolve().unwrap();
        assert_eq!(traj.arms(), 2);
        assert_eq!(warnings, vec![Vec::<String>::new()]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = minimal_json().replace("\"seed\": 7,", "\"seed\": 7, \"sede\": 8,");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn cross_field_validation() {
        let mut config: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        config.policies = vec![];
        assert!(config.resolve().is_err());

        let mut config: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        config.policies = vec![
            PolicyConfig::new(PolicyKind::Oracle),
            PolicyConfig::new(PolicyKind::Oracle),
        ];
        assert!(config.resolve().unwrap_err().to_string().contains("colliding"));

        let mut config: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        config.policies = vec![PolicyConfig::new(PolicyKind::GammaSwgts).with_tau(1)];
        assert!(config.resolve().is_err());
    }

    #[test]
    fn seed_override() {
        let config: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        std::env::remove_var("BANDIT_SEED");
        assert_eq!(config.effective_seed().unwrap(), 7);
        std::env::set_var("BANDIT_SEED", "99");
        assert_eq!(config.effective_seed().unwrap(), 99);
        std::env::set_var("BANDIT_SEED", "nope");
        assert!(config.effective_seed().is_err());
        std::env::remove_var("BANDIT_SEED");
    }
}
