//! Mean-reward trajectories and the environment families that generate them.
//!
//! A [`RewardTrajectory`] is the fully materialized `K × T` matrix of mean
//! rewards `μ[arm][t]` together with the reward family (Bernoulli, or
//! sub-Gaussian with a declared proxy variance). Materializing the matrix —
//! rather than keeping generators lazy — is deliberate: the analysis module
//! random-accesses every window of every round, and desk-scale horizons fit
//! comfortably in memory.
//!
//! Trajectories are immutable once built and freely shareable across
//! threads; drawing realized rewards requires an exclusively-owned
//! [`RngStream`].

use crate::dist;
use crate::rng::RngStream;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Noise attached to sub-Gaussian rewards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Zero-mean Gaussian with variance equal to the proxy variance.
    Gaussian,
    /// Uniform on `[−b, b]` with `b = 2√v`, which has proxy variance `b²/4 = v`
    /// by Hoeffding's lemma. Useful for exercising Gaussian-posterior policies
    /// on rewards that are sub-Gaussian but not Gaussian.
    Bounded,
}

/// Reward distribution family for a whole trajectory.
///
/// Serialized form matches the sidecar metadata documents next to trajectory
/// CSV files: `{"family":"bernoulli"}` or
/// `{"family":"subgaussian","proxy_variance":1.0,"noise":"gaussian"}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RewardFamily {
    Bernoulli,
    Subgaussian { proxy_variance: f64, noise: NoiseKind },
}

// Hand-rolled deserialization: internally tagged enums cannot reject
// unknown keys through the derive, and a silently ignored "proxy_variance"
// on a bernoulli document is exactly the misconfiguration strict parsing
// is meant to catch.
impl<'de> Deserialize<'de> for RewardFamily {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct FamilyDoc {
            family: String,
            #[serde(default)]
            proxy_variance: Option<f64>,
            #[serde(default)]
            noise: Option<NoiseKind>,
        }
        let doc = FamilyDoc::deserialize(deserializer)?;
        match doc.family.as_str() {
            "bernoulli" => {
                if doc.proxy_variance.is_some() || doc.noise.is_some() {
                    return Err(serde::de::Error::custom(
                        "bernoulli family takes no proxy_variance or noise",
                    ));
                }
                Ok(RewardFamily::Bernoulli)
            }
            "subgaussian" => Ok(RewardFamily::Subgaussian {
                proxy_variance: doc.proxy_variance.ok_or_else(|| {
                    serde::de::Error::custom("subgaussian family needs proxy_variance")
                })?,
                noise: doc
                    .noise
                    .ok_or_else(|| serde::de::Error::custom("subgaussian family needs noise"))?,
            }),
            other => Err(serde::de::Error::custom(format!(
                "unknown reward family {other:?}"
            ))),
        }
    }
}

impl RewardFamily {
    /// Proxy variance used when deriving default exploration parameters: the
    /// declared value for sub-Gaussian rewards, `1/4` for Bernoulli (any
    /// `[0, 1]`-bounded variable is `1/4`-sub-Gaussian).
    pub fn proxy_variance(&self) -> f64 {
        match self {
            RewardFamily::Bernoulli => 0.25,
            RewardFamily::Subgaussian { proxy_variance, .. } => *proxy_variance,
        }
    }

    fn validate(&self) -> Result<()> {
        if let RewardFamily::Subgaussian { proxy_variance, .. } = self {
            if !(proxy_variance.is_finite() && *proxy_variance >= 0.0) {
                return Err(Error::parameter(format!(
                    "proxy variance must be finite and >= 0, got {proxy_variance}"
                )));
            }
        }
        Ok(())
    }

    fn mean_in_range(&self, mu: f64) -> bool {
        match self {
            RewardFamily::Bernoulli => (0.0..=1.0).contains(&mu),
            RewardFamily::Subgaussian { .. } => mu.is_finite(),
        }
    }
}

/// Immutable `K × T` matrix of mean rewards plus the reward family.
///
/// Rounds are 1-based; arms 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardTrajectory {
    arms: usize,
    horizon: usize,
    /// Arm-major storage: `means[arm * horizon + (t - 1)]`.
    means: Vec<f64>,
    family: RewardFamily,
}

impl RewardTrajectory {
    /// Build and validate a trajectory from an arm-major mean matrix.
    pub fn new(arms: usize, horizon: usize, means: Vec<f64>, family: RewardFamily) -> Result<Self> {
        if arms < 2 {
            return Err(Error::parameter(format!("need at least 2 arms, got {arms}")));
        }
        if horizon < 1 {
            return Err(Error::parameter("horizon must be at least 1".to_string()));
        }
        if means.len() != arms * horizon {
            return Err(Error::parameter(format!(
                "mean matrix has {} entries, expected {} x {} = {}",
                means.len(),
                arms,
                horizon,
                arms * horizon
            )));
        }
        family.validate()?;
        for (idx, &mu) in means.iter().enumerate() {
            if !family.mean_in_range(mu) {
                let arm = idx / horizon;
                let t = idx % horizon + 1;
                return Err(Error::parameter(format!(
                    "mean {mu} for arm {arm} at round {t} is outside the {family:?} range"
                )));
            }
        }
        Ok(RewardTrajectory {
            arms,
            horizon,
            means,
            family,
        })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    /// Mean reward of `arm` at round `t ∈ 1..=T`.
    ///
    /// # Panics
    /// If `arm` or `t` is out of range.
    #[inline]
    pub fn mean(&self, arm: usize, t: usize) -> f64 {
        assert!(arm < self.arms, "arm {arm} out of range (K = {})", self.arms);
        assert!(
            t >= 1 && t <= self.horizon,
            "round {t} outside 1..={}",
            self.horizon
        );
        self.means[arm * self.horizon + (t - 1)]
    }

    /// Lowest-index maximizer of the round-`t` means. The tie rule is fixed
    /// crate-wide: ties break toward the lower arm index.
    pub fn optimal_arm(&self, t: usize) -> usize {
        let mut best = 0;
        let mut best_mu = self.mean(0, t);
        for arm in 1..self.arms {
            let mu = self.mean(arm, t);
            if mu > best_mu {
                best = arm;
                best_mu = mu;
            }
        }
        best
    }

    /// Mean of the optimal arm at round `t`.
    pub fn optimal_mean(&self, t: usize) -> f64 {
        self.mean(self.optimal_arm(t), t)
    }

    /// Largest one-round mean change over all arms:
    /// `max_{i,t} |μ[i][t+1] − μ[i][t]|`. Zero for a one-round horizon.
    pub fn max_step_drift(&self) -> f64 {
        let mut max = 0.0f64;
        for arm in 0..self.arms {
            let row = &self.means[arm * self.horizon..(arm + 1) * self.horizon];
            for pair in row.windows(2) {
                max = max.max((pair[1] - pair[0]).abs());
            }
        }
        max
    }

    /// Draw one realized reward for pulling `arm` at round `t`.
    ///
    /// Bernoulli rewards are `{0, 1}`; sub-Gaussian rewards are the mean plus
    /// zero-mean noise of the declared kind. A zero proxy variance yields the
    /// mean exactly and consumes no randomness.
    pub fn sample_reward(&self, arm: usize, t: usize, rng: &mut RngStream) -> f64 {
        let mu = self.mean(arm, t);
        match self.family {
            RewardFamily::Bernoulli => {
                dist::sample_bernoulli(mu, rng).expect("validated bernoulli mean")
            }
            RewardFamily::Subgaussian { proxy_variance, noise } => {
                if proxy_variance == 0.0 {
                    mu
                } else {
                    match noise {
                        NoiseKind::Gaussian => {
                            mu + dist::sample_gaussian(0.0, proxy_variance, rng)
                                .expect("validated variance")
                        }
                        NoiseKind::Bounded => {
                            let b = 2.0 * proxy_variance.sqrt();
                            mu + b * (2.0 * rng.next_f64() - 1.0)
                        }
                    }
                }
            }
        }
    }
}

/// Piecewise-constant trajectory: means jump at each boundary round and stay
/// flat in between.
///
/// `boundaries[p]` is the first round of phase `p + 1`; phase 0 starts at
/// round 1. One mean vector of length `K` per phase.
pub fn make_piecewise_constant(
    horizon: usize,
    boundaries: &[usize],
    phase_means: &[Vec<f64>],
    family: RewardFamily,
) -> Result<RewardTrajectory> {
    if phase_means.is_empty() {
        return Err(Error::parameter("need at least one phase mean vector".to_string()));
    }
    if phase_means.len() != boundaries.len() + 1 {
        return Err(Error::parameter(format!(
            "{} boundaries require {} phase mean vectors, got {}",
            boundaries.len(),
            boundaries.len() + 1,
            phase_means.len()
        )));
    }
    let arms = phase_means[0].len();
    for (p, v) in phase_means.iter().enumerate() {
        if v.len() != arms {
            return Err(Error::parameter(format!(
                "phase {p} mean vector has length {}, expected {arms}",
                v.len()
            )));
        }
    }
    for &b in boundaries {
        if b < 1 || b > horizon {
            return Err(Error::parameter(format!(
                "boundary {b} outside 1..={horizon}"
            )));
        }
    }
    if boundaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::parameter("boundaries must be strictly ascending".to_string()));
    }

    let mut means = vec![0.0; arms * horizon];
    let mut starts = Vec::with_capacity(boundaries.len() + 2);
    starts.push(1);
    starts.extend_from_slice(boundaries);
    starts.push(horizon + 1);
    for p in 0..phase_means.len() {
        let lo = starts[p];
        let hi = starts[p + 1];
        for arm in 0..arms {
            for t in lo..hi {
                means[arm * horizon + (t - 1)] = phase_means[p][arm];
            }
        }
    }
    RewardTrajectory::new(arms, horizon, means, family)
}

/// Two anti-phase sinusoids that trade places every half period:
/// `μ[0][t] = c + a·sin(2π(t − t₀)/period)`, `μ[1][t]` its mirror image.
///
/// A `time_offset` of 0.5 puts the crossings between rounds, so no round is
/// an exact tie.
pub fn make_crossing_sinusoid(
    horizon: usize,
    center: f64,
    amplitude: f64,
    period: f64,
    time_offset: f64,
    family: RewardFamily,
) -> Result<RewardTrajectory> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::parameter(format!("period must be positive, got {period}")));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::parameter(format!(
            "amplitude must be non-negative, got {amplitude}"
        )));
    }
    let arms = 2;
    let mut means = vec![0.0; arms * horizon];
    for t in 1..=horizon {
        let phase = 2.0 * std::f64::consts::PI * (t as f64 - time_offset) / period;
        let s = amplitude * phase.sin();
        means[t - 1] = center + s;
        means[horizon + t - 1] = center - s;
    }
    RewardTrajectory::new(arms, horizon, means, family)
}

/// Shape of a slowly drifting (Lipschitz) trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothShape {
    /// Arm 0 ramps up at half the drift budget, arm 1 ramps down at the
    /// opposite slope, extra arms sit on constant levels further below; the
    /// top pair starts `base_gap` apart and only diverges. Levels are clamped
    /// to `[0, 1]` for Bernoulli rewards (clamping never increases a step).
    DivergingRamps { base_gap: f64 },
    /// Two anti-phase sinusoids (two arms only); the per-round drift
    /// `2πa/period` must fit under the declared budget.
    AntiphaseSinusoid {
        amplitude: f64,
        period: f64,
        #[serde(default)]
        time_offset: f64,
    },
}

/// Build a trajectory whose per-round mean drift never exceeds `drift_bound`,
/// and return it together with the realized per-step drift maximum (which
/// the construction guarantees to be `<= drift_bound`).
pub fn make_lipschitz_smooth(
    arms: usize,
    horizon: usize,
    drift_bound: f64,
    shape: SmoothShape,
    family: RewardFamily,
) -> Result<(RewardTrajectory, f64)> {
    if !(drift_bound >= 0.0 && drift_bound.is_finite()) {
        return Err(Error::parameter(format!(
            "drift bound must be non-negative, got {drift_bound}"
        )));
    }
    let bernoulli = matches!(family, RewardFamily::Bernoulli);
    let traj = match shape {
        SmoothShape::DivergingRamps { base_gap } => {
            if !(base_gap > 0.0 && base_gap.is_finite()) {
                return Err(Error::parameter(format!(
                    "base gap must be positive, got {base_gap}"
                )));
            }
            let center = 0.5;
            let top = center + base_gap / 2.0;
            let ladder_bottom = center - base_gap / 2.0 - base_gap * (arms.saturating_sub(2)) as f64;
            if bernoulli && (top > 1.0 || ladder_bottom < 0.0) {
                return Err(Error::parameter(format!(
                    "requested gap exceeds the Bernoulli range: levels span [{ladder_bottom}, {top}]"
                )));
            }
            let slope = drift_bound / 2.0;
            let mut means = vec![0.0; arms * horizon];
            for t in 1..=horizon {
                let dt = (t - 1) as f64;
                for arm in 0..arms {
                    let raw = match arm {
                        0 => top + slope * dt,
                        1 => center - base_gap / 2.0 - slope * dt,
                        i => center - base_gap / 2.0 - base_gap * (i - 1) as f64,
                    };
                    means[arm * horizon + (t - 1)] =
                        if bernoulli { raw.clamp(0.0, 1.0) } else { raw };
                }
            }
            RewardTrajectory::new(arms, horizon, means, family)?
        }
        SmoothShape::AntiphaseSinusoid {
            amplitude,
            period,
            time_offset,
        } => {
            if arms != 2 {
                return Err(Error::parameter(format!(
                    "the sinusoid shape is two-armed, got K = {arms}"
                )));
            }
            if !(period > 0.0 && period.is_finite()) {
                return Err(Error::parameter(format!("period must be positive, got {period}")));
            }
            let step = 2.0 * std::f64::consts::PI * amplitude / period;
            if step > drift_bound {
                return Err(Error::parameter(format!(
                    "sinusoid per-round drift {step} exceeds the declared bound {drift_bound}"
                )));
            }
            make_crossing_sinusoid(horizon, 0.5, amplitude, period, time_offset, family)?
        }
    };
    let realized = traj.max_step_drift();
    debug_assert!(realized <= drift_bound + 1e-12);
    Ok((traj, realized))
}

/// Declarative environment description, as embedded in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    PiecewiseConstant {
        boundaries: Vec<usize>,
        phase_means: Vec<Vec<f64>>,
        family: RewardFamily,
    },
    CrossingSinusoid {
        center: f64,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        time_offset: f64,
        family: RewardFamily,
    },
    LipschitzSmooth {
        arms: usize,
        drift: f64,
        shape: SmoothShape,
        family: RewardFamily,
    },
    /// Trajectory CSV on disk, with its metadata sidecar next to it.
    File { path: String },
}

impl EnvironmentSpec {
    /// Materialize the trajectory for the given horizon. File-backed specs
    /// must match the horizon exactly.
    pub fn build(&self, horizon: usize) -> Result<RewardTrajectory> {
        match self {
            EnvironmentSpec::PiecewiseConstant {
                boundaries,
                phase_means,
                family,
            } => make_piecewise_constant(horizon, boundaries, phase_means, *family),
            EnvironmentSpec::CrossingSinusoid {
                center,
                amplitude,
                period,
                time_offset,
                family,
            } => make_crossing_sinusoid(horizon, *center, *amplitude, *period, *time_offset, *family),
            EnvironmentSpec::LipschitzSmooth {
                arms,
                drift,
                shape,
                family,
            } => Ok(make_lipschitz_smooth(*arms, horizon, *drift, *shape, *family)?.0),
            EnvironmentSpec::File { path } => {
                let traj = load_trajectory(Path::new(path))?;
                if traj.horizon() != horizon {
                    return Err(Error::config(format!(
                        "trajectory file {path} has horizon {}, config says {horizon}",
                        traj.horizon()
                    )));
                }
                Ok(traj)
            }
        }
    }
}

/// Path of the metadata sidecar for a trajectory CSV: the same path with the
/// extension replaced by `meta.json` (`env.csv` -> `env.meta.json`).
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Format a real with 17 significant digits, enough to round-trip any f64.
pub(crate) fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a trajectory as `t,mu_1,...,mu_K` CSV (LF line endings) plus the
/// family sidecar document.
pub fn write_trajectory(traj: &RewardTrajectory, csv: &Path) -> Result<()> {
    let mut out = String::new();
    out.push('t');
    for arm in 1..=traj.arms() {
        let _ = write!(out, ",mu_{arm}");
    }
    out.push('\n');
    for t in 1..=traj.horizon() {
        let _ = write!(out, "{t}");
        for arm in 0..traj.arms() {
            let _ = write!(out, ",{}", fmt_g17(traj.mean(arm, t)));
        }
        out.push('\n');
    }
    std::fs::write(csv, out)?;
    let meta = serde_json::to_string_pretty(&traj.family()).expect("family serializes");
    std::fs::write(sidecar_path(csv), meta + "\n")?;
    Ok(())
}

/// Load a trajectory CSV and its metadata sidecar.
pub fn load_trajectory(csv: &Path) -> Result<RewardTrajectory> {
    let text = std::fs::read_to_string(csv)
        .map_err(|e| Error::format(format!("cannot read trajectory file {}: {e}", csv.display())))?;
    let meta_path = sidecar_path(csv);
    let meta = std::fs::read_to_string(&meta_path).map_err(|e| {
        Error::format(format!(
            "cannot read trajectory metadata {}: {e}",
            meta_path.display()
        ))
    })?;
    let family: RewardFamily = serde_json::from_str(&meta).map_err(|e| {
        Error::format(format!("bad trajectory metadata {}: {e}", meta_path.display()))
    })?;

    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(format!("{}: empty trajectory file", csv.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "t" {
        return Err(Error::format(format!(
            "{}: header must be t,mu_1,...,mu_K",
            csv.display()
        )));
    }
    let arms = cols.len() - 1;
    for (i, col) in cols[1..].iter().enumerate() {
        let expected = format!("mu_{}", i + 1);
        if *col != expected {
            return Err(Error::format(format!(
                "{}: expected column {expected}, found {col}",
                csv.display()
            )));
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != arms + 1 {
            return Err(Error::format(format!(
                "{}: line {} has {} fields, expected {}",
                csv.display(),
                lineno + 2,
                fields.len(),
                arms + 1
            )));
        }
        let t: usize = fields[0].parse().map_err(|_| {
            Error::format(format!(
                "{}: line {}: bad round index {}",
                csv.display(),
                lineno + 2,
                fields[0]
            ))
        })?;
        if t != rows.len() + 1 {
            return Err(Error::format(format!(
                "{}: line {}: rounds must be contiguous from 1, found {t}",
                csv.display(),
                lineno + 2
            )));
        }
        let mut mus = Vec::with_capacity(arms);
        for f in &fields[1..] {
            let mu: f64 = f.parse().map_err(|_| {
                Error::format(format!(
                    "{}: line {}: bad mean value {f}",
                    csv.display(),
                    lineno + 2
                ))
            })?;
            mus.push(mu);
        }
        rows.push(mus);
    }
    let horizon = rows.len();
    let mut means = vec![0.0; arms * horizon];
    for (ti, row) in rows.iter().enumerate() {
        for (arm, &mu) in row.iter().enumerate() {
            means[arm * horizon + ti] = mu;
        }
    }
    RewardTrajectory::new(arms, horizon, means, family)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern() -> RewardFamily {
        RewardFamily::Bernoulli
    }

    #[test]
    fn piecewise_swap_means() {
        let traj = make_piecewise_constant(
            100,
            &[51],
            &[vec![0.9, 0.1], vec![0.1, 0.9]],
            bern(),
        )
        .unwrap();
        assert_eq!(traj.mean(0, 50), 0.9);
        assert_eq!(traj.mean(0, 51), 0.1);
        assert_eq!(traj.mean(1, 51), 0.9);
        assert_eq!(traj.optimal_arm(50), 0);
        assert_eq!(traj.optimal_arm(51), 1);
    }

    #[test]
    fn piecewise_no_boundaries_is_stationary() {
        let traj = make_piecewise_constant(40, &[], &[vec![0.9, 0.5]], bern()).unwrap();
        for t in 1..=40 {
            assert_eq!(traj.mean(0, t), 0.9);
            assert_eq!(traj.optimal_arm(t), 0);
        }
        assert_eq!(traj.max_step_drift(), 0.0);
    }

    #[test]
    fn piecewise_rejects_bad_input() {
        assert!(make_piecewise_constant(10, &[5], &[vec![0.5, 0.5]], bern()).is_err());
        assert!(make_piecewise_constant(10, &[11], &[vec![0.1, 0.2], vec![0.3, 0.4]], bern())
            .is_err());
        assert!(make_piecewise_constant(10, &[5, 5], &vec![vec![0.1, 0.2]; 3], bern()).is_err());
        assert!(make_piecewise_constant(10, &[5], &[vec![0.1, 0.2], vec![0.3]], bern()).is_err());
        assert!(make_piecewise_constant(10, &[5], &[vec![0.1, 1.2], vec![0.3, 0.4]], bern())
            .is_err());
    }

    #[test]
    fn sinusoid_crossings_and_tie_breaks() {
        let traj = make_crossing_sinusoid(3000, 0.5, 0.4, 2000.0, 0.0, bern()).unwrap();
        // Root scan of the means difference: zero exactly at multiples of a
        // half period.
        let mut roots = Vec::new();
        for t in 1..=3000 {
            let diff = traj.mean(0, t) - traj.mean(1, t);
            if diff.abs() < 1e-9 {
                roots.push(t);
            }
        }
        assert_eq!(roots, vec![1000, 2000, 3000]);
        // Exact tie resolves to the lowest index.
        assert_eq!(traj.optimal_arm(1000), 0);
    }

    #[test]
    fn sinusoid_zero_amplitude_is_flat_tie() {
        let traj = make_crossing_sinusoid(100, 0.5, 0.0, 50.0, 0.0, bern()).unwrap();
        for t in 1..=100 {
            assert_eq!(traj.mean(0, t), 0.5);
            assert_eq!(traj.mean(1, t), 0.5);
            assert_eq!(traj.optimal_arm(t), 0);
        }
    }

    #[test]
    fn sinusoid_drift_respects_slope_bound() {
        let traj = make_crossing_sinusoid(3000, 0.5, 0.4, 2000.0, 0.0, bern()).unwrap();
        let bound = 2.0 * std::f64::consts::PI * 0.4 / 2000.0;
        assert!(traj.max_step_drift() <= bound + 1e-12);
        assert!(traj.max_step_drift() > 0.9 * bound);
    }

    #[test]
    fn sinusoid_range_violation_is_rejected() {
        assert!(make_crossing_sinusoid(100, 0.8, 0.4, 50.0, 0.0, bern()).is_err());
        let subg = RewardFamily::Subgaussian {
            proxy_variance: 1.0,
            noise: NoiseKind::Gaussian,
        };
        assert!(make_crossing_sinusoid(100, 0.8, 0.4, 50.0, 0.0, subg).is_ok());
    }

    #[test]
    fn smooth_zero_drift_is_stationary() {
        let (traj, realized) = make_lipschitz_smooth(
            2,
            200,
            0.0,
            SmoothShape::DivergingRamps { base_gap: 0.3 },
            bern(),
        )
        .unwrap();
        assert_eq!(realized, 0.0);
        assert_eq!(traj.max_step_drift(), 0.0);
    }

    #[test]
    fn smooth_ramps_stay_within_budget() {
        let sigma = 1e-3;
        let (traj, realized) = make_lipschitz_smooth(
            3,
            5000,
            sigma,
            SmoothShape::DivergingRamps { base_gap: 0.2 },
            bern(),
        )
        .unwrap();
        assert!(realized <= sigma);
        assert!(traj.max_step_drift() <= sigma);
        // Top arm rises, second falls, third constant.
        assert!(traj.mean(0, 5000) >= traj.mean(0, 1));
        assert!(traj.mean(1, 5000) <= traj.mean(1, 1));
        assert_eq!(traj.mean(2, 1), traj.mean(2, 5000));
    }

    #[test]
    fn smooth_sinusoid_audits_its_slope() {
        let sigma = 2.0 * std::f64::consts::PI * 0.4 / 2000.0;
        let (_, realized) = make_lipschitz_smooth(
            2,
            3000,
            sigma * 1.001,
            SmoothShape::AntiphaseSinusoid {
                amplitude: 0.4,
                period: 2000.0,
                time_offset: 0.5,
            },
            bern(),
        )
        .unwrap();
        assert!((realized - sigma).abs() / sigma < 0.01);
        // Requested drift above the declared bound is infeasible.
        assert!(make_lipschitz_smooth(
            2,
            3000,
            sigma * 0.5,
            SmoothShape::AntiphaseSinusoid {
                amplitude: 0.4,
                period: 2000.0,
                time_offset: 0.5,
            },
            bern(),
        )
        .is_err());
    }

    #[test]
    fn smooth_infeasible_gap_is_rejected() {
        assert!(make_lipschitz_smooth(
            4,
            100,
            1e-3,
            SmoothShape::DivergingRamps { base_gap: 0.4 },
            bern(),
        )
        .is_err());
    }

    #[test]
    fn rewards_match_family() {
        let traj = make_piecewise_constant(10, &[], &[vec![1.0, 0.3]], bern()).unwrap();
        let mut rng = RngStream::new(5);
        for t in 1..=10 {
            assert_eq!(traj.sample_reward(0, t, &mut rng), 1.0);
        }

        let exact = RewardTrajectory::new(
            2,
            4,
            vec![0.7; 8],
            RewardFamily::Subgaussian {
                proxy_variance: 0.0,
                noise: NoiseKind::Gaussian,
            },
        )
        .unwrap();
        assert_eq!(exact.sample_reward(1, 2, &mut rng), 0.7);
    }

    #[test]
    fn bernoulli_sample_mean_converges() {
        let traj = make_piecewise_constant(10, &[], &[vec![0.3, 0.5]], bern()).unwrap();
        let mut rng = RngStream::new(77);
        let n = 100_000;
        let mean = (0..n).map(|_| traj.sample_reward(0, 3, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.3).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn bounded_noise_stays_in_band_with_declared_proxy_variance() {
        let pv = 0.09;
        let traj = RewardTrajectory::new(
            2,
            4,
            vec![1.0; 8],
            RewardFamily::Subgaussian {
                proxy_variance: pv,
                noise: NoiseKind::Bounded,
            },
        )
        .unwrap();
        let b = 2.0 * pv.sqrt();
        let mut rng = RngStream::new(9);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = traj.sample_reward(0, 1, &mut rng);
            assert!((x - 1.0).abs() <= b + 1e-12);
            sum += x;
        }
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn gaussian_noise_sample_mean_converges() {
        let pv = 0.49;
        let traj = RewardTrajectory::new(
            2,
            4,
            vec![-1.3; 8],
            RewardFamily::Subgaussian {
                proxy_variance: pv,
                noise: NoiseKind::Gaussian,
            },
        )
        .unwrap();
        let mut rng = RngStream::new(10);
        let n = 100_000;
        let mean = (0..n).map(|_| traj.sample_reward(1, 2, &mut rng)).sum::<f64>() / n as f64;
        // Standard error is sqrt(0.49 / 1e5) ~ 0.0022; allow 4 of them.
        assert!((mean + 1.3).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("env.csv");

        let traj = make_crossing_sinusoid(64, 0.5, 0.3, 40.0, 0.5, bern()).unwrap();
        write_trajectory(&traj, &csv).unwrap();
        assert!(sidecar_path(&csv).ends_with("env.meta.json"));

        let loaded = load_trajectory(&csv).unwrap();
        assert_eq!(loaded, traj);

        let spec = EnvironmentSpec::File {
            path: csv.to_string_lossy().into_owned(),
        };
        assert_eq!(spec.build(64).unwrap(), traj);
        assert!(spec.build(63).is_err());
    }

    #[test]
    fn loader_names_missing_paths() {
        let err = load_trajectory(Path::new("/nonexistent/env.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("/nonexistent/env.csv"), "{msg}");
    }

    #[test]
    fn loader_rejects_malformed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("bad.csv");
        std::fs::write(&csv, "t,mu_1,mu_2\n1,0.5,0.5\n3,0.5,0.5\n").unwrap();
        std::fs::write(sidecar_path(&csv), "{\"family\":\"bernoulli\"}\n").unwrap();
        let err = load_trajectory(&csv).unwrap_err().to_string();
        assert!(err.contains("contiguous"), "{err}");

        std::fs::write(&csv, "t,mu_2,mu_1\n1,0.5,0.5\n").unwrap();
        let err = load_trajectory(&csv).unwrap_err().to_string();
        assert!(err.contains("mu_1"), "{err}");
    }

    #[test]
    fn family_metadata_is_strict() {
        let good = "{\"family\":\"subgaussian\",\"proxy_variance\":1.0,\"noise\":\"bounded\"}";
        let parsed: RewardFamily = serde_json::from_str(good).unwrap();
        assert_eq!(parsed.proxy_variance(), 1.0);
        let bad = "{\"family\":\"bernoulli\",\"extra\":1}";
        assert!(serde_json::from_str::<RewardFamily>(bad).is_err());
    }
}
