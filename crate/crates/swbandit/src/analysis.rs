//! Exact structural analysis of reward trajectories.
//!
//! Everything here is a pure function of an immutable [`RewardTrajectory`],
//! computed by definition-faithful brute force — the definitions are the
//! ground truth, speed is secondary. Where an accelerated path exists
//! ([`ambiguous_rounds_fast`]) it must be, and is tested to be, equivalent
//! to the brute-force scan.
//!
//! The quantities:
//!
//! - **breakpoints** — rounds where the identity of the best arm changes, or
//!   where some other arm's mean reaches the best arm's previous mean;
//!   their count `Υ_T` excludes the horizon's final round by convention;
//! - **phases** — maximal breakpoint-free intervals, partitioning `1..=T`;
//!   each phase's **core** drops its first `τ` rounds, so that every window
//!   of a core round lies inside a single phase;
//! - **ambiguous rounds** — rounds `t` where some suboptimal arm's maximum
//!   mean over the trailing window reaches the optimal arm's minimum, i.e.
//!   where a window realization can rank the arms wrongly no matter how
//!   many samples it holds;
//! - **window gap** — over unambiguous rounds, the worst-case separation
//!   between the optimal arm's window minimum and the best suboptimal
//!   window maximum; the margin that drives how fast windowed posteriors
//!   can commit;
//! - **near-tie rounds** — rounds whose previous-round means put some pair
//!   of arms within `Δ'` of each other, the smooth-drift analogue of the
//!   ambiguous set;
//! - **bound shapes** — closed-form growth shapes for expected pull counts
//!   of suboptimal arms, with fittable leading constants.

use crate::policy::gamma_cap;
use crate::reward::{RewardFamily, RewardTrajectory};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Boolean mask over rounds `1..=T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundMask {
    horizon: usize,
    bits: Vec<bool>,
}

impl RoundMask {
    pub fn new(horizon: usize) -> Self {
        RoundMask {
            horizon,
            bits: vec![false; horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn set(&mut self, t: usize) {
        assert!(t >= 1 && t <= self.horizon, "round {t} out of range");
        self.bits[t - 1] = true;
    }

    pub fn get(&self, t: usize) -> bool {
        assert!(t >= 1 && t <= self.horizon, "round {t} out of range");
        self.bits[t - 1]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn rounds(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i + 1))
    }

    pub fn is_subset_of(&self, other: &RoundMask) -> bool {
        assert_eq!(self.horizon, other.horizon);
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(&a, &b)| !a || b)
    }

    /// Run-length encoding: maximal intervals of flagged rounds, inclusive.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for t in 1..=self.horizon {
            match (self.bits[t - 1], start) {
                (true, None) => start = Some(t),
                (false, Some(s)) => {
                    out.push((s, t - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.horizon));
        }
        out
    }

    pub fn from_intervals(horizon: usize, intervals: &[(usize, usize)]) -> Self {
        let mut mask = RoundMask::new(horizon);
        for &(lo, hi) in intervals {
            for t in lo..=hi {
                mask.set(t);
            }
        }
        mask
    }
}

/// Flagged-set summary as serialized in reports: size plus run-length
/// encoded intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSummary {
    pub count: usize,
    pub intervals: Vec<(usize, usize)>,
}

impl From<&RoundMask> for MaskSummary {
    fn from(mask: &RoundMask) -> Self {
        MaskSummary {
            count: mask.count(),
            intervals: mask.intervals(),
        }
    }
}

/// Which round's best arm anchors the overtake clause of the breakpoint
/// definition. The two readings provably flag the same rounds — they can
/// only differ when the best arm changed, and then the identity clause has
/// already fired — but both are kept so reports can state that they agree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OvertakeReference {
    /// Compare against the *current* best arm's previous-round mean.
    #[default]
    NewBest,
    /// Compare against the *previous* round's best arm's mean.
    OldBest,
}

/// Breakpoint scan result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Breakpoints {
    horizon: usize,
    /// Rounds where the definition fires, ascending; may include `T`.
    pub rounds: Vec<usize>,
    /// `Υ_T`: breakpoints excluding any at the final round.
    pub count: usize,
}

impl Breakpoints {
    /// The breakpoint rounds with the final round appended by convention
    /// (deduplicated), as listed in reports.
    pub fn rounds_with_terminal(&self) -> Vec<usize> {
        let mut rounds = self.rounds.clone();
        if rounds.last() != Some(&self.horizon) {
            rounds.push(self.horizon);
        }
        rounds
    }
}

/// Scan for breakpoints: a round `t >= 2` is a breakpoint when the best
/// arm's identity changes, or when some arm other than the previous best
/// reaches the reference best arm's previous-round mean.
pub fn breakpoints(traj: &RewardTrajectory, overtake: OvertakeReference) -> Breakpoints {
    let horizon = traj.horizon();
    let mut rounds = Vec::new();
    for t in 2..=horizon {
        let prev_best = traj.optimal_arm(t - 1);
        let cur_best = traj.optimal_arm(t);
        let mut hit = cur_best != prev_best;
        if !hit {
            let reference = match overtake {
                OvertakeReference::NewBest => cur_best,
                OvertakeReference::OldBest => prev_best,
            };
            let threshold = traj.mean(reference, t - 1);
            hit = (0..traj.arms())
                .any(|arm| arm != prev_best && traj.mean(arm, t) >= threshold);
        }
        if hit {
            rounds.push(t);
        }
    }
    let count = rounds.iter().filter(|&&r| r < horizon).count();
    Breakpoints {
        horizon,
        rounds,
        count,
    }
}

/// Phases: maximal intervals between breakpoints, partitioning `1..=T`.
/// Inclusive bounds.
pub fn phases(bps: &Breakpoints) -> Vec<(usize, usize)> {
    let mut starts = vec![1];
    starts.extend(bps.rounds.iter().copied().filter(|&r| r > 1));
    let mut out = Vec::with_capacity(starts.len());
    for (i, &lo) in starts.iter().enumerate() {
        let hi = starts.get(i + 1).map_or(bps.horizon, |&next| next - 1);
        out.push((lo, hi));
    }
    out
}

/// Phase cores: the first phase whole, later phases with their first `τ`
/// rounds dropped (`None` when `τ` spans the phase). Every window of a core
/// round samples a single phase.
pub fn phase_cores(phases: &[(usize, usize)], tau: usize) -> Vec<Option<(usize, usize)>> {
    phases
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            if i == 0 {
                Some((lo, hi))
            } else {
                let core_lo = lo + tau;
                (core_lo <= hi).then_some((core_lo, hi))
            }
        })
        .collect()
}

#[inline]
fn window_bounds(t: usize, tau: usize) -> (usize, usize) {
    (t.saturating_sub(tau).max(1), t - 1)
}

fn window_min(traj: &RewardTrajectory, arm: usize, lo: usize, hi: usize) -> f64 {
    (lo..=hi).fold(f64::INFINITY, |m, t| m.min(traj.mean(arm, t)))
}

fn window_max(traj: &RewardTrajectory, arm: usize, lo: usize, hi: usize) -> f64 {
    (lo..=hi).fold(f64::NEG_INFINITY, |m, t| m.max(traj.mean(arm, t)))
}

/// Ambiguous rounds for window length `τ`: rounds `t >= 2` where some
/// suboptimal arm's window maximum reaches the optimal arm's window minimum
/// over `max(1, t−τ) ..= t−1`. Round 1 (empty window) is excluded.
///
/// Definition-faithful double scan, `O(T·τ·K)`.
pub fn ambiguous_rounds(traj: &RewardTrajectory, tau: usize) -> RoundMask {
    assert!(tau >= 1, "window length must be at least 1");
    let mut mask = RoundMask::new(traj.horizon());
    for t in 2..=traj.horizon() {
        let (lo, hi) = window_bounds(t, tau);
        let best = traj.optimal_arm(t);
        let best_min = window_min(traj, best, lo, hi);
        let ambiguous = (0..traj.arms())
            .any(|arm| arm != best && best_min <= window_max(traj, arm, lo, hi));
        if ambiguous {
            mask.set(t);
        }
    }
    mask
}

/// Monotone-deque accelerated version of [`ambiguous_rounds`], `O(T·K)`.
/// Kept strictly equivalent to the brute-force scan (tested against it).
pub fn ambiguous_rounds_fast(traj: &RewardTrajectory, tau: usize) -> RoundMask {
    assert!(tau >= 1, "window length must be at least 1");
    let horizon = traj.horizon();
    let arms = traj.arms();
    let mut mask = RoundMask::new(horizon);
    // Per-arm deques of (round, value): mins ascending, maxes descending.
    let mut mins: Vec<std::collections::VecDeque<(usize, f64)>> = vec![Default::default(); arms];
    let mut maxes: Vec<std::collections::VecDeque<(usize, f64)>> = vec![Default::default(); arms];
    for t in 2..=horizon {
        let (lo, hi) = window_bounds(t, tau);
        for arm in 0..arms {
            let v = traj.mean(arm, hi);
            let min_q = &mut mins[arm];
            while min_q.back().is_some_and(|&(_, b)| b >= v) {
                min_q.pop_back();
            }
            min_q.push_back((hi, v));
            while min_q.front().is_some_and(|&(r, _)| r < lo) {
                min_q.pop_front();
            }
            let max_q = &mut maxes[arm];
            while max_q.back().is_some_and(|&(_, b)| b <= v) {
                max_q.pop_back();
            }
            max_q.push_back((hi, v));
            while max_q.front().is_some_and(|&(r, _)| r < lo) {
                max_q.pop_front();
            }
        }
        let best = traj.optimal_arm(t);
        let best_min = mins[best].front().expect("nonempty window").1;
        let ambiguous = (0..arms)
            .any(|arm| arm != best && best_min <= maxes[arm].front().expect("nonempty").1);
        if ambiguous {
            mask.set(t);
        }
    }
    mask
}

/// Worst-case window separation over the rounds *not* in `excluded`:
/// `min over t ∉ excluded, i ≠ best(t)` of (optimal window minimum − arm
/// `i`'s window maximum). `None` when no round qualifies.
///
/// `excluded` must cover every ambiguous round (it is "ambiguous or worse");
/// anything smaller would let a negative separation into the minimum, which
/// is rejected as a parameter error.
pub fn window_gap_over(
    traj: &RewardTrajectory,
    tau: usize,
    excluded: &RoundMask,
) -> Result<Option<f64>> {
    assert_eq!(excluded.horizon(), traj.horizon(), "mask horizon mismatch");
    let ambiguous = ambiguous_rounds(traj, tau);
    if !ambiguous.is_subset_of(excluded) {
        return Err(Error::parameter(
            "excluded set must contain every ambiguous round".to_string(),
        ));
    }
    let mut gap: Option<f64> = None;
    for t in 2..=traj.horizon() {
        if excluded.get(t) {
            continue;
        }
        let (lo, hi) = window_bounds(t, tau);
        let best = traj.optimal_arm(t);
        let best_min = window_min(traj, best, lo, hi);
        for arm in 0..traj.arms() {
            if arm == best {
                continue;
            }
            let d = best_min - window_max(traj, arm, lo, hi);
            gap = Some(gap.map_or(d, |g: f64| g.min(d)));
        }
    }
    Ok(gap)
}

/// [`window_gap_over`] with the minimal exclusion, the ambiguous set itself.
/// Strictly positive whenever defined.
pub fn window_gap(traj: &RewardTrajectory, tau: usize) -> Option<f64> {
    window_gap_over(traj, tau, &ambiguous_rounds(traj, tau)).expect("minimal mask is a superset")
}

/// Near-tie rounds for threshold `Δ' > 0`: rounds `t >= 2` where some pair
/// of arms has `|μ_i − μ_j| < Δ'` at round `t − 1`.
pub fn near_tie_rounds(traj: &RewardTrajectory, delta_prime: f64) -> Result<RoundMask> {
    if !(delta_prime > 0.0 && delta_prime.is_finite()) {
        return Err(Error::parameter(format!(
            "near-tie threshold must be positive, got {delta_prime}"
        )));
    }
    let mut mask = RoundMask::new(traj.horizon());
    for t in 2..=traj.horizon() {
        let near = (0..traj.arms()).any(|i| {
            (i + 1..traj.arms())
                .any(|j| (traj.mean(i, t - 1) - traj.mean(j, t - 1)).abs() < delta_prime)
        });
        if near {
            mask.set(t);
        }
    }
    Ok(mask)
}

/// Size cap check `count <= factor · T^exponent` for the near-tie set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapCheck {
    pub factor: f64,
    pub exponent: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Near-tie analysis: the flagged set, the drift feasibility verdict
/// `2·σ·τ < Δ'` (verdict, not error — an infeasible pairing is reported),
/// and an optional size-cap check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearTieReport {
    pub delta_prime: f64,
    pub tau: usize,
    /// Audited per-round drift bound of the trajectory.
    pub drift: f64,
    /// Whether `2·drift·τ < Δ'`.
    pub feasible: bool,
    pub rounds: MaskSummary,
    pub cap: Option<CapCheck>,
}

pub fn near_tie_report(
    traj: &RewardTrajectory,
    delta_prime: f64,
    tau: usize,
    cap: Option<(f64, f64)>,
) -> Result<NearTieReport> {
    let mask = near_tie_rounds(traj, delta_prime)?;
    let drift = traj.max_step_drift();
    let count = mask.count();
    let cap = cap.map(|(factor, exponent)| {
        let bound = factor * (traj.horizon() as f64).powf(exponent);
        CapCheck {
            factor,
            exponent,
            bound,
            holds: count as f64 <= bound,
        }
    });
    Ok(NearTieReport {
        delta_prime,
        tau,
        drift,
        feasible: (2.0 * drift * tau as f64) < delta_prime,
        rounds: MaskSummary::from(&mask),
        cap,
    })
}

/// A phase where separation fails, with the witnessing round and arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationFailure {
    /// Zero-based phase index.
    pub phase: usize,
    pub round: usize,
    pub arm: usize,
}

/// Verdict of the per-phase separation check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSeparation {
    pub holds: bool,
    pub failures: Vec<SeparationFailure>,
}

/// Check that within every phase the optimal arm's lowest mean stays
/// strictly above every other arm's highest mean — the property that makes
/// a trajectory "abruptly changing" rather than merely non-stationary.
pub fn check_phase_separation(
    traj: &RewardTrajectory,
    phases: &[(usize, usize)],
) -> PhaseSeparation {
    let mut failures = Vec::new();
    for (idx, &(lo, hi)) in phases.iter().enumerate() {
        let mut opt_min = f64::INFINITY;
        let mut sub_max = f64::NEG_INFINITY;
        let mut witness = (lo, 0);
        for t in lo..=hi {
            let best = traj.optimal_arm(t);
            opt_min = opt_min.min(traj.mean(best, t));
            for arm in 0..traj.arms() {
                if arm != best {
                    let mu = traj.mean(arm, t);
                    if mu > sub_max {
                        sub_max = mu;
                        witness = (t, arm);
                    }
                }
            }
        }
        if opt_min <= sub_max {
            failures.push(SeparationFailure {
                phase: idx,
                round: witness.0,
                arm: witness.1,
            });
        }
    }
    PhaseSeparation {
        holds: failures.is_empty(),
        failures,
    }
}

/// Both sides of the sparse-window counting bound.
///
/// For a round set `A` and `a(n) = |A ∩ [n−τ, n−1]|`, the number of rounds
/// `n ∈ A` whose trailing window holds at most `s` members of `A` is at
/// most `s·⌈T/τ⌉`. Both sides are reported as computed; the bound is a
/// statement about `s >= 1` (the first member of any isolated cluster has
/// an empty trailing window, so `s = 0` fails for any nonempty set).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyBound {
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

pub fn window_occupancy_bound(member: &RoundMask, tau: usize, s: u64) -> OccupancyBound {
    assert!(tau >= 1, "window length must be at least 1");
    let horizon = member.horizon();
    let mut lhs = 0u64;
    for n in 1..=horizon {
        if !member.get(n) {
            continue;
        }
        let lo = n.saturating_sub(tau).max(1);
        let occupancy = (lo..n).filter(|&t| member.get(t)).count() as u64;
        if occupancy <= s {
            lhs += 1;
        }
    }
    let rhs = s * (horizon as u64).div_ceil(tau as u64);
    OccupancyBound {
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

/// Growth shape of the expected pull count of a suboptimal arm, by setting.
/// `gap` is the window gap for the general/abrupt shapes; the smooth shapes
/// take the near-tie threshold and drift and use `Δ' − 2στ` internally.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum BoundShape {
    GeneralBernoulli { ambiguous_count: f64, gap: f64 },
    GeneralGaussian { ambiguous_count: f64, gap: f64, gamma: f64 },
    AbruptBernoulli { breakpoints: f64, gap: f64 },
    AbruptGaussian { breakpoints: f64, gap: f64, gamma: f64 },
    SmoothBernoulli { beta_exponent: f64, base_gap: f64, drift: f64 },
    SmoothGaussian { beta_exponent: f64, base_gap: f64, drift: f64, gamma: f64 },
}

/// Horizon, window and leading constants for a bound-shape evaluation.
/// Constants default to 1 and may be least-squares fitted to measurements;
/// fitted values are descriptive, never asserted as theory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub horizon: f64,
    pub window: f64,
    pub constants: [f64; 3],
}

impl BoundInputs {
    pub fn new(horizon: f64, window: f64) -> Self {
        BoundInputs {
            horizon,
            window,
            constants: [1.0; 3],
        }
    }

    pub fn with_constants(mut self, constants: [f64; 3]) -> Self {
        self.constants = constants;
        self
    }
}

#[allow(clippy::excessive_precision)]
const E6: f64 = 403.428_793_492_735_12; // e^6

/// The three basis terms whose weighted sum is the bound shape. Unused
/// slots are zero.
pub fn bound_basis(shape: &BoundShape, inputs: &BoundInputs) -> Result<[f64; 3]> {
    let t = inputs.horizon;
    let tau = inputs.window;
    // Negated comparisons so NaN inputs fail validation too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(t > 0.0) || !(tau >= 1.0) {
        return Err(Error::parameter(format!(
            "bound shape needs horizon > 0 and window >= 1, got ({t}, {tau})"
        )));
    }
    let check_gap = |gap: f64| -> Result<f64> {
        if gap > 0.0 {
            Ok(gap)
        } else {
            Err(Error::parameter(format!(
                "bound shape needs a positive gap, got {gap}"
            )))
        }
    };
    let check_gamma = |gamma: f64| -> Result<f64> {
        if gamma > 0.0 {
            Ok(gamma)
        } else {
            Err(Error::parameter(format!(
                "bound shape needs gamma > 0, got {gamma}"
            )))
        }
    };
    let check_count = |count: f64| -> Result<f64> {
        if count >= 0.0 {
            Ok(count)
        } else {
            Err(Error::parameter(format!("negative count {count}")))
        }
    };
    let check_exponent = |beta: f64| -> Result<f64> {
        if (0.0..=1.0).contains(&beta) {
            Ok(beta)
        } else {
            Err(Error::parameter(format!(
                "smooth exponent must lie in [0, 1], got {beta}"
            )))
        }
    };
    let smooth_gap = |base_gap: f64, drift: f64| -> Result<f64> {
        let g = base_gap - 2.0 * drift * tau;
        if g > 0.0 {
            Ok(g)
        } else {
            Err(Error::parameter(format!(
                "smooth shape needs base_gap − 2·drift·window > 0, got {g}"
            )))
        }
    };

    Ok(match *shape {
        BoundShape::GeneralBernoulli { ambiguous_count, gap } => {
            let gap = check_gap(gap)?;
            [
                check_count(ambiguous_count)?,
                t * tau.ln() / (tau * gap.powi(3)),
                0.0,
            ]
        }
        BoundShape::GeneralGaussian {
            ambiguous_count,
            gap,
            gamma,
        } => {
            let gap = check_gap(gap)?;
            let gamma = check_gamma(gamma)?;
            [
                check_count(ambiguous_count)?,
                t * (tau * gap * gap + E6).ln() / (gamma * tau * gap * gap),
                t / tau,
            ]
        }
        BoundShape::AbruptBernoulli { breakpoints, gap } => {
            let gap = check_gap(gap)?;
            [
                check_count(breakpoints)? * tau,
                t * tau.ln() / (tau * gap.powi(3)),
                0.0,
            ]
        }
        BoundShape::AbruptGaussian {
            breakpoints,
            gap,
            gamma,
        } => {
            let gap = check_gap(gap)?;
            let gamma = check_gamma(gamma)?;
            [
                check_count(breakpoints)? * tau,
                t * (tau * gap * gap + E6).ln() / (gamma * tau * gap * gap),
                t / tau,
            ]
        }
        BoundShape::SmoothBernoulli {
            beta_exponent,
            base_gap,
            drift,
        } => {
            let g = smooth_gap(base_gap, drift)?;
            [
                t.powf(check_exponent(beta_exponent)?),
                t * tau.ln() / (tau * g.powi(3)),
                0.0,
            ]
        }
        BoundShape::SmoothGaussian {
            beta_exponent,
            base_gap,
            drift,
            gamma,
        } => {
            let g = smooth_gap(base_gap, drift)?;
            let gamma = check_gamma(gamma)?;
            [
                t.powf(check_exponent(beta_exponent)?),
                t * (tau * g * g + E6).ln() / (gamma * tau * g * g),
                t / tau,
            ]
        }
    })
}

/// Evaluate a bound shape: the constants-weighted sum of its basis terms.
pub fn pull_bound_shape(shape: &BoundShape, inputs: &BoundInputs) -> Result<f64> {
    let basis = bound_basis(shape, inputs)?;
    Ok(basis
        .iter()
        .zip(inputs.constants.iter())
        .map(|(b, c)| b * c)
        .sum())
}

/// Least-squares fit of the leading constants from `(basis, measured)`
/// rows. Basis columns that are identically zero get a zero constant;
/// otherwise the 3x3 normal equations are solved directly.
#[allow(clippy::needless_range_loop)] // in-place elimination over one matrix
pub fn fit_bound_constants(rows: &[([f64; 3], f64)]) -> Result<[f64; 3]> {
    if rows.is_empty() {
        return Err(Error::parameter("need at least one observation".to_string()));
    }
    let active: Vec<usize> = (0..3)
        .filter(|&j| rows.iter().any(|(basis, _)| basis[j] != 0.0))
        .collect();
    let n = active.len();
    if n == 0 {
        return Err(Error::parameter("all basis columns are zero".to_string()));
    }
    let mut ata = vec![vec![0.0f64; n]; n];
    let mut aty = vec![0.0f64; n];
    for (basis, y) in rows {
        for (r, &jr) in active.iter().enumerate() {
            aty[r] += basis[jr] * y;
            for (c, &jc) in active.iter().enumerate() {
                ata[r][c] += basis[jr] * basis[jc];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
            .expect("nonempty");
        if ata[pivot][col].abs() < 1e-12 {
            return Err(Error::parameter(
                "singular normal equations; observations do not identify the constants"
                    .to_string(),
            ));
        }
        ata.swap(col, pivot);
        aty.swap(col, pivot);
        for row in col + 1..n {
            let f = ata[row][col] / ata[col][col];
            for c in col..n {
                ata[row][c] -= f * ata[col][c];
            }
            aty[row] -= f * aty[col];
        }
    }
    let mut solution = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = aty[row];
        for c in row + 1..n {
            acc -= ata[row][c] * solution[c];
        }
        solution[row] = acc / ata[row][row];
    }
    let mut constants = [0.0f64; 3];
    for (r, &j) in active.iter().enumerate() {
        constants[j] = solution[r];
    }
    Ok(constants)
}

/// Options for a full structure report.
#[derive(Clone, Debug)]
pub struct StructureOptions {
    pub tau: usize,
    pub overtake: OvertakeReference,
    /// Near-tie threshold; enables the near-tie section and smooth shapes.
    pub delta_prime: Option<f64>,
    /// `(factor, exponent)` for the near-tie size cap and smooth exponent.
    pub cap: Option<(f64, f64)>,
    /// Exploration parameter for Gaussian shapes; defaults to the family's
    /// admissible cap.
    pub gamma: Option<f64>,
}

impl StructureOptions {
    pub fn new(tau: usize) -> Self {
        StructureOptions {
            tau,
            overtake: OvertakeReference::default(),
            delta_prime: None,
            cap: None,
            gamma: None,
        }
    }
}

/// Alternative-reading breakpoints, only reported when they differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltBreakpoints {
    pub rounds: Vec<usize>,
    pub count: usize,
}

/// Bound-shape values at unit constants, where the inputs exist.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundShapeValues {
    pub general_bernoulli: Option<f64>,
    pub general_gaussian: Option<f64>,
    pub abrupt_bernoulli: Option<f64>,
    pub abrupt_gaussian: Option<f64>,
    pub smooth_bernoulli: Option<f64>,
    pub smooth_gaussian: Option<f64>,
}

/// Everything the analyzer knows about one `(trajectory, τ)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub horizon: usize,
    pub arms: usize,
    pub tau: usize,
    /// Breakpoint rounds with the final round appended by convention.
    pub breakpoints: Vec<usize>,
    pub breakpoint_count: usize,
    /// Populated only if the alternative overtake reading disagrees (it
    /// provably never does; the field documents that it was checked).
    pub breakpoints_alt: Option<AltBreakpoints>,
    pub phases: Vec<(usize, usize)>,
    pub phase_cores: Vec<Option<(usize, usize)>>,
    pub ambiguous: MaskSummary,
    pub window_gap: Option<f64>,
    /// Audited per-round drift bound.
    pub lipschitz_step: f64,
    pub phase_separation: PhaseSeparation,
    pub near_ties: Option<NearTieReport>,
    pub bound_shapes: BoundShapeValues,
}

/// Compute the full structure report.
pub fn structure_report(
    traj: &RewardTrajectory,
    options: &StructureOptions,
) -> Result<StructureReport> {
    let bps = breakpoints(traj, options.overtake);
    let alt_rule = match options.overtake {
        OvertakeReference::NewBest => OvertakeReference::OldBest,
        OvertakeReference::OldBest => OvertakeReference::NewBest,
    };
    let alt = breakpoints(traj, alt_rule);
    let breakpoints_alt = (alt.rounds != bps.rounds).then(|| AltBreakpoints {
        rounds: alt.rounds_with_terminal(),
        count: alt.count,
    });

    let phase_list = phases(&bps);
    let cores = phase_cores(&phase_list, options.tau);
    let ambiguous = ambiguous_rounds(traj, options.tau);
    let gap = window_gap_over(traj, options.tau, &ambiguous).expect("minimal mask");
    let separation = check_phase_separation(traj, &phase_list);
    let drift = traj.max_step_drift();

    let near_ties = match options.delta_prime {
        Some(dp) => Some(near_tie_report(traj, dp, options.tau, options.cap)?),
        None => None,
    };

    let inputs = BoundInputs::new(traj.horizon() as f64, options.tau as f64);
    let gamma = options
        .gamma
        .unwrap_or_else(|| gamma_cap(traj.family().proxy_variance()));
    let bernoulli = matches!(traj.family(), RewardFamily::Bernoulli);
    let mut shapes = BoundShapeValues::default();
    if let Some(gap) = gap {
        let count = ambiguous.count() as f64;
        let ups = bps.count as f64;
        if bernoulli {
            shapes.general_bernoulli = pull_bound_shape(
                &BoundShape::GeneralBernoulli {
                    ambiguous_count: count,
                    gap,
                },
                &inputs,
            )
            .ok();
            shapes.abrupt_bernoulli = pull_bound_shape(
                &BoundShape::AbruptBernoulli {
                    breakpoints: ups,
                    gap,
                },
                &inputs,
            )
            .ok();
        }
        shapes.general_gaussian = pull_bound_shape(
            &BoundShape::GeneralGaussian {
                ambiguous_count: count,
                gap,
                gamma,
            },
            &inputs,
        )
        .ok();
        shapes.abrupt_gaussian = pull_bound_shape(
            &BoundShape::AbruptGaussian {
                breakpoints: ups,
                gap,
                gamma,
            },
            &inputs,
        )
        .ok();
    }
    if let (Some(dp), Some((_, beta_exponent))) = (options.delta_prime, options.cap) {
        if bernoulli {
            shapes.smooth_bernoulli = pull_bound_shape(
                &BoundShape::SmoothBernoulli {
                    beta_exponent,
                    base_gap: dp,
                    drift,
                },
                &inputs,
            )
            .ok();
        }
        shapes.smooth_gaussian = pull_bound_shape(
            &BoundShape::SmoothGaussian {
                beta_exponent,
                base_gap: dp,
                drift,
                gamma,
            },
            &inputs,
        )
        .ok();
    }

    Ok(StructureReport {
        horizon: traj.horizon(),
        arms: traj.arms(),
        tau: options.tau,
        breakpoints: bps.rounds_with_terminal(),
        breakpoint_count: bps.count,
        breakpoints_alt,
        phases: phase_list,
        phase_cores: cores,
        ambiguous: MaskSummary::from(&ambiguous),
        window_gap: gap,
        lipschitz_step: drift,
        phase_separation: separation,
        near_ties,
        bound_shapes: shapes,
    })
}
