//! Sliding-window sufficient statistics over the last `τ` rounds.
//!
//! The window is over *rounds*, not per-arm pulls: a single FIFO ring holds
//! the most recent `τ` `(arm, reward)` observations, and per-arm aggregates
//! (pull count, reward sum) are updated incrementally in O(1) per record.
//! Real-valued sums use compensated accumulation so a million evictions do
//! not drift away from the exact recount.
//!
//! [`recompute`] re-derives the same aggregates from a full history by brute
//! force. It is deliberately independent of the ring-buffer path and is used
//! everywhere the incremental structure needs to be cross-examined.

use std::collections::VecDeque;

/// Compensated (Kahan) accumulator; subtraction is addition of the negation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Per-arm pull counts and reward sums over the most recent `τ` rounds.
#[derive(Clone, Debug)]
pub struct WindowStats {
    arms: usize,
    tau: usize,
    ring: VecDeque<(usize, f64)>,
    counts: Vec<u64>,
    sums: Vec<Kahan>,
}

impl WindowStats {
    /// Empty statistics for `arms` arms and window length `tau` (>= 1).
    ///
    /// # Panics
    /// If `arms == 0` or `tau == 0`.
    pub fn new(arms: usize, tau: usize) -> Self {
        assert!(arms > 0, "window stats need at least one arm");
        assert!(tau > 0, "window length must be at least 1");
        WindowStats {
            arms,
            tau,
            ring: VecDeque::with_capacity(tau.min(1 << 20) + 1),
            counts: vec![0; arms],
            sums: vec![Kahan::default(); arms],
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Number of observations currently retained (`min(records, τ)`).
    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    /// Record one observation; evicts the oldest one once the ring holds
    /// more than `τ`.
    ///
    /// # Panics
    /// If `arm` is out of range.
    pub fn record(&mut self, arm: usize, reward: f64) {
        assert!(arm < self.arms, "arm {arm} out of range (K = {})", self.arms);
        self.ring.push_back((arm, reward));
        self.counts[arm] += 1;
        self.sums[arm].add(reward);
        if self.ring.len() > self.tau {
            let (old_arm, old_reward) = self.ring.pop_front().expect("ring not empty");
            self.counts[old_arm] -= 1;
            self.sums[old_arm].add(-old_reward);
        }
    }

    /// Window pull count for `arm`.
    pub fn pull_count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    /// Window reward sum for `arm`.
    pub fn reward_sum(&self, arm: usize) -> f64 {
        self.sums[arm].value()
    }

    /// Window mean for `arm`, or `None` while the arm has no observation in
    /// the window. An empty window is a value, not an error.
    pub fn mean(&self, arm: usize) -> Option<f64> {
        match self.counts[arm] {
            0 => None,
            n => Some(self.sums[arm].value() / n as f64),
        }
    }

    /// Smallest per-arm pull count in the window.
    pub fn min_pull_count(&self) -> u64 {
        self.counts.iter().copied().min().unwrap_or(0)
    }

    /// Per-arm `(pull_count, reward_sum)` snapshot.
    pub fn aggregates(&self) -> Vec<(u64, f64)> {
        (0..self.arms)
            .map(|i| (self.counts[i], self.sums[i].value()))
            .collect()
    }
}

/// Exact sum of f64 values via Shewchuk's expansion algorithm: the partials
/// hold the running sum without rounding, so the collapsed result is the
/// correctly rounded total. The oracle must out-precision the structure it
/// checks.
fn exact_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut used = 0;
        for i in 0..partials.len() {
            let mut y = partials[i];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let high = x + y;
            let low = y - (high - x);
            if low != 0.0 {
                partials[used] = low;
                used += 1;
            }
            x = high;
        }
        partials.truncate(used);
        partials.push(x);
    }
    partials.iter().sum()
}

/// Brute-force recomputation of window aggregates from a full history.
///
/// `history[i]` is the observation of round `i + 1`; the result covers the
/// rounds `max(1, t−τ) ..= t−1` seen by a decision at round `t`, i.e. the
/// last `min(t−1, τ)` entries before index `t − 1`. Sums are exact.
pub fn recompute(history: &[(usize, f64)], arms: usize, t: usize, tau: usize) -> Vec<(u64, f64)> {
    assert!(t >= 1 && t <= history.len() + 1, "round {t} outside history");
    let hi = t - 1; // exclusive end in 0-based history indices
    let lo = hi.saturating_sub(tau);
    (0..arms)
        .map(|target| {
            let count = history[lo..hi].iter().filter(|&&(arm, _)| arm == target).count();
            let sum = exact_sum(
                history[lo..hi]
                    .iter()
                    .filter(|&&(arm, _)| arm == target)
                    .map(|&(_, reward)| reward),
            );
            (count as u64, sum)
        })
        .collect()
}
