//! Simulation and analysis toolkit for *restless* multi-armed bandits —
//! settings where every arm's mean reward drifts over time regardless of
//! what the learner does.
//!
//! The crate provides:
//!
//! - sliding-window Thompson sampling policies with Beta and Gaussian
//!   posteriors, plus stationary, oracle and naive baselines ([`policy`]);
//! - generators for the usual non-stationary environment families
//!   (piecewise-constant, crossing sinusoids, Lipschitz drifts) and a CSV
//!   trajectory format for custom instances ([`reward`]);
//! - exact computation of the structural quantities that govern how hard a
//!   trajectory is for windowed policies: breakpoints, phases, ambiguous
//!   rounds, windowed suboptimality gaps ([`analysis`]);
//! - a seeded Monte-Carlo harness producing dynamic pseudo-regret curves,
//!   replication aggregates and window-size sweeps ([`harness`]).
//!
//! # Conventions
//!
//! Rounds are **1-based** (`t ∈ 1..=T`), matching the interval notation used
//! throughout the docs; arm indices are **0-based** `usize` as everywhere in
//! Rust. Ties in any arg-max are broken toward the lowest index. At round
//! `t` a window of length `τ` covers rounds `max(1, t−τ) ..= t−1`: decisions
//! use strictly past data.
//!
//! Everything downstream of a seed is deterministic: same seed, same byte
//! stream, same episode, on every platform. See [`rng::RngStream`].

pub mod analysis;
pub mod dist;
mod error;
pub mod harness;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod selftest;
pub mod window;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
