//! Seedable sampling and CDF evaluation for the handful of distributions the
//! policies and their checks need: Beta, Gaussian, Bernoulli, Binomial.
//!
//! Sampling methods, for the record (all consume an exclusively-owned
//! [`RngStream`] and are deterministic given its seed):
//!
//! - Beta(α, β): ratio of two Gamma(·, 1) draws (Marsaglia–Tsang via
//!   `rand_distr::Gamma`), accurate at the large shape parameters produced
//!   by long windows;
//! - Gaussian: `rand_distr::Normal` (ziggurat);
//! - Bernoulli: a single uniform compare.
//!
//! CDFs are pure functions, callable from any thread: the Beta CDF is the
//! regularized incomplete beta `I_y(α, β)` evaluated by Lentz's continued
//! fraction, the Binomial CDF a log-space term summation (needed once `n`
//! grows past ~10³, harmless below). The two are tied together by the
//! identity `I_y(α, β) = 1 − Bin(α+β−1, y).cdf(α−1)` for integer parameters,
//! exposed as [`beta_binomial_identity_gap`] and used as a numeric
//! self-check of both implementations at once.

use crate::rng::RngStream;
use crate::{Error, Result};
use rand_distr::Distribution;

/// Draw from Beta(`alpha`, `beta`) as Gamma(α) / (Gamma(α) + Gamma(β)).
pub fn sample_beta(alpha: f64, beta: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::parameter(format!(
            "beta sample requires alpha > 0 and beta > 0, got ({alpha}, {beta})"
        )));
    }
    let ga = rand_distr::Gamma::new(alpha, 1.0).expect("validated shape");
    let gb = rand_distr::Gamma::new(beta, 1.0).expect("validated shape");
    loop {
        let x = ga.sample(rng);
        let y = gb.sample(rng);
        let s = x + y;
        // Both draws can underflow to zero for sub-1e-300 shapes; retry the
        // measure-zero degenerate outcome rather than returning NaN.
        if s > 0.0 {
            return Ok(x / s);
        }
    }
}

/// Draw from a Gaussian with the given mean and (strictly positive) variance.
pub fn sample_gaussian(mean: f64, variance: f64, rng: &mut RngStream) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
        return Err(Error::parameter(format!(
            "gaussian sample requires finite mean and variance > 0, got ({mean}, {variance})"
        )));
    }
    let normal = rand_distr::Normal::new(mean, variance.sqrt()).expect("validated std dev");
    Ok(normal.sample(rng))
}

/// Draw 0.0 or 1.0 with success probability `mu`.
pub fn sample_bernoulli(mu: f64, rng: &mut RngStream) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::parameter(format!(
            "bernoulli sample requires mu in [0, 1], got {mu}"
        )));
    }
    Ok(if rng.next_f64() < mu { 1.0 } else { 0.0 })
}

/// Natural log of the Gamma function, Lanczos approximation (g = 7, 9
/// coefficients; about 14 correct digits over the positive reals).
/// Coefficients kept at their published precision.
#[allow(clippy::excessive_precision)]
pub fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        // Reflection: Γ(z)Γ(1−z) = π / sin(πz).
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = 0.999_999_999_999_809_93;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (z + (i + 1) as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz algorithm).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 400;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let m_f = m as f64;
        let m2 = 2.0 * m_f;

        let aa = m_f * (b - m_f) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m_f) * (qab + m_f) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_y(alpha, beta)`: the CDF of
/// Beta(`alpha`, `beta`) at `y`. Absolute error well under 1e-10.
pub fn beta_cdf(alpha: f64, beta: f64, y: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::parameter(format!(
            "beta cdf requires alpha > 0 and beta > 0, got ({alpha}, {beta})"
        )));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::parameter(format!(
            "beta cdf requires y in [0, 1], got {y}"
        )));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta)
        + alpha * y.ln()
        + beta * (1.0 - y).ln();
    let front = ln_front.exp();
    // Use the symmetry transform so the continued fraction converges fast.
    let value = if y < (alpha + 1.0) / (alpha + beta + 2.0) {
        front * beta_continued_fraction(alpha, beta, y) / alpha
    } else {
        1.0 - front * beta_continued_fraction(beta, alpha, 1.0 - y) / beta
    };
    Ok(value.clamp(0.0, 1.0))
}

/// `P(Bin(n, p) <= k)` by summation of log-space terms.
///
/// Exact summation: one term per outcome, no approximation. `k` may be
/// negative (probability zero) or at least `n` (probability one).
pub fn binomial_cdf(n: u64, p: f64, k: i64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::parameter(format!(
            "binomial cdf requires p in [0, 1], got {p}"
        )));
    }
    if k < 0 {
        return Ok(0.0);
    }
    if k as u64 >= n {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        // All mass at n, and k < n here.
        return Ok(0.0);
    }
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let ln_n_fact = ln_gamma(n as f64 + 1.0);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for j in 0..=(k as u64) {
        let ln_term = ln_n_fact - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64 + 1.0)
            + j as f64 * ln_p
            + (n - j) as f64 * ln_q;
        // Kahan step: terms span many magnitudes when n is large.
        let y = ln_term.exp() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum.min(1.0))
}

/// Absolute gap between the two sides of the Beta/Binomial CDF identity
/// `I_y(α, β) = 1 − Bin(α+β−1, y).cdf(α−1)` for integer `α, β >= 1`.
///
/// Zero up to rounding; anything materially above ~1e-10 means one of the
/// two CDF implementations is broken.
pub fn beta_binomial_identity_gap(alpha: u64, beta: u64, y: f64) -> Result<f64> {
    if alpha == 0 || beta == 0 {
        return Err(Error::parameter(
            "identity gap requires integer alpha, beta >= 1".to_string(),
        ));
    }
    let lhs = beta_cdf(alpha as f64, beta as f64, y)?;
    let rhs = 1.0 - binomial_cdf(alpha + beta - 1, y, alpha as i64 - 1)?;
    Ok((lhs - rhs).abs())
}
