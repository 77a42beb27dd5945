//! The Bernoulli privatization mechanism.
//!
//! A reward `r ∈ [0, 1]` is replaced by a single coin flip with success
//! probability `(r·e^ε + 1 − r) / (1 + e^ε)`. The learner only ever sees the
//! coin. For ε = 0 the coin is fair whatever the input; as ε grows the coin
//! approaches `Bernoulli(r)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this ε the direct form overflows `e^ε`; the logistic form is used instead.
pub const EPS_EVAL_CAP: f64 = 700.0;

/// Absolute slack allowed on the likelihood-ratio bound `e^ε` by [`dp_ratio_audit`].
pub const AUDIT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PrivacyParams {
    eps: f64,
}

impl PrivacyParams {
    pub fn new(eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `(e^ε − 1) / (e^ε + 1)`, the factor by which the mechanism shrinks
    /// distances in mean space.
    pub fn contraction(&self) -> f64 {
        contraction(self.eps)
    }
}

impl TryFrom<f64> for PrivacyParams {
    type Error = Error;

    fn try_from(eps: f64) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<PrivacyParams> for f64 {
    fn from(p: PrivacyParams) -> f64 {
        p.eps
    }
}

/// One output bit of the mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrivateResponse(bool);

impl PrivateResponse {
    pub fn new(bit: bool) -> Self {
        Self(bit)
    }

    pub fn is_one(self) -> bool {
        self.0
    }

    pub fn bit(self) -> u8 {
        self.0 as u8
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

fn check_unit(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::RewardOutOfRange(r))
    }
}

/// `(e^ε − 1) / (e^ε + 1)`, computed as `tanh(ε/2)` so it stays finite for any ε.
pub fn contraction(eps: f64) -> f64 {
    (eps / 2.0).tanh()
}

/// Success probability of the coin emitted for reward `r`.
pub fn bern_param(r: f64, eps: f64) -> Result<f64> {
    check_unit(r)?;
    check_eps(eps)?;
    Ok(bern_param_unchecked(r, eps))
}

pub(crate) fn bern_param_unchecked(r: f64, eps: f64) -> f64 {
    if eps <= EPS_EVAL_CAP {
        let e = eps.exp();
        (r * e + (1.0 - r)) / (1.0 + e)
    } else {
        // Divide numerator and denominator by e^ε: r·σ(ε) + (1 − r)·σ(−ε).
        let m = (-eps).exp();
        let hi = 1.0 / (1.0 + m);
        let lo = m / (1.0 + m);
        r * hi + (1.0 - r) * lo
    }
}

/// Privatizes one reward. Consumes exactly one uniform variate from `rng`.
pub fn privatize<R: Rng + ?Sized>(r: f64, eps: f64, rng: &mut R) -> Result<PrivateResponse> {
    let p = bern_param(r, eps)?;
    Ok(PrivateResponse(draw_bit(p, rng)))
}

#[inline]
pub(crate) fn draw_bit<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

/// Expected output of the mechanism when the input reward has mean `mu`:
/// `1/2 + (2μ − 1)(e^ε − 1) / (2(e^ε + 1))`.
pub fn private_mean(mu: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::domain("mu", format!("{mu} is outside [0, 1]")));
    }
    check_eps(eps)?;
    Ok(private_mean_unchecked(mu, eps))
}

pub(crate) fn private_mean_unchecked(mu: f64, eps: f64) -> f64 {
    0.5 + (2.0 * mu - 1.0) * contraction(eps) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub eps: f64,
    pub grid_step: f64,
    pub max_ratio_one: f64,
    pub max_ratio_zero: f64,
    pub pass: bool,
}

/// Grid `0, h, 2h, …` capped at and always including 1.
fn audit_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).ceil() as usize;
    let mut grid: Vec<f64> = (0..n).map(|j| j as f64 * step).filter(|&r| r < 1.0).collect();
    grid.push(1.0);
    grid
}

/// Worst-case likelihood ratio `P{B(r) = b} / P{B(r') = b}` over all grid pairs,
/// for both outputs, evaluated from the exact output law.
///
/// The maximum of a ratio of positive numbers over all ordered pairs is the
/// largest value over the smallest, so the pair scan reduces to one pass.
pub fn dp_ratio_audit(eps: f64, grid_step: f64) -> Result<AuditReport> {
    check_eps(eps)?;
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::domain("grid_step", format!("{grid_step} is outside (0, 1]")));
    }
    let (mut lo1, mut hi1) = (f64::INFINITY, 0.0_f64);
    let (mut lo0, mut hi0) = (f64::INFINITY, 0.0_f64);
    for r in audit_grid(grid_step) {
        let p1 = bern_param_unchecked(r, eps);
        let p0 = 1.0 - p1;
        lo1 = lo1.min(p1);
        hi1 = hi1.max(p1);
        lo0 = lo0.min(p0);
        hi0 = hi0.max(p0);
    }
    let max_ratio_one = hi1 / lo1;
    let max_ratio_zero = hi0 / lo0;
    let bound = eps.exp() + AUDIT_SLACK;
    Ok(AuditReport {
        eps,
        grid_step,
        max_ratio_one,
        max_ratio_zero,
        pass: max_ratio_one <= bound && max_ratio_zero <= bound,
    })
}

/// Sample-based variant of [`dp_ratio_audit`] for end-to-end smoke tests of
/// [`privatize`]. Output frequencies are estimated from `draws` calls per grid
/// point; `pass` allows a multiplicative `slack` on `e^ε` for sampling noise.
pub fn sampled_ratio_audit<R: Rng + ?Sized>(
    eps: f64,
    grid_step: f64,
    draws: u64,
    slack: f64,
    rng: &mut R,
) -> Result<AuditReport> {
    check_eps(eps)?;
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::domain("grid_step", format!("{grid_step} is outside (0, 1]")));
    }
    if draws == 0 {
        return Err(Error::domain("draws", "must be positive"));
    }
    let (mut lo1, mut hi1) = (f64::INFINITY, 0.0_f64);
    let (mut lo0, mut hi0) = (f64::INFINITY, 0.0_f64);
    for r in audit_grid(grid_step) {
        let mut ones = 0u64;
        for _ in 0..draws {
            ones += privatize(r, eps, rng)?.bit() as u64;
        }
        let p1 = ones as f64 / draws as f64;
        let p0 = 1.0 - p1;
        lo1 = lo1.min(p1);
        hi1 = hi1.max(p1);
        lo0 = lo0.min(p0);
        hi0 = hi0.max(p0);
    }
    let max_ratio_one = hi1 / lo1;
    let max_ratio_zero = hi0 / lo0;
    let bound = eps.exp() * (1.0 + slack);
    Ok(AuditReport {
        eps,
        grid_step,
        max_ratio_one,
        max_ratio_zero,
        pass: max_ratio_one <= bound && max_ratio_zero <= bound,
    })
}
