//! Bandit instances and the quantities derived from them.
//!
//! An [`Instance`] holds the ground truth: per-arm reward laws on `[0, 1]`,
//! a threshold τ and a tolerance ζ. Algorithms never see it directly; they
//! see privatized coin flips whose means are given by [`PrivatizedView`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::{check_eps, contraction, private_mean_unchecked};

/// Tolerance on a finite distribution's mean against the declared arm mean.
pub const DIST_MEAN_TOL: f64 = 1e-12;

/// Which problem an arm gap refers to. The fixed-confidence problem has no tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    FixedBudget,
    FixedConfidence,
}

/// Reward law of one arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmDist {
    Bernoulli,
    /// Finite support on `[0, 1]`; `probs[k]` is the mass at `support[k]`.
    Discrete {
        support: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl ArmDist {
    fn validate(&self, arm: usize, mean: f64) -> Result<()> {
        let (support, probs) = match self {
            ArmDist::Bernoulli => return Ok(()),
            ArmDist::Discrete { support, probs } => (support, probs),
        };
        let bad = |reason: String| Error::InvalidDistribution { arm, reason };
        if support.is_empty() || support.len() != probs.len() {
            return Err(bad(format!("support has {} points but probs has {}", support.len(), probs.len())));
        }
        if let Some(x) = support.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(bad(format!("support point {x} is outside [0, 1]")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(bad(format!("probability {p} is negative or not finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(bad(format!("probabilities sum to {total}")));
        }
        let dist_mean: f64 = support.iter().zip(probs).map(|(x, p)| x * p).sum();
        if (dist_mean - mean).abs() > DIST_MEAN_TOL {
            return Err(Error::DistributionMeanMismatch { arm, mean, dist_mean });
        }
        Ok(())
    }
}

/// A validated thresholding bandit problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct Instance {
    means: Vec<f64>,
    threshold: f64,
    tolerance: f64,
    dists: Vec<ArmDist>,
}

/// On-disk shape of an [`Instance`]. `dists` is omitted when every arm is Bernoulli.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    means: Vec<f64>,
    threshold: f64,
    tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dists: Option<Vec<ArmDist>>,
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        make_instance(doc.means, doc.threshold, doc.tolerance, doc.dists)
    }
}

impl From<Instance> for InstanceDoc {
    fn from(inst: Instance) -> Self {
        let dists = (!inst.is_bernoulli()).then_some(inst.dists);
        InstanceDoc { means: inst.means, threshold: inst.threshold, tolerance: inst.tolerance, dists }
    }
}

/// Builds and validates an instance. Arms default to `Bernoulli(μ_i)`.
pub fn make_instance(means: Vec<f64>, threshold: f64, tolerance: f64, dists: Option<Vec<ArmDist>>) -> Result<Instance> {
    if means.is_empty() {
        return Err(Error::NoArms);
    }
    if let Some((arm, &value)) = means.iter().enumerate().find(|(_, m)| !(0.0..=1.0).contains(*m)) {
        return Err(Error::MeanOutOfRange { arm, value });
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::ThresholdOutOfRange(threshold));
    }
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::NegativeTolerance(tolerance));
    }
    let dists = match dists {
        None => vec![ArmDist::Bernoulli; means.len()],
        Some(d) if d.len() != means.len() => return Err(Error::ArityMismatch { expected: means.len(), got: d.len() }),
        Some(d) => d,
    };
    for (arm, (dist, &mean)) in dists.iter().zip(&means).enumerate() {
        dist.validate(arm, mean)?;
    }
    Ok(Instance { means, threshold, tolerance, dists })
}

impl Instance {
    /// All-Bernoulli instance.
    pub fn new(means: Vec<f64>, threshold: f64, tolerance: f64) -> Result<Self> {
        make_instance(means, threshold, tolerance, None)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dists(&self) -> &[ArmDist] {
        &self.dists
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn is_bernoulli(&self) -> bool {
        self.dists.iter().all(|d| matches!(d, ArmDist::Bernoulli))
    }

    pub(crate) fn check_arm(&self, arm: usize) -> Result<()> {
        if arm < self.num_arms() {
            Ok(())
        } else {
            Err(Error::ArmIndex { index: arm, arms: self.num_arms() })
        }
    }

    /// One reward draw from `arm`. Consumes exactly one uniform variate.
    pub fn sample_reward<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<f64> {
        self.check_arm(arm)?;
        Ok(self.sample_unchecked(arm, rng))
    }

    #[inline]
    pub(crate) fn sample_unchecked<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match &self.dists[arm] {
            ArmDist::Bernoulli => {
                if u < self.means[arm] {
                    1.0
                } else {
                    0.0
                }
            }
            ArmDist::Discrete { support, probs } => {
                let mut acc = 0.0;
                for (x, p) in support.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *x;
                    }
                }
                // rounding left u above the accumulated mass
                *support.last().expect("validated non-empty support")
            }
        }
    }
}

/// Free-function form of [`Instance::sample_reward`].
pub fn sample_reward<R: Rng + ?Sized>(inst: &Instance, arm: usize, rng: &mut R) -> Result<f64> {
    inst.sample_reward(arm, rng)
}

/// Per-arm gaps and the complexity `H = Σ Δ_i⁻²` in the raw reward scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub setting: Setting,
    pub gaps: Vec<f64>,
    /// `+∞` iff some gap is zero.
    pub h: f64,
}

fn inverse_square_sum(gaps: &[f64]) -> f64 {
    if gaps.contains(&0.0) {
        return f64::INFINITY;
    }
    gaps.iter().map(|g| g.powi(-2)).sum()
}

pub fn gap_profile(inst: &Instance, setting: Setting) -> GapProfile {
    let zeta = match setting {
        Setting::FixedBudget => inst.tolerance,
        Setting::FixedConfidence => 0.0,
    };
    let gaps: Vec<f64> = inst.means.iter().map(|m| (inst.threshold - m).abs() + zeta).collect();
    let h = inverse_square_sum(&gaps);
    GapProfile { setting, gaps, h }
}

/// The problem as seen through the privatization mechanism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivatizedView {
    pub eps: f64,
    pub setting: Setting,
    pub mu_eps: Vec<f64>,
    pub tau_eps: f64,
    /// Privatized tolerance `ζ·(e^ε − 1)/(e^ε + 1)`; zero in the fixed-confidence setting.
    pub zeta_eps: f64,
    pub gaps_eps: Vec<f64>,
    /// `Σ Δ_{i,ε}⁻²`, `+∞` when some privatized gap vanishes (always at ε = 0 with ζ = 0).
    pub h_eps: f64,
}

pub fn privatized_view(inst: &Instance, eps: f64, setting: Setting) -> Result<PrivatizedView> {
    check_eps(eps)?;
    let mu_eps: Vec<f64> = inst.means.iter().map(|&m| private_mean_unchecked(m, eps)).collect();
    let tau_eps = private_mean_unchecked(inst.threshold, eps);
    let zeta_eps = match setting {
        Setting::FixedBudget => contraction(eps) * inst.tolerance,
        Setting::FixedConfidence => 0.0,
    };
    let gaps_eps: Vec<f64> = mu_eps.iter().map(|m| (tau_eps - m).abs() + zeta_eps).collect();
    let h_eps = inverse_square_sum(&gaps_eps);
    Ok(PrivatizedView { eps, setting, mu_eps, tau_eps, zeta_eps, gaps_eps, h_eps })
}

/// Fixed-budget lower-bound family. `None` leaves every arm above the
/// threshold at `τ + |μ_j − τ|/2 + ζ`; `Some(i)` additionally moves arm `i`
/// below it to `τ − |μ_i − τ|/2 − ζ`. All arms of the result are Bernoulli.
pub fn fb_hard_env(inst: &Instance, flipped: Option<usize>) -> Result<Instance> {
    if let Some(i) = flipped {
        inst.check_arm(i)?;
    }
    let (tau, zeta) = (inst.threshold, inst.tolerance);
    let means = inst
        .means
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let half = (m - tau).abs() / 2.0;
            let value = if flipped == Some(j) { tau - half - zeta } else { tau + half + zeta };
            if (0.0..=1.0).contains(&value) {
                Ok(value)
            } else {
                Err(Error::ConstructedMeanOutOfRange { arm: j, value })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(means, tau, zeta)
}

/// Fixed-confidence lower-bound family: reflects arm `j` across the threshold,
/// clipped to `[0, 1]`. Arm `j` becomes Bernoulli; the others keep their laws.
pub fn fc_flip_env(inst: &Instance, j: usize) -> Result<Instance> {
    inst.check_arm(j)?;
    let tau = inst.threshold;
    let m = inst.means[j];
    let flipped = if m < tau { tau + (tau - m).abs() } else { tau - (tau - m).abs() };
    let mut out = inst.clone();
    out.means[j] = flipped.clamp(0.0, 1.0);
    out.dists[j] = ArmDist::Bernoulli;
    Ok(out)
}
