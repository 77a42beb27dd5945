//! Closed-form evaluators for the loss and sample-complexity bounds, plus the
//! information-theoretic primitives the lower bounds are assembled from.
//!
//! All logarithms are natural.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::check_eps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// Fixed-budget expected-loss upper bound.
    FbUpper,
    /// Fixed-budget minimax expected-loss lower bound.
    FbLower,
    /// Fixed-confidence stopping-time upper bound.
    FcUpper,
    /// Fixed-confidence expected stopping-time lower bound.
    FcLower,
}

/// Which published form of a bound was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The form as stated, without proof-internal constants.
    Stated,
    /// The fixed-budget lower bound as obtained at the end of its derivation,
    /// with an extra factor 2 in the exponent.
    ProofFinalLine,
    /// Fixed-confidence upper bound with the explicit constant 499.
    ExplicitConstant,
    /// Fixed-confidence upper bound `H_ε·ln(4K·H_ε/δ)` without constants.
    Stylized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub formula_id: FormulaId,
    pub variant: Variant,
    #[serde(with = "crate::ext_float")]
    pub value: f64,
    /// Probability bounds above 1, or sample-size bounds that are not
    /// positive and finite, say nothing.
    pub vacuous: bool,
}

impl BoundValue {
    fn probability(formula_id: FormulaId, variant: Variant, value: f64) -> Self {
        Self { formula_id, variant, value, vacuous: value > 1.0 }
    }

    fn sample_size(formula_id: FormulaId, variant: Variant, value: f64) -> Self {
        Self { formula_id, variant, value, vacuous: !(value > 0.0 && value.is_finite()) }
    }

    /// The value with probability bounds capped at 1.
    pub fn clamped(&self) -> f64 {
        match self.formula_id {
            FormulaId::FbUpper | FormulaId::FbLower => self.value.min(1.0),
            FormulaId::FcUpper | FormulaId::FcLower => self.value,
        }
    }

    /// Attaches the inputs the bound was evaluated at.
    pub fn report<'a>(self, inputs: impl IntoIterator<Item = (&'a str, f64)>) -> BoundReport {
        BoundReport {
            formula_id: self.formula_id,
            inputs: inputs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            value: self.value,
            vacuous: self.vacuous,
            variant: self.variant,
        }
    }
}

/// Serializable record of one bound evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula_id: FormulaId,
    #[serde(with = "crate::ext_float::map")]
    pub inputs: BTreeMap<String, f64>,
    #[serde(with = "crate::ext_float")]
    pub value: f64,
    pub vacuous: bool,
    pub variant: Variant,
}

fn check_h(h_eps: f64) -> Result<()> {
    if h_eps > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("h_eps", format!("{h_eps} must be positive")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("delta", format!("{delta} is outside (0, 1)")))
    }
}

/// `exp(−T/(4H_ε) + 2K·ln(ln T + 1))`. Requires `T ≥ 2K`.
/// An infinite `H_ε` yields the vacuous value 1.
pub fn fb_upper_bound(h_eps: f64, num_arms: usize, budget: u64) -> Result<BoundValue> {
    check_h(h_eps)?;
    if num_arms == 0 {
        return Err(Error::NoArms);
    }
    if budget < 2 * num_arms as u64 {
        return Err(Error::domain("budget", format!("T = {budget} is below 2K = {}", 2 * num_arms)));
    }
    if h_eps.is_infinite() {
        return Ok(BoundValue { formula_id: FormulaId::FbUpper, variant: Variant::Stated, value: 1.0, vacuous: true });
    }
    let t = budget as f64;
    let exponent = -t / (4.0 * h_eps) + 2.0 * num_arms as f64 * (t.ln() + 1.0).ln();
    Ok(BoundValue::probability(FormulaId::FbUpper, Variant::Stated, exponent.exp()))
}

/// `(e^ε + 1)²·min{4, e^{2ε}}`, the privacy-dependent factor in both lower bounds.
fn lower_bound_factor(eps: f64) -> f64 {
    (eps.exp() + 1.0).powi(2) * (2.0 * eps).exp().min(4.0)
}

/// `(1/4)·exp(−(8T/H_ε)·(e^ε + 1)²·min{4, e^{2ε}})`, doubled in the
/// exponent for [`Variant::ProofFinalLine`].
pub fn fb_lower_bound(h_eps: f64, eps: f64, budget: u64, variant: Variant) -> Result<BoundValue> {
    check_h(h_eps)?;
    check_eps(eps)?;
    let scale = match variant {
        Variant::Stated => 1.0,
        Variant::ProofFinalLine => 2.0,
        other => return Err(Error::domain("variant", format!("{other:?} does not apply to this bound"))),
    };
    let exponent = if budget == 0 || h_eps.is_infinite() {
        0.0
    } else {
        scale * 8.0 * budget as f64 / h_eps * lower_bound_factor(eps)
    };
    let value = bretagnolle_huber(exponent)?;
    Ok(BoundValue::probability(FormulaId::FbLower, variant, value))
}

/// `max{H_ε/36, 1}`.
pub fn h_tilde(h_eps: f64) -> f64 {
    (h_eps / 36.0).max(1.0)
}

/// `499·H̃·ln(4K·H̃/δ) + 2K` with `H̃ = max{H_ε/36, 1}`.
pub fn fc_upper_bound(h_eps: f64, num_arms: usize, delta: f64) -> Result<BoundValue> {
    check_h(h_eps)?;
    check_delta(delta)?;
    if num_arms == 0 {
        return Err(Error::NoArms);
    }
    let k = num_arms as f64;
    let ht = h_tilde(h_eps);
    let value = 499.0 * ht * (4.0 * k * ht / delta).ln() + 2.0 * k;
    Ok(BoundValue::sample_size(FormulaId::FcUpper, Variant::ExplicitConstant, value))
}

/// `H_ε·ln(4K·H_ε/δ)`, the order of the stopping-time bound with constants dropped.
pub fn fc_upper_bound_stylized(h_eps: f64, num_arms: usize, delta: f64) -> Result<BoundValue> {
    check_h(h_eps)?;
    check_delta(delta)?;
    if num_arms == 0 {
        return Err(Error::NoArms);
    }
    let value = h_eps * (4.0 * num_arms as f64 * h_eps / delta).ln();
    Ok(BoundValue::sample_size(FormulaId::FcUpper, Variant::Stylized, value))
}

/// `H_ε·((1 − δ)·ln(1/δ) − ln 2) / (2·min{4, e^{2ε}}·(e^ε + 1)²)`, clamped at 0
/// when the bracket is negative. An infinite `H_ε` yields `+∞`.
pub fn fc_lower_bound(h_eps: f64, eps: f64, delta: f64) -> Result<BoundValue> {
    check_h(h_eps)?;
    check_eps(eps)?;
    check_delta(delta)?;
    let numerator = (1.0 - delta) * (1.0 / delta).ln() - std::f64::consts::LN_2;
    if numerator <= 0.0 {
        return Ok(BoundValue { formula_id: FormulaId::FcLower, variant: Variant::Stated, value: 0.0, vacuous: true });
    }
    let value = h_eps * numerator / (2.0 * lower_bound_factor(eps));
    Ok(BoundValue { formula_id: FormulaId::FcLower, variant: Variant::Stated, value, vacuous: value <= 0.0 })
}

/// Binary relative entropy `kl(p, q)` in nats, with `0·ln 0 = 0`.
/// Infinite when `q` is 0 or 1 and `p` disagrees; NaN outside `[0, 1]`.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    if !((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q)) {
        return f64::NAN;
    }
    fn term(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    }
    (term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlSurrogate {
    /// `2Δ²`.
    pub value: f64,
    /// `KL(Bern(1/2 − Δ/2), Bern(1/2 + Δ/2)) = Δ·ln((1 + Δ)/(1 − Δ))`.
    pub exact: f64,
    /// Whether the surrogate is at least the exact divergence.
    pub dominates_exact: bool,
}

/// Compares the quadratic KL surrogate `2Δ²` against the exact divergence
/// between the two Bernoulli arms it stands in for.
pub fn quadratic_kl_surrogate(gap: f64) -> Result<KlSurrogate> {
    if !(0.0..1.0).contains(&gap) {
        return Err(Error::domain("gap", format!("{gap} is outside [0, 1)")));
    }
    let value = 2.0 * gap * gap;
    let exact = gap * (gap.ln_1p() - (-gap).ln_1p());
    Ok(KlSurrogate { value, exact, dominates_exact: value >= exact })
}

/// `(1/4)·exp(−kl)`: lower bound on the larger of two testing errors.
pub fn bretagnolle_huber(kl: f64) -> Result<f64> {
    if kl >= 0.0 {
        Ok(0.25 * (-kl).exp())
    } else {
        Err(Error::domain("kl", format!("{kl} is negative")))
    }
}

/// `2·min{4, e^{2ε}}·(e^ε − 1)²`: how much an ε-private channel can retain of
/// the per-sample KL divergence between two reward laws.
pub fn private_kl_factor(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(2.0 * (2.0 * eps).exp().min(4.0) * eps.exp_m1().powi(2))
}
