//! Fixed-budget thresholding over privatized responses.
//!
//! After one pull per arm, each round pulls the arm minimizing
//! `B_k = √T_k · (|τ_ε − μ̂_k| + ζ_ε)`: arms that are either close to the
//! threshold or rarely sampled get priority. After `T` pulls the arms with
//! `μ̂_k > τ_ε` are returned.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{privatized_view, Instance, PrivatizedView, Setting};
use crate::error::{Error, Result};
use crate::respond::Responder;

/// Pull counts and privatized bit sums. Means are derived on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FbState {
    t: u64,
    pulls: Vec<u64>,
    sum_bits: Vec<u64>,
}

impl FbState {
    pub fn new(num_arms: usize) -> Self {
        Self { t: 0, pulls: vec![0; num_arms], sum_bits: vec![0; num_arms] }
    }

    pub fn record(&mut self, arm: usize, bit: bool) {
        self.t += 1;
        self.pulls[arm] += 1;
        self.sum_bits[arm] += bit as u64;
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn sum_bits(&self) -> &[u64] {
        &self.sum_bits
    }

    pub fn mu_hat(&self, arm: usize) -> Option<f64> {
        match self.pulls[arm] {
            0 => None,
            n => Some(self.sum_bits[arm] as f64 / n as f64),
        }
    }
}

/// `√T_k · (|τ_ε − μ̂_k| + ζ_ε)` for arm `k`.
pub fn compute_index(state: &FbState, k: usize, view: &PrivatizedView) -> Result<f64> {
    if k >= state.pulls.len() {
        return Err(Error::ArmIndex { index: k, arms: state.pulls.len() });
    }
    let mu_hat = state.mu_hat(k).ok_or(Error::ArmNeverPulled(k))?;
    Ok(index_value(state.pulls[k], mu_hat, view.tau_eps, view.zeta_eps))
}

#[inline]
fn index_value(pulls: u64, mu_hat: f64, tau_eps: f64, zeta_eps: f64) -> f64 {
    (pulls as f64).sqrt() * ((tau_eps - mu_hat).abs() + zeta_eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbResult {
    /// Arms returned as above the threshold, ascending.
    pub selected: Vec<usize>,
    pub pulls_final: Vec<u64>,
    pub sum_bits_final: Vec<u64>,
    pub mu_hat_final: Vec<f64>,
    /// `T < 2K`: the run is valid but outside the regime the loss bound covers.
    pub below_guarantee_budget: bool,
    /// ε = 0: responses carry no information, so no guarantee applies.
    pub vacuous_guarantee: bool,
}

/// Runs the fixed-budget algorithm for `budget` total pulls (initialization included).
///
/// Ties in the index are broken towards the lowest arm index.
pub fn run_fixed_budget<R: Rng + ?Sized>(inst: &Instance, eps: f64, budget: u64, rng: &mut R) -> Result<FbResult> {
    let view = privatized_view(inst, eps, Setting::FixedBudget)?;
    let k = inst.num_arms();
    if budget < k as u64 {
        return Err(Error::BudgetTooSmall { budget, arms: k });
    }
    let responder = Responder::new(inst, eps);
    let mut state = FbState::new(k);
    for arm in 0..k {
        state.record(arm, responder.respond(arm, rng));
    }

    // Only the pulled arm's index changes between rounds.
    let mut index: Vec<f64> =
        (0..k).map(|a| index_value(state.pulls[a], state.mu_hat(a).unwrap(), view.tau_eps, view.zeta_eps)).collect();
    while state.t < budget {
        let mut best = 0;
        for a in 1..k {
            if index[a] < index[best] {
                best = a;
            }
        }
        state.record(best, responder.respond(best, rng));
        index[best] = index_value(state.pulls[best], state.mu_hat(best).unwrap(), view.tau_eps, view.zeta_eps);
    }

    let mu_hat_final: Vec<f64> = (0..k).map(|a| state.mu_hat(a).unwrap()).collect();
    let selected = (0..k).filter(|&a| mu_hat_final[a] > view.tau_eps).collect();
    Ok(FbResult {
        selected,
        pulls_final: state.pulls,
        sum_bits_final: state.sum_bits,
        mu_hat_final,
        below_guarantee_budget: budget < 2 * k as u64,
        vacuous_guarantee: eps == 0.0,
    })
}

/// Classification loss of a returned set: 1 if a selected arm has
/// `μ_i ≤ τ − ζ` or an unselected arm has `μ_i > τ + ζ`. Arms inside the
/// tolerance band never count.
pub fn fb_loss(selected: &[usize], inst: &Instance) -> Result<u8> {
    let k = inst.num_arms();
    let mut in_set = vec![false; k];
    for &a in selected {
        inst.check_arm(a)?;
        in_set[a] = true;
    }
    let (tau, zeta) = (inst.threshold(), inst.tolerance());
    let wrong = inst.means().iter().zip(&in_set).any(|(&m, &sel)| if sel { m <= tau - zeta } else { m > tau + zeta });
    Ok(wrong as u8)
}

impl FbResult {
    pub fn loss(&self, inst: &Instance) -> Result<u8> {
        if self.pulls_final.len() != inst.num_arms() {
            return Err(Error::ArityMismatch { expected: inst.num_arms(), got: self.pulls_final.len() });
        }
        fb_loss(&self.selected, inst)
    }
}
