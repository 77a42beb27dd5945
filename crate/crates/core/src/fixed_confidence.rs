//! Fixed-confidence thresholding over privatized responses.
//!
//! Each arm carries a one-sided confidence interval on the side of τ_ε where
//! its empirical mean currently sits. The run stops once no interval crosses
//! τ_ε; until then it pulls the widest interval among those that do.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{privatized_view, Instance, Setting};
use crate::error::{Error, Result};
use crate::respond::Responder;

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcOptions {
    /// Hard cap on total pulls. The stopping time is unbounded for zero gaps or ε = 0.
    pub max_rounds: u64,
    /// Scales every confidence radius. 1.0 is the reference radius.
    pub radius_multiplier: f64,
}

impl Default for FcOptions {
    fn default() -> Self {
        Self { max_rounds: DEFAULT_MAX_ROUNDS, radius_multiplier: 1.0 }
    }
}

impl FcOptions {
    pub fn with_max_rounds(max_rounds: u64) -> Self {
        Self { max_rounds, ..Self::default() }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("delta", format!("{delta} is outside (0, 1)")))
    }
}

/// `sqrt(ln(4·K·t³/δ) / (8·T_i))`.
pub fn radius(num_arms: usize, t: u64, delta: f64, pulls: u64) -> Result<f64> {
    if num_arms == 0 {
        return Err(Error::NoArms);
    }
    if t == 0 {
        return Err(Error::domain("t", "must be at least 1"));
    }
    if pulls == 0 {
        return Err(Error::domain("pulls", "must be at least 1"));
    }
    check_delta(delta)?;
    Ok(radius_with(log_term(num_arms, t, delta), pulls, 1.0))
}

#[inline]
fn log_term(num_arms: usize, t: u64, delta: f64) -> f64 {
    let t = t as f64;
    (4.0 * num_arms as f64 * t * t * t / delta).ln()
}

#[inline]
fn radius_with(log_term: f64, pulls: u64, multiplier: f64) -> f64 {
    multiplier * (log_term / (8.0 * pulls as f64)).sqrt()
}

/// Pull counts and privatized bit sums for one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FcState {
    t: u64,
    pulls: Vec<u64>,
    sum_bits: Vec<u64>,
}

impl FcState {
    fn new(num_arms: usize) -> Self {
        Self { t: 0, pulls: vec![0; num_arms], sum_bits: vec![0; num_arms] }
    }

    fn record(&mut self, arm: usize, bit: bool) {
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

    pub fn mu_hat(&self, arm: usize) -> f64 {
        self.sum_bits[arm] as f64 / self.pulls[arm] as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcResult {
    /// Arms with `μ̂ ≥ τ_ε` at termination, ascending.
    pub selected: Vec<usize>,
    /// Total pulls, initialization included.
    pub stopping_time: u64,
    /// `false` when the run was cut off by `max_rounds`.
    pub stopped: bool,
    pub pulls_final: Vec<u64>,
    pub mu_hat_final: Vec<f64>,
    pub tau_eps: f64,
}

/// Outcome of evaluating the stopping rule at the current state.
enum Step {
    Stop,
    Pull(usize),
}

fn step(state: &FcState, tau_eps: f64, delta: f64, multiplier: f64) -> (Vec<usize>, Step) {
    let k = state.pulls.len();
    let log_term = log_term(k, state.t, delta);
    let mut above = Vec::new();
    let mut pick: Option<(usize, f64)> = None;
    for i in 0..k {
        let mu = state.mu_hat(i);
        let rad = radius_with(log_term, state.pulls[i], multiplier);
        let in_s = mu >= tau_eps;
        let shifted = if in_s { mu - rad } else { mu + rad };
        let in_shifted = shifted >= tau_eps;
        if in_s {
            above.push(i);
        }
        if in_s != in_shifted && pick.is_none_or(|(_, r)| rad > r) {
            pick = Some((i, rad));
        }
    }
    match pick {
        None => (above, Step::Stop),
        Some((i, _)) => (above, Step::Pull(i)),
    }
}

/// Runs the fixed-confidence algorithm until the stopping rule holds or
/// `opts.max_rounds` pulls have been made.
///
/// The round counter inside the radius is the total number of pulls so far,
/// starting at K after initialization. Ties in the radius go to the lowest arm index.
pub fn run_fixed_confidence<R: Rng + ?Sized>(
    inst: &Instance,
    eps: f64,
    delta: f64,
    rng: &mut R,
    opts: FcOptions,
) -> Result<FcResult> {
    check_delta(delta)?;
    let view = privatized_view(inst, eps, Setting::FixedConfidence)?;
    let k = inst.num_arms();
    if opts.max_rounds < k as u64 {
        return Err(Error::domain("max_rounds", format!("{} is below the arm count {k}", opts.max_rounds)));
    }
    if !(opts.radius_multiplier.is_finite() && opts.radius_multiplier > 0.0) {
        return Err(Error::domain("radius_multiplier", format!("{} is not positive", opts.radius_multiplier)));
    }
    let responder = Responder::new(inst, eps);
    let mut state = FcState::new(k);
    for arm in 0..k {
        state.record(arm, responder.respond(arm, rng));
    }

    loop {
        let (above, next) = step(&state, view.tau_eps, delta, opts.radius_multiplier);
        let stopped = match next {
            Step::Stop => true,
            Step::Pull(_) if state.t >= opts.max_rounds => false,
            Step::Pull(arm) => {
                state.record(arm, responder.respond(arm, rng));
                continue;
            }
        };
        let mu_hat_final = (0..k).map(|a| state.mu_hat(a)).collect();
        return Ok(FcResult {
            selected: above,
            stopping_time: state.t,
            stopped,
            pulls_final: state.pulls,
            mu_hat_final,
            tau_eps: view.tau_eps,
        });
    }
}

/// Whether the returned set equals `{i : μ_i ≥ τ}` exactly.
pub fn fc_correct(result: &FcResult, inst: &Instance) -> Result<bool> {
    if result.pulls_final.len() != inst.num_arms() {
        return Err(Error::ArityMismatch { expected: inst.num_arms(), got: result.pulls_final.len() });
    }
    let truth: Vec<usize> = (0..inst.num_arms()).filter(|&i| inst.means()[i] >= inst.threshold()).collect();
    Ok(result.selected == truth)
}
