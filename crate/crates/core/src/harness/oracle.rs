//! Exact expected loss of the fixed-budget algorithm on tiny Bernoulli instances.
//!
//! For Bernoulli arms the privatized responses are themselves Bernoulli with
//! the privatized means, and the algorithm's trajectory is a deterministic
//! function of the response sequence. Enumerating all `2^T` sequences, each
//! weighted by the product of the response likelihoods along the arms it
//! actually pulls, gives the expected loss as a finite sum.

use crate::env::{privatized_view, Instance, Setting};
use crate::error::{Error, Result};
use crate::fixed_budget::fb_loss;
use crate::privacy::check_eps;

pub const ORACLE_MAX_BUDGET: u64 = 24;

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

struct Replay<'a> {
    inst: &'a Instance,
    mu_eps: Vec<f64>,
    tau_eps: f64,
    zeta_eps: f64,
    budget: u64,
    pulls: Vec<u64>,
    ones: Vec<u64>,
    total: CompensatedSum,
}

impl Replay<'_> {
    /// Arm pulled at step `t` (0-based): round-robin first, then the lowest
    /// `√n·(|τ_ε − s/n| + ζ_ε)`, first index winning ties.
    fn next_arm(&self, t: u64) -> usize {
        let k = self.pulls.len();
        if (t as usize) < k {
            return t as usize;
        }
        let score = |a: usize| {
            let n = self.pulls[a] as f64;
            n.sqrt() * ((self.tau_eps - self.ones[a] as f64 / n).abs() + self.zeta_eps)
        };
        let mut best = 0;
        let mut best_score = score(0);
        for a in 1..k {
            let s = score(a);
            if s < best_score {
                best = a;
                best_score = s;
            }
        }
        best
    }

    fn explore(&mut self, t: u64, prob: f64) -> Result<()> {
        if t == self.budget {
            let selected: Vec<usize> =
                (0..self.pulls.len()).filter(|&a| self.ones[a] as f64 / self.pulls[a] as f64 > self.tau_eps).collect();
            if fb_loss(&selected, self.inst)? == 1 {
                self.total.add(prob);
            }
            return Ok(());
        }
        let arm = self.next_arm(t);
        let p_one = self.mu_eps[arm];
        for (bit, p) in [(1u64, p_one), (0u64, 1.0 - p_one)] {
            if p == 0.0 {
                continue;
            }
            self.pulls[arm] += 1;
            self.ones[arm] += bit;
            self.explore(t + 1, prob * p)?;
            self.pulls[arm] -= 1;
            self.ones[arm] -= bit;
        }
        Ok(())
    }
}

/// Exact `E[loss]` of the fixed-budget algorithm with budget `budget`.
pub fn exact_fb_oracle(inst: &Instance, eps: f64, budget: u64) -> Result<f64> {
    check_eps(eps)?;
    if !inst.is_bernoulli() {
        return Err(Error::OracleNonBernoulli);
    }
    if budget > ORACLE_MAX_BUDGET {
        return Err(Error::OracleBudgetCap(budget));
    }
    let k = inst.num_arms();
    if budget < k as u64 {
        return Err(Error::BudgetTooSmall { budget, arms: k });
    }
    let view = privatized_view(inst, eps, Setting::FixedBudget)?;
    let mut replay = Replay {
        inst,
        mu_eps: view.mu_eps,
        tau_eps: view.tau_eps,
        zeta_eps: view.zeta_eps,
        budget,
        pulls: vec![0; k],
        ones: vec![0; k],
        total: CompensatedSum::default(),
    };
    replay.explore(0, 1.0)?;
    Ok(replay.total.value())
}
