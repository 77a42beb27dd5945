//! Deterministic Monte Carlo over independent trials.
//!
//! Trial `i` draws all of its randomness from [`derive_stream`]`(master_seed, i)`,
//! trials run on a rayon pool of the configured size, and outcomes are
//! aggregated in trial order with integer accumulators. A report therefore
//! depends only on the configuration, never on the worker count.

mod csv_io;
mod oracle;
mod stream;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    fb_lower_bound, fb_upper_bound, fc_lower_bound, fc_upper_bound, fc_upper_bound_stylized, BoundReport, FormulaId,
    Variant,
};
use crate::env::{privatized_view, Instance, Setting};
use crate::error::{Error, Result};
use crate::fixed_budget::run_fixed_budget;
use crate::fixed_confidence::{fc_correct, run_fixed_confidence, FcOptions, DEFAULT_MAX_ROUNDS};
use crate::privacy::check_eps;

pub use csv_io::{
    fmt_f64, read_fb_csv, read_fc_csv, write_fb_csv, write_fc_csv, FbRow, FcRow, FB_HEADER, FC_HEADER, STOPPED_RATE,
};
pub use oracle::{exact_fb_oracle, ORACLE_MAX_BUDGET};
pub use stream::{derive_stream, Stream};

fn default_max_rounds() -> u64 {
    DEFAULT_MAX_ROUNDS
}

fn default_multiplier() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SettingSpec {
    FixedBudget {
        #[serde(rename = "T")]
        budget: u64,
    },
    FixedConfidence {
        delta: f64,
        #[serde(default = "default_max_rounds")]
        max_rounds: u64,
        #[serde(default = "default_multiplier")]
        radius_multiplier: f64,
    },
}

impl SettingSpec {
    pub fn setting(&self) -> Setting {
        match self {
            SettingSpec::FixedBudget { .. } => Setting::FixedBudget,
            SettingSpec::FixedConfidence { .. } => Setting::FixedConfidence,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: Instance,
    pub eps: f64,
    pub setting: SettingSpec,
    pub n_trials: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses one per available core.
    #[serde(default)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        if self.n_trials == 0 {
            return Err(Error::domain("n_trials", "must be at least 1"));
        }
        let k = self.instance.num_arms();
        match self.setting {
            SettingSpec::FixedBudget { budget } if budget < k as u64 => Err(Error::BudgetTooSmall { budget, arms: k }),
            SettingSpec::FixedBudget { .. } => Ok(()),
            SettingSpec::FixedConfidence { delta, max_rounds, radius_multiplier } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(Error::domain("delta", format!("{delta} is outside (0, 1)")));
                }
                if max_rounds < k as u64 {
                    return Err(Error::domain("max_rounds", format!("{max_rounds} is below the arm count {k}")));
                }
                if !(radius_multiplier.is_finite() && radius_multiplier > 0.0) {
                    return Err(Error::domain("radius_multiplier", format!("{radius_multiplier} is not positive")));
                }
                Ok(())
            }
        }
    }
}

/// What one trial contributes to a [`Report`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Loss (fixed budget) or correctness (fixed confidence), in `{0, 1}`.
    pub value: u8,
    /// Always true for fixed-budget trials.
    pub stopped: bool,
    /// Total pulls made.
    pub stopping_time: u64,
    pub pulls: Vec<u64>,
}

pub fn run_trial(config: &ExperimentConfig, index: u64) -> Result<TrialOutcome> {
    let mut rng = derive_stream(config.master_seed, index);
    let inst = &config.instance;
    match config.setting {
        SettingSpec::FixedBudget { budget } => {
            let r = run_fixed_budget(inst, config.eps, budget, &mut rng)?;
            Ok(TrialOutcome { value: r.loss(inst)?, stopped: true, stopping_time: budget, pulls: r.pulls_final })
        }
        SettingSpec::FixedConfidence { delta, max_rounds, radius_multiplier } => {
            let opts = FcOptions { max_rounds, radius_multiplier };
            let r = run_fixed_confidence(inst, config.eps, delta, &mut rng, opts)?;
            Ok(TrialOutcome {
                value: fc_correct(&r, inst)? as u8,
                stopped: r.stopped,
                stopping_time: r.stopping_time,
                pulls: r.pulls_final,
            })
        }
    }
}

/// Runs every trial and returns the outcomes in trial order. The first
/// failing trial (by index) aborts the batch.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::domain("workers", e.to_string()))?;
    let results: Vec<Result<TrialOutcome>> =
        pool.install(|| (0..config.n_trials).into_par_iter().map(|i| run_trial(config, i)).collect());
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Trial { index: i as u64, source: Box::new(e) }))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingStats {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl StoppingStats {
    /// Median averages the two middle values for even counts; p95 is the
    /// nearest-rank 95th percentile.
    fn from_times(times: &[u64]) -> Self {
        let mut sorted = times.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let mean = sorted.iter().map(|&t| t as u128).sum::<u128>() as f64 / n as f64;
        let median =
            if n % 2 == 1 { sorted[n / 2] as f64 } else { (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0 };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Self { mean, median, p95: sorted[rank - 1] as f64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub setting: Setting,
    pub eps: f64,
    pub n_trials: u64,
    pub master_seed: u64,
    /// Mean loss (fixed budget) or correctness rate (fixed confidence).
    pub estimate: f64,
    /// Binomial standard error `sqrt(p̂(1 − p̂)/n)`; `None` for a single trial.
    pub stderr: Option<f64>,
    pub stopping_time: Option<StoppingStats>,
    /// Fraction of fixed-confidence runs that stopped before the round cap.
    pub stopped_rate: Option<f64>,
    /// Fraction of fixed-confidence runs that stopped within the explicit upper bound.
    pub within_upper_bound_rate: Option<f64>,
    pub mean_pulls: Vec<f64>,
    pub bounds: Vec<BoundReport>,
    pub wall_time: f64,
}

impl Report {
    pub fn bound(&self, formula_id: FormulaId, variant: Variant) -> Option<&BoundReport> {
        self.bounds.iter().find(|b| b.formula_id == formula_id && b.variant == variant)
    }

    /// Equality on everything except wall time.
    pub fn same_results(&self, other: &Report) -> bool {
        Report { wall_time: 0.0, ..self.clone() } == Report { wall_time: 0.0, ..other.clone() }
    }
}

/// Bound evaluations matching the configuration. Bounds outside their domain
/// (a budget under 2K, say) are left out.
pub fn config_bounds(config: &ExperimentConfig) -> Result<Vec<BoundReport>> {
    let k = config.instance.num_arms();
    let eps = config.eps;
    let view = privatized_view(&config.instance, eps, config.setting.setting())?;
    let h = view.h_eps;
    let mut out = Vec::new();
    match config.setting {
        SettingSpec::FixedBudget { budget } => {
            let t = budget as f64;
            if let Ok(b) = fb_upper_bound(h, k, budget) {
                out.push(b.report([("h_eps", h), ("K", k as f64), ("T", t)]));
            }
            for variant in [Variant::Stated, Variant::ProofFinalLine] {
                let b = fb_lower_bound(h, eps, budget, variant)?;
                out.push(b.report([("h_eps", h), ("eps", eps), ("T", t)]));
            }
        }
        SettingSpec::FixedConfidence { delta, .. } => {
            let b = fc_upper_bound(h, k, delta)?;
            out.push(b.report([("h_eps", h), ("K", k as f64), ("delta", delta)]));
            let b = fc_upper_bound_stylized(h, k, delta)?;
            out.push(b.report([("h_eps", h), ("K", k as f64), ("delta", delta)]));
            let b = fc_lower_bound(h, eps, delta)?;
            out.push(b.report([("h_eps", h), ("eps", eps), ("delta", delta)]));
        }
    }
    Ok(out)
}

pub fn aggregate(config: &ExperimentConfig, outcomes: &[TrialOutcome], wall_time: f64) -> Result<Report> {
    let n = outcomes.len();
    if n == 0 {
        return Err(Error::domain("n_trials", "no outcomes to aggregate"));
    }
    let nf = n as f64;
    let hits: u64 = outcomes.iter().map(|o| o.value as u64).sum();
    let estimate = hits as f64 / nf;
    let stderr = (n > 1).then(|| (estimate * (1.0 - estimate) / nf).sqrt());

    let k = config.instance.num_arms();
    let mut pull_sums = vec![0u64; k];
    for o in outcomes {
        for (s, p) in pull_sums.iter_mut().zip(&o.pulls) {
            *s += p;
        }
    }
    let mean_pulls = pull_sums.iter().map(|&s| s as f64 / nf).collect();
    let bounds = config_bounds(config)?;

    let (stopping_time, stopped_rate, within_upper_bound_rate) = match config.setting {
        SettingSpec::FixedBudget { .. } => (None, None, None),
        SettingSpec::FixedConfidence { .. } => {
            let times: Vec<u64> = outcomes.iter().map(|o| o.stopping_time).collect();
            let stopped = outcomes.iter().filter(|o| o.stopped).count();
            let ub = bounds
                .iter()
                .find(|b| b.formula_id == FormulaId::FcUpper && b.variant == Variant::ExplicitConstant)
                .map_or(f64::INFINITY, |b| b.value);
            let within = outcomes.iter().filter(|o| o.stopped && o.stopping_time as f64 <= ub).count();
            (Some(StoppingStats::from_times(&times)), Some(stopped as f64 / nf), Some(within as f64 / nf))
        }
    };

    Ok(Report {
        setting: config.setting.setting(),
        eps: config.eps,
        n_trials: n as u64,
        master_seed: config.master_seed,
        estimate,
        stderr,
        stopping_time,
        stopped_rate,
        within_upper_bound_rate,
        mean_pulls,
        bounds,
        wall_time,
    })
}

/// Runs `config.n_trials` independent trials and aggregates them.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let outcomes = run_trials(config)?;
    aggregate(config, &outcomes, start.elapsed().as_secs_f64())
}
