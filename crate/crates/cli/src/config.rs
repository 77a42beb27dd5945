//! Experiment documents: an `ExperimentConfig` plus an optional sweep.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use privthresh_core::harness::SettingSpec;
use privthresh_core::{ExperimentConfig, Instance};
use serde::Deserialize;

pub const SEED_VAR: &str = "PRIVTHRESH_SEED";
pub const WORKERS_VAR: &str = "PRIVTHRESH_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
pub enum Axis {
    #[serde(rename = "T")]
    Budget,
    #[serde(rename = "eps")]
    Eps,
    #[serde(rename = "delta")]
    Delta,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    axis: Axis,
    values: Vec<f64>,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    instance: Instance,
    eps: f64,
    setting: SettingSpec,
    n_trials: u64,
    master_seed: u64,
    #[serde(default)]
    workers: usize,
    #[serde(default)]
    sweep: Option<SweepDoc>,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub output_path: Option<PathBuf>,
}

impl SweepSpec {
    /// The single-point sweep over the setting's own axis (`T` or `delta`).
    fn single(base: ExperimentConfig) -> Self {
        let (axis, value) = match base.setting {
            SettingSpec::FixedBudget { budget } => (Axis::Budget, budget as f64),
            SettingSpec::FixedConfidence { delta, .. } => (Axis::Delta, delta),
        };
        Self { base, axis, values: vec![value], output_path: None }
    }

    /// One validated config per axis value, in sweep order.
    pub fn points(&self) -> Result<Vec<(f64, ExperimentConfig)>> {
        self.values
            .iter()
            .map(|&v| {
                let mut cfg = self.base.clone();
                match (self.axis, &mut cfg.setting) {
                    (Axis::Eps, _) => cfg.eps = v,
                    (Axis::Budget, SettingSpec::FixedBudget { budget }) => {
                        if !(v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
                            bail!("sweep value {v} is not a valid budget T");
                        }
                        *budget = v as u64;
                    }
                    (Axis::Delta, SettingSpec::FixedConfidence { delta, .. }) => *delta = v,
                    (axis, setting) => bail!("sweep axis {axis:?} does not apply to setting {:?}", setting.setting()),
                }
                if let SettingSpec::FixedBudget { budget } = cfg.setting {
                    let k = cfg.instance.num_arms() as u64;
                    if budget < k {
                        bail!("budget T={budget} is below the arm count K={k}; the fixed-budget guarantee requires T >= 2K");
                    }
                }
                cfg.validate().with_context(|| format!("sweep point {v}"))?;
                Ok((v, cfg))
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.values.is_empty() {
            bail!("sweep.values must not be empty");
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            bail!("sweep.values must be strictly monotone");
        }
        Ok(())
    }
}

fn parse_env<T: std::str::FromStr>(name: &str) -> Result<Option<T>> {
    match std::env::var(name) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow::anyhow!("environment variable {name}={raw:?} is not a valid non-negative integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context(name.to_string()),
    }
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let doc: ConfigDoc = serde_json::from_str(text).context("invalid config")?;
    let mut base = ExperimentConfig {
        instance: doc.instance,
        eps: doc.eps,
        setting: doc.setting,
        n_trials: doc.n_trials,
        master_seed: doc.master_seed,
        workers: doc.workers,
    };
    if let Some(seed) = parse_env(SEED_VAR)? {
        base.master_seed = seed;
    }
    if let Some(workers) = parse_env(WORKERS_VAR)? {
        base.workers = workers;
    }
    let spec = match doc.sweep {
        Some(s) => SweepSpec { base, axis: s.axis, values: s.values, output_path: s.output },
        None => SweepSpec::single(base),
    };
    spec.check()?;
    Ok(spec)
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_sweep(&text)
}
