use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use privthresh_core::bounds::{
    fb_lower_bound, fb_upper_bound, fc_lower_bound, fc_upper_bound, fc_upper_bound_stylized, BoundReport, FormulaId,
    Variant,
};
use privthresh_core::env::privatized_view;
use privthresh_core::harness::{write_fb_csv, write_fc_csv, FbRow, FcRow, SettingSpec};
use privthresh_core::privacy::dp_ratio_audit;
use privthresh_core::{monte_carlo, Instance, Report, Setting};
use serde::Serialize;

use crate::config::SweepSpec;
use crate::Failure;

/// Share of capped runs above which the CSV gains a `stopped_rate` column.
const CAP_WARN_RATE: f64 = 0.01;

fn bound_value(report: &Report, id: FormulaId, variant: Variant) -> f64 {
    report.bound(id, variant).map_or(f64::NAN, |b| b.value)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn fixed_budget(spec: &SweepSpec, output: Option<&Path>) -> Result<(), Failure> {
    let points = spec.points().map_err(Failure::Usage)?;
    if let Some((_, cfg)) = points.iter().find(|(_, c)| c.setting.setting() != Setting::FixedBudget) {
        return Err(Failure::usage(format!("setting {:?} is not fixed_budget", cfg.setting.setting())));
    }
    let k = spec.base.instance.num_arms() as u64;
    let mut rows = Vec::with_capacity(points.len());
    for (axis_value, cfg) in &points {
        if let SettingSpec::FixedBudget { budget } = cfg.setting {
            if budget < 2 * k {
                eprintln!(
                    "warning: budget T={budget} is below 2K={}; the upper-bound guarantee requires T >= 2K",
                    2 * k
                );
            }
        }
        let report = monte_carlo(cfg).map_err(|e| Failure::Runtime(e.into()))?;
        rows.push(FbRow {
            axis_value: *axis_value,
            estimate: report.estimate,
            stderr: report.stderr.unwrap_or(f64::NAN),
            ub_theorem1: bound_value(&report, FormulaId::FbUpper, Variant::Stated),
            lb_theorem2: bound_value(&report, FormulaId::FbLower, Variant::Stated),
            n_trials: report.n_trials,
            seed: report.master_seed,
        });
    }
    let out = open_output(output.or(spec.output_path.as_deref())).map_err(Failure::Runtime)?;
    write_fb_csv(out, &rows).map_err(|e| Failure::Runtime(e.into()))
}

pub fn fixed_confidence(spec: &SweepSpec, output: Option<&Path>) -> Result<(), Failure> {
    let points = spec.points().map_err(Failure::Usage)?;
    if let Some((_, cfg)) = points.iter().find(|(_, c)| c.setting.setting() != Setting::FixedConfidence) {
        return Err(Failure::usage(format!("setting {:?} is not fixed_confidence", cfg.setting.setting())));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut capped = false;
    for (axis_value, cfg) in &points {
        let report = monte_carlo(cfg).map_err(|e| Failure::Runtime(e.into()))?;
        let stats = report.stopping_time.expect("fixed-confidence reports carry stopping times");
        let stopped_rate = report.stopped_rate.unwrap_or(1.0);
        if 1.0 - stopped_rate > CAP_WARN_RATE {
            capped = true;
            eprintln!(
                "warning: at axis value {axis_value}, {:.1}% of trials hit max_rounds before stopping",
                100.0 * (1.0 - stopped_rate)
            );
        }
        rows.push(FcRow {
            axis_value: *axis_value,
            correct_rate: report.estimate,
            stderr: report.stderr.unwrap_or(f64::NAN),
            mean_t: stats.mean,
            median_t: stats.median,
            p95_t: stats.p95,
            ub_499: bound_value(&report, FormulaId::FcUpper, Variant::ExplicitConstant),
            lb_theorem4: bound_value(&report, FormulaId::FcLower, Variant::Stated),
            n_trials: report.n_trials,
            seed: report.master_seed,
            stopped_rate: Some(stopped_rate),
        });
    }
    let out = open_output(output.or(spec.output_path.as_deref())).map_err(Failure::Runtime)?;
    write_fc_csv(out, &rows, capped).map_err(|e| Failure::Runtime(e.into()))
}

/// Where the complexity comes from in `bounds`.
pub enum Complexity {
    Direct { h_eps: f64, arms: usize },
    Instance(Instance),
}

#[derive(Serialize)]
struct ComplexityOut {
    #[serde(with = "privthresh_core::ext_float")]
    fixed_budget: f64,
    #[serde(with = "privthresh_core::ext_float")]
    fixed_confidence: f64,
}

#[derive(Serialize)]
struct BoundsOut {
    arms: usize,
    eps: f64,
    budget: u64,
    delta: f64,
    h_eps: ComplexityOut,
    bounds: Vec<BoundReport>,
}

pub fn bounds(source: Complexity, eps: f64, budget: u64, delta: f64) -> Result<(), Failure> {
    let usage = |e: privthresh_core::Error| Failure::Usage(e.into());
    let (h_fb, h_fc, k) = match source {
        Complexity::Direct { h_eps, arms } => (h_eps, h_eps, arms),
        Complexity::Instance(inst) => (
            privatized_view(&inst, eps, Setting::FixedBudget).map_err(usage)?.h_eps,
            privatized_view(&inst, eps, Setting::FixedConfidence).map_err(usage)?.h_eps,
            inst.num_arms(),
        ),
    };
    let (t, kf) = (budget as f64, k as f64);
    let bounds = vec![
        fb_upper_bound(h_fb, k, budget).map_err(usage)?.report([("h_eps", h_fb), ("K", kf), ("T", t)]),
        fb_lower_bound(h_fb, eps, budget, Variant::Stated).map_err(usage)?.report([
            ("h_eps", h_fb),
            ("eps", eps),
            ("T", t),
        ]),
        fb_lower_bound(h_fb, eps, budget, Variant::ProofFinalLine).map_err(usage)?.report([
            ("h_eps", h_fb),
            ("eps", eps),
            ("T", t),
        ]),
        fc_upper_bound(h_fc, k, delta).map_err(usage)?.report([("h_eps", h_fc), ("K", kf), ("delta", delta)]),
        fc_upper_bound_stylized(h_fc, k, delta).map_err(usage)?.report([("h_eps", h_fc), ("K", kf), ("delta", delta)]),
        fc_lower_bound(h_fc, eps, delta).map_err(usage)?.report([("h_eps", h_fc), ("eps", eps), ("delta", delta)]),
    ];
    let out = BoundsOut {
        arms: k,
        eps,
        budget,
        delta,
        h_eps: ComplexityOut { fixed_budget: h_fb, fixed_confidence: h_fc },
        bounds,
    };
    print_json(&out)
}

pub fn audit(eps: f64, grid_step: f64) -> Result<(), Failure> {
    let report = dp_ratio_audit(eps, grid_step).map_err(|e| Failure::Usage(e.into()))?;
    print_json(&report)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Runtime(anyhow::anyhow!("privacy audit failed at eps = {eps}")))
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.into()))?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Runtime(e.into())),
        _ => Ok(()),
    }
}
