//! Acceptance battery. Prints one line per criterion and exits non-zero if
//! any enforced criterion fails. Run with `cargo test -p privthresh-core --test acceptance`.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use privthresh_core::bounds::{
    bernoulli_kl, bretagnolle_huber, fb_lower_bound, fb_upper_bound, fc_lower_bound, fc_upper_bound, private_kl_factor,
    quadratic_kl_surrogate, Variant,
};
use privthresh_core::env::privatized_view;
use privthresh_core::fixed_confidence::radius;
use privthresh_core::harness::SettingSpec;
use privthresh_core::privacy::{bern_param, dp_ratio_audit, privatize};
use privthresh_core::{
    derive_stream, exact_fb_oracle, monte_carlo, run_fixed_confidence, ExperimentConfig, FcOptions, FcResult, Instance,
    Setting,
};

const LN3: f64 = 1.098_612_288_668_109_8;

/// `Err` carries the reason a check failed.
type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn inst(means: &[f64], threshold: f64, tolerance: f64) -> Instance {
    Instance::new(means.to_vec(), threshold, tolerance).expect("valid instance")
}

fn fb_config(instance: Instance, eps: f64, budget: u64, n_trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        instance,
        eps,
        setting: SettingSpec::FixedBudget { budget },
        n_trials,
        master_seed: seed,
        workers: 0,
    }
}

fn fc_config(instance: Instance, eps: f64, delta: f64, n_trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        instance,
        eps,
        setting: SettingSpec::FixedConfidence { delta, max_rounds: 10_000_000, radius_multiplier: 1.0 },
        n_trials,
        master_seed: seed,
        workers: 0,
    }
}

fn mechanism() -> Check {
    let mut worst = 0.0f64;
    for eps in [0.0, 0.1, LN_2, 1.0, 5.0] {
        let e = eps.exp();
        for j in 0..=100 {
            let r = j as f64 / 100.0;
            let closed = (r * e + 1.0 - r) / (1.0 + e);
            worst = worst.max((bern_param(r, eps).unwrap() - closed).abs());
        }
        let audit = dp_ratio_audit(eps, 0.01).unwrap();
        let max_ratio = audit.max_ratio_one.max(audit.max_ratio_zero);
        ensure(audit.pass, || format!("audit failed at eps={eps}"))?;
        ensure((max_ratio - e).abs() <= 1e-9, || format!("eps={eps}: max ratio {max_ratio} vs {e}"))?;
    }
    ensure(worst <= 1e-12, || format!("closed-form deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}; audit ratios = e^eps"))
}

fn private_mean_stats() -> Check {
    let n = 1_000_000u64;
    let mut rng = derive_stream(2, 0);
    let ones = (0..n).filter(|_| privatize(0.8, LN3, &mut rng).unwrap().is_one()).count();
    let mean = ones as f64 / n as f64;
    let se = (0.65f64 * 0.35 / n as f64).sqrt();
    let z = (mean - 0.65) / se;
    ensure(z.abs() <= 3.0, || format!("mean {mean} is {z:.2} SE from 0.65"))?;
    Ok(format!("mean {mean:.5}, z = {z:.2}"))
}

fn oracle_equivalence() -> Check {
    let cases = [
        (vec![0.8], 2),
        (vec![0.8], 6),
        (vec![0.8], 10),
        (vec![0.2, 0.8], 4),
        (vec![0.2, 0.8], 8),
        (vec![0.2, 0.8], 12),
    ];
    let mut worst_z = 0.0f64;
    for (seed, (means, budget)) in cases.into_iter().enumerate() {
        let instance = inst(&means, 0.5, 0.0);
        let exact = exact_fb_oracle(&instance, LN3, budget).unwrap();
        let report = monte_carlo(&fb_config(instance, LN3, budget, 100_000, 300 + seed as u64)).unwrap();
        let se = report.stderr.unwrap();
        let diff = (report.estimate - exact).abs();
        ensure(diff <= 3.0 * se, || {
            format!("{means:?} T={budget}: mc {} vs exact {exact} (se {se})", report.estimate)
        })?;
        if se > 0.0 {
            worst_z = worst_z.max(diff / se);
        }
    }
    Ok(format!("6 configurations, worst |z| = {worst_z:.2}"))
}

fn fixed_budget_consistency() -> Check {
    let instance = inst(&[0.1, 0.9], 0.5, 0.0);
    let h = privatized_view(&instance, 2.0, Setting::FixedBudget).unwrap().h_eps;
    let ub = fb_upper_bound(h, 2, 3000).unwrap().value;
    let report = monte_carlo(&fb_config(instance.clone(), 2.0, 3000, 1000, 400)).unwrap();
    ensure(report.estimate == 0.0, || format!("{} errors in 1000 trials at T=3000", report.estimate * 1000.0))?;
    let mut checked = Vec::new();
    for (i, budget) in [200u64, 800, 3200].into_iter().enumerate() {
        let b = fb_upper_bound(h, 2, budget).unwrap();
        if b.vacuous {
            continue;
        }
        let r = monte_carlo(&fb_config(instance.clone(), 2.0, budget, 1000, 410 + i as u64)).unwrap();
        let se = r.stderr.unwrap();
        ensure(r.estimate <= b.value + 3.0 * se, || {
            format!("T={budget}: loss {} exceeds bound {} + 3·{se}", r.estimate, b.value)
        })?;
        checked.push(budget);
    }
    Ok(format!("H_eps = {h:.3}, bound {ub:.2e}, zero errors; bound checked at T in {checked:?}"))
}

fn fixed_confidence_consistency() -> Check {
    let instance = inst(&[0.2, 0.8], 0.5, 0.0);
    let h = privatized_view(&instance, LN3, Setting::FixedConfidence).unwrap().h_eps;
    let ub = fc_upper_bound(h, 2, 0.1).unwrap().value;
    let report = monte_carlo(&fc_config(instance, LN3, 0.1, 1000, 500)).unwrap();
    let within = report.within_upper_bound_rate.unwrap();
    ensure(report.estimate >= 0.88, || format!("correct rate {}", report.estimate))?;
    ensure(within >= 0.88, || format!("{within} of runs within {ub}"))?;
    let stats = report.stopping_time.unwrap();
    Ok(format!("correct {:.3}, within bound {ub:.1}: {within:.3}, mean T {:.0}", report.estimate, stats.mean))
}

fn bound_battery() -> Check {
    // (value, full-precision derivation, quoted figure, quoted significant digits)
    let fb_h = privatized_view(&inst(&[0.1, 0.9], 0.5, 0.0), 2.0, Setting::FixedBudget).unwrap().h_eps;
    let h_fc_lower = 200.0 / 9.0 * ((1.0f64.exp() + 1.0) / (1.0f64.exp() - 1.0)).powi(2);
    let h_fc_upper = 2.0 / (0.15f64 * 0.15);
    let cases: Vec<(&str, f64, f64, f64, usize)> = vec![
        (
            "fb upper",
            fb_upper_bound(fb_h, 2, 3000).unwrap().value,
            (-3000.0 / (4.0 * fb_h) + 4.0 * (3000f64.ln() + 1.0).ln()).exp(),
            5.1e-12,
            2,
        ),
        (
            "fb lower (proof line)",
            fb_lower_bound(1e4, 0.1, 100, Variant::ProofFinalLine).unwrap().value,
            0.25 * (-2.0 * 8.0 * 100.0 / 1e4 * (0.1f64.exp() + 1.0).powi(2) * (0.2f64).exp()).exp(),
            0.10514,
            5,
        ),
        (
            "fc upper",
            fc_upper_bound(h_fc_upper, 2, 0.1).unwrap().value,
            499.0 * (h_fc_upper / 36.0) * (8.0 * h_fc_upper / 36.0 / 0.1).ln() + 4.0,
            6516.8,
            5,
        ),
        ("fc upper (H~ = 1)", fc_upper_bound(10.0, 1, 0.5).unwrap().value, 499.0 * 8f64.ln() + 2.0, 1039.6, 5),
        (
            "fc lower",
            fc_lower_bound(h_fc_lower, 1.0, 0.05).unwrap().value,
            h_fc_lower * (0.95 * 20f64.ln() - LN_2) / (8.0 * (1.0f64.exp() + 1.0).powi(2)),
            2.025,
            4,
        ),
        ("kl(0.3, 0.7)", bernoulli_kl(0.3, 0.7), 0.4 * (7.0f64 / 3.0).ln(), 0.33895, 5),
        ("kl(0.5, 0.25)", bernoulli_kl(0.5, 0.25), 0.5 * LN_2 + 0.5 * (2.0f64 / 3.0).ln(), 0.14384, 5),
        ("surrogate exact", quadratic_kl_surrogate(0.4).unwrap().exact, 0.4 * (1.4f64 / 0.6).ln(), 0.33895, 5),
        ("bretagnolle-huber", bretagnolle_huber(0.86607).unwrap(), 0.25 * (-0.86607f64).exp(), 0.10514, 5),
        ("kl factor ln 2", private_kl_factor(LN_2).unwrap(), 8.0, 8.0, 1),
        ("kl factor 2", private_kl_factor(2.0).unwrap(), 8.0 * (2.0f64.exp() - 1.0).powi(2), 326.6, 4),
        ("fb lower T=0", fb_lower_bound(50.0, 1.0, 0, Variant::Stated).unwrap().value, 0.25, 0.25, 2),
    ];
    let mut rounded = Vec::new();
    for (name, value, derived, quoted, digits) in &cases {
        let rel = ((value - derived) / derived).abs();
        ensure(rel <= 1e-4, || format!("{name}: {value} vs derivation {derived} (rel {rel:e})"))?;
        // Figures quoted to fewer digits than 1e-4 resolves must round to the quote.
        let rel_quoted = ((value - quoted) / quoted).abs();
        let shown = format!("{:.*e}", digits - 1, value);
        let want = format!("{:.*e}", digits - 1, quoted);
        ensure(rel_quoted <= 1e-4 || shown == want, || {
            format!("{name}: {value} is {rel_quoted:.1e} from quoted {quoted} and shows as {shown}")
        })?;
        if rel_quoted > 1e-4 {
            rounded.push(format!("{quoted:e} ({name}, exact {value:.5e})"));
        }
    }
    Ok(format!(
        "{} values match derivations to 1e-4; coarsely quoted, matched by rounding: {}",
        cases.len(),
        rounded.join(", ")
    ))
}

fn determinism() -> Check {
    let configs = [
        fb_config(inst(&[0.2, 0.45, 0.55, 0.8], 0.5, 0.02), 1.0, 400, 2000, 700),
        fc_config(inst(&[0.2, 0.8], 0.5, 0.0), LN3, 0.1, 300, 701),
    ];
    for base in configs {
        let reports: Vec<_> = [1usize, 2, 8]
            .into_iter()
            .map(|w| monte_carlo(&ExperimentConfig { workers: w, ..base.clone() }).unwrap())
            .collect();
        for r in &reports[1..] {
            ensure(r.same_results(&reports[0]), || format!("{:?} reports differ across workers", base.setting))?;
            ensure(r.estimate.to_bits() == reports[0].estimate.to_bits(), || "estimate bits differ".into())?;
        }
    }
    Ok("reports identical for 1, 2 and 8 workers".into())
}

/// True when the stopping rule holds at the run's final state.
fn stopping_rule_holds(r: &FcResult, delta: f64) -> bool {
    let k = r.pulls_final.len();
    r.mu_hat_final.iter().zip(&r.pulls_final).all(|(&m, &n)| {
        let rad = radius(k, r.stopping_time, delta, n).unwrap();
        if m >= r.tau_eps {
            m - rad >= r.tau_eps
        } else {
            m + rad < r.tau_eps
        }
    })
}

const CAP: u64 = 100_000;
const RUNS: u64 = 200;

/// Stop or cap counts for a batch of runs; errors if any run breaks the contract.
fn degenerate_batch(instance: &Instance, eps: f64, seed: u64) -> Result<(u64, u64), String> {
    let (mut capped, mut stopped) = (0, 0);
    for i in 0..RUNS {
        let mut rng = derive_stream(seed, i);
        let r = run_fixed_confidence(instance, eps, 0.1, &mut rng, FcOptions::with_max_rounds(CAP)).unwrap();
        if r.stopped {
            ensure(stopping_rule_holds(&r, 0.1), || format!("run {i} stopped without the rule holding"))?;
            stopped += 1;
        } else {
            ensure(r.stopping_time == CAP, || format!("run {i} unstopped at t={}", r.stopping_time))?;
            capped += 1;
        }
    }
    Ok((capped, stopped))
}

fn degenerate_contract() -> Check {
    let mut parts = Vec::new();
    for (name, instance, eps, seed) in
        [("eps=0", inst(&[0.2, 0.8], 0.5, 0.0), 0.0, 800), ("zero gap", inst(&[0.5], 0.5, 0.0), LN3, 801)]
    {
        let (capped, stopped) = degenerate_batch(&instance, eps, seed)?;
        parts.push(format!("{name}: {capped} capped, {stopped} stopped by rule"));
    }
    Ok(format!("no false stop, every cap returns stopped=false ({})", parts.join("; ")))
}

fn degenerate_always_capped() -> Check {
    let mut stopped_early = Vec::new();
    for (name, instance, eps, seed) in
        [("eps=0", inst(&[0.2, 0.8], 0.5, 0.0), 0.0, 800), ("zero gap", inst(&[0.5], 0.5, 0.0), LN3, 801)]
    {
        let (_, stopped) = degenerate_batch(&instance, eps, seed)?;
        if stopped > 0 {
            stopped_early.push(format!("{name}: {stopped}/{RUNS} runs met the stopping rule before the cap"));
        }
    }
    ensure(stopped_early.is_empty(), || stopped_early.join("; "))?;
    Ok(format!("all {RUNS} runs per case reached the cap"))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
    /// Reported but not enforced: the claim is probabilistic for the algorithm
    /// as specified (see README, "Known acceptance gaps").
    advisory: bool,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: "1", name: "mechanism correctness", limit: secs(1), run: mechanism, advisory: false },
        Criterion { id: "2", name: "privatized mean", limit: secs(5), run: private_mean_stats, advisory: false },
        Criterion { id: "3", name: "oracle equivalence", limit: secs(120), run: oracle_equivalence, advisory: false },
        Criterion {
            id: "4",
            name: "fixed-budget bound consistency",
            limit: secs(120),
            run: fixed_budget_consistency,
            advisory: false,
        },
        Criterion {
            id: "5",
            name: "fixed-confidence bound consistency",
            limit: secs(180),
            run: fixed_confidence_consistency,
            advisory: false,
        },
        Criterion { id: "6", name: "bound hand-check battery", limit: secs(1), run: bound_battery, advisory: false },
        Criterion { id: "7", name: "determinism", limit: secs(30), run: determinism, advisory: false },
        Criterion {
            id: "8a",
            name: "degenerate runs never falsely stop",
            limit: secs(30),
            run: degenerate_contract,
            advisory: false,
        },
        Criterion {
            id: "8b",
            name: "degenerate runs always hit max_rounds",
            limit: secs(30),
            run: degenerate_always_capped,
            advisory: true,
        },
    ];

    let mut failed = 0;
    for c in criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; took {elapsed:.2?} > {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({}) [{elapsed:.2?}]: {detail}", c.id, c.name),
            Err(why) => {
                let tag = if c.advisory { " (known, not enforced)" } else { "" };
                println!("FAIL{tag} criterion {} ({}) [{elapsed:.2?}]: {why}", c.id, c.name);
                if !c.advisory {
                    failed += 1;
                }
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} enforced criteria failed");
        ExitCode::FAILURE
    }
}
