use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use privthresh_core::harness::{read_fb_csv, read_fc_csv};
use tempfile::TempDir;

const LN3: &str = "1.0986122886681098";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_privthresh"));
    cmd.env_remove("PRIVTHRESH_SEED").env_remove("PRIVTHRESH_WORKERS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fb_doc(means: &str, sweep: &str) -> String {
    format!(
        r#"{{
            "instance": {{"means": {means}, "threshold": 0.5, "tolerance": 0.0}},
            "eps": 2.0,
            "setting": {{"kind": "fixed_budget", "T": 100}},
            "n_trials": 100,
            "master_seed": 11,
            "workers": 2
            {sweep}
        }}"#
    )
}

fn fc_doc(delta: &str, sweep: &str) -> String {
    format!(
        r#"{{
            "instance": {{"means": [0.2, 0.8], "threshold": 0.5, "tolerance": 0.0}},
            "eps": {LN3},
            "setting": {{"kind": "fixed_confidence", "delta": {delta}, "max_rounds": 1000000}},
            "n_trials": 100,
            "master_seed": 12
            {sweep}
        }}"#
    )
}

#[test]
fn fixed_budget_sweep_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write_config(&dir, "fb.json", &fb_doc("[0.1, 0.9]", r#","sweep": {"axis": "T", "values": [200, 800, 3200]}"#));
    let out = dir.path().join("fb.csv");
    let o = run(&["fixed-budget", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "axis_value,estimate,stderr,ub_theorem1,lb_theorem2,n_trials,seed");
    let rows = read_fb_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r.axis_value).collect::<Vec<_>>(), vec![200.0, 800.0, 3200.0]);
    assert!(rows.iter().all(|r| r.n_trials == 100 && r.seed == 11));
    assert!(rows[2].ub_theorem1 < 1e-11);
}

#[test]
fn sweep_output_path_from_config() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("from_config.csv");
    let sweep = format!(r#","sweep": {{"axis": "eps", "values": [0.5, 1.0], "output": {:?}}}"#, out.to_str().unwrap());
    let cfg = write_config(&dir, "fb.json", &fb_doc("[0.1, 0.9]", &sweep));
    let o = run(&["fixed-budget", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert_eq!(read_fb_csv(fs::File::open(&out).unwrap()).unwrap().len(), 2);
}

#[test]
fn stdout_output_is_deterministic_and_env_overrides_apply() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fb.json", &fb_doc("[0.3, 0.45, 0.6]", ""));
    let a = bin().args(["fixed-budget", &cfg]).env("PRIVTHRESH_WORKERS", "1").output().unwrap();
    let b = bin().args(["fixed-budget", &cfg]).env("PRIVTHRESH_WORKERS", "4").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = bin().args(["fixed-budget", &cfg]).env("PRIVTHRESH_SEED", "999").output().unwrap();
    let rows = read_fb_csv(c.stdout.as_slice()).unwrap();
    assert_eq!(rows[0].seed, 999);
    let bad = bin().args(["fixed-budget", &cfg]).env("PRIVTHRESH_SEED", "abc").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("PRIVTHRESH_SEED"));
}

#[test]
fn missing_threshold_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", &fb_doc("[0.1, 0.9]", "").replace(r#""threshold": 0.5, "#, ""));
    let o = run(&["fixed-budget", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threshold"), "{}", stderr(&o));
}

#[test]
fn unreadable_config_is_a_config_error() {
    let o = run(&["fixed-budget", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_below_arm_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write_config(&dir, "fb.json", &fb_doc("[0.1, 0.3, 0.7, 0.9]", r#","sweep": {"axis": "T", "values": [3]}"#));
    let o = run(&["fixed-budget", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("T >= 2K"), "{}", stderr(&o));
}

#[test]
fn budget_below_twice_arm_count_warns() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write_config(&dir, "fb.json", &fb_doc("[0.1, 0.3, 0.7, 0.9]", r#","sweep": {"axis": "T", "values": [6]}"#));
    let o = run(&["fixed-budget", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let rows = read_fb_csv(o.stdout.as_slice()).unwrap();
    assert!(rows[0].ub_theorem1.is_nan());
}

#[test]
fn wrong_command_for_setting_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fc.json", &fc_doc("0.1", ""));
    assert_eq!(run(&["fixed-budget", &cfg]).status.code(), Some(2));
}

#[test]
fn fixed_confidence_sweep_over_delta() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write_config(&dir, "fc.json", &fc_doc("0.1", r#","sweep": {"axis": "delta", "values": [0.2, 0.1, 0.05]}"#));
    let o = run(&["fixed-confidence", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "axis_value,correct_rate,stderr,mean_T,median_T,p95_T,ub_499,lb_theorem4,n_trials,seed"
    );
    let rows = read_fc_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.correct_rate >= 0.8 && r.stopped_rate.is_none()));
    assert!(rows.windows(2).all(|w| w[0].ub_499 < w[1].ub_499));
}

#[test]
fn delta_outside_open_interval_is_rejected() {
    let dir = TempDir::new().unwrap();
    for delta in ["1.0", "0.0"] {
        let cfg = write_config(&dir, "fc.json", &fc_doc(delta, ""));
        let o = run(&["fixed-confidence", &cfg]);
        assert_eq!(o.status.code(), Some(2), "delta {delta}: {}", stderr(&o));
        assert!(stderr(&o).contains("delta"));
    }
}

#[test]
fn capped_runs_add_stopped_rate_column() {
    let dir = TempDir::new().unwrap();
    let doc = fc_doc("0.1", "").replace(LN3, "0.0").replace("1000000", "2000");
    let cfg = write_config(&dir, "fc.json", &doc);
    let o = run(&["fixed-confidence", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("max_rounds"));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",stopped_rate"));
    let rows = read_fc_csv(text.as_bytes()).unwrap();
    let rate = rows[0].stopped_rate.unwrap();
    assert!(rate < 0.99);
    assert!(rows[0].ub_499.is_infinite() && rows[0].lb_theorem4.is_infinite());
}

fn bounds_json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn find<'a>(v: &'a serde_json::Value, formula: &str, variant: &str) -> &'a serde_json::Value {
    v["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["formula_id"] == formula && b["variant"] == variant)
        .unwrap_or_else(|| panic!("no {formula}/{variant}"))
}

#[test]
fn bounds_for_instance() {
    let v = bounds_json(&[
        "bounds",
        "--means",
        "0.1,0.9",
        "--threshold",
        "0.5",
        "--eps",
        "2",
        "-T",
        "3000",
        "--delta",
        "0.1",
    ]);
    let ub = find(&v, "fb_upper", "stated")["value"].as_f64().unwrap();
    assert!((ub / 5.059e-12 - 1.0).abs() < 1e-3, "{ub}");
    for (f, var) in [
        ("fb_lower", "stated"),
        ("fb_lower", "proof_final_line"),
        ("fc_upper", "explicit_constant"),
        ("fc_upper", "stylized"),
        ("fc_lower", "stated"),
    ] {
        find(&v, f, var);
    }
}

#[test]
fn bounds_at_zero_privacy_budget_and_large_delta() {
    let v = bounds_json(&[
        "bounds",
        "--means",
        "0.1,0.9",
        "--threshold",
        "0.5",
        "--eps",
        "0",
        "-T",
        "3000",
        "--delta",
        "0.9",
    ]);
    assert_eq!(v["h_eps"]["fixed_budget"], "inf");
    let fc_lower = find(&v, "fc_lower", "stated");
    assert_eq!((fc_lower["value"].as_f64(), fc_lower["vacuous"].as_bool()), (Some(0.0), Some(true)));
    assert_eq!(find(&v, "fb_upper", "stated")["vacuous"], true);
    let v = bounds_json(&["bounds", "--h-eps", "inf", "--arms", "2", "--eps", "0", "-T", "3000", "--delta", "0.1"]);
    assert_eq!(find(&v, "fc_lower", "stated")["value"], "inf");
    assert_eq!(find(&v, "fc_upper", "explicit_constant")["value"], "inf");
}

#[test]
fn bounds_domain_errors() {
    let base = ["bounds", "--h-eps", "10", "--arms", "2", "--eps", "1"];
    let with = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        run(&a).status.code()
    };
    assert_eq!(with(&["-T", "3", "--delta", "0.1"]), Some(2));
    assert_eq!(with(&["-T", "100", "--delta", "1.5"]), Some(2));
    assert_eq!(with(&["-T", "100"]), Some(2));
    assert_eq!(with(&["-T", "100", "--delta", "0.1"]), Some(0));
    let o = run(&["bounds", "--eps", "1", "-T", "100", "--delta", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audit_exit_codes() {
    let o = run(&["audit", "--eps", LN3]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert!((v["max_ratio_one"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    let v: serde_json::Value = serde_json::from_slice(&run(&["audit", "--eps", "0"]).stdout).unwrap();
    assert_eq!((v["max_ratio_one"].as_f64(), v["max_ratio_zero"].as_f64()), (Some(1.0), Some(1.0)));
    assert_eq!(run(&["audit", "--eps", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["audit", "--eps", "1", "--grid-step", "0"]).status.code(), Some(2));
    assert_eq!(run(&["audit"]).status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert!(Path::new(env!("CARGO_BIN_EXE_privthresh")).exists());
}
