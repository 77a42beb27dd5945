//! CSV schemas for sweep results.
//!
//! Non-applicable values (for example the standard error of a single trial,
//! or a bound outside its domain) are written as `NaN`; infinities as `inf`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const FB_HEADER: [&str; 7] = ["axis_value", "estimate", "stderr", "ub_theorem1", "lb_theorem2", "n_trials", "seed"];

pub const FC_HEADER: [&str; 10] = [
    "axis_value",
    "correct_rate",
    "stderr",
    "mean_T",
    "median_T",
    "p95_T",
    "ub_499",
    "lb_theorem4",
    "n_trials",
    "seed",
];

pub const STOPPED_RATE: &str = "stopped_rate";

#[derive(Clone, Debug, PartialEq)]
pub struct FbRow {
    pub axis_value: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub ub_theorem1: f64,
    pub lb_theorem2: f64,
    pub n_trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcRow {
    pub axis_value: f64,
    pub correct_rate: f64,
    pub stderr: f64,
    pub mean_t: f64,
    pub median_t: f64,
    pub p95_t: f64,
    pub ub_499: f64,
    pub lb_theorem4: f64,
    pub n_trials: u64,
    pub seed: u64,
    pub stopped_rate: Option<f64>,
}

/// Shortest round-tripping text, switching to exponent form for very small or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v.is_finite() && a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn parse_f64(field: &str, column: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::domain("csv", format!("column {column}: bad number {field:?}")))
}

fn parse_u64(field: &str, column: &str) -> Result<u64> {
    field.trim().parse().map_err(|_| Error::domain("csv", format!("column {column}: bad integer {field:?}")))
}

pub fn write_fb_csv<W: Write>(out: W, rows: &[FbRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FB_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.axis_value),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            fmt_f64(r.ub_theorem1),
            fmt_f64(r.lb_theorem2),
            r.n_trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes fixed-confidence rows; the `stopped_rate` column is appended when
/// `with_stopped_rate` is set (rows lacking a value get `NaN`).
pub fn write_fc_csv<W: Write>(out: W, rows: &[FcRow], with_stopped_rate: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = FC_HEADER.to_vec();
    if with_stopped_rate {
        header.push(STOPPED_RATE);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            fmt_f64(r.axis_value),
            fmt_f64(r.correct_rate),
            fmt_f64(r.stderr),
            fmt_f64(r.mean_t),
            fmt_f64(r.median_t),
            fmt_f64(r.p95_t),
            fmt_f64(r.ub_499),
            fmt_f64(r.lb_theorem4),
            r.n_trials.to_string(),
            r.seed.to_string(),
        ];
        if with_stopped_rate {
            rec.push(fmt_f64(r.stopped_rate.unwrap_or(f64::NAN)));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn check_header(got: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if got.iter().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(Error::domain("csv", format!("header {:?} does not match {:?}", got.iter().collect::<Vec<_>>(), expected)))
    }
}

pub fn read_fb_csv<R: Read>(input: R) -> Result<Vec<FbRow>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(r.headers()?, &FB_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| parse_f64(&rec[i], FB_HEADER[i]);
        rows.push(FbRow {
            axis_value: f(0)?,
            estimate: f(1)?,
            stderr: f(2)?,
            ub_theorem1: f(3)?,
            lb_theorem2: f(4)?,
            n_trials: parse_u64(&rec[5], FB_HEADER[5])?,
            seed: parse_u64(&rec[6], FB_HEADER[6])?,
        });
    }
    Ok(rows)
}

pub fn read_fc_csv<R: Read>(input: R) -> Result<Vec<FcRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let with_stopped = headers.len() == FC_HEADER.len() + 1;
    if with_stopped {
        let mut expected = FC_HEADER.to_vec();
        expected.push(STOPPED_RATE);
        check_header(&headers, &expected)?;
    } else {
        check_header(&headers, &FC_HEADER)?;
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| parse_f64(&rec[i], FC_HEADER[i]);
        rows.push(FcRow {
            axis_value: f(0)?,
            correct_rate: f(1)?,
            stderr: f(2)?,
            mean_t: f(3)?,
            median_t: f(4)?,
            p95_t: f(5)?,
            ub_499: f(6)?,
            lb_theorem4: f(7)?,
            n_trials: parse_u64(&rec[8], FC_HEADER[8])?,
            seed: parse_u64(&rec[9], FC_HEADER[9])?,
            stopped_rate: if with_stopped { Some(parse_f64(&rec[10], STOPPED_RATE)?) } else { None },
        });
    }
    Ok(rows)
}
