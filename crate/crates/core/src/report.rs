//! Plot-ready CSV tables and the analytic-versus-simulation comparison.

use std::fmt::Write;

use serde::Serialize;

use crate::analytics::{bounds_at, Evaluation};
use crate::error::Result;
use crate::simulator::{EstimatorSummary, SimResult, TraceRow};
use crate::sweep::{FrontierRow, SweepRow};

/// Formats with 12 significant digits, dropping trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding may carry into a new leading digit; that only adds a trailing digit.
        trim_zeros(&s)
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').expect("scientific notation");
        format!("{}e{exponent}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const SWEEP_HEADER: &str = "variable,value,A,F_bar,A_lower,A_upper,F_lower,F_upper,policy_label";

/// Sweep table. Rows that failed to evaluate are skipped and returned as diagnostics.
pub fn sweep_csv(rows: &[SweepRow]) -> (String, Vec<String>) {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    let mut diagnostics = Vec::new();
    for row in rows {
        match &row.outcome {
            Ok(v) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    row.variable.name(),
                    fmt_num(row.value),
                    fmt_num(v.metrics.availability),
                    fmt_num(v.metrics.avg_fidelity),
                    fmt_num(v.bounds.availability_lower),
                    fmt_num(v.bounds.availability_upper),
                    fmt_num(v.bounds.fidelity_lower),
                    fmt_num(v.bounds.fidelity_upper),
                    field(&row.policy_label)
                );
                for violation in &v.violations {
                    diagnostics.push(format!(
                        "{} = {}: bound violation: {violation}",
                        row.variable.name(),
                        fmt_num(row.value)
                    ));
                }
            }
            Err(e) => diagnostics.push(format!(
                "{} = {}: {} ({e})",
                row.variable.name(),
                fmt_num(row.value),
                e.kind()
            )),
        }
    }
    (out, diagnostics)
}

pub const FRONTIER_HEADER: &str = "policy_label,q,A,F_bar,A_lower,A_upper,F_lower,F_upper";

pub fn frontier_csv(rows: &[FrontierRow]) -> String {
    let mut out = String::from(FRONTIER_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            field(&r.policy_label),
            fmt_num(r.q),
            fmt_num(r.availability),
            fmt_num(r.avg_fidelity),
            fmt_num(r.bounds.availability_lower),
            fmt_num(r.bounds.availability_upper),
            fmt_num(r.bounds.fidelity_lower),
            fmt_num(r.bounds.fidelity_upper),
        );
    }
    out
}

/// Parses a frontier table back into rows of `(label, q, A, F_bar)`.
pub fn parse_frontier_csv(text: &str) -> Vec<(String, f64, f64, f64)> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            let num = |i: usize| cols[i].parse::<f64>().expect("numeric column");
            (cols[0].to_string(), num(1), num(2), num(3))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPoint {
    pub p_gen_star: f64,
    pub availability_lower: f64,
    pub availability_upper: f64,
    pub fidelity_lower: f64,
    pub fidelity_upper: f64,
}

/// Bound envelopes over a grid of effective generation probabilities.
pub fn bound_curve(p_con: f64, gamma: f64, f_new: f64, grid: &[f64]) -> Vec<BoundPoint> {
    grid.iter()
        .map(|&ps| {
            let b = bounds_at(ps, p_con, gamma, f_new);
            BoundPoint {
                p_gen_star: ps,
                availability_lower: b.availability_lower,
                availability_upper: b.availability_upper,
                fidelity_lower: b.fidelity_lower,
                fidelity_upper: b.fidelity_upper,
            }
        })
        .collect()
}

pub fn bounds_csv(points: &[BoundPoint]) -> String {
    let mut out = String::from("p_gen_star,A_lower,A_upper,F_lower,F_upper\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(p.p_gen_star),
            fmt_num(p.availability_lower),
            fmt_num(p.availability_upper),
            fmt_num(p.fidelity_lower),
            fmt_num(p.fidelity_upper)
        );
    }
    out
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("t,F,event\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.t, fmt_num(r.fidelity), r.event.as_str());
    }
    out
}

/// Simulations disagreeing with the closed form by more than this many standard errors fail.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub quantity: &'static str,
    pub estimator: &'static str,
    pub analytic: f64,
    pub simulated: Option<f64>,
    pub standard_error: f64,
    pub z: Option<f64>,
}

impl ComparisonRow {
    fn new(
        quantity: &'static str,
        estimator: &'static str,
        analytic: f64,
        summary: &EstimatorSummary,
    ) -> Self {
        let z = summary.pooled.map(|sim| {
            let diff = sim - analytic;
            if summary.standard_error > 0.0 {
                diff / summary.standard_error
            } else if diff.abs() <= 1e-12 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        });
        Self {
            quantity,
            estimator,
            analytic,
            simulated: summary.pooled,
            standard_error: summary.standard_error,
            z,
        }
    }

    pub fn passes(&self) -> bool {
        self.z.is_some_and(|z| z.abs() <= Z_THRESHOLD)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub policy_label: String,
    pub rows: Vec<ComparisonRow>,
    pub passed: bool,
}

pub fn compare(evaluation: &Evaluation, sim: &SimResult) -> ValidationReport {
    let m = &evaluation.metrics;
    let rows = vec![
        ComparisonRow::new("A", "consumer", m.availability, &sim.availability_consumer),
        ComparisonRow::new("A", "time_average", m.availability, &sim.availability_time),
        ComparisonRow::new("F_bar", "consumer", m.avg_fidelity, &sim.fidelity_consumer),
    ];
    let passed = rows.iter().all(ComparisonRow::passes);
    ValidationReport {
        policy_label: evaluation.policy_label.clone(),
        rows,
        passed,
    }
}

pub fn validation_csv(report: &ValidationReport) -> String {
    let mut out = String::from("quantity,estimator,analytic,simulated,standard_error,z,policy_label\n");
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.quantity,
            r.estimator,
            fmt_num(r.analytic),
            opt(r.simulated),
            fmt_num(r.standard_error),
            opt(r.z),
            field(&report.policy_label)
        );
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| crate::error::Error::Evaluation(e.to_string()))
}
