//! Text, CSV and JSON renderings of command results.

use std::fmt::Write as _;

use indeptest::decision::{DecisionReport, TestKind};
use indeptest::oracle::MomentCheck;
use indeptest::simulation::TableRow;
use indeptest::StatisticReport;
use serde::Serialize;

/// One requested test on a dataset: a decision, or why there is none.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum TestEntry {
    Decision(DecisionReport<f64>),
    Failed { test_name: TestKind, error: String },
}

#[derive(Debug, Serialize)]
pub struct TestOutput {
    pub n: usize,
    pub p: usize,
    pub columns: Vec<String>,
    pub alpha: f64,
    pub statistics: StatisticReport<f64>,
    pub decisions: Vec<TestEntry>,
}

fn opt4(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

pub fn test_text(out: &TestOutput) -> String {
    let s = &out.statistics;
    let mut w = String::new();
    writeln!(w, "n = {}, p = {}, alpha = {}", out.n, out.p, out.alpha).unwrap();
    writeln!(w).unwrap();
    for (name, v) in [
        ("t", Some(s.t)),
        ("T", s.big_t),
        ("Q", s.q),
        ("t_star", s.t_star),
        ("T_star", s.big_t_star),
        ("t_c", s.t_c),
        ("T_c", s.big_t_c),
    ] {
        writeln!(w, "{name:<8}{:>14}", opt4(v)).unwrap();
    }
    writeln!(w).unwrap();
    writeln!(w, "{:<8}{:>12}{:>12}{:>12}{:>10}  decision", "test", "statistic", "calibrated", "threshold", "p_value")
        .unwrap();
    for d in &out.decisions {
        match d {
            TestEntry::Decision(d) => writeln!(
                w,
                "{:<8}{:>12.4}{:>12.4}{:>12.4}{:>10.4}  {}",
                d.test_name.name(),
                d.statistic,
                d.calibrated,
                d.threshold,
                d.p_value,
                if d.reject { "reject" } else { "accept" }
            ),
            TestEntry::Failed { test_name, error } => writeln!(w, "{:<8}  error: {error}", test_name.name()),
        }
        .unwrap();
    }
    w
}

pub fn test_csv(out: &TestOutput) -> String {
    let mut w = String::from("test,statistic,calibrated,threshold,alpha,p_value,reject,error\n");
    for d in &out.decisions {
        match d {
            TestEntry::Decision(d) => writeln!(
                w,
                "{},{},{},{},{},{},{},",
                d.test_name,
                d.statistic,
                d.calibrated,
                d.threshold,
                d.alpha.value(),
                d.p_value,
                d.reject
            ),
            TestEntry::Failed { test_name, error } => {
                writeln!(w, "{test_name},,,,{},,,\"{}\"", out.alpha, error.replace('"', "\"\""))
            }
        }
        .unwrap();
    }
    w
}

pub fn table_text(rows: &[TableRow<f64>]) -> String {
    let mut w = String::new();
    writeln!(
        w,
        "{:<8}{:>6}{:>6}{:>8}{:>8}{:>8}{:>12}{:>10}",
        "test", "n", "p", "rho", "alpha", "reps", "reject_rate", "mc_se"
    )
    .unwrap();
    for r in rows {
        write!(w, "{:<8}{:>6}{:>6}{:>8}{:>8}{:>8}", r.test.name(), r.n, r.p, r.rho, r.alpha, r.replications).unwrap();
        match (&r.error, r.reject_rate) {
            (_, Some(rate)) => writeln!(w, "{rate:>12.4}{:>10.4}", r.mc_se.unwrap_or(0.0)),
            (Some(e), None) => writeln!(w, "  error: {e}"),
            (None, None) => writeln!(w),
        }
        .unwrap();
    }
    w
}

pub fn checks_text(checks: &[MomentCheck]) -> String {
    let mut w = String::new();
    writeln!(
        w,
        "{:<24}{:>5}{:>10}{:>14}{:>14}{:>12}{:>10}{:>10}  result",
        "identity", "n", "reps", "analytic", "empirical", "std_error", "rel_err", "tol"
    )
    .unwrap();
    for c in checks {
        writeln!(
            w,
            "{:<24}{:>5}{:>10}{:>14.6e}{:>14.6e}{:>12.2e}{:>10}{:>10}  {}",
            c.identity.name(),
            c.n,
            c.replications,
            c.analytic,
            c.empirical,
            c.std_error,
            c.relative_error.map_or_else(|| "-".to_string(), |e| format!("{:.2}%", 100.0 * e)),
            c.tolerance.to_string(),
            if c.passed { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    w
}

pub fn checks_csv(checks: &[MomentCheck]) -> String {
    let mut w = String::from("identity,n,replications,analytic,empirical,std_error,relative_error,tolerance,passed\n");
    for c in checks {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            c.identity,
            c.n,
            c.replications,
            c.analytic,
            c.empirical,
            c.std_error,
            c.relative_error.map(|e| e.to_string()).unwrap_or_default(),
            c.tolerance,
            c.passed
        )
        .unwrap();
    }
    w
}
