//! Tolerance checks behind `--assert` and the acceptance suite.

use std::fmt;

use qipp_core::orthocheck::AppendixRow;
use qipp_core::study::{RankRow, Study};

/// Rates are checked on this many trailing increments.
pub const EOC_WINDOW: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn fmt_rates(rates: &[Option<f64>]) -> String {
    let v: Vec<String> = rates.iter().map(|r| r.map_or("sat".into(), |r| format!("{r:.3}"))).collect();
    v.join(", ")
}

/// Rates of `column` over the trailing [`EOC_WINDOW`] increments lie in
/// `target +- tol`. A saturated increment fails.
pub fn eoc_check(study: &Study, column: &str, target: f64, tol: f64) -> Check {
    eoc_check_window(study, column, target, tol, EOC_WINDOW)
}

pub fn eoc_check_window(study: &Study, column: &str, target: f64, tol: f64, window: usize) -> Check {
    let name = format!("eoc {column} = {target} +- {tol}");
    let Some(j) = study.column(column) else {
        return Check::new(name, false, "no such column");
    };
    if study.rows.len() <= window {
        return Check::new(name, false, "too few levels");
    }
    let rates = study.last_eocs(j, window);
    let ok = rates.iter().all(|r| r.is_some_and(|r| (r - target).abs() <= tol));
    Check::new(name, ok, format!("last rates [{}]", fmt_rates(&rates)))
}

/// Rate of `column` on the final increment is at least `min`.
pub fn eoc_at_least(study: &Study, column: &str, min: f64) -> Check {
    let name = format!("eoc {column} >= {min}");
    let Some(r) = study.column(column).and_then(|j| study.terminal_eoc(j)) else {
        return Check::new(name, false, "no terminal rate");
    };
    Check::new(name, r >= min, format!("terminal rate {r:.3}"))
}

fn finest(study: &Study, column: &str) -> Option<f64> {
    Some(study.rows.last()?.errors[study.column(column)?])
}

pub fn interp_checks(study: &Study, p: usize) -> Vec<Check> {
    vec![eoc_check(study, "err", (p + 2) as f64, 0.2)]
}

pub fn mixed_checks(study: &Study) -> Vec<Check> {
    let mut out = vec![eoc_check(study, "err_u", 1.0, 0.15)];
    for c in ["err_stenberg", "err_j0", "err_i0", "err_pi0"] {
        out.push(eoc_check(study, c, 2.0, 0.2));
    }
    let (i0, st) = (finest(study, "err_i0"), finest(study, "err_stenberg"));
    let ok = matches!((i0, st), (Some(a), Some(b)) if a < b);
    out.push(Check::new("finest err_i0 < err_stenberg", ok, format!("{i0:?} vs {st:?}")));
    out
}

pub fn hdg_checks(study: &Study, p: usize) -> Vec<Check> {
    vec![eoc_check(study, "err_i0", (p + 2) as f64, 0.25)]
}

pub fn negproj_checks(study: &Study, p: usize) -> Vec<Check> {
    let mut out = vec![eoc_check(study, "err_hm1", (p + 2) as f64, 0.3)];
    match study.column("l2_ratio") {
        Some(j) => {
            let r: Vec<f64> = study.rows.iter().map(|row| row.errors[j]).collect();
            let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let ok = lo > 0.0 && hi / lo <= 10.0;
            out.push(Check::new("l2 ratio spread <= 10", ok, format!("min {lo:.3e}, max {hi:.3e}")));
        }
        None => out.push(Check::new("l2 ratio spread <= 10", false, "no such column")),
    }
    match study.column("idempotency") {
        Some(j) => {
            let worst = study.rows.iter().map(|row| row.errors[j]).fold(0.0, f64::max);
            out.push(Check::new("idempotent to 1e-9", worst <= 1e-9, format!("max defect {worst:.3e}")));
        }
        None => out.push(Check::new("idempotent to 1e-9", false, "no such column")),
    }
    out
}

pub fn rank_checks(rows: &[RankRow], trials: usize) -> Vec<Check> {
    let bad = rows.iter().filter(|r| r.kernel != 0).count();
    vec![Check::new(
        "trivial Gram kernel",
        bad == 0 && rows.len() == trials,
        format!("{} patches, {bad} with a kernel", rows.len()),
    )]
}

pub fn appendix_checks(rows: &[AppendixRow]) -> Vec<Check> {
    rows.iter()
        .map(|r| {
            let angle = r.angle.map_or(String::new(), |a| format!(", angle {a:.2e}"));
            Check::new(
                format!("{} (c={}, d={}, n={})", r.case, r.c, r.d, r.n),
                r.passes(),
                format!("dimension {} (expected {}){angle}", r.dimension, r.expected),
            )
        })
        .collect()
}
