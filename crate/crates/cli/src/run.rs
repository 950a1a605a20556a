//! Executes an experiment and writes its artifacts: one CSV per check and a
//! plain-text summary. Everything is computed before the first file is
//! written, so a failed run leaves no partial output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use robin_core::inequalities::{sweep, ShapeCheck, SweepResult};

use crate::config::ExperimentConfig;
use crate::{Failure, EXIT_VIOLATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckTally {
    pub check: ShapeCheck,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

#[derive(Debug)]
pub struct Outcome {
    pub result: SweepResult,
    pub tallies: Vec<CheckTally>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl Outcome {
    /// 0 when every row passed, 3 when any row hit a solver error, 4 when the
    /// rows ran but some inequality failed.
    pub fn exit_code(&self) -> u8 {
        if self.result.errors > 0 {
            3
        } else if self.result.failed > 0 {
            EXIT_VIOLATION
        } else {
            0
        }
    }
}

fn subset(result: &SweepResult, check: ShapeCheck) -> SweepResult {
    let rows: Vec<_> = result.rows.iter().filter(|r| r.check == check).cloned().collect();
    let passed = rows.iter().filter(|r| r.passed()).count();
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    SweepResult {
        family: result.family.clone(),
        failed: rows.len() - passed - errors,
        passed,
        errors,
        empirical_constant: if check == ShapeCheck::Quantitative { result.empirical_constant } else { None },
        rows,
    }
}

fn summarize(cfg: &ExperimentConfig, result: &SweepResult, tallies: &[CheckTally]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", cfg.name);
    let _ = writeln!(s, "family: {}", result.family);
    let _ = writeln!(s, "rows: {} passed, {} failed, {} errors", result.passed, result.failed, result.errors);
    for t in tallies {
        let rows: Vec<_> = result.rows.iter().filter(|r| r.check == t.check).collect();
        let deficits: Vec<f64> = rows.iter().filter_map(|r| r.report.as_ref().map(|r| r.deficit())).collect();
        let min = deficits.iter().copied().fold(f64::INFINITY, f64::min);
        let max_abs = deficits.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let _ = writeln!(
            s,
            "{}: {}/{} passed, {} failed, {} errors, min deficit {}, max |deficit| {}",
            t.check.name(),
            t.passed,
            t.rows,
            t.failed,
            t.errors,
            if deficits.is_empty() { "n/a".to_string() } else { robin_core::io::fmt_real(min) },
            if deficits.is_empty() { "n/a".to_string() } else { robin_core::io::fmt_real(max_abs) },
        );
    }
    if tallies.iter().any(|t| t.check == ShapeCheck::Quantitative) {
        let constant = result.empirical_constant.map(robin_core::io::fmt_real).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(s, "empirical constant (min lhs / asymmetry^2): {constant}");
    }
    for row in result.rows.iter().filter(|r| r.error.is_some()) {
        let _ = writeln!(
            s,
            "error: {} {} q={} beta={}: {}",
            row.check.name(),
            row.shape,
            row.q,
            row.beta,
            row.error.as_deref().unwrap_or("")
        );
    }
    let verdict = if result.all_passed() { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "status: {verdict}");
    s
}

/// Runs the sweep and writes `<check>.csv` plus `summary.txt` into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, Failure> {
    let result = sweep(&cfg.sweep)?;
    let tallies: Vec<CheckTally> = cfg
        .sweep
        .checks
        .iter()
        .map(|&check| {
            let part = subset(&result, check);
            CheckTally { check, rows: part.rows.len(), passed: part.passed, failed: part.failed, errors: part.errors }
        })
        .collect();
    let summary = summarize(cfg, &result, &tallies);

    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for t in &tallies {
        let path = out.join(format!("{}.csv", t.check.name()));
        subset(&result, t.check).write_csv(fs::File::create(&path)?)?;
        files.push(path);
    }
    let path = out.join("summary.txt");
    fs::write(&path, &summary)?;
    files.push(path);
    Ok(Outcome { result, tallies, files, summary })
}
