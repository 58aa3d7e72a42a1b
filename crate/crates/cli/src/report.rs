//! Scenario reports and their serializations.

use afc_core::calculus::Comparison;
use afc_core::Verdict;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `pass`, `fail` or `skipped-out-of-window`.
    pub verdict: String,
    pub detail: String,
    pub homology_lhs: Vec<usize>,
    pub homology_rhs: Vec<usize>,
    pub degrees: usize,
}

impl Check {
    pub fn from_comparison(name: impl Into<String>, c: Comparison) -> Check {
        let detail = match &c.verdict {
            Verdict::Pass => String::new(),
            Verdict::Fail(s) | Verdict::Skipped(s) => s.clone(),
        };
        Check { name: name.into(), verdict: c.verdict.label().into(), detail, homology_lhs: c.homology_lhs, homology_rhs: c.homology_rhs, degrees: c.degrees }
    }

    pub fn error(name: impl Into<String>, e: impl std::fmt::Display) -> Check {
        Check { name: name.into(), verdict: "fail".into(), detail: format!("error: {e}"), homology_lhs: Vec::new(), homology_rhs: Vec::new(), degrees: 0 }
    }

    pub fn is_fail(&self) -> bool {
        self.verdict == "fail"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub field: String,
    pub window: usize,
    pub checks: Vec<Check>,
    /// Zero unless timing was requested, so that reports stay reproducible.
    pub wall_ms: u64,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.checks.iter().any(Check::is_fail)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |v: &str| self.checks.iter().filter(|c| c.verdict == v).count();
        (count("pass"), count("fail"), count("skipped-out-of-window"))
    }
}

/// A single report as an object, several as an array.
pub fn to_json(reports: &[Report]) -> String {
    let mut s = match reports {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    }
    .expect("reports serialize");
    s.push('\n');
    s
}

/// Long-format homology tables: one row per check, side and degree.
pub fn to_csv(reports: &[Report]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "check", "verdict", "side", "degree", "dim"]).expect("in-memory write");
    for r in reports {
        for c in &r.checks {
            for (side, h) in [("lhs", &c.homology_lhs), ("rhs", &c.homology_rhs)] {
                for (deg, d) in h.iter().enumerate() {
                    w.write_record([r.scenario.as_str(), c.name.as_str(), c.verdict.as_str(), side, &deg.to_string(), &d.to_string()]).expect("in-memory write");
                }
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn to_text(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        let (p, f, s) = r.counts();
        out.push_str(&format!("{} [{}, window {}]: {p} pass, {f} fail, {s} skipped ({} ms)\n", r.scenario, r.field, r.window, r.wall_ms));
        for c in &r.checks {
            out.push_str(&format!("  {:<22} {}", c.verdict, c.name));
            if !c.detail.is_empty() {
                out.push_str(&format!(" ({})", c.detail));
            }
            out.push('\n');
        }
    }
    out
}
