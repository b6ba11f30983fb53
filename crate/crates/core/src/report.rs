//! Check records shared by the diagnostic modules.
//!
//! A check is a measured value compared against a threshold; verdicts
//! are derived, never stored independently, so a report can always be
//! re-validated from its numbers.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Direction of a threshold comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    /// Pass iff `value <= threshold`.
    #[serde(rename = "<=")]
    Le,
    /// Pass iff `value >= threshold`.
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One measured quantity with its acceptance condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Stable machine-readable name, e.g. `lap.locality.x->z`.
    pub name: String,
    /// Human-readable statement of what the number witnesses.
    pub anchor: String,
    pub value: f64,
    pub cmp: Cmp,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str, value: f64, cmp: Cmp, threshold: f64) -> Self {
        let verdict = match cmp {
            Cmp::Le if value <= threshold => Verdict::Pass,
            Cmp::Ge if value >= threshold => Verdict::Pass,
            _ => Verdict::Fail,
        };
        CheckRecord {
            name: String::from(name),
            anchor: String::from(anchor),
            value,
            cmp,
            threshold,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Result of a self-contained demonstration: named checks plus
/// free-form flags (e.g. "degenerate configuration").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub checks: Vec<CheckRecord>,
    pub flags: Vec<String>,
}

impl DemoReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_comparison() {
        assert!(CheckRecord::new("a", "", 1e-9, Cmp::Le, 1e-6).passed());
        assert!(!CheckRecord::new("b", "", 1e-3, Cmp::Le, 1e-6).passed());
        assert!(CheckRecord::new("c", "", 0.5, Cmp::Ge, 0.1).passed());
        assert!(!CheckRecord::new("d", "", 0.05, Cmp::Ge, 0.1).passed());
    }

    #[test]
    fn boundary_counts_as_pass() {
        assert!(CheckRecord::new("e", "", 0.1, Cmp::Ge, 0.1).passed());
        assert!(CheckRecord::new("f", "", 0.1, Cmp::Le, 0.1).passed());
    }
}
