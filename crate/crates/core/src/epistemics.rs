//! Finite-space support decomposition and episode scores.
//!
//! `popper_miller_decompose` splits the posterior shift
//! `P(H|E) - P(H)` into a deductive-overlap term and a countersupport
//! term: `P(H∧E)·P(¬E)/P(E) - P(H∧¬E)`. The identity is exact; the
//! decomposition shows the shift is a reweighting of content `H` shares
//! with `E`, never new support for the rest of `H`.
//!
//! The three episode scores are resource-normalized utilities over
//! declared logs:
//!
//! - **ECR** credits conjectures that change an interventional law and
//!   survive their severity-weighted test batteries.
//! - **CRX** credits interventional queries that became answerable and
//!   were validated.
//! - **SEY** credits mechanism-level edits by failed-falsification
//!   count and survival past a critical horizon.
//!
//! The toolkit scores declared episodes; it does not detect novelty or
//! closure, so novelty is an asserted flag on each conjecture.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fmath;
use crate::Result;

/// A finite outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteProbabilitySpace {
    pub outcomes: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl FiniteProbabilitySpace {
    pub fn new(outcomes: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probabilities.len() {
            return Err(CoreError::shape(
                outcomes.len(),
                probabilities.len(),
                "probability space",
            ));
        }
        if probabilities.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(CoreError::Validation("negative or non-finite probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if fmath::abs(total - 1.0) > 1e-12 {
            return Err(CoreError::Validation(format!(
                "probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(FiniteProbabilitySpace {
            outcomes,
            probabilities,
        })
    }

    /// Uniform space over `n` outcomes named `o0..o{n-1}`.
    pub fn uniform(n: usize) -> Self {
        FiniteProbabilitySpace {
            outcomes: (0..n).map(|i| format!("o{i}")).collect(),
            probabilities: alloc::vec![1.0 / n as f64; n],
        }
    }

    fn prob_of_indices(&self, event: &BTreeSet<usize>) -> f64 {
        event.iter().map(|&i| self.probabilities[i]).sum()
    }

    fn check_event(&self, event: &BTreeSet<usize>, name: &str) -> Result<()> {
        if let Some(&bad) = event.iter().find(|&&i| i >= self.outcomes.len()) {
            return Err(CoreError::Validation(format!(
                "event {name} references outcome index {bad}, space has {}",
                self.outcomes.len()
            )));
        }
        Ok(())
    }
}

/// The exact decomposition of a posterior shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopperMillerRecord {
    /// `P(H|E) - P(H)`.
    pub delta: f64,
    /// Deductive overlap: `P(H∧E)·P(¬E)/P(E)`.
    pub overlap: f64,
    /// Countersupport to unentailed content: `P(H∧¬E)`.
    pub countersupport: f64,
}

/// Decompose `P(H|E) - P(H)` over a finite space. Events are outcome
/// index sets. Requires `0 < P(E) < 1`.
pub fn popper_miller_decompose(
    space: &FiniteProbabilitySpace,
    h: &BTreeSet<usize>,
    e: &BTreeSet<usize>,
) -> Result<PopperMillerRecord> {
    space.check_event(h, "H")?;
    space.check_event(e, "E")?;
    let p_e = space.prob_of_indices(e);
    // The complement is summed directly so that P(E) = 1 is detected
    // exactly even when the probabilities only sum to 1 in floating
    // point.
    let not_e: BTreeSet<usize> = (0..space.outcomes.len()).filter(|i| !e.contains(i)).collect();
    let p_not_e = space.prob_of_indices(&not_e);
    if !(p_e > 0.0) || !(p_not_e > 0.0) {
        return Err(CoreError::Precondition(format!(
            "P(E) = {p_e}; the decomposition needs 0 < P(E) < 1"
        )));
    }
    let p_h = space.prob_of_indices(h);
    let h_and_e: BTreeSet<usize> = h.intersection(e).copied().collect();
    let p_h_and_e = space.prob_of_indices(&h_and_e);
    let h_not_e: BTreeSet<usize> = h.difference(e).copied().collect();
    let p_h_not_e = space.prob_of_indices(&h_not_e);
    Ok(PopperMillerRecord {
        delta: p_h_and_e / p_e - p_h,
        overlap: p_h_and_e * p_not_e / p_e,
        countersupport: p_h_not_e,
    })
}

/// One conjecture in an episode log: an asserted-novel explanatory
/// commitment with its test battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjecture {
    pub name: String,
    /// Asserted by the logger; deductive closure is not computed.
    pub novel: bool,
    pub changes_do_law: bool,
    /// `(severity in [0,1], survived)` per test.
    pub tests: Vec<(f64, bool)>,
}

/// One interventional query with answerability flags before/after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub name: String,
    pub weight: f64,
    pub answerable_before: bool,
    pub answerable_after: bool,
    pub validated: bool,
}

/// One mechanism-level edit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edit {
    pub name: String,
    /// Falsifying tests passed (failed to falsify).
    pub fail_count: u64,
    /// Survived the declared critical horizon.
    pub hold: bool,
}

/// A declarative record of one learning episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub conjectures: Vec<Conjecture>,
    pub queries: Vec<Query>,
    pub edits: Vec<Edit>,
    /// Cost on the declared resource basis; must be positive.
    pub cost: f64,
}

impl EpisodeLog {
    fn check_cost(&self) -> Result<()> {
        if !(self.cost > 0.0) || !self.cost.is_finite() {
            return Err(CoreError::Precondition(format!(
                "episode cost must be positive and finite, got {}",
                self.cost
            )));
        }
        Ok(())
    }
}

/// Explanatory creation rate: severity-weighted surviving tests of
/// novel, do-law-changing conjectures, per unit cost.
pub fn ecr(log: &EpisodeLog) -> Result<f64> {
    log.check_cost()?;
    let mut total = 0.0;
    for c in &log.conjectures {
        for (severity, _) in &c.tests {
            if !(0.0..=1.0).contains(severity) {
                return Err(CoreError::Validation(format!(
                    "severity {severity} outside [0, 1] on conjecture '{}'",
                    c.name
                )));
            }
        }
        if !c.novel || !c.changes_do_law {
            continue;
        }
        for (severity, survived) in &c.tests {
            if *survived {
                total += severity;
            }
        }
    }
    Ok(total / log.cost)
}

/// Counterfactual reach expansion: weights of newly answerable,
/// validated queries, per unit cost.
pub fn crx(log: &EpisodeLog) -> Result<f64> {
    log.check_cost()?;
    let mut total = 0.0;
    for q in &log.queries {
        if q.weight < 0.0 {
            return Err(CoreError::Validation(format!(
                "query '{}' has negative weight",
                q.name
            )));
        }
        if q.answerable_after && !q.answerable_before && q.validated {
            total += q.weight;
        }
    }
    Ok(total / log.cost)
}

/// Structural edit yield: `α·Fail(e) + β·1{Hold(e)}` summed over edits,
/// per unit cost.
pub fn sey(log: &EpisodeLog, alpha: f64, beta: f64) -> Result<f64> {
    log.check_cost()?;
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(CoreError::Precondition(format!(
            "alpha and beta must be positive, got ({alpha}, {beta})"
        )));
    }
    let mut total = 0.0;
    for e in &log.edits {
        total += alpha * e.fail_count as f64;
        if e.hold {
            total += beta;
        }
    }
    Ok(total / log.cost)
}
