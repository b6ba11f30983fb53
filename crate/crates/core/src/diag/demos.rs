//! Executable counterexamples about observational data.
//!
//! `obs_equivalence_demo` builds three models with different causal
//! structure but identical observational joints, and shows their
//! interventional answers diverge.
//!
//! `bayes_surgery_demo` runs two rival surgery semantics that agree on
//! the observational regime: conditioning on any observational dataset
//! produces identical posteriors, while the posterior-predictive
//! interventional answers differ. Conditioning reweights; surgery
//! rewires.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fmath;
use crate::report::{CheckRecord, Cmp, DemoReport};
use crate::scm::{
    enumerate_joint, intervene, DistributionTable, Intervention, ParametricScm,
};
use crate::scm::{MechanismKind, MechanismSpec, NoiseSpec, PrimitiveKind};
use crate::Result;

fn coin(node: &str, p: f64) -> MechanismSpec {
    MechanismSpec {
        node: node.into(),
        parents: Vec::new(),
        kind: MechanismKind::LibraryPrimitive(PrimitiveKind::XorNoise),
        params: Vec::new(),
        noise: NoiseSpec::Bernoulli(p),
    }
}

fn xor_link(node: &str, parent: &str, flip: f64) -> MechanismSpec {
    MechanismSpec {
        node: node.into(),
        parents: alloc::vec![String::from(parent)],
        kind: MechanismKind::LibraryPrimitive(PrimitiveKind::XorNoise),
        params: Vec::new(),
        noise: NoiseSpec::Bernoulli(flip),
    }
}

/// Configuration for the observational-equivalence demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsEquivalenceConfig {
    /// Flip rate of the x-y link (0.1 reproduces the standard numbers).
    pub flip: f64,
    /// Value forced on x.
    pub intervention_value: f64,
    /// Joint-agreement tolerance.
    pub tv_tol: f64,
    /// Required spread between the models' interventional answers.
    pub min_do_gap: f64,
}

impl Default for ObsEquivalenceConfig {
    fn default() -> Self {
        ObsEquivalenceConfig {
            flip: 0.1,
            intervention_value: 1.0,
            tv_tol: 1e-12,
            min_do_gap: 0.1,
        }
    }
}

/// Outcome: the three joints, the three interventional answers
/// (causal, anticausal, confounded), and the check records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsEquivalenceOutcome {
    pub joints: Vec<DistributionTable>,
    pub do_answers: Vec<f64>,
    pub report: DemoReport,
}

/// Three causal structures, one observational joint.
///
/// - causal: `x ~ Bern(1/2)`, `y = x xor Bern(q)`
/// - anticausal: `y ~ Bern(1/2)`, `x = y xor Bern(q)`
/// - confounded: `c ~ Bern(1/2)`, `x = c`, `y = c xor Bern(q)`
///
/// All three induce the same joint over `(x, y)`; forcing `x` yields
/// `P(y=1) = 1-q` in the causal model and `1/2` in the other two.
pub fn obs_equivalence_demo(config: &ObsEquivalenceConfig) -> Result<ObsEquivalenceOutcome> {
    if !(0.0..=1.0).contains(&config.flip) {
        return Err(CoreError::Precondition(format!(
            "flip rate {} outside [0, 1]",
            config.flip
        )));
    }
    let q = config.flip;
    let causal = ParametricScm::markovian(alloc::vec![coin("x", 0.5), xor_link("y", "x", q)]);
    let anticausal = ParametricScm::markovian(alloc::vec![coin("y", 0.5), xor_link("x", "y", q)]);
    let confounded = ParametricScm::markovian(alloc::vec![
        coin("c", 0.5),
        xor_link("x", "c", 0.0),
        xor_link("y", "c", q),
    ]);
    let models = [
        ("causal", causal),
        ("anticausal", anticausal),
        ("confounded", confounded),
    ];

    let mut joints = Vec::new();
    for (_, model) in &models {
        joints.push(enumerate_joint(model)?.marginal(&["x", "y"])?);
    }

    let mut checks = Vec::new();
    let pair_names = [("causal", "anticausal", 0, 1), ("causal", "confounded", 0, 2), ("anticausal", "confounded", 1, 2)];
    for (a, b, i, j) in pair_names {
        let tv = joints[i].tv_distance(&joints[j])?;
        checks.push(CheckRecord::new(
            &format!("obs-equivalence.joint-tv.{a}-{b}"),
            "distinct causal structures induce the same observational joint",
            tv,
            Cmp::Le,
            config.tv_tol,
        ));
    }

    let iv = Intervention::fix("x", config.intervention_value);
    let mut do_answers = Vec::new();
    for (_, model) in &models {
        let dist = enumerate_joint(&intervene(model, &iv)?)?.marginal(&["y"])?;
        do_answers.push(dist.prob_of(&[1.0])?);
    }

    let mut gap = 0.0f64;
    for i in 0..do_answers.len() {
        for j in (i + 1)..do_answers.len() {
            gap = fmath::max(gap, fmath::abs(do_answers[i] - do_answers[j]));
        }
    }
    checks.push(CheckRecord::new(
        "obs-equivalence.do-gap",
        "the same joint supports different interventional answers",
        gap,
        Cmp::Ge,
        config.min_do_gap,
    ));

    let mut flags = Vec::new();
    if gap < 1e-9 {
        flags.push(String::from(
            "degenerate configuration: all interventional answers coincide",
        ));
    }

    Ok(ObsEquivalenceOutcome {
        joints,
        do_answers,
        report: DemoReport { checks, flags },
    })
}

/// One hypothesis as rendered by a surgery family: a base model that
/// fixes the observational law, and what "forcing the target" means
/// under this family's reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisModel {
    pub hypothesis: String,
    pub scm: ParametricScm,
    pub intervention: Intervention,
}

/// A do-operator semantics: per hypothesis, a base model plus surgery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryFamily {
    pub name: String,
    pub models: Vec<HypothesisModel>,
}

/// Configuration for the conditioning-vs-surgery demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesSurgeryConfig {
    /// Prior weights over hypotheses (normalized internally).
    pub prior: Vec<f64>,
    /// Observed variables, in the order data rows are given.
    pub observed: Vec<String>,
    /// Observational dataset: rows over `observed`.
    pub data: Vec<Vec<f64>>,
    /// Query: posterior-predictive P(query_node = query_value | do(...)).
    pub query_node: String,
    pub query_value: f64,
    /// Tolerance for the observational-agreement precondition.
    pub obs_agreement_tol: f64,
    /// Tolerance for posterior equality.
    pub posterior_tol: f64,
    /// Required gap between the families' interventional answers.
    pub min_gap: f64,
}

/// Outcome of the conditioning-vs-surgery demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesSurgeryOutcome {
    pub posterior_a: Vec<f64>,
    pub posterior_b: Vec<f64>,
    pub do_answer_a: f64,
    pub do_answer_b: f64,
    pub report: DemoReport,
}

fn posterior(
    family: &SurgeryFamily,
    prior: &[f64],
    observed: &[&str],
    data: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let mut log_post: Vec<f64> = prior.iter().map(|w| fmath::ln(*w)).collect();
    for (h, model) in family.models.iter().enumerate() {
        let joint = enumerate_joint(&model.scm)?.marginal(observed)?;
        for row in data {
            let p = joint.prob_of(row)?;
            if p <= 0.0 {
                return Err(CoreError::NumericalDomain(format!(
                    "observation {row:?} has zero probability under hypothesis '{}'",
                    model.hypothesis
                )));
            }
            log_post[h] += fmath::ln(p);
        }
    }
    let peak = log_post.iter().copied().fold(f64::NEG_INFINITY, fmath::max);
    let weights: Vec<f64> = log_post.iter().map(|l| fmath::exp(l - peak)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

fn predictive_do_answer(
    family: &SurgeryFamily,
    posterior: &[f64],
    query_node: &str,
    query_value: f64,
) -> Result<f64> {
    let mut answer = 0.0;
    for (weight, model) in posterior.iter().zip(&family.models) {
        let surgered = intervene(&model.scm, &model.intervention)?;
        let dist = enumerate_joint(&surgered)?.marginal(&[query_node])?;
        answer += weight * dist.prob_of(&[query_value])?;
    }
    Ok(answer)
}

/// Conditioning cannot tell rival surgery semantics apart.
///
/// Verifies its own precondition first: per hypothesis, the two
/// families' base models must induce the same observational law (up to
/// `obs_agreement_tol`); otherwise this is a `Precondition` error, not
/// a finding.
pub fn bayes_surgery_demo(
    family_a: &SurgeryFamily,
    family_b: &SurgeryFamily,
    config: &BayesSurgeryConfig,
) -> Result<BayesSurgeryOutcome> {
    if family_a.models.len() != family_b.models.len() || family_a.models.is_empty() {
        return Err(CoreError::Precondition(
            "surgery families must cover the same nonempty hypothesis set".into(),
        ));
    }
    if config.prior.len() != family_a.models.len() {
        return Err(CoreError::shape(
            family_a.models.len(),
            config.prior.len(),
            "prior length",
        ));
    }
    if config.prior.iter().any(|w| *w <= 0.0) {
        return Err(CoreError::Precondition("prior weights must be positive".into()));
    }
    let observed: Vec<&str> = config.observed.iter().map(String::as_str).collect();

    // Precondition: observational agreement per hypothesis.
    let mut checks = Vec::new();
    for (ma, mb) in family_a.models.iter().zip(&family_b.models) {
        if ma.hypothesis != mb.hypothesis {
            return Err(CoreError::Precondition(format!(
                "hypothesis order differs between families: '{}' vs '{}'",
                ma.hypothesis, mb.hypothesis
            )));
        }
        let ja = enumerate_joint(&ma.scm)?.marginal(&observed)?;
        let jb = enumerate_joint(&mb.scm)?.marginal(&observed)?;
        let tv = ja.tv_distance(&jb)?;
        if tv > config.obs_agreement_tol {
            return Err(CoreError::Precondition(format!(
                "families disagree observationally on hypothesis '{}' (tv {tv:e})",
                ma.hypothesis
            )));
        }
        checks.push(CheckRecord::new(
            &format!("bayes-surgery.obs-agreement.{}", ma.hypothesis),
            "rival surgery semantics induce the same observational law",
            tv,
            Cmp::Le,
            config.obs_agreement_tol,
        ));
    }

    let posterior_a = posterior(family_a, &config.prior, &observed, &config.data)?;
    let posterior_b = posterior(family_b, &config.prior, &observed, &config.data)?;
    let posterior_gap = posterior_a
        .iter()
        .zip(&posterior_b)
        .map(|(a, b)| fmath::abs(a - b))
        .fold(0.0, fmath::max);
    checks.push(CheckRecord::new(
        "bayes-surgery.posterior-equality",
        "conditioning on observational data cannot separate the families",
        posterior_gap,
        Cmp::Le,
        config.posterior_tol,
    ));

    let do_answer_a =
        predictive_do_answer(family_a, &posterior_a, &config.query_node, config.query_value)?;
    let do_answer_b =
        predictive_do_answer(family_b, &posterior_b, &config.query_node, config.query_value)?;
    let gap = fmath::abs(do_answer_a - do_answer_b);
    checks.push(CheckRecord::new(
        "bayes-surgery.do-gap",
        "the families' interventional predictions still differ",
        gap,
        Cmp::Ge,
        config.min_gap,
    ));

    let mut flags = Vec::new();
    if family_a.models == family_b.models {
        flags.push(String::from("uninformative demo: the surgery families are identical"));
    }

    Ok(BayesSurgeryOutcome {
        posterior_a,
        posterior_b,
        do_answer_a,
        do_answer_b,
        report: DemoReport { checks, flags },
    })
}

/// The standard two-hypothesis coin-pair setup: hypotheses are flip
/// rates; family A reads x as the cause ("cut parent"), family B reads
/// x as the effect ("cut child"). Both induce the same joint per
/// hypothesis.
pub fn coin_pair_families(
    flips: &[f64],
    intervention_value: f64,
) -> (SurgeryFamily, SurgeryFamily) {
    let mut a_models = Vec::new();
    let mut b_models = Vec::new();
    for q in flips {
        let name = format!("flip={q}");
        let causal = ParametricScm::markovian(alloc::vec![coin("x", 0.5), xor_link("y", "x", *q)]);
        let anticausal =
            ParametricScm::markovian(alloc::vec![coin("y", 0.5), xor_link("x", "y", *q)]);
        let iv = Intervention::fix("x", intervention_value);
        a_models.push(HypothesisModel {
            hypothesis: name.clone(),
            scm: causal,
            intervention: iv.clone(),
        });
        b_models.push(HypothesisModel {
            hypothesis: name,
            scm: anticausal,
            intervention: iv,
        });
    }
    (
        SurgeryFamily {
            name: "cut-parent".into(),
            models: a_models,
        },
        SurgeryFamily {
            name: "cut-child".into(),
            models: b_models,
        },
    )
}
