//! Parametric structural causal models.
//!
//! A model is an ordered list of mechanisms `x_i = f_i(parents, u_i; θ_i)`
//! plus a mode flag. Markovian models are acyclic with mutually
//! independent noises; semi-Markovian models may couple noises through a
//! shared discrete latent. Cyclic graphs are rejected outright.
//!
//! Interventions are graph surgery: targeted mechanisms are replaced,
//! untargeted mechanisms are carried over untouched (structural
//! equality, bit for bit).

mod enumerate;
pub mod primitive;
mod simulate;
mod table;

#[cfg(test)]
pub(crate) mod testutil;

pub use enumerate::{enumerate_joint, interventional_distribution, node_supports};
pub use primitive::PrimitiveKind;
pub use simulate::{simulate, SampleTable};
pub(crate) use simulate::PreparedSampler;
pub use table::DistributionTable;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

/// Exogenous noise distribution for one mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSpec {
    /// 0/1 noise with success probability `p`.
    Bernoulli(f64),
    /// Uniform on `[0, 1)`.
    Uniform,
    /// Standard normal.
    Gaussian,
    /// Deterministic value.
    PointMass(f64),
}

impl NoiseSpec {
    pub fn mean(&self) -> f64 {
        match self {
            NoiseSpec::Bernoulli(p) => *p,
            NoiseSpec::Uniform => 0.5,
            NoiseSpec::Gaussian => 0.0,
            NoiseSpec::PointMass(v) => *v,
        }
    }

    /// Finite support as `(value, probability)` atoms, if any.
    pub fn finite_support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            NoiseSpec::Bernoulli(p) => Some(alloc::vec![(0.0, 1.0 - p), (1.0, *p)]),
            NoiseSpec::PointMass(v) => Some(alloc::vec![(*v, 1.0)]),
            NoiseSpec::Uniform | NoiseSpec::Gaussian => None,
        }
    }

    pub fn draw(&self, rng: &mut crate::rng::SeedRng) -> f64 {
        match self {
            NoiseSpec::Bernoulli(p) => rng.bernoulli(*p),
            NoiseSpec::Uniform => rng.uniform(),
            NoiseSpec::Gaussian => rng.gaussian(),
            NoiseSpec::PointMass(v) => *v,
        }
    }

    fn validate(&self) -> Result<()> {
        if let NoiseSpec::Bernoulli(p) = self {
            if !(0.0..=1.0).contains(p) {
                return Err(CoreError::Validation(format!(
                    "bernoulli noise probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Functional form of one mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    /// CPT-style finite table. `params` holds the probability rows,
    /// row-major over the cartesian product of `parent_supports` (last
    /// parent fastest), each row one probability per `output_support`
    /// value. Realized by inverse CDF on the noise value, so it is
    /// deterministic in `(parents, noise)`.
    Table {
        parent_supports: Vec<Vec<f64>>,
        output_support: Vec<f64>,
    },
    /// Affine map with a declared noise slot: params `[w.., b, c]`.
    LinearGaussianFree,
    /// Named parametric map from the mechanism library.
    LibraryPrimitive(PrimitiveKind),
}

/// One structural assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub node: String,
    pub parents: Vec<String>,
    pub kind: MechanismKind,
    /// Mechanism parameters θ; length is determined by `kind` and the
    /// parent count.
    pub params: Vec<f64>,
    pub noise: NoiseSpec,
}

impl MechanismSpec {
    /// Required parameter-vector length.
    pub fn expected_params(&self) -> usize {
        match &self.kind {
            MechanismKind::Table {
                parent_supports,
                output_support,
            } => {
                let rows: usize = parent_supports.iter().map(Vec::len).product();
                rows * output_support.len()
            }
            MechanismKind::LinearGaussianFree => self.parents.len() + 2,
            MechanismKind::LibraryPrimitive(kind) => kind.param_count(self.parents.len()),
        }
    }

    fn table_row<'a>(
        parent_supports: &[Vec<f64>],
        output_support: &[f64],
        params: &'a [f64],
        parents: &[f64],
    ) -> Result<&'a [f64]> {
        let mut index = 0usize;
        for (support, value) in parent_supports.iter().zip(parents) {
            let pos = support.iter().position(|s| s == value).ok_or_else(|| {
                CoreError::NumericalDomain(format!(
                    "table mechanism saw parent value {value} outside its declared support"
                ))
            })?;
            index = index * support.len() + pos;
        }
        let width = output_support.len();
        Ok(&params[index * width..(index + 1) * width])
    }

    /// Exact sampling semantics (used by simulation and enumeration).
    pub fn realize(&self, parents: &[f64], u: f64, params: &[f64]) -> Result<f64> {
        match &self.kind {
            MechanismKind::Table {
                parent_supports,
                output_support,
            } => {
                let row = Self::table_row(parent_supports, output_support, params, parents)?;
                // Inverse CDF in u over the row.
                let mut cum = 0.0;
                for (value, prob) in output_support.iter().zip(row) {
                    cum += prob;
                    if u < cum {
                        return Ok(*value);
                    }
                }
                Ok(*output_support.last().expect("nonempty output support"))
            }
            MechanismKind::LinearGaussianFree => {
                Ok(primitive::realize(&PrimitiveKind::Affine, parents, u, params))
            }
            MechanismKind::LibraryPrimitive(kind) => Ok(primitive::realize(kind, parents, u, params)),
        }
    }

    /// Smooth representative for derivative-based witnesses.
    ///
    /// Continuous mechanisms use the probe's noise value; discrete gates
    /// and tables use the conditional mean given parents.
    pub fn probe_output(&self, parents: &[f64], u: f64, params: &[f64]) -> Result<f64> {
        match &self.kind {
            MechanismKind::Table {
                parent_supports,
                output_support,
            } => {
                let row = Self::table_row(parent_supports, output_support, params, parents)?;
                Ok(output_support.iter().zip(row).map(|(v, p)| v * p).sum())
            }
            MechanismKind::LinearGaussianFree => Ok(primitive::probe(
                &PrimitiveKind::Affine,
                parents,
                u,
                self.noise.mean(),
                params,
            )),
            MechanismKind::LibraryPrimitive(kind) => {
                Ok(primitive::probe(kind, parents, u, self.noise.mean(), params))
            }
        }
    }

    /// Conditional output distribution given parent values, when the
    /// noise can be summed out exactly.
    pub fn conditional(&self, parents: &[f64], params: &[f64]) -> Result<Vec<(f64, f64)>> {
        if let MechanismKind::Table {
            parent_supports,
            output_support,
        } = &self.kind
        {
            if matches!(self.noise, NoiseSpec::Uniform) {
                let row = Self::table_row(parent_supports, output_support, params, parents)?;
                return Ok(output_support.iter().copied().zip(row.iter().copied()).collect());
            }
        }
        if let MechanismKind::LibraryPrimitive(kind) = &self.kind {
            if matches!(self.noise, NoiseSpec::Uniform) {
                if let Some(cond) = primitive::analytic_conditional(kind, parents, params) {
                    return Ok(cond);
                }
            }
        }
        if let Some(atoms) = self.noise.finite_support() {
            let mut acc: Vec<(f64, f64)> = Vec::new();
            for (u, w) in atoms {
                if w == 0.0 {
                    continue;
                }
                let v = self.realize(parents, u, params)?;
                match acc.iter_mut().find(|(val, _)| *val == v) {
                    Some((_, p)) => *p += w,
                    None => acc.push((v, w)),
                }
            }
            acc.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite support values"));
            return Ok(acc);
        }
        Err(CoreError::UnsupportedModel(format!(
            "node '{}' has continuous noise that cannot be summed out exactly",
            self.node
        )))
    }
}

/// Mode flag: Markovian models are acyclic with independent noises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScmMode {
    Markovian,
    SemiMarkovian,
}

/// Shared discrete latent noise: the semi-Markovian rendering of
/// dependent exogenous noises. Every target node's noise value is the
/// latent draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedLatent {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
    pub targets: Vec<String>,
}

/// Declares that a parameter slot's effective value is its declared
/// value plus the declared values of leader slots. This is how tied or
/// structurally coupled parameterizations are expressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCoupling {
    pub node: String,
    pub slot: usize,
    /// `(node, slot)` pairs whose declared values are added in.
    pub add_from: Vec<(String, usize)>,
}

/// A parametric SCM: ordered mechanisms plus mode and optional
/// couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricScm {
    pub mechanisms: Vec<MechanismSpec>,
    pub mode: ScmMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_coupling: Option<SharedLatent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub param_couplings: Vec<ParamCoupling>,
    /// Probe box per node for derivative-based witnesses; nodes without
    /// an entry default to the hull of their finite support, or [-1, 1].
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub domains: BTreeMap<String, (f64, f64)>,
}

/// Structural validation outcome; an empty violation list certifies a
/// well-formed model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// An intervention: per node, either a fixed value or a full mechanism
/// replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub assignments: BTreeMap<String, InterventionTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterventionTarget {
    /// `do(X = v)`: cut all parents, output the constant.
    Fix(f64),
    /// Replace the mechanism wholesale.
    Replace(MechanismSpec),
}

impl Intervention {
    pub fn fix(node: &str, value: f64) -> Self {
        let mut assignments = BTreeMap::new();
        assignments.insert(String::from(node), InterventionTarget::Fix(value));
        Intervention { assignments }
    }
}

/// The constant mechanism installed by `do(X = v)`.
pub fn point_mechanism(node: &str, value: f64) -> MechanismSpec {
    MechanismSpec {
        node: String::from(node),
        parents: Vec::new(),
        kind: MechanismKind::LibraryPrimitive(PrimitiveKind::Affine),
        params: alloc::vec![value, 0.0],
        noise: NoiseSpec::PointMass(0.0),
    }
}

impl ParametricScm {
    pub fn markovian(mechanisms: Vec<MechanismSpec>) -> Self {
        ParametricScm {
            mechanisms,
            mode: ScmMode::Markovian,
            noise_coupling: None,
            param_couplings: Vec::new(),
            domains: BTreeMap::new(),
        }
    }

    pub fn node_names(&self) -> Vec<&str> {
        self.mechanisms.iter().map(|m| m.node.as_str()).collect()
    }

    pub fn mechanism(&self, node: &str) -> Result<&MechanismSpec> {
        self.mechanisms
            .iter()
            .find(|m| m.node == node)
            .ok_or_else(|| CoreError::Validation(format!("unknown node '{node}'")))
    }

    fn index_of(&self, node: &str) -> Option<usize> {
        self.mechanisms.iter().position(|m| m.node == node)
    }

    /// Effective parameter vector of a node after couplings.
    pub fn effective_params(&self, node: &str) -> Result<Vec<f64>> {
        let mech = self.mechanism(node)?;
        let mut params = mech.params.clone();
        for coupling in &self.param_couplings {
            if coupling.node == node {
                if coupling.slot >= params.len() {
                    return Err(CoreError::Validation(format!(
                        "coupling targets slot {} of '{}' which has only {} params",
                        coupling.slot,
                        node,
                        params.len()
                    )));
                }
                for (leader, slot) in &coupling.add_from {
                    let leader_mech = self.mechanism(leader)?;
                    let v = leader_mech.params.get(*slot).ok_or_else(|| {
                        CoreError::Validation(format!(
                            "coupling reads slot {slot} of '{leader}' which has only {} params",
                            leader_mech.params.len()
                        ))
                    })?;
                    params[coupling.slot] += v;
                }
            }
        }
        Ok(params)
    }

    /// Topological order of node indices; error on cycles.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let n = self.mechanisms.len();
        let mut indegree = alloc::vec![0usize; n];
        let mut children: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for (i, mech) in self.mechanisms.iter().enumerate() {
            for parent in &mech.parents {
                let p = self
                    .index_of(parent)
                    .ok_or_else(|| CoreError::Validation(format!("unknown parent '{parent}'")))?;
                indegree[i] += 1;
                children[p].push(i);
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if order.len() != n {
            return Err(CoreError::Validation("graph has a cycle".into()));
        }
        // Deterministic order: by longest-chain depth, then declaration
        // index. Parents always have strictly smaller depth.
        order.sort_by_key(|&i| (depth_of(self, i), i));
        Ok(order)
    }

    /// Descendants of `node` (not including itself).
    pub fn descendants(&self, node: &str) -> Result<BTreeSet<String>> {
        let start = self
            .index_of(node)
            .ok_or_else(|| CoreError::Validation(format!("unknown node '{node}'")))?;
        let n = self.mechanisms.len();
        let mut children: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for (i, mech) in self.mechanisms.iter().enumerate() {
            for parent in &mech.parents {
                if let Some(p) = self.index_of(parent) {
                    children[p].push(i);
                }
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![start];
        while let Some(i) = stack.pop() {
            for &c in &children[i] {
                if seen.insert(self.mechanisms[c].node.clone()) {
                    stack.push(c);
                }
            }
        }
        seen.remove(node);
        Ok(seen)
    }

    /// Copy of the model with one node's declared parameter vector
    /// replaced (couplings still apply on top).
    pub fn with_node_params(&self, node: &str, params: Vec<f64>) -> Result<ParametricScm> {
        let mut scm = self.clone();
        let mech = scm
            .mechanisms
            .iter_mut()
            .find(|m| m.node == node)
            .ok_or_else(|| CoreError::Validation(format!("unknown node '{node}'")))?;
        if params.len() != mech.params.len() {
            return Err(CoreError::shape(mech.params.len(), params.len(), "replacement params"));
        }
        mech.params = params;
        Ok(scm)
    }

    /// Probe box for a node: declared domain, else hull of the finite
    /// support, else `[-1, 1]`.
    pub fn probe_domain(&self, node: &str) -> (f64, f64) {
        if let Some(d) = self.domains.get(node) {
            return *d;
        }
        if let Ok(supports) = node_supports(self) {
            if let Some(Some(support)) = supports.get(node).map(|s| s.as_ref()) {
                let lo = support.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                return (lo, hi);
            }
        }
        (-1.0, 1.0)
    }
}

fn depth_of(scm: &ParametricScm, i: usize) -> usize {
    // Longest parent chain; used only for stable topological sorting.
    fn rec(scm: &ParametricScm, i: usize, memo: &mut BTreeMap<usize, usize>) -> usize {
        if let Some(&d) = memo.get(&i) {
            return d;
        }
        let d = scm.mechanisms[i]
            .parents
            .iter()
            .filter_map(|p| scm.mechanisms.iter().position(|m| &m.node == p))
            .map(|p| rec(scm, p, memo) + 1)
            .max()
            .unwrap_or(0);
        memo.insert(i, d);
        d
    }
    rec(scm, i, &mut BTreeMap::new())
}

/// Structural validation; violations are report entries, not errors.
pub fn validate(scm: &ParametricScm) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    for mech in &scm.mechanisms {
        if !seen.insert(mech.node.clone()) {
            violations.push(format!("node '{}' declared more than once", mech.node));
        }
    }
    for mech in &scm.mechanisms {
        for parent in &mech.parents {
            if !seen.contains(parent) {
                violations.push(format!(
                    "node '{}' references undeclared parent '{}'",
                    mech.node, parent
                ));
            }
        }
        let expected = mech.expected_params();
        if mech.params.len() != expected {
            violations.push(format!(
                "node '{}' has {} params, its mechanism needs {}",
                mech.node,
                mech.params.len(),
                expected
            ));
        }
        if let MechanismKind::LibraryPrimitive(kind) = &mech.kind {
            if let Err(e) = kind.check_arity(mech.parents.len()) {
                violations.push(format!("node '{}': {}", mech.node, e));
            }
        }
        if let MechanismKind::Table {
            parent_supports,
            output_support,
        } = &mech.kind
        {
            if parent_supports.len() != mech.parents.len() {
                violations.push(format!(
                    "node '{}' table declares {} parent supports for {} parents",
                    mech.node,
                    parent_supports.len(),
                    mech.parents.len()
                ));
            }
            if output_support.is_empty() {
                violations.push(format!("node '{}' table has empty output support", mech.node));
            }
            let width = output_support.len();
            if width > 0 && mech.params.len() == mech.expected_params() {
                for (r, row) in mech.params.chunks(width).enumerate() {
                    let sum: f64 = row.iter().sum();
                    if row.iter().any(|p| *p < 0.0) || libm::fabs(sum - 1.0) > 1e-9 {
                        violations.push(format!(
                            "node '{}' table row {r} is not a probability vector (sum {sum})",
                            mech.node
                        ));
                    }
                }
            }
        }
        if let Err(e) = mech.noise.validate() {
            violations.push(format!("node '{}': {}", mech.node, e));
        }
    }
    // Both modes require acyclicity; cyclic semantics are out of scope.
    if scm.topo_order().is_err() {
        violations.push("graph has a cycle (markovian and semi-markovian modes require acyclicity)".into());
    }
    match (&scm.mode, &scm.noise_coupling) {
        (ScmMode::Markovian, Some(_)) => {
            violations.push("markovian mode requires mutually independent noises; remove the shared latent".into());
        }
        (_, Some(latent)) => {
            if latent.support.len() != latent.probs.len() || latent.support.is_empty() {
                violations.push("shared latent support and probability lengths differ or are empty".into());
            }
            let sum: f64 = latent.probs.iter().sum();
            if latent.probs.iter().any(|p| *p < 0.0) || libm::fabs(sum - 1.0) > 1e-9 {
                violations.push(format!("shared latent probabilities are not a distribution (sum {sum})"));
            }
            for t in &latent.targets {
                if !seen.contains(t) {
                    violations.push(format!("shared latent targets undeclared node '{t}'"));
                }
            }
        }
        _ => {}
    }
    for coupling in &scm.param_couplings {
        if !seen.contains(&coupling.node) {
            violations.push(format!("coupling targets undeclared node '{}'", coupling.node));
        }
        for (leader, _) in &coupling.add_from {
            if !seen.contains(leader) {
                violations.push(format!("coupling reads undeclared node '{leader}'"));
            }
        }
    }
    ValidationReport { violations }
}

/// Error-level validity gate used by operations that need a valid model.
pub fn require_valid(scm: &ParametricScm) -> Result<()> {
    let report = validate(scm);
    match report.violations.first() {
        None => Ok(()),
        Some(first) => Err(CoreError::Validation(format!(
            "invalid model: {first}{}",
            if report.violations.len() > 1 {
                format!(" (+{} more)", report.violations.len() - 1)
            } else {
                String::new()
            }
        ))),
    }
}

/// Graph surgery. Untargeted mechanisms are carried over unchanged;
/// targeted nodes get a cut-parent constant or the replacement spec.
pub fn intervene(scm: &ParametricScm, iv: &Intervention) -> Result<ParametricScm> {
    require_valid(scm)?;
    for (node, target) in &iv.assignments {
        if scm.index_of(node).is_none() {
            return Err(CoreError::Validation(format!(
                "intervention targets unknown node '{node}'"
            )));
        }
        if let InterventionTarget::Replace(mech) = target {
            if &mech.node != node {
                return Err(CoreError::Validation(format!(
                    "replacement mechanism is named '{}' but targets node '{node}'",
                    mech.node
                )));
            }
        }
    }
    let mut surgered = scm.clone();
    for mech in &mut surgered.mechanisms {
        if let Some(target) = iv.assignments.get(&mech.node) {
            *mech = match target {
                InterventionTarget::Fix(v) => point_mechanism(&mech.node, *v),
                InterventionTarget::Replace(spec) => spec.clone(),
            };
        }
    }
    // A replacement mechanism may have introduced a cycle or a dangling
    // parent; the surgered model must itself be valid.
    require_valid(&surgered)?;
    Ok(surgered)
}
