//! Mechanism-separability witnesses in given coordinates.
//!
//! For a child node with declared parents, three quantities:
//!
//! - **structural residual**: sup over the probe grid of the gradient
//!   of the child's mechanism output with respect to the parents'
//!   parameters. Zero means the child mechanism does not read upstream
//!   parameters in these coordinates.
//! - **off-block ratio**: share of a metric's Frobenius mass sitting in
//!   the parent x child off-blocks. The metric defaults to an empirical
//!   Fisher estimate from score outer products over the model's
//!   observational joint.
//! - **bracket witness**: largest Lie-bracket norm among parent-flow x
//!   child-flow pairs on parameter space. Coordinate axis flows commute
//!   identically; the hook exists for caller-supplied flow families
//!   (e.g. flows respecting a constraint set).
//!
//! No chart search is attempted: witnesses are evaluated in the
//! coordinates the model declares, and callers may re-evaluate under a
//! reparametrization of their choice via [`icm_witness_reparametrized`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::probe::ProbePoint;
use crate::calculus::{
    fisher_estimate, lie_bracket, DiffScheme, MetricEstimate, ScoreModel, VectorField,
};
use crate::error::CoreError;
use crate::fmath;
use crate::rng::SeedRng;
use crate::scm::{enumerate_joint, require_valid, DistributionTable, ParametricScm, PreparedSampler};
use crate::Result;

/// Where the metric for the off-block witness comes from.
#[derive(Debug, Clone)]
pub enum MetricSource {
    /// Estimate the Fisher information of the observational joint from
    /// `n` seeded draws.
    Fisher { n: usize, seed: u64 },
    /// Use a caller-supplied metric over the same `(parents.., child)`
    /// parameter layout.
    Supplied(MetricEstimate),
}

/// Separability witnesses for one child node, in given coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcmReport {
    pub node: String,
    pub parents: Vec<String>,
    /// Sup over the grid of ‖∂ M_child / ∂ θ_parents‖.
    pub structural_residual: f64,
    /// Frobenius mass in parent x child off-blocks / total mass.
    pub offblock_ratio: f64,
    /// Max ‖[parent flow, child flow]‖ over the declared flow pairs.
    pub bracket_witness: f64,
    /// The estimated metric used for the off-block ratio.
    pub metric: MetricEstimate,
}

/// The observational joint of a discrete model as a parametric family:
/// theta is the concatenation of the chosen nodes' declared parameter
/// vectors. Sampling is ancestral; log-densities come from exact
/// enumeration, amortized per parameter point.
pub struct ScmObservationModel {
    scm: ParametricScm,
    theta_nodes: Vec<String>,
    slices: Vec<(usize, usize)>,
}

impl ScmObservationModel {
    pub fn new(scm: ParametricScm, theta_nodes: Vec<String>) -> Result<Self> {
        require_valid(&scm)?;
        let mut slices = Vec::new();
        let mut offset = 0;
        for node in &theta_nodes {
            let len = scm.mechanism(node)?.params.len();
            slices.push((offset, len));
            offset += len;
        }
        Ok(ScmObservationModel {
            scm,
            theta_nodes,
            slices,
        })
    }

    /// Parameter block (as index ranges into theta) of one node.
    pub fn block_of(&self, node: &str) -> Option<Vec<usize>> {
        let i = self.theta_nodes.iter().position(|n| n == node)?;
        let (start, len) = self.slices[i];
        Some((start..start + len).collect())
    }

    pub fn current_theta(&self) -> Vec<f64> {
        let mut theta = Vec::new();
        for node in &self.theta_nodes {
            theta.extend_from_slice(&self.scm.mechanism(node).expect("validated node").params);
        }
        theta
    }

    fn with_theta(&self, theta: &[f64]) -> Result<ParametricScm> {
        let mut scm = self.scm.clone();
        for (node, (start, len)) in self.theta_nodes.iter().zip(&self.slices) {
            let mech = scm
                .mechanisms
                .iter_mut()
                .find(|m| &m.node == node)
                .expect("validated node");
            mech.params = theta[*start..*start + *len].to_vec();
        }
        Ok(scm)
    }

    fn joint_at(&self, theta: &[f64]) -> Result<DistributionTable> {
        enumerate_joint(&self.with_theta(theta)?)
    }
}

impl ScoreModel for ScmObservationModel {
    fn theta_dim(&self) -> usize {
        self.slices.iter().map(|(_, len)| len).sum()
    }

    fn sample(&self, theta: &[f64], rng: &mut SeedRng) -> Vec<f64> {
        let scm = self.with_theta(theta).expect("theta layout checked");
        let sampler = PreparedSampler::new(&scm).expect("validated model");
        sampler.draw(&scm, rng).expect("validated model")
    }

    fn sample_batch(&self, theta: &[f64], n: usize, rng: &mut SeedRng) -> Vec<Vec<f64>> {
        let scm = self.with_theta(theta).expect("theta layout checked");
        let sampler = PreparedSampler::new(&scm).expect("validated model");
        (0..n)
            .map(|_| sampler.draw(&scm, rng).expect("validated model"))
            .collect()
    }

    fn log_density(&self, theta: &[f64], obs: &[f64]) -> Result<f64> {
        let joint = self.joint_at(theta)?;
        log_prob(&joint, obs)
    }

    fn log_density_batch(&self, theta: &[f64], obs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let joint = self.joint_at(theta)?;
        obs.iter().map(|o| log_prob(&joint, o)).collect()
    }
}

fn log_prob(joint: &DistributionTable, obs: &[f64]) -> Result<f64> {
    let p = joint.prob_of(obs)?;
    if p <= 0.0 {
        return Err(CoreError::NumericalDomain(
            "observation has zero probability under the probe parameters (degenerate density)"
                .into(),
        ));
    }
    Ok(fmath::ln(p))
}

/// Separability witnesses for `node` with the metric drawn from
/// `metric_source` and coordinate-axis parameter flows.
pub fn icm_witness(
    scm: &ParametricScm,
    node: &str,
    metric_source: &MetricSource,
    grid: &[ProbePoint],
) -> Result<IcmReport> {
    let parent_flows_and_points = default_axis_flows(scm, node)?;
    icm_witness_with_flows(
        scm,
        node,
        metric_source,
        grid,
        &parent_flows_and_points.0,
        &parent_flows_and_points.1,
        &[parent_flows_and_points.2],
    )
}

type AxisFlows = (Vec<VectorField>, Vec<VectorField>, Vec<f64>);

fn default_axis_flows(scm: &ParametricScm, node: &str) -> Result<AxisFlows> {
    let mech = scm.mechanism(node)?;
    let parent_len: usize = mech
        .parents
        .iter()
        .map(|p| scm.mechanism(p).map(|m| m.params.len()))
        .sum::<Result<usize>>()?;
    let child_len = mech.params.len();
    let dim = parent_len + child_len;
    let parent_flows = (0..parent_len).map(|i| VectorField::axis(dim, i)).collect();
    let child_flows = (parent_len..dim).map(|i| VectorField::axis(dim, i)).collect();
    let mut theta = Vec::with_capacity(dim);
    for p in &mech.parents {
        theta.extend_from_slice(&scm.mechanism(p)?.params);
    }
    theta.extend_from_slice(&mech.params);
    Ok((parent_flows, child_flows, theta))
}

/// Full-control variant: caller supplies parameter flow families and
/// the theta points at which brackets are evaluated.
pub fn icm_witness_with_flows(
    scm: &ParametricScm,
    node: &str,
    metric_source: &MetricSource,
    grid: &[ProbePoint],
    parent_flows: &[VectorField],
    child_flows: &[VectorField],
    theta_points: &[Vec<f64>],
) -> Result<IcmReport> {
    require_valid(scm)?;
    let mech = scm.mechanism(node)?.clone();
    if mech.parents.is_empty() {
        return Err(CoreError::Validation(format!(
            "node '{node}' is a root; separability witnesses need at least one parent"
        )));
    }

    // Structural residual: gradient of the child's mechanism output in
    // the parents' parameters, sup over the grid.
    let scheme = DiffScheme::default();
    let h = scheme.step;
    let mut structural = 0.0f64;
    for point in grid {
        let parents: Vec<f64> = mech
            .parents
            .iter()
            .map(|p| {
                point.values.get(p).copied().ok_or_else(|| {
                    CoreError::Precondition(format!("probe point lacks a value for parent '{p}'"))
                })
            })
            .collect::<Result<_>>()?;
        let u = point
            .noises
            .get(node)
            .copied()
            .unwrap_or_else(|| mech.noise.mean());
        let mut grad_sq = 0.0;
        for parent in &mech.parents {
            let base = scm.mechanism(parent)?.params.clone();
            for slot in 0..base.len() {
                let mut shifted = base.clone();
                shifted[slot] += h;
                let up_scm = scm.with_node_params(parent, shifted.clone())?;
                shifted[slot] -= 2.0 * h;
                let dn_scm = scm.with_node_params(parent, shifted)?;
                let up = mech.probe_output(&parents, u, &up_scm.effective_params(node)?)?;
                let dn = mech.probe_output(&parents, u, &dn_scm.effective_params(node)?)?;
                let d = (up - dn) / (2.0 * h);
                grad_sq += d * d;
            }
        }
        structural = fmath::max(structural, fmath::sqrt(grad_sq));
    }

    // Off-block ratio of the metric over (parents.., child) blocks.
    let obs_model = ScmObservationModel::new(scm.clone(), {
        let mut nodes = mech.parents.clone();
        nodes.push(String::from(node));
        nodes
    })?;
    let metric = match metric_source {
        MetricSource::Fisher { n, seed } => {
            fisher_estimate(&obs_model, &obs_model.current_theta(), *n, *seed)?
        }
        MetricSource::Supplied(estimate) => estimate.clone(),
    };
    let child_block = obs_model.block_of(node).expect("child node in layout");
    let parent_block: Vec<usize> = mech
        .parents
        .iter()
        .flat_map(|p| obs_model.block_of(p).expect("parent node in layout"))
        .collect();
    if metric.matrix.rows() != parent_block.len() + child_block.len() {
        return Err(CoreError::shape(
            parent_block.len() + child_block.len(),
            metric.matrix.rows(),
            "metric dimension vs parameter layout",
        ));
    }
    let offblock_ratio = metric.off_block_ratio(&parent_block, &child_block);

    // Bracket witness over declared flow pairs at the theta points.
    let mut bracket = 0.0f64;
    for theta in theta_points {
        for pf in parent_flows {
            for cf in child_flows {
                let b = lie_bracket(pf, cf, theta, &scheme)?;
                bracket = fmath::max(bracket, fmath::norm2(&b));
            }
        }
    }

    Ok(IcmReport {
        node: node.into(),
        parents: mech.parents.clone(),
        structural_residual: structural,
        offblock_ratio,
        bracket_witness: bracket,
        metric,
    })
}

/// Re-evaluate the structural residual under a caller-supplied chart:
/// `chart` maps new coordinates to the concatenated `(parents.., child)`
/// declared parameter vector. Returns the sup-gradient of the child
/// output in the new parent coordinates.
///
/// `parent_dim_new` says how many leading chart coordinates play the
/// role of upstream parameters.
pub fn icm_witness_reparametrized<F>(
    scm: &ParametricScm,
    node: &str,
    chart: F,
    coords: &[f64],
    parent_dim_new: usize,
    grid: &[ProbePoint],
) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    require_valid(scm)?;
    let mech = scm.mechanism(node)?.clone();
    if parent_dim_new > coords.len() {
        return Err(CoreError::shape(coords.len(), parent_dim_new, "chart parent dim"));
    }
    let layout = default_axis_flows(scm, node)?;
    let expected_len = layout.2.len();
    let scheme = DiffScheme::default();
    let h = scheme.step;

    let child_output_at = |coords: &[f64], parents: &[f64], u: f64| -> Result<f64> {
        let theta = chart(coords);
        if theta.len() != expected_len {
            return Err(CoreError::shape(expected_len, theta.len(), "chart output"));
        }
        // Scatter theta back into the model's declared vectors.
        let mut scm2 = scm.clone();
        let mut offset = 0;
        for p in mech.parents.iter().chain(core::iter::once(&mech.node)) {
            let len = scm2.mechanism(p)?.params.len();
            scm2 = scm2.with_node_params(p, theta[offset..offset + len].to_vec())?;
            offset += len;
        }
        mech.probe_output(parents, u, &scm2.effective_params(&mech.node)?)
    };

    let mut worst = 0.0f64;
    for point in grid {
        let parents: Vec<f64> = mech
            .parents
            .iter()
            .map(|p| point.values.get(p).copied().unwrap_or(0.0))
            .collect();
        let u = point
            .noises
            .get(node)
            .copied()
            .unwrap_or_else(|| mech.noise.mean());
        let mut grad_sq = 0.0;
        let mut shifted = coords.to_vec();
        for slot in 0..parent_dim_new {
            let c = coords[slot];
            shifted[slot] = c + h;
            let up = child_output_at(&shifted, &parents, u)?;
            shifted[slot] = c - h;
            let dn = child_output_at(&shifted, &parents, u)?;
            shifted[slot] = c;
            let d = (up - dn) / (2.0 * h);
            grad_sq += d * d;
        }
        worst = fmath::max(worst, fmath::sqrt(grad_sq));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::probe::seeded_grid;
    use crate::scm::{MechanismKind, MechanismSpec, NoiseSpec, ParamCoupling, PrimitiveKind};
    use alloc::vec;

    fn gate(node: &str, parents: Vec<&str>, params: Vec<f64>) -> MechanismSpec {
        MechanismSpec {
            node: node.into(),
            parents: parents.into_iter().map(String::from).collect(),
            kind: MechanismKind::LibraryPrimitive(PrimitiveKind::LogisticGate),
            params,
            noise: NoiseSpec::Uniform,
        }
    }

    /// Independent gates: child probability ignores both the parent's
    /// value (weight 0) and its parameters.
    fn independent_pair() -> ParametricScm {
        ParametricScm::markovian(vec![
            gate("x", vec![], vec![0.0]),
            gate("y", vec!["x"], vec![0.0, 0.0]),
        ])
    }

    /// Structurally coupled pair: the child's bias slot adds the
    /// parent's bias parameter, so the observational law depends on the
    /// two blocks only jointly.
    fn coupled_pair() -> ParametricScm {
        let mut scm = ParametricScm::markovian(vec![
            gate("x", vec![], vec![-3.0]),
            gate("y", vec!["x"], vec![0.0, 3.0]),
        ]);
        scm.param_couplings.push(ParamCoupling {
            node: "y".into(),
            slot: 1,
            add_from: vec![("x".into(), 0)],
        });
        scm
    }

    #[test]
    fn independent_pair_is_nearly_block_diagonal() {
        let scm = independent_pair();
        let grid = seeded_grid(&scm, 8, 3).unwrap();
        let report = icm_witness(
            &scm,
            "y",
            &MetricSource::Fisher { n: 20_000, seed: 40 },
            &grid,
        )
        .unwrap();
        assert!(report.structural_residual <= 1e-8, "structural {}", report.structural_residual);
        assert!(report.offblock_ratio <= 0.05, "ratio {}", report.offblock_ratio);
        assert!(report.bracket_witness <= 1e-8);
    }

    #[test]
    fn coupled_pair_shows_large_off_block_mass() {
        let scm = coupled_pair();
        let grid = seeded_grid(&scm, 8, 3).unwrap();
        let report = icm_witness(
            &scm,
            "y",
            &MetricSource::Fisher { n: 20_000, seed: 41 },
            &grid,
        )
        .unwrap();
        assert!(report.offblock_ratio >= 0.4, "ratio {}", report.offblock_ratio);
        // The child's conditional mean moves with the parent's bias:
        // sigmoid'(0) = 1/4.
        assert!(report.structural_residual > 0.2, "structural {}", report.structural_residual);
    }

    #[test]
    fn root_node_is_rejected() {
        let scm = independent_pair();
        let grid = seeded_grid(&scm, 4, 1).unwrap();
        let err = icm_witness(&scm, "x", &MetricSource::Fisher { n: 200, seed: 1 }, &grid);
        assert!(matches!(err, Err(CoreError::Validation(_))));
    }

    #[test]
    fn coordinate_axis_flows_commute() {
        let scm = independent_pair();
        let grid = seeded_grid(&scm, 4, 1).unwrap();
        let report = icm_witness(
            &scm,
            "y",
            &MetricSource::Fisher { n: 500, seed: 2 },
            &grid,
        )
        .unwrap();
        assert!(report.bracket_witness <= 1e-8);
    }

    #[test]
    fn reparametrization_can_remove_apparent_coupling() {
        // In declared coordinates the coupled pair has a nonzero
        // structural residual; in the chart (a, s) -> theta = (a, w, s - a)
        // the child's effective bias is s, so the parent coordinate
        // drops out.
        let scm = coupled_pair();
        let grid = seeded_grid(&scm, 8, 9).unwrap();
        let direct = icm_witness(
            &scm,
            "y",
            &MetricSource::Fisher { n: 500, seed: 3 },
            &grid,
        )
        .unwrap();
        assert!(direct.structural_residual > 0.2);
        let chart = |c: &[f64]| alloc::vec![c[0], c[1], c[2] - c[0]];
        let residual =
            icm_witness_reparametrized(&scm, "y", chart, &[-3.0, 0.0, 0.0], 1, &grid).unwrap();
        assert!(residual <= 1e-7, "chart residual {residual}");
    }
}
