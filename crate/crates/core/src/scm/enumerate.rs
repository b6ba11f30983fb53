//! Exact joint enumeration for discrete models.
//!
//! The joint is computed by multiplying per-node conditionals along a
//! topological order, summing noise atoms exactly (and summing out
//! uniform noise analytically for tables and logistic gates). A shared
//! latent is enumerated as a hidden variable and marginalized at the
//! end. Capacity is capped at 10^6 joint assignments.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::table::DistributionTable;
use super::{require_valid, Intervention, MechanismKind, ParametricScm, PrimitiveKind};
use crate::error::CoreError;
use crate::Result;

const CAPACITY_CAP: usize = 1_000_000;

/// Finite output support per node, in no particular order; `None`
/// marks a node with continuous (non-enumerable) values.
pub fn node_supports(scm: &ParametricScm) -> Result<BTreeMap<String, Option<Vec<f64>>>> {
    let order = scm.topo_order()?;
    let mut supports: BTreeMap<String, Option<Vec<f64>>> = BTreeMap::new();
    for &i in &order {
        let mech = &scm.mechanisms[i];
        let support = infer_support(scm, i, &supports)?;
        supports.insert(mech.node.clone(), support);
    }
    Ok(supports)
}

fn latent_noise_for<'a>(scm: &'a ParametricScm, node: &str) -> Option<&'a super::SharedLatent> {
    scm.noise_coupling
        .as_ref()
        .filter(|latent| latent.targets.iter().any(|t| t == node))
}

fn infer_support(
    scm: &ParametricScm,
    index: usize,
    known: &BTreeMap<String, Option<Vec<f64>>>,
) -> Result<Option<Vec<f64>>> {
    let mech = &scm.mechanisms[index];
    match &mech.kind {
        MechanismKind::Table { output_support, .. } => Ok(Some(output_support.clone())),
        MechanismKind::LibraryPrimitive(kind) if kind.is_binary_gate() => {
            Ok(Some(alloc::vec![0.0, 1.0]))
        }
        _ => {
            // Continuous-form mechanism: finite only when all parents
            // are finite and the noise has atoms (or is a shared latent).
            let noise_atoms: Option<Vec<f64>> = if let Some(latent) = latent_noise_for(scm, &mech.node)
            {
                Some(latent.support.clone())
            } else {
                mech.noise
                    .finite_support()
                    .map(|atoms| atoms.into_iter().map(|(v, _)| v).collect())
            };
            let Some(noise_values) = noise_atoms else {
                return Ok(None);
            };
            let mut parent_supports = Vec::new();
            for parent in &mech.parents {
                match known.get(parent) {
                    Some(Some(s)) => parent_supports.push(s.clone()),
                    _ => return Ok(None),
                }
            }
            let params = scm.effective_params(&mech.node)?;
            let mut values: Vec<f64> = Vec::new();
            let mut grid = GridIter::new(&parent_supports);
            let mut budget: usize = CAPACITY_CAP;
            while let Some(parents) = grid.next_point() {
                for u in &noise_values {
                    if budget == 0 {
                        return Err(CoreError::Capacity(format!(
                            "support inference for node '{}' exceeded {CAPACITY_CAP} evaluations",
                            mech.node
                        )));
                    }
                    budget -= 1;
                    let v = mech.realize(&parents, *u, &params)?;
                    if !v.is_finite() {
                        return Err(CoreError::NumericalDomain(format!(
                            "node '{}' produced a non-finite value during support inference",
                            mech.node
                        )));
                    }
                    if !values.contains(&v) {
                        values.push(v);
                    }
                }
            }
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite support values"));
            Ok(Some(values))
        }
    }
}

/// Odometer over a product of finite supports.
struct GridIter<'a> {
    supports: &'a [Vec<f64>],
    index: Vec<usize>,
    done: bool,
}

impl<'a> GridIter<'a> {
    fn new(supports: &'a [Vec<f64>]) -> Self {
        let done = supports.iter().any(Vec::is_empty);
        GridIter {
            supports,
            index: alloc::vec![0; supports.len()],
            done,
        }
    }

    fn next_point(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let point: Vec<f64> = self
            .supports
            .iter()
            .zip(&self.index)
            .map(|(s, &i)| s[i])
            .collect();
        // Advance, last axis fastest.
        let mut axis = self.supports.len();
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            self.index[axis] += 1;
            if self.index[axis] < self.supports[axis].len() {
                break;
            }
            self.index[axis] = 0;
        }
        if self.supports.is_empty() {
            self.done = true;
        }
        Some(point)
    }
}

/// Exact observational joint over the declared nodes.
pub fn enumerate_joint(scm: &ParametricScm) -> Result<DistributionTable> {
    require_valid(scm)?;
    let supports = node_supports(scm)?;
    let order = scm.topo_order()?;

    let mut variables: Vec<String> = Vec::new();
    let mut grids: Vec<Vec<f64>> = Vec::new();
    for mech in &scm.mechanisms {
        match supports.get(&mech.node) {
            Some(Some(s)) if !s.is_empty() => {
                variables.push(mech.node.clone());
                grids.push(s.clone());
            }
            _ => {
                return Err(CoreError::UnsupportedModel(format!(
                    "node '{}' is not finitely supported; exact enumeration needs finite supports",
                    mech.node
                )))
            }
        }
    }

    let latent = scm.noise_coupling.clone();
    let latent_card = latent.as_ref().map_or(1, |l| l.support.len());
    let cells: usize = grids.iter().map(Vec::len).product();
    let total = cells
        .checked_mul(latent_card)
        .ok_or_else(|| CoreError::Capacity("joint support size overflows".into()))?;
    if total > CAPACITY_CAP {
        return Err(CoreError::Capacity(format!(
            "joint support has {total} assignments, cap is {CAPACITY_CAP}"
        )));
    }

    // Memoize each node's conditional rows over its parent grid.
    let name_to_pos: BTreeMap<&str, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let effective: Vec<Vec<f64>> = scm
        .mechanisms
        .iter()
        .map(|m| scm.effective_params(&m.node))
        .collect::<Result<_>>()?;

    let mut probabilities = alloc::vec![0.0f64; cells];
    let mut assignment = alloc::vec![0.0f64; variables.len()];
    let mut index = alloc::vec![0usize; variables.len()];

    // Iterate the full grid once per latent atom.
    let latent_atoms: Vec<(f64, f64)> = match &latent {
        Some(l) => l.support.iter().copied().zip(l.probs.iter().copied()).collect(),
        None => alloc::vec![(0.0, 1.0)],
    };

    for (latent_value, latent_prob) in latent_atoms {
        if latent_prob == 0.0 {
            continue;
        }
        index.iter_mut().for_each(|i| *i = 0);
        'grid: loop {
            for (slot, (&i, grid)) in index.iter().zip(&grids).enumerate() {
                assignment[slot] = grid[i];
            }
            let mut p = latent_prob;
            for &i in &order {
                if p == 0.0 {
                    break;
                }
                let mech = &scm.mechanisms[i];
                let pos = name_to_pos[mech.node.as_str()];
                let value = assignment[pos];
                let parents: Vec<f64> = mech
                    .parents
                    .iter()
                    .map(|parent| assignment[name_to_pos[parent.as_str()]])
                    .collect();
                let cond_p = if latent_noise_for(scm, &mech.node).is_some() {
                    // Latent-coupled node: noise is the latent draw.
                    let v = mech.realize(&parents, latent_value, &effective[i])?;
                    if v == value {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let cond = mech.conditional(&parents, &effective[i])?;
                    cond.iter()
                        .find(|(v, _)| *v == value)
                        .map(|(_, q)| *q)
                        .unwrap_or(0.0)
                };
                p *= cond_p;
            }
            if p != 0.0 {
                let mut flat = 0usize;
                for (i, grid) in index.iter().zip(&grids) {
                    flat = flat * grid.len() + i;
                }
                probabilities[flat] += p;
            }
            // Advance odometer, last variable fastest.
            let mut axis = grids.len();
            loop {
                if axis == 0 {
                    break 'grid;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < grids[axis].len() {
                    break;
                }
                index[axis] = 0;
            }
        }
    }

    DistributionTable::new(variables, grids, probabilities)
}

/// Exact marginal of `query` nodes under the surgered model.
pub fn interventional_distribution(
    scm: &ParametricScm,
    iv: &Intervention,
    query: &[&str],
) -> Result<DistributionTable> {
    let surgered = super::intervene(scm, iv)?;
    enumerate_joint(&surgered)?.marginal(query)
}

/// True when a mechanism's outputs are enumerable in principle.
#[allow(dead_code)]
fn is_gate(kind: &MechanismKind) -> bool {
    matches!(
        kind,
        MechanismKind::Table { .. }
            | MechanismKind::LibraryPrimitive(PrimitiveKind::XorNoise)
            | MechanismKind::LibraryPrimitive(PrimitiveKind::LogisticGate)
    )
}
