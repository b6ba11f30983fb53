//! Locality and autonomy witnesses.
//!
//! For a source node A and target node i:
//!
//! - **Locality residual**: the largest magnitude, over the probe grid,
//!   of the derivative of i's solved value with respect to the value
//!   forced on A (parameters held fixed, noises pinned by the probe).
//!   Non-descendants of A must be flat.
//! - **Autonomy residual**: the largest magnitude of the gradient of
//!   i's mechanism output with respect to A's declared parameters
//!   (states held fixed). Mechanisms with disjoint parameters must be
//!   flat; parameter ties and couplings show up here.
//!
//! Descendant targets are reported but exempt from pass/fail: a child
//! is supposed to respond to its cause.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::probe::{ProbePoint, PROBE_MARGIN};
use crate::calculus::DiffScheme;
use crate::error::CoreError;
use crate::fmath;
use crate::scm::{require_valid, ParametricScm};
use crate::Result;

/// Default pass tolerance for structural zeros: the finite-difference
/// floor, two orders of magnitude below any genuine coupling in the
/// bundled corpus.
pub const LAP_PASS_TOL: f64 = 1e-6;

/// Witness outcome for one (source, target) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapReport {
    pub source: String,
    pub target: String,
    /// Sup over the probe grid of |d target / d do(source)|; `None`
    /// when only the autonomy part was computed.
    pub locality_residual: Option<f64>,
    /// Sup over the probe grid of ‖∂ M_target / ∂ θ_source‖; `None`
    /// when only the locality part was computed.
    pub autonomy_residual: Option<f64>,
    pub descendant: bool,
    pub pass_tol: f64,
    pub verdict: crate::report::Verdict,
}

fn verdict_for(descendant: bool, residuals: &[Option<f64>], tol: f64) -> crate::report::Verdict {
    let ok = descendant
        || residuals
            .iter()
            .flatten()
            .all(|r| *r <= tol);
    if ok {
        crate::report::Verdict::Pass
    } else {
        crate::report::Verdict::Fail
    }
}

/// Solve the model's state with `do(source = a)`, noises pinned by the
/// probe, using each mechanism's smooth representative; return the
/// target node's value.
fn solved_target(
    scm: &ParametricScm,
    source: &str,
    a: f64,
    noises: &BTreeMap<String, f64>,
    target: &str,
) -> Result<f64> {
    let order = scm.topo_order()?;
    let mut values: BTreeMap<&str, f64> = BTreeMap::new();
    for &i in &order {
        let mech = &scm.mechanisms[i];
        let value = if mech.node == source {
            a
        } else {
            let parents: Vec<f64> = mech
                .parents
                .iter()
                .map(|p| values[p.as_str()])
                .collect();
            let u = noises.get(&mech.node).copied().unwrap_or_else(|| mech.noise.mean());
            let params = scm.effective_params(&mech.node)?;
            mech.probe_output(&parents, u, &params)?
        };
        if !value.is_finite() {
            return Err(CoreError::NumericalDomain(format!(
                "node '{}' produced a non-finite value while solving the flowed state",
                mech.node
            )));
        }
        values.insert(mech.node.as_str(), value);
    }
    values
        .get(target)
        .copied()
        .ok_or_else(|| CoreError::Validation(format!("unknown node '{target}'")))
}

fn check_pair(scm: &ParametricScm, source: &str, target: &str) -> Result<bool> {
    require_valid(scm)?;
    scm.mechanism(source)?;
    scm.mechanism(target)?;
    Ok(scm.descendants(source)?.contains(target))
}

/// Locality part: how strongly does flowing the source's value move the
/// target's solved value?
pub fn locality_witness(
    scm: &ParametricScm,
    source: &str,
    target: &str,
    grid: &[ProbePoint],
) -> Result<LapReport> {
    locality_witness_with(scm, source, target, grid, &DiffScheme::default(), LAP_PASS_TOL)
}

pub fn locality_witness_with(
    scm: &ParametricScm,
    source: &str,
    target: &str,
    grid: &[ProbePoint],
    scheme: &DiffScheme,
    pass_tol: f64,
) -> Result<LapReport> {
    let descendant = check_pair(scm, source, target)?;
    scheme.validate()?;
    let (lo, hi) = scm.probe_domain(source);
    let h = scheme.step;
    let mut residual = 0.0f64;
    for point in grid {
        let a = point.values.get(source).copied().ok_or_else(|| {
            CoreError::Precondition(format!("probe point lacks a value for source '{source}'"))
        })?;
        if a - h < lo - PROBE_MARGIN || a + h > hi + PROBE_MARGIN {
            return Err(CoreError::NumericalDomain(format!(
                "probe value {a} for '{source}' leaves the declared box [{lo}, {hi}]"
            )));
        }
        let up = solved_target(scm, source, a + h, &point.noises, target)?;
        let dn = solved_target(scm, source, a - h, &point.noises, target)?;
        residual = fmath::max(residual, fmath::abs((up - dn) / (2.0 * h)));
    }
    Ok(LapReport {
        source: source.into(),
        target: target.into(),
        locality_residual: Some(residual),
        autonomy_residual: None,
        descendant,
        pass_tol,
        verdict: verdict_for(descendant, &[Some(residual)], pass_tol),
    })
}

/// Autonomy part: how strongly do the source's parameters move the
/// target's mechanism output, states held fixed?
pub fn autonomy_witness(
    scm: &ParametricScm,
    source: &str,
    target: &str,
    grid: &[ProbePoint],
) -> Result<LapReport> {
    autonomy_witness_with(scm, source, target, grid, &DiffScheme::default(), LAP_PASS_TOL)
}

pub fn autonomy_witness_with(
    scm: &ParametricScm,
    source: &str,
    target: &str,
    grid: &[ProbePoint],
    scheme: &DiffScheme,
    pass_tol: f64,
) -> Result<LapReport> {
    let descendant = check_pair(scm, source, target)?;
    scheme.validate()?;
    let source_params = scm.mechanism(source)?.params.clone();
    let target_mech = scm.mechanism(target)?.clone();
    let h = scheme.step;

    let mut residual = 0.0f64;
    // A source with nothing to perturb has residual exactly zero.
    if !source_params.is_empty() {
        for point in grid {
            let parents: Vec<f64> = target_mech
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
                .get(target)
                .copied()
                .unwrap_or_else(|| target_mech.noise.mean());
            let mut grad_sq = 0.0;
            for slot in 0..source_params.len() {
                let mut shifted = source_params.clone();
                shifted[slot] += h;
                let scm_up = scm.with_node_params(source, shifted.clone())?;
                shifted[slot] -= 2.0 * h;
                let scm_dn = scm.with_node_params(source, shifted)?;
                let up = target_mech.probe_output(&parents, u, &scm_up.effective_params(target)?)?;
                let dn = target_mech.probe_output(&parents, u, &scm_dn.effective_params(target)?)?;
                let d = (up - dn) / (2.0 * h);
                grad_sq += d * d;
            }
            residual = fmath::max(residual, fmath::sqrt(grad_sq));
        }
    }
    Ok(LapReport {
        source: source.into(),
        target: target.into(),
        locality_residual: None,
        autonomy_residual: Some(residual),
        descendant,
        pass_tol,
        verdict: verdict_for(descendant, &[Some(residual)], pass_tol),
    })
}

/// Both witnesses for one pair, merged into a single report whose
/// verdict requires both residuals to clear the tolerance (descendants
/// exempt).
pub fn lap_witness(
    scm: &ParametricScm,
    source: &str,
    target: &str,
    grid: &[ProbePoint],
    pass_tol: f64,
) -> Result<LapReport> {
    let scheme = DiffScheme::default();
    let loc = locality_witness_with(scm, source, target, grid, &scheme, pass_tol)?;
    let aut = autonomy_witness_with(scm, source, target, grid, &scheme, pass_tol)?;
    let residuals = [loc.locality_residual, aut.autonomy_residual];
    Ok(LapReport {
        source: source.into(),
        target: target.into(),
        locality_residual: loc.locality_residual,
        autonomy_residual: aut.autonomy_residual,
        descendant: loc.descendant,
        pass_tol,
        verdict: verdict_for(loc.descendant, &residuals, pass_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::probe::seeded_grid;
    use crate::report::Verdict;
    use crate::scm::testutil::{coin, xor_link};
    use crate::scm::{
        MechanismKind, MechanismSpec, NoiseSpec, ParamCoupling, ParametricScm, PrimitiveKind,
    };
    use alloc::vec;

    fn affine_chain() -> ParametricScm {
        // x ~ N(0,1) free; y = 2x + u; z = -y + u.
        let mut scm = ParametricScm::markovian(vec![
            MechanismSpec {
                node: "x".into(),
                parents: vec![],
                kind: MechanismKind::LibraryPrimitive(PrimitiveKind::Affine),
                params: vec![0.0, 1.0],
                noise: NoiseSpec::Gaussian,
            },
            MechanismSpec {
                node: "y".into(),
                parents: vec!["x".into()],
                kind: MechanismKind::LibraryPrimitive(PrimitiveKind::Affine),
                params: vec![2.0, 0.0, 1.0],
                noise: NoiseSpec::Gaussian,
            },
            MechanismSpec {
                node: "z".into(),
                parents: vec!["y".into()],
                kind: MechanismKind::LibraryPrimitive(PrimitiveKind::Affine),
                params: vec![-1.0, 0.0, 1.0],
                noise: NoiseSpec::Gaussian,
            },
        ]);
        scm.domains = [
            ("x".into(), (-2.0, 2.0)),
            ("y".into(), (-2.0, 2.0)),
            ("z".into(), (-2.0, 2.0)),
        ]
        .into_iter()
        .collect();
        scm
    }

    #[test]
    fn no_path_means_zero_locality() {
        let scm = affine_chain();
        let grid = seeded_grid(&scm, 16, 7).unwrap();
        let report = locality_witness(&scm, "z", "x", &grid).unwrap();
        assert!(!report.descendant);
        assert!(report.locality_residual.unwrap() <= 1e-8);
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn fork_sibling_is_not_a_descendant() {
        // x <- c -> y: flowing x must not move y.
        let scm = ParametricScm::markovian(vec![
            coin("c", 0.5),
            xor_link("x", "c", 0.1),
            xor_link("y", "c", 0.2),
        ]);
        let grid = seeded_grid(&scm, 16, 3).unwrap();
        let report = locality_witness(&scm, "x", "y", &grid).unwrap();
        assert!(!report.descendant);
        assert!(report.locality_residual.unwrap() <= 1e-8);
    }

    #[test]
    fn direct_child_reports_its_gain() {
        let scm = affine_chain();
        let grid = seeded_grid(&scm, 16, 11).unwrap();
        let report = locality_witness(&scm, "x", "y", &grid).unwrap();
        assert!(report.descendant);
        let r = report.locality_residual.unwrap();
        assert!((r - 2.0).abs() < 1e-6, "gain {r}");
        // Descendants are exempt from pass/fail.
        assert_eq!(report.verdict, Verdict::Pass);
        // Two hops: gain 2 * -1 = -2 in magnitude.
        let zr = locality_witness(&scm, "x", "z", &grid).unwrap();
        assert!((zr.locality_residual.unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn disjoint_parameters_have_zero_autonomy_residual() {
        let scm = affine_chain();
        let grid = seeded_grid(&scm, 16, 5).unwrap();
        let report = autonomy_witness(&scm, "x", "z", &grid).unwrap();
        assert_eq!(report.autonomy_residual.unwrap(), 0.0);
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn tied_parameters_leak_into_autonomy() {
        // x's bias slot mirrors z's gain slot: perturbing θ_z moves M_x,
        // even though x is upstream of z.
        let mut scm = affine_chain();
        scm.param_couplings.push(ParamCoupling {
            node: "x".into(),
            slot: 0,
            add_from: vec![("z".into(), 0)],
        });
        let grid = seeded_grid(&scm, 16, 5).unwrap();
        let report = autonomy_witness(&scm, "z", "x", &grid).unwrap();
        let r = report.autonomy_residual.unwrap();
        assert!(r > 0.1, "residual {r}");
        assert!(!report.descendant);
        assert_eq!(report.verdict, Verdict::Fail);
    }

    #[test]
    fn empty_parameter_vector_gives_exact_zero() {
        let scm = ParametricScm::markovian(vec![coin("a", 0.5), xor_link("b", "a", 0.1)]);
        let grid = seeded_grid(&scm, 8, 2).unwrap();
        let report = autonomy_witness(&scm, "a", "b", &grid).unwrap();
        assert_eq!(report.autonomy_residual.unwrap(), 0.0);
    }

    #[test]
    fn xor_chain_descendant_gain_is_one_minus_two_q() {
        let scm = ParametricScm::markovian(vec![coin("a", 0.5), xor_link("b", "a", 0.1)]);
        let grid = seeded_grid(&scm, 8, 2).unwrap();
        let report = locality_witness(&scm, "a", "b", &grid).unwrap();
        let r = report.locality_residual.unwrap();
        assert!((r - 0.8).abs() < 1e-6, "gain {r}");
    }

    #[test]
    fn combined_witness_merges_both_parts() {
        let scm = affine_chain();
        let grid = seeded_grid(&scm, 8, 13).unwrap();
        let report = lap_witness(&scm, "z", "x", &grid, LAP_PASS_TOL).unwrap();
        assert!(report.locality_residual.is_some());
        assert!(report.autonomy_residual.is_some());
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn unknown_node_is_validation_error() {
        let scm = affine_chain();
        let grid = seeded_grid(&scm, 4, 1).unwrap();
        assert!(matches!(
            locality_witness(&scm, "nope", "x", &grid),
            Err(CoreError::Validation(_))
        ));
    }
}
