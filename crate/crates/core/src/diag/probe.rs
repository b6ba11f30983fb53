//! Probe grids for derivative-based witnesses.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::SeedRng;
use crate::scm::{require_valid, ParametricScm};
use crate::Result;

/// One probe: a value per node plus a noise value per node.
///
/// Witnesses read the pieces they need: the locality witness takes the
/// source value and noises and recomputes downstream values; the
/// autonomy witness reads the target's parent values directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub values: BTreeMap<String, f64>,
    pub noises: BTreeMap<String, f64>,
}

/// Margin kept between sampled probe values and the declared box edge,
/// so finite-difference offsets stay inside the domain.
pub(crate) const PROBE_MARGIN: f64 = 1e-4;

/// Sample `n` probe points: node values uniform in each node's probe
/// box (shrunk by a small margin for finite differencing), noises from
/// the declared noise distributions.
pub fn seeded_grid(scm: &ParametricScm, n: usize, seed: u64) -> Result<Vec<ProbePoint>> {
    require_valid(scm)?;
    let mut rng = SeedRng::new(seed).split(0x6e1d);
    let mut grid = Vec::with_capacity(n);
    for _ in 0..n {
        let mut values = BTreeMap::new();
        let mut noises = BTreeMap::new();
        for mech in &scm.mechanisms {
            let (lo, hi) = scm.probe_domain(&mech.node);
            let value = if hi - lo > 2.0 * PROBE_MARGIN {
                rng.uniform_in(lo + PROBE_MARGIN, hi - PROBE_MARGIN)
            } else {
                0.5 * (lo + hi)
            };
            values.insert(mech.node.clone(), value);
            noises.insert(mech.node.clone(), mech.noise.draw(&mut rng));
        }
        grid.push(ProbePoint { values, noises });
    }
    Ok(grid)
}
