//! Structural witnesses over causal models.
//!
//! [`lap`] measures locality (insensitivity of non-descendants to
//! flowing an intervened variable) and autonomy (insensitivity of other
//! mechanisms to one mechanism's parameters). [`icm`] measures
//! mechanism separability in given coordinates: upstream-parameter
//! sensitivity, metric block structure, and commuting parameter flows.
//! [`demos`] packages two executable counterexamples about what
//! observational data can and cannot determine.
//!
//! Residuals aggregate over probe grids with the supremum, not the
//! mean: the underlying claims are universally quantified, so a single
//! violation falsifies them.

pub mod demos;
pub mod icm;
pub mod lap;
mod probe;

pub use icm::{icm_witness, IcmReport, MetricSource, ScmObservationModel};
pub use lap::{autonomy_witness, lap_witness, locality_witness, LapReport, LAP_PASS_TOL};
pub use probe::{seeded_grid, ProbePoint};
