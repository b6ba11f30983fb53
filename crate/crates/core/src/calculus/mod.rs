//! Deterministic numeric kernel: finite-difference derivatives, vector
//! fields with fixed-step flows, Lie brackets, and metric estimation
//! from score outer products.
//!
//! Everything downstream (locality/autonomy residuals, coupling
//! witnesses, gradient-interference constants) reduces to these
//! operations, so they are kept dependency-free and reproducible:
//! central differences by default, fixed-step RK4 for flows, no
//! adaptive steps anywhere.

mod diff;
mod field;
mod fisher;

pub use diff::{directional_derivative, gradient, jacobian, DiffMethod, DiffScheme};
pub use field::{flow, flow_commutator_witness, lie_bracket, DomainBox, VectorField};
pub use fisher::{fisher_estimate, MetricEstimate, ScoreModel};
