//! # mechlab-core
//!
//! Numeric kernel and diagnostic battery for mechanism-structured models.
//!
//! The crate is organized around five questions one can ask of a model
//! that claims to be built from independent mechanisms:
//!
//! - **Does intervening on one variable leave the rest alone?**
//!   [`scm`] builds parametric structural causal models with do-surgery,
//!   exact enumeration for discrete models, and ancestral sampling;
//!   [`diag`] measures locality/autonomy residuals and mechanism-coupling
//!   witnesses (metric block structure, commuting parameter flows).
//! - **Do observations pin down interventions?** [`diag::demos`] runs
//!   executable counterexamples: observationally equivalent models with
//!   different interventional answers, and posterior updates that cannot
//!   distinguish rival surgery semantics.
//! - **Do analogies commute with composition?** [`algebra`] evaluates
//!   multi-sorted term algebras over two domains joined by an entity
//!   translator and symbol correspondence, and audits locality, law
//!   stability, analogy residuals, and a depth-indexed generalization
//!   bound over generated composites.
//! - **When does sequential training overwrite old skills?**
//!   [`forgetting`] is a two-task gradient laboratory: alignment
//!   decompositions over parameter blocks, locality/autonomy constants,
//!   single-step and multi-step interference bounds.
//! - **How much explanatory work did an episode do?** [`epistemics`]
//!   computes the finite-space support decomposition and three
//!   resource-normalized episode scores.
//!
//! Everything is deterministic given a 64-bit seed: randomness flows
//! through a splittable counter-based generator ([`rng::SeedRng`]) and
//! float transcendentals go through `libm`, so repeated runs produce
//! bit-identical numbers.
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion CLI
//! crate carries file formats and IO.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod calculus;
pub mod diag;
pub mod epistemics;
pub mod error;
pub mod forgetting;
pub mod mat;
pub mod report;
pub mod rng;
pub mod scm;

pub(crate) mod fmath;

pub use error::CoreError;
pub use report::{CheckRecord, Cmp, Verdict};
pub use rng::SeedRng;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, CoreError>;
