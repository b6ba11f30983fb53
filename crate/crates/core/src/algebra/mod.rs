//! Multi-sorted term algebras and cross-domain analogy audits.
//!
//! A [`Signature`] declares sorts and parametric primitive symbols; a
//! [`Term`] is a composition tree over those symbols with typed input
//! slots; a [`DomainInterpretation`] gives each sort a carrier and each
//! symbol parameters, turning terms into realized maps.
//!
//! An [`AnalogyMap`] joins two domains: an entity translator per sort
//! and a symbol correspondence extended homomorphically to terms.
//! The audit battery measures:
//!
//! - locality: non-use parameter gradients ([`locality_diagnostic`]),
//! - law stability: residuals of declared identities plus their
//!   insensitivity to unrelated symbols ([`law_residual`]),
//! - analogy consistency: map-then-compose vs compose-then-map
//!   ([`analogy_residual`]), also in distribution for stochastic
//!   primitives ([`stochastic_residual`]),
//! - a depth-indexed bound propagating those residuals to generated
//!   composites ([`generalization_check`]),
//! - drift over recorded parameter trajectories ([`drift_replay`]).

mod analogy;
mod cap;
mod domain;
mod generate;
mod prim_impl;
mod stochastic;
mod term;
mod value;

#[cfg(test)]
pub(crate) mod testsig;

pub use analogy::{analogy_residual, analogy_residual_on, map_term, AnalogyMap, PhiSort};
pub use cap::{
    drift_replay, generalization_check, law_residual, locality_diagnostic, DriftReport,
    GeneralizationReport, Law, LawReport, LocalityReport,
};
pub use domain::{Carrier, DomainInterpretation, ParamTie};
pub use generate::{generate_composites, GeneratedTerms};
pub use prim_impl::PrimImpl;
pub use stochastic::{stochastic_residual, StochasticReport};
pub use term::Term;
pub use value::{distance, DistanceKind, Value};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

/// A sort: named entity carriers, sets over them, named numeric
/// carriers, and truth values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sort {
    /// Named finite entity sort (e.g. `person`).
    Entity(String),
    /// Finite set of entities of the named sort.
    Set(String),
    /// Named numeric sort (e.g. `money`, `scalar`).
    Numeric(String),
    Bool,
}

impl core::fmt::Display for Sort {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Sort::Entity(s) => write!(f, "{s}"),
            Sort::Set(s) => write!(f, "set<{s}>"),
            Sort::Numeric(s) => write!(f, "{s}"),
            Sort::Bool => write!(f, "bool"),
        }
    }
}

/// Functions return carrier values; predicates return truth values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Function,
    Predicate,
}

/// One primitive symbol: typed arity plus a library implementation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveDecl {
    pub inputs: Vec<Sort>,
    pub output: Sort,
    pub kind: SymbolKind,
    pub implementation: PrimImpl,
}

impl PrimitiveDecl {
    pub fn param_count(&self) -> usize {
        self.implementation.param_count(self.inputs.len())
    }
}

/// A multi-sorted signature.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Signature {
    /// Declared sort names (entity and numeric alike).
    pub sorts: BTreeSet<String>,
    pub primitives: BTreeMap<String, PrimitiveDecl>,
}

impl Signature {
    pub fn declares_sort(&self, sort: &Sort) -> bool {
        match sort {
            Sort::Entity(s) | Sort::Set(s) | Sort::Numeric(s) => self.sorts.contains(s),
            Sort::Bool => true,
        }
    }

    pub fn primitive(&self, symbol: &str) -> Result<&PrimitiveDecl> {
        self.primitives
            .get(symbol)
            .ok_or_else(|| CoreError::Validation(format!("unknown primitive symbol '{symbol}'")))
    }

    /// Structural validation: sorts exist, implementations match the
    /// declared arity, predicates return Bool.
    pub fn validate(&self) -> Result<()> {
        for (name, decl) in &self.primitives {
            for sort in decl.inputs.iter().chain(core::iter::once(&decl.output)) {
                if !self.declares_sort(sort) {
                    return Err(CoreError::Validation(format!(
                        "primitive '{name}' references undeclared sort '{sort}'"
                    )));
                }
            }
            if decl.kind == SymbolKind::Predicate && decl.output != Sort::Bool {
                return Err(CoreError::Validation(format!(
                    "predicate '{name}' must output bool, declares '{}'",
                    decl.output
                )));
            }
            decl.implementation.check_decl(name, decl)?;
        }
        Ok(())
    }

    /// Largest declared primitive arity (at least 1).
    pub fn max_arity(&self) -> usize {
        self.primitives
            .values()
            .map(|d| d.inputs.len())
            .max()
            .unwrap_or(1)
            .max(1)
    }
}
