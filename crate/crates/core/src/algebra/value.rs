//! Carrier values and distances between them.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fmath;
use crate::Result;

/// A value in some carrier: an entity, a finite entity set, a number,
/// or a truth value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Value {
    Entity(String),
    EntitySet(BTreeSet<String>),
    Real(f64),
    Bool(bool),
}

impl Value {
    pub fn as_real(&self) -> Result<f64> {
        match self {
            Value::Real(v) => Ok(*v),
            Value::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
            other => Err(CoreError::TypeMismatch(format!(
                "expected a numeric or boolean value, got {other:?}"
            ))),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Entity(_) => "entity",
            Value::EntitySet(_) => "entity-set",
            Value::Real(_) => "real",
            Value::Bool(_) => "bool",
        }
    }
}

/// How outputs are compared: numeric outputs by norm, predicate and
/// entity outputs by disagreement rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    VectorNorm,
    DisagreementRate,
}

impl DistanceKind {
    /// The forced choice for a value kind: norms for numbers,
    /// disagreement for everything discrete.
    pub fn for_value(v: &Value) -> DistanceKind {
        match v {
            Value::Real(_) => DistanceKind::VectorNorm,
            _ => DistanceKind::DisagreementRate,
        }
    }
}

/// Distance between two values of the same kind.
pub fn distance(a: &Value, b: &Value, kind: DistanceKind) -> Result<f64> {
    match (a, b, kind) {
        (Value::Real(x), Value::Real(y), DistanceKind::VectorNorm) => Ok(fmath::abs(x - y)),
        (Value::Real(x), Value::Real(y), DistanceKind::DisagreementRate) => {
            Ok(if x == y { 0.0 } else { 1.0 })
        }
        (Value::Bool(x), Value::Bool(y), _) => Ok(if x == y { 0.0 } else { 1.0 }),
        (Value::Entity(x), Value::Entity(y), _) => Ok(if x == y { 0.0 } else { 1.0 }),
        (Value::EntitySet(x), Value::EntitySet(y), _) => Ok(if x == y { 0.0 } else { 1.0 }),
        _ => Err(CoreError::TypeMismatch(format!(
            "cannot compare {} with {}",
            a.kind_name(),
            b.kind_name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_distance_is_absolute_difference() {
        let d = distance(&Value::Real(3.0), &Value::Real(1.5), DistanceKind::VectorNorm).unwrap();
        assert_eq!(d, 1.5);
    }

    #[test]
    fn predicate_distance_is_zero_or_one() {
        let d = distance(&Value::Bool(true), &Value::Bool(false), DistanceKind::DisagreementRate)
            .unwrap();
        assert_eq!(d, 1.0);
        let d = distance(&Value::Bool(true), &Value::Bool(true), DistanceKind::DisagreementRate)
            .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        assert!(distance(
            &Value::Real(1.0),
            &Value::Bool(true),
            DistanceKind::VectorNorm
        )
        .is_err());
    }
}
