//! Library implementations behind primitive symbols.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{PrimitiveDecl, Sort, SymbolKind};
use crate::error::CoreError;
use crate::fmath;
use crate::Result;

/// Parametric map realizing a primitive symbol. Parameter layouts are
/// documented per variant; `k` is the declared input count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum PrimImpl {
    /// Entity -> set of related entities, from the domain's edge data
    /// under this symbol's name. No params.
    RelationImage,
    /// (set<s>, s) -> bool membership test. No params.
    Contains,
    /// Gain-scaled product `g·Πx`; params `[g]`.
    Multiply,
    /// Gain-scaled sum `g·Σx`; params `[g]`.
    Add,
    /// Gain-scaled percentage-off `g·x·(1-r)` on inputs `(x, r)`;
    /// params `[g]`.
    Discount,
    /// `a·x + b` on one input; params `[a, b]`.
    Affine1,
    /// `c_0 + c_1 x + ... + c_d x^d` on one input; params `[c_0..c_d]`,
    /// degree at most 3.
    Polynomial { degree: u8 },
    /// One-hidden-layer ReLU network on `k` inputs; params
    /// `[W1 (width×k), b1 (width), w2 (width), b2]`.
    ReluMlp { width: usize },
    /// Product with float32 rounding `round32(g·x·y)`; params `[g]`.
    /// Associativity fails at large magnitudes.
    MultiplyRounded,
    /// Stochastic bit flip: `x xor Bern(p)` for `x` in {0, 1};
    /// params `[p]`.
    BernoulliFlip,
    /// Stochastic shift: `x + mu + sd·ε` with standard normal ε;
    /// params `[mu, sd]`.
    GaussianShift,
}

impl PrimImpl {
    pub fn param_count(&self, k: usize) -> usize {
        match self {
            PrimImpl::RelationImage | PrimImpl::Contains => 0,
            PrimImpl::Multiply | PrimImpl::Add | PrimImpl::Discount | PrimImpl::MultiplyRounded => 1,
            PrimImpl::Affine1 => 2,
            PrimImpl::Polynomial { degree } => *degree as usize + 1,
            PrimImpl::ReluMlp { width } => width * k + 2 * width + 1,
            PrimImpl::BernoulliFlip => 1,
            PrimImpl::GaussianShift => 2,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, PrimImpl::BernoulliFlip | PrimImpl::GaussianShift)
    }

    /// Arity and sort constraints of the implementation.
    pub fn check_decl(&self, name: &str, decl: &PrimitiveDecl) -> Result<()> {
        let k = decl.inputs.len();
        let arity_ok = match self {
            PrimImpl::RelationImage => k == 1,
            PrimImpl::Contains => k == 2,
            PrimImpl::Discount | PrimImpl::MultiplyRounded => k == 2,
            PrimImpl::Multiply | PrimImpl::Add => k >= 1,
            PrimImpl::Affine1 | PrimImpl::Polynomial { .. } => k == 1,
            PrimImpl::ReluMlp { width } => *width > 0 && k >= 1,
            PrimImpl::BernoulliFlip => k == 1,
            PrimImpl::GaussianShift => k == 1,
        };
        if !arity_ok {
            return Err(CoreError::Validation(format!(
                "primitive '{name}' has arity {k}, incompatible with its implementation"
            )));
        }
        if let PrimImpl::Polynomial { degree } = self {
            if *degree > 3 {
                return Err(CoreError::Validation(format!(
                    "primitive '{name}': polynomial degree capped at 3, got {degree}"
                )));
            }
        }
        match self {
            PrimImpl::RelationImage => {
                let input_entity = matches!(decl.inputs[0], Sort::Entity(_));
                let output_set = matches!(decl.output, Sort::Set(_));
                if !input_entity || !output_set || decl.kind != SymbolKind::Function {
                    return Err(CoreError::Validation(format!(
                        "primitive '{name}': relation image must be a function entity -> set"
                    )));
                }
            }
            PrimImpl::Contains => {
                let shapes_ok = matches!(
                    (&decl.inputs[0], &decl.inputs[1]),
                    (Sort::Set(a), Sort::Entity(b)) if a == b
                );
                if !shapes_ok || decl.output != Sort::Bool {
                    return Err(CoreError::Validation(format!(
                        "primitive '{name}': contains must be (set<s>, s) -> bool"
                    )));
                }
            }
            _ => {
                // Everything else computes on numbers.
                let all_numeric = decl
                    .inputs
                    .iter()
                    .chain(core::iter::once(&decl.output))
                    .all(|s| matches!(s, Sort::Numeric(_)));
                if !all_numeric {
                    return Err(CoreError::Validation(format!(
                        "primitive '{name}': numeric implementation needs numeric sorts"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluate on numeric inputs. Stochastic variants draw from `rng`;
    /// deterministic ones ignore it.
    pub fn eval_numeric(
        &self,
        inputs: &[f64],
        params: &[f64],
        rng: Option<&mut crate::rng::SeedRng>,
    ) -> Result<f64> {
        let v = match self {
            PrimImpl::Multiply => params[0] * inputs.iter().product::<f64>(),
            PrimImpl::Add => params[0] * inputs.iter().sum::<f64>(),
            PrimImpl::Discount => params[0] * inputs[0] * (1.0 - inputs[1]),
            PrimImpl::Affine1 => params[0] * inputs[0] + params[1],
            PrimImpl::Polynomial { degree } => {
                let x = inputs[0];
                let mut acc = 0.0;
                for d in (0..=*degree as usize).rev() {
                    acc = acc * x + params[d];
                }
                acc
            }
            PrimImpl::ReluMlp { width } => {
                let k = inputs.len();
                let w1 = &params[0..width * k];
                let b1 = &params[width * k..width * k + width];
                let w2 = &params[width * k + width..width * k + 2 * width];
                let b2 = params[width * k + 2 * width];
                let mut acc = b2;
                for h in 0..*width {
                    let pre: f64 = w1[h * k..(h + 1) * k]
                        .iter()
                        .zip(inputs)
                        .map(|(w, x)| w * x)
                        .sum::<f64>()
                        + b1[h];
                    acc += w2[h] * if pre > 0.0 { pre } else { 0.0 };
                }
                acc
            }
            PrimImpl::MultiplyRounded => {
                (params[0] * inputs[0] * inputs[1]) as f32 as f64
            }
            PrimImpl::BernoulliFlip => {
                let rng = rng.ok_or_else(|| {
                    CoreError::Precondition("stochastic primitive evaluated without a seed".into())
                })?;
                let p = fmath::clamp01(params[0]);
                let bit = if inputs[0] > 0.5 { 1.0 } else { 0.0 };
                let flip = rng.bernoulli(p);
                if (bit == 1.0) ^ (flip == 1.0) {
                    1.0
                } else {
                    0.0
                }
            }
            PrimImpl::GaussianShift => {
                let rng = rng.ok_or_else(|| {
                    CoreError::Precondition("stochastic primitive evaluated without a seed".into())
                })?;
                inputs[0] + params[0] + params[1] * rng.gaussian()
            }
            PrimImpl::RelationImage | PrimImpl::Contains => {
                return Err(CoreError::TypeMismatch(
                    "relational implementation evaluated on numeric inputs".into(),
                ))
            }
        };
        if !v.is_finite() {
            return Err(CoreError::NumericalDomain(format!(
                "primitive produced a non-finite value on inputs {inputs:?}"
            )));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_library_matches_hand_values() {
        assert_eq!(
            PrimImpl::Multiply.eval_numeric(&[15.0, 3.0], &[1.0], None).unwrap(),
            45.0
        );
        assert_eq!(
            PrimImpl::Discount.eval_numeric(&[45.0, 0.2], &[1.0], None).unwrap(),
            36.0
        );
        assert_eq!(
            PrimImpl::Add.eval_numeric(&[36.0, 5.0], &[1.0], None).unwrap(),
            41.0
        );
    }

    #[test]
    fn rounded_multiply_loses_precision_at_scale() {
        let exact = PrimImpl::Multiply
            .eval_numeric(&[1.0e7, 1.0 + 1.0e-7], &[1.0], None)
            .unwrap();
        let rounded = PrimImpl::MultiplyRounded
            .eval_numeric(&[1.0e7, 1.0 + 1.0e-7], &[1.0], None)
            .unwrap();
        assert!(exact != rounded);
    }

    #[test]
    fn stochastic_without_rng_is_an_error() {
        let err = PrimImpl::BernoulliFlip.eval_numeric(&[0.0], &[0.5], None);
        assert!(matches!(err, Err(CoreError::Precondition(_))));
    }
}
