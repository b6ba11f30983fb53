//! The fixed mechanism library.
//!
//! Mechanisms are maps `(parent values, noise value; params) -> value`.
//! Each primitive exposes two evaluation semantics:
//!
//! - [`realize`]: the exact sampling map, deterministic in
//!   `(parents, noise)`. Used by simulation and enumeration.
//! - [`probe`]: a smooth representative used by derivative-based
//!   witnesses. Continuous mechanisms evaluate their map at the probe's
//!   noise value; discrete gates use the conditional mean given
//!   parents (with soft-XOR extending parity to `[0,1]`), so finite
//!   differences see a differentiable surface.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fmath;
use crate::Result;

/// Named parametric map from the mechanism library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum PrimitiveKind {
    /// `w·parents + b + c·u`; params `[w_0..w_{k-1}, b, c]`.
    Affine,
    /// Parity of parents XOR the noise bit; values are 0/1; no params.
    XorNoise,
    /// Binary gate: `1` iff `u < sigmoid(w·parents + b)`;
    /// params `[w_0..w_{k-1}, b]`. Meant for uniform noise, under which
    /// `P(1 | parents) = sigmoid(w·parents + b)`.
    LogisticGate,
    /// Single-parent polynomial `c_0 + c_1 x + ... + c_d x^d` plus the
    /// raw noise value; params `[c_0..c_d]`, degree at most 3.
    Polynomial { degree: u8 },
    /// One-hidden-layer ReLU network plus the raw noise value;
    /// params `[W1 (width×k row-major), b1 (width), w2 (width), b2]`.
    ReluMlp { width: usize },
}

impl PrimitiveKind {
    pub fn param_count(&self, parent_count: usize) -> usize {
        match self {
            PrimitiveKind::Affine => parent_count + 2,
            PrimitiveKind::XorNoise => 0,
            PrimitiveKind::LogisticGate => parent_count + 1,
            PrimitiveKind::Polynomial { degree } => *degree as usize + 1,
            PrimitiveKind::ReluMlp { width } => width * parent_count + 2 * width + 1,
        }
    }

    /// Structural constraint on parent count, if any.
    pub fn check_arity(&self, parent_count: usize) -> Result<()> {
        match self {
            PrimitiveKind::Polynomial { degree } => {
                if parent_count != 1 {
                    return Err(CoreError::Validation(format!(
                        "polynomial mechanism needs exactly one parent, got {parent_count}"
                    )));
                }
                if *degree > 3 {
                    return Err(CoreError::Validation(format!(
                        "polynomial degree capped at 3, got {degree}"
                    )));
                }
            }
            PrimitiveKind::ReluMlp { width } => {
                if *width == 0 {
                    return Err(CoreError::Validation("relu-mlp width must be positive".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Whether outputs live on {0, 1} regardless of inputs.
    pub fn is_binary_gate(&self) -> bool {
        matches!(self, PrimitiveKind::XorNoise | PrimitiveKind::LogisticGate)
    }
}

fn bit(v: f64) -> f64 {
    if v > 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Soft XOR: agrees with XOR on {0,1} and is bilinear in between.
fn soft_xor(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn mlp_forward(width: usize, params: &[f64], parents: &[f64]) -> f64 {
    let k = parents.len();
    let w1 = &params[0..width * k];
    let b1 = &params[width * k..width * k + width];
    let w2 = &params[width * k + width..width * k + 2 * width];
    let b2 = params[width * k + 2 * width];
    let mut acc = b2;
    for h in 0..width {
        let pre = dot(&w1[h * k..(h + 1) * k], parents) + b1[h];
        let act = if pre > 0.0 { pre } else { 0.0 };
        acc += w2[h] * act;
    }
    acc
}

/// Exact sampling semantics: deterministic in `(parents, u, params)`.
pub fn realize(kind: &PrimitiveKind, parents: &[f64], u: f64, params: &[f64]) -> f64 {
    match kind {
        PrimitiveKind::Affine => {
            let k = parents.len();
            dot(&params[..k], parents) + params[k] + params[k + 1] * u
        }
        PrimitiveKind::XorNoise => {
            let mut acc = 0.0;
            for &p in parents {
                acc = soft_xor(acc, bit(p));
            }
            soft_xor(acc, bit(u))
        }
        PrimitiveKind::LogisticGate => {
            let k = parents.len();
            let p = fmath::sigmoid(dot(&params[..k], parents) + params[k]);
            if u < p {
                1.0
            } else {
                0.0
            }
        }
        PrimitiveKind::Polynomial { degree } => {
            let x = parents[0];
            let mut acc = 0.0;
            for d in (0..=*degree as usize).rev() {
                acc = acc * x + params[d];
            }
            acc + u
        }
        PrimitiveKind::ReluMlp { width } => mlp_forward(*width, params, parents) + u,
    }
}

/// Smooth representative for derivative probes.
///
/// `u` is the probe's noise value for continuous mechanisms;
/// `noise_mean` is the noise distribution's mean, used by discrete
/// gates whose representative is the conditional mean given parents.
pub fn probe(
    kind: &PrimitiveKind,
    parents: &[f64],
    u: f64,
    noise_mean: f64,
    params: &[f64],
) -> f64 {
    match kind {
        PrimitiveKind::Affine | PrimitiveKind::Polynomial { .. } | PrimitiveKind::ReluMlp { .. } => {
            realize(kind, parents, u, params)
        }
        PrimitiveKind::XorNoise => {
            let mut acc = 0.0;
            for &p in parents {
                acc = soft_xor(acc, p);
            }
            soft_xor(acc, noise_mean)
        }
        PrimitiveKind::LogisticGate => {
            let k = parents.len();
            fmath::sigmoid(dot(&params[..k], parents) + params[k])
        }
    }
}

/// Conditional output distribution given parents for mechanisms whose
/// noise can be integrated out exactly with uniform noise.
///
/// Returns `None` for mechanisms that need their noise atoms enumerated
/// instead (the caller handles finite noise separately).
pub fn analytic_conditional(
    kind: &PrimitiveKind,
    parents: &[f64],
    params: &[f64],
) -> Option<Vec<(f64, f64)>> {
    match kind {
        PrimitiveKind::LogisticGate => {
            let k = parents.len();
            let p = fmath::sigmoid(dot(&params[..k], parents) + params[k]);
            Some(alloc::vec![(0.0, 1.0 - p), (1.0, p)])
        }
        _ => None,
    }
}

/// Human-readable name used in validation messages.
pub fn kind_name(kind: &PrimitiveKind) -> String {
    match kind {
        PrimitiveKind::Affine => "affine".into(),
        PrimitiveKind::XorNoise => "xor-noise".into(),
        PrimitiveKind::LogisticGate => "logistic-gate".into(),
        PrimitiveKind::Polynomial { degree } => format!("polynomial(degree={degree})"),
        PrimitiveKind::ReluMlp { width } => format!("relu-mlp(width={width})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_matches_hand_value() {
        // 2x + 3y + 1 + 0.5u at (1, 2), u = 2.
        let v = realize(&PrimitiveKind::Affine, &[1.0, 2.0], 2.0, &[2.0, 3.0, 1.0, 0.5]);
        assert_eq!(v, 2.0 + 6.0 + 1.0 + 1.0);
    }

    #[test]
    fn xor_is_parity_with_flip() {
        let k = PrimitiveKind::XorNoise;
        assert_eq!(realize(&k, &[1.0, 1.0], 0.0, &[]), 0.0);
        assert_eq!(realize(&k, &[1.0, 0.0], 0.0, &[]), 1.0);
        assert_eq!(realize(&k, &[1.0, 0.0], 1.0, &[]), 0.0);
        assert_eq!(realize(&k, &[], 1.0, &[]), 1.0);
    }

    #[test]
    fn soft_xor_probe_has_unit_slope_at_corners() {
        // d/dx soft_xor(x, q) = 1 - 2q; at q = 0.1 the chain gain is 0.8.
        let k = PrimitiveKind::XorNoise;
        let h = 1e-6;
        let up = probe(&k, &[0.5 + h], 0.0, 0.1, &[]);
        let dn = probe(&k, &[0.5 - h], 0.0, 0.1, &[]);
        let slope = (up - dn) / (2.0 * h);
        assert!((slope - 0.8).abs() < 1e-6, "slope {slope}");
    }

    #[test]
    fn logistic_gate_thresholds_on_noise() {
        let k = PrimitiveKind::LogisticGate;
        // sigmoid(0) = 0.5.
        assert_eq!(realize(&k, &[0.0], 0.49, &[1.0, 0.0]), 1.0);
        assert_eq!(realize(&k, &[0.0], 0.51, &[1.0, 0.0]), 0.0);
        let cond = analytic_conditional(&k, &[0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(cond[1], (1.0, 0.5));
    }

    #[test]
    fn polynomial_horner_matches_direct() {
        let k = PrimitiveKind::Polynomial { degree: 3 };
        let params = [1.0, -2.0, 0.5, 0.25];
        let x = 1.5;
        let direct = 1.0 - 2.0 * x + 0.5 * x * x + 0.25 * x * x * x;
        assert!((realize(&k, &[x], 0.0, &params) - direct).abs() < 1e-12);
    }

    #[test]
    fn mlp_single_relu_unit() {
        // width 1, one input: w1 = 2, b1 = -1, w2 = 3, b2 = 0.5.
        let k = PrimitiveKind::ReluMlp { width: 1 };
        let params = [2.0, -1.0, 3.0, 0.5];
        // x = 1: relu(1) = 1 -> 3.5; x = 0: relu(-1) = 0 -> 0.5.
        assert_eq!(realize(&k, &[1.0], 0.0, &params), 3.5);
        assert_eq!(realize(&k, &[0.0], 0.0, &params), 0.5);
    }

    #[test]
    fn param_counts() {
        assert_eq!(PrimitiveKind::Affine.param_count(3), 5);
        assert_eq!(PrimitiveKind::XorNoise.param_count(2), 0);
        assert_eq!(PrimitiveKind::LogisticGate.param_count(2), 3);
        assert_eq!(PrimitiveKind::Polynomial { degree: 3 }.param_count(1), 4);
        assert_eq!(PrimitiveKind::ReluMlp { width: 4 }.param_count(2), 17);
    }
}
