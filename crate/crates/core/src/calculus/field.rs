//! Vector fields, fixed-step flows, and commutator witnesses.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::diff::{jacobian, DiffScheme};
use crate::error::CoreError;
use crate::fmath;
use crate::Result;

/// Axis-aligned box domain; probes outside it are errors, never clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(CoreError::shape(lo.len(), hi.len(), "domain box bounds"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(CoreError::Validation(
                "domain box has lo > hi on some axis".into(),
            ));
        }
        Ok(DomainBox { lo, hi })
    }

    /// Cube `[-r, r]^dim`.
    pub fn centered(dim: usize, r: f64) -> Self {
        DomainBox {
            lo: alloc::vec![-r; dim],
            hi: alloc::vec![r; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    fn check(&self, x: &[f64], context: &str) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(CoreError::NumericalDomain(format!(
                "{context}: point {x:?} left the declared box"
            )))
        }
    }
}

type FieldFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A vector field on `R^dim`, optionally restricted to a box.
///
/// `evaluate` must return a tangent vector of the same dimension; the
/// constructors check this lazily at each call.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    domain: Option<DomainBox>,
    f: Arc<FieldFn>,
}

impl core::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("VectorField")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish()
    }
}

impl VectorField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        VectorField {
            dim,
            domain: None,
            f: Arc::new(f),
        }
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Constant field (translation generator).
    pub fn constant(v: Vec<f64>) -> Self {
        let dim = v.len();
        VectorField::new(dim, move |_| v.clone())
    }

    /// Coordinate axis field `∂/∂x_axis`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        VectorField::new(dim, move |_| {
            let mut v = alloc::vec![0.0; dim];
            v[axis] = 1.0;
            v
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(CoreError::shape(self.dim, x.len(), "vector field input"));
        }
        if let Some(b) = &self.domain {
            b.check(x, "vector field")?;
        }
        let v = (self.f)(x);
        if v.len() != self.dim {
            return Err(CoreError::shape(self.dim, v.len(), "vector field output"));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::NumericalDomain(format!(
                "vector field non-finite at {x:?}"
            )));
        }
        Ok(v)
    }

    fn as_map(&self) -> Box<dyn Fn(&[f64]) -> Vec<f64> + '_> {
        Box::new(move |x: &[f64]| (self.f)(x))
    }
}

/// Lie bracket `[X, Y] = J_Y · X - J_X · Y` at `point`.
///
/// A near-zero bracket certifies that the two flows commute locally.
pub fn lie_bracket(
    x_field: &VectorField,
    y_field: &VectorField,
    point: &[f64],
    scheme: &DiffScheme,
) -> Result<Vec<f64>> {
    if x_field.dim() != y_field.dim() {
        return Err(CoreError::shape(
            x_field.dim(),
            y_field.dim(),
            "lie bracket field dimensions",
        ));
    }
    let x_at = x_field.evaluate(point)?;
    let y_at = y_field.evaluate(point)?;
    let jx = jacobian(&x_field.as_map(), point, scheme)?;
    let jy = jacobian(&y_field.as_map(), point, scheme)?;
    let jyx = jy.matvec(&x_at);
    let jxy = jx.matvec(&y_at);
    Ok(jyx.iter().zip(&jxy).map(|(a, b)| a - b).collect())
}

/// Number of RK4 substeps for a flow of duration `t`: 16 per unit time,
/// at least one.
fn substeps(t: f64) -> usize {
    let n = libm::ceil(16.0 * fmath::abs(t)) as usize;
    n.max(1)
}

/// Flow `point` along `field` for time `t` with fixed-step RK4.
pub fn flow(field: &VectorField, point: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = substeps(t);
    let h = t / n as f64;
    let mut x = point.to_vec();
    for _ in 0..n {
        let k1 = field.evaluate(&x)?;
        let half1: Vec<f64> = x.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = field.evaluate(&half1)?;
        let half2: Vec<f64> = x.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
        let k3 = field.evaluate(&half2)?;
        let full: Vec<f64> = x.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
        let k4 = field.evaluate(&full)?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(x)
}

/// Commutator loop defect, normalized by `t^2`.
///
/// Flows `point` forward along X then Y, back along X then Y, and
/// returns `‖loop(point) - point‖ / t²`. As `t → 0` this converges to
/// `‖[X, Y](point)‖`, giving a derivative-free commutation witness.
pub fn flow_commutator_witness(
    x_field: &VectorField,
    y_field: &VectorField,
    point: &[f64],
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(CoreError::Precondition(format!(
            "flow time must be a positive finite real, got {t}"
        )));
    }
    if x_field.dim() != y_field.dim() {
        return Err(CoreError::shape(
            x_field.dim(),
            y_field.dim(),
            "flow commutator field dimensions",
        ));
    }
    let a = flow(x_field, point, t)?;
    let b = flow(y_field, &a, t)?;
    let c = flow(x_field, &b, -t)?;
    let d = flow(y_field, &c, -t)?;
    let defect: Vec<f64> = d.iter().zip(point).map(|(q, p)| q - p).collect();
    Ok(fmath::norm2(&defect) / (t * t))
}
