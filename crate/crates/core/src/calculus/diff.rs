//! Finite-difference derivatives.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::mat::Mat;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMethod {
    /// `(f(x+h) - f(x-h)) / 2h`, error `O(h^2)` on smooth maps.
    CentralDifference,
    /// `(f(x+h) - f(x)) / h`, error `O(h)`; half the evaluations.
    ForwardDifference,
}

/// Differentiation scheme: method, step, optional one-level Richardson
/// extrapolation (halves the step and cancels the leading error term).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffScheme {
    pub method: DiffMethod,
    pub step: f64,
    pub richardson: bool,
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme {
            method: DiffMethod::CentralDifference,
            step: 1e-5,
            richardson: false,
        }
    }
}

impl DiffScheme {
    pub fn central(step: f64) -> Self {
        DiffScheme {
            method: DiffMethod::CentralDifference,
            step,
            richardson: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(CoreError::Precondition(format!(
                "differentiation step must be a positive finite real, got {}",
                self.step
            )));
        }
        Ok(())
    }
}

fn probe<F>(f: &F, x: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let y = f(x);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NumericalDomain(format!(
            "map produced a non-finite value at probe point {x:?}"
        )));
    }
    Ok(y)
}

fn jacobian_at_step<F>(f: &F, point: &[f64], method: DiffMethod, h: f64) -> Result<Mat>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = point.len();
    let base = probe(f, point)?;
    let m = base.len();
    let mut jac = Mat::zeros(m, n);
    let mut shifted = point.to_vec();
    for j in 0..n {
        let xj = point[j];
        match method {
            DiffMethod::CentralDifference => {
                shifted[j] = xj + h;
                let fp = probe(f, &shifted)?;
                shifted[j] = xj - h;
                let fm = probe(f, &shifted)?;
                if fp.len() != m || fm.len() != m {
                    return Err(CoreError::shape(m, fp.len(), "jacobian output length"));
                }
                for i in 0..m {
                    jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            DiffMethod::ForwardDifference => {
                shifted[j] = xj + h;
                let fp = probe(f, &shifted)?;
                if fp.len() != m {
                    return Err(CoreError::shape(m, fp.len(), "jacobian output length"));
                }
                for i in 0..m {
                    jac[(i, j)] = (fp[i] - base[i]) / h;
                }
            }
        }
        shifted[j] = xj;
    }
    Ok(jac)
}

/// Jacobian of `f` at `point`; row = output index, column = input index.
pub fn jacobian<F>(f: &F, point: &[f64], scheme: &DiffScheme) -> Result<Mat>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    scheme.validate()?;
    let coarse = jacobian_at_step(f, point, scheme.method, scheme.step)?;
    if !scheme.richardson {
        return Ok(coarse);
    }
    let fine = jacobian_at_step(f, point, scheme.method, scheme.step / 2.0)?;
    // One Richardson level: central error is O(h^2), forward is O(h).
    let (num, den) = match scheme.method {
        DiffMethod::CentralDifference => (4.0, 3.0),
        DiffMethod::ForwardDifference => (2.0, 1.0),
    };
    let mut out = Mat::zeros(coarse.rows(), coarse.cols());
    for i in 0..coarse.rows() {
        for j in 0..coarse.cols() {
            out[(i, j)] = (num * fine[(i, j)] - coarse[(i, j)]) / den;
        }
    }
    Ok(out)
}

/// Gradient of a scalar map.
pub fn gradient<F>(f: &F, point: &[f64], scheme: &DiffScheme) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let wrap = |x: &[f64]| alloc::vec![f(x)];
    let jac = jacobian(&wrap, point, scheme)?;
    Ok((0..point.len()).map(|j| jac[(0, j)]).collect())
}

/// Derivative of `f` along `direction` at `point` (direction is not
/// normalized; the result scales with its length).
pub fn directional_derivative<F>(
    f: &F,
    point: &[f64],
    direction: &[f64],
    scheme: &DiffScheme,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if direction.len() != point.len() {
        return Err(CoreError::shape(
            point.len(),
            direction.len(),
            "directional derivative direction",
        ));
    }
    scheme.validate()?;
    let h = scheme.step;
    let line = |t: f64| -> Vec<f64> {
        point
            .iter()
            .zip(direction)
            .map(|(x, d)| x + t * d)
            .collect()
    };
    match scheme.method {
        DiffMethod::CentralDifference => {
            let fp = probe(f, &line(h))?;
            let fm = probe(f, &line(-h))?;
            Ok(fp
                .iter()
                .zip(&fm)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect())
        }
        DiffMethod::ForwardDifference => {
            let f0 = probe(f, point)?;
            let fp = probe(f, &line(h))?;
            Ok(fp.iter().zip(&f0).map(|(p, b)| (p - b) / h).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmath;
    use alloc::vec;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(fmath::abs(a - b) <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn diagonal_linear_map() {
        // f(x) = Ax with A = diag(2, 3).
        let f = |x: &[f64]| vec![2.0 * x[0], 3.0 * x[1]];
        let j = jacobian(&f, &[1.0, 1.0], &DiffScheme::default()).unwrap();
        assert_close(j[(0, 0)], 2.0, 1e-9);
        assert_close(j[(0, 1)], 0.0, 1e-9);
        assert_close(j[(1, 0)], 0.0, 1e-9);
        assert_close(j[(1, 1)], 3.0, 1e-9);
    }

    #[test]
    fn identity_map_gives_identity() {
        let f = |x: &[f64]| x.to_vec();
        for point in [[0.0, 0.0, 0.0], [1.5, -2.0, 0.25]] {
            let j = jacobian(&f, &point, &DiffScheme::default()).unwrap();
            for i in 0..3 {
                for k in 0..3 {
                    assert_close(j[(i, k)], if i == k { 1.0 } else { 0.0 }, 1e-9);
                }
            }
        }
    }

    #[test]
    fn product_sum_map_matches_hand_derivative() {
        // f(x, y) = (x*y, x+y); hand Jacobian at (2, 3) is [[3, 2], [1, 1]].
        let f = |x: &[f64]| vec![x[0] * x[1], x[0] + x[1]];
        let j = jacobian(&f, &[2.0, 3.0], &DiffScheme::default()).unwrap();
        assert_close(j[(0, 0)], 3.0, 1e-8);
        assert_close(j[(0, 1)], 2.0, 1e-8);
        assert_close(j[(1, 0)], 1.0, 1e-8);
        assert_close(j[(1, 1)], 1.0, 1e-8);
    }

    #[test]
    fn non_finite_output_is_a_domain_error() {
        let f = |x: &[f64]| vec![1.0 / x[0]];
        let err = jacobian(&f, &[0.0], &DiffScheme::default()).unwrap_err();
        assert!(matches!(err, CoreError::NumericalDomain(_)));
    }

    #[test]
    fn richardson_tightens_cubic() {
        let f = |x: &[f64]| vec![x[0] * x[0] * x[0]];
        let plain = DiffScheme::central(1e-3);
        let rich = DiffScheme {
            richardson: true,
            ..plain
        };
        let exact = 3.0 * 2.0 * 2.0;
        let e_plain = fmath::abs(jacobian(&f, &[2.0], &plain).unwrap()[(0, 0)] - exact);
        let e_rich = fmath::abs(jacobian(&f, &[2.0], &rich).unwrap()[(0, 0)] - exact);
        assert!(e_rich < e_plain / 10.0, "richardson {e_rich} vs plain {e_plain}");
    }

    #[test]
    fn forward_difference_first_order() {
        let f = |x: &[f64]| vec![x[0] * x[0]];
        let scheme = DiffScheme {
            method: DiffMethod::ForwardDifference,
            step: 1e-6,
            richardson: false,
        };
        let j = jacobian(&f, &[1.0], &scheme).unwrap();
        assert_close(j[(0, 0)], 2.0, 1e-4);
    }

    #[test]
    fn directional_matches_jacobian_times_direction() {
        let f = |x: &[f64]| vec![x[0] * x[1], x[0] + x[1]];
        let p = [2.0, 3.0];
        let d = [0.5, -1.0];
        let dd = directional_derivative(&f, &p, &d, &DiffScheme::default()).unwrap();
        let j = jacobian(&f, &p, &DiffScheme::default()).unwrap();
        let jd = j.matvec(&d);
        for (a, b) in dd.iter().zip(&jd) {
            assert_close(*a, *b, 1e-6);
        }
    }

    #[test]
    fn zero_step_rejected() {
        let f = |x: &[f64]| x.to_vec();
        let scheme = DiffScheme::central(0.0);
        assert!(jacobian(&f, &[1.0], &scheme).is_err());
    }
}
