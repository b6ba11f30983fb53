//! Metric estimation from score outer products.
//!
//! The expected outer product of the score `∇_θ log p(x; θ)` is the
//! Fisher information; its block structure over a parent/child split of
//! the parameters witnesses mechanism separability. Scores are obtained
//! by central differences of the log-density, so any model exposing a
//! sampler and a log-density works, with no autodiff requirement.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::diff::DiffScheme;
use crate::error::CoreError;
use crate::fmath;
use crate::mat::Mat;
use crate::rng::SeedRng;
use crate::Result;

/// A parametric sampler with a pointwise log-density.
///
/// Observations are plain `f64` vectors. `log_density_batch` exists so
/// models with an expensive per-θ setup (e.g. exact enumeration of a
/// discrete joint) can amortize it across a batch; the default maps the
/// pointwise method.
pub trait ScoreModel {
    /// Parameter dimension.
    fn theta_dim(&self) -> usize;

    /// Draw one observation at `theta`.
    fn sample(&self, theta: &[f64], rng: &mut SeedRng) -> Vec<f64>;

    /// Draw a batch; override when per-θ setup dominates per-draw cost.
    fn sample_batch(&self, theta: &[f64], n: usize, rng: &mut SeedRng) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.sample(theta, rng)).collect()
    }

    /// Log-density of `obs` at `theta`. Must be finite for observations
    /// the model itself can produce.
    fn log_density(&self, theta: &[f64], obs: &[f64]) -> Result<f64>;

    fn log_density_batch(&self, theta: &[f64], obs: &[Vec<f64>]) -> Result<Vec<f64>> {
        obs.iter().map(|o| self.log_density(theta, o)).collect()
    }
}

/// Sampled metric with per-entry standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    /// Symmetric matrix of mean score outer products.
    pub matrix: Mat,
    pub sample_count: usize,
    /// Per-entry standard error of the mean.
    pub standard_error: Mat,
}

impl MetricEstimate {
    /// Sum-of-squares mass of entries that couple `block_a` coordinates
    /// to `block_b` coordinates, as a fraction of total mass.
    ///
    /// Near-diagonal-block metrics give ratios near zero; structurally
    /// coupled parameterizations push the ratio toward 1/2.
    pub fn off_block_ratio(&self, block_a: &[usize], block_b: &[usize]) -> f64 {
        let mut off = 0.0;
        for &i in block_a {
            for &j in block_b {
                let v = self.matrix[(i, j)];
                let w = self.matrix[(j, i)];
                off += v * v + w * w;
            }
        }
        let total = self.matrix.sq_mass();
        if total == 0.0 {
            0.0
        } else {
            off / total
        }
    }
}

/// Empirical metric (mean outer product of finite-difference scores)
/// from `n` seeded draws at `theta`.
pub fn fisher_estimate<M: ScoreModel>(
    model: &M,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<MetricEstimate> {
    fisher_estimate_with(model, theta, n, seed, &DiffScheme::default())
}

pub fn fisher_estimate_with<M: ScoreModel>(
    model: &M,
    theta: &[f64],
    n: usize,
    seed: u64,
    scheme: &DiffScheme,
) -> Result<MetricEstimate> {
    let d = model.theta_dim();
    if theta.len() != d {
        return Err(CoreError::shape(d, theta.len(), "fisher theta"));
    }
    if n < 100 {
        return Err(CoreError::Precondition(format!(
            "fisher estimation needs at least 100 samples, got {n}"
        )));
    }
    scheme.validate()?;

    let mut rng = SeedRng::new(seed);
    let obs = model.sample_batch(theta, n, &mut rng);

    // Batched log-densities at the 2d shifted parameter points.
    let h = scheme.step;
    let mut plus = Vec::with_capacity(d);
    let mut minus = Vec::with_capacity(d);
    let mut shifted = theta.to_vec();
    for j in 0..d {
        let t = theta[j];
        shifted[j] = t + h;
        plus.push(check_finite(model.log_density_batch(&shifted, &obs)?)?);
        shifted[j] = t - h;
        minus.push(check_finite(model.log_density_batch(&shifted, &obs)?)?);
        shifted[j] = t;
    }

    let mut mean = Mat::zeros(d, d);
    let mut mean_sq = Mat::zeros(d, d);
    let mut score = alloc::vec![0.0; d];
    for k in 0..n {
        for j in 0..d {
            score[j] = (plus[j][k] - minus[j][k]) / (2.0 * h);
        }
        for i in 0..d {
            for j in 0..d {
                let o = score[i] * score[j];
                mean[(i, j)] += o;
                mean_sq[(i, j)] += o * o;
            }
        }
    }
    let nf = n as f64;
    let mut se = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            mean[(i, j)] /= nf;
            let var = (mean_sq[(i, j)] / nf - mean[(i, j)] * mean[(i, j)]).max(0.0);
            se[(i, j)] = fmath::sqrt(var / nf);
        }
    }
    Ok(MetricEstimate {
        matrix: mean,
        sample_count: n,
        standard_error: se,
    })
}

fn check_finite(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::NumericalDomain(
            "log-density is non-finite at a probe parameter (degenerate density)".into(),
        ));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `dim` independent coins, coin `i` has success probability `theta[i]`.
    struct Coins {
        dim: usize,
    }

    impl ScoreModel for Coins {
        fn theta_dim(&self) -> usize {
            self.dim
        }

        fn sample(&self, theta: &[f64], rng: &mut SeedRng) -> Vec<f64> {
            theta.iter().map(|&p| rng.bernoulli(p)).collect()
        }

        fn log_density(&self, theta: &[f64], obs: &[f64]) -> Result<f64> {
            let mut total = 0.0;
            for (p, x) in theta.iter().zip(obs) {
                let pr = if *x > 0.5 { *p } else { 1.0 - *p };
                if pr <= 0.0 {
                    return Err(CoreError::NumericalDomain("zero-probability sample".into()));
                }
                total += fmath::ln(pr);
            }
            Ok(total)
        }
    }

    /// One coin with p = clamp01(theta_0 + theta_1): a rank-1 family.
    struct CoupledCoin;

    impl ScoreModel for CoupledCoin {
        fn theta_dim(&self) -> usize {
            2
        }

        fn sample(&self, theta: &[f64], rng: &mut SeedRng) -> Vec<f64> {
            alloc::vec![rng.bernoulli(fmath::clamp01(theta[0] + theta[1]))]
        }

        fn log_density(&self, theta: &[f64], obs: &[f64]) -> Result<f64> {
            let p = fmath::clamp01(theta[0] + theta[1]);
            let pr = if obs[0] > 0.5 { p } else { 1.0 - p };
            if pr <= 0.0 {
                return Err(CoreError::NumericalDomain("zero-probability sample".into()));
            }
            Ok(fmath::ln(pr))
        }
    }

    #[test]
    fn independent_coins_near_diagonal() {
        // Closed form: Fisher of Bern(p) in p is 1/(p(1-p)) = 4 at p = 1/2.
        let est = fisher_estimate(&Coins { dim: 2 }, &[0.5, 0.5], 20_000, 99).unwrap();
        for i in 0..2 {
            assert!(
                fmath::abs(est.matrix[(i, i)] - 4.0) < 0.15,
                "diag {}",
                est.matrix[(i, i)]
            );
        }
        let off = fmath::abs(est.matrix[(0, 1)]);
        assert!(
            off <= 3.0 * est.standard_error[(0, 1)].max(1e-9),
            "off {off} se {}",
            est.standard_error[(0, 1)]
        );
    }

    #[test]
    fn single_coin_scalar_fisher() {
        let est = fisher_estimate(&Coins { dim: 1 }, &[0.5], 20_000, 7).unwrap();
        assert!(fmath::abs(est.matrix[(0, 0)] - 4.0) < 0.15);
    }

    #[test]
    fn coupled_coin_rank_one() {
        // All four entries estimate the same scalar 1/(p(1-p)) = 4.
        let est = fisher_estimate(&CoupledCoin, &[0.25, 0.25], 20_000, 13).unwrap();
        let m = &est.matrix;
        let avg = (m[(0, 0)] + m[(0, 1)] + m[(1, 0)] + m[(1, 1)]) / 4.0;
        for i in 0..2 {
            for j in 0..2 {
                assert!(fmath::abs(m[(i, j)] - avg) < 0.05 * avg, "entry {}", m[(i, j)]);
            }
        }
        assert!(fmath::abs(avg - 4.0) < 0.2, "avg {avg}");
        assert!(est.off_block_ratio(&[0], &[1]) > 0.4);
    }

    #[test]
    fn estimate_is_exactly_symmetric() {
        let est = fisher_estimate(&Coins { dim: 3 }, &[0.3, 0.5, 0.7], 500, 21).unwrap();
        assert!(est.matrix.asymmetry() <= 1e-12);
    }

    #[test]
    fn too_few_samples_rejected() {
        let err = fisher_estimate(&Coins { dim: 1 }, &[0.5], 10, 1).unwrap_err();
        assert!(matches!(err, CoreError::Precondition(_)));
    }

    /// Uniform on [0, theta]: hard support boundary, so probing theta
    /// downward strands samples outside the support.
    struct BoundedUniform;

    impl ScoreModel for BoundedUniform {
        fn theta_dim(&self) -> usize {
            1
        }

        fn sample(&self, theta: &[f64], rng: &mut SeedRng) -> Vec<f64> {
            alloc::vec![rng.uniform_in(0.0, theta[0])]
        }

        fn log_density(&self, theta: &[f64], obs: &[f64]) -> Result<f64> {
            if obs[0] < 0.0 || obs[0] > theta[0] {
                return Err(CoreError::NumericalDomain("zero-probability sample".into()));
            }
            Ok(-fmath::ln(theta[0]))
        }
    }

    #[test]
    fn degenerate_density_is_domain_error() {
        // With a coarse step, some of the 2000 draws land within `h` of
        // the support boundary, so the downward probe sees a
        // zero-probability sample.
        let scheme = DiffScheme::central(0.01);
        let err = fisher_estimate_with(&BoundedUniform, &[0.5], 2000, 5, &scheme);
        assert!(matches!(err, Err(CoreError::NumericalDomain(_))));
    }
}
