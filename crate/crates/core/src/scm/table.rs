//! Exact finite joint distributions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::fmath;
use crate::Result;

/// Exact joint distribution over discrete variables: an ordered
/// variable list, a finite support grid per variable, and a dense
/// row-major probability array (last variable fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    variables: Vec<String>,
    supports: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

impl DistributionTable {
    pub fn new(
        variables: Vec<String>,
        supports: Vec<Vec<f64>>,
        probabilities: Vec<f64>,
    ) -> Result<Self> {
        if variables.len() != supports.len() {
            return Err(CoreError::shape(
                variables.len(),
                supports.len(),
                "distribution table supports",
            ));
        }
        let cells: usize = supports.iter().map(Vec::len).product();
        if probabilities.len() != cells {
            return Err(CoreError::shape(cells, probabilities.len(), "distribution table cells"));
        }
        if probabilities.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(CoreError::Validation(
                "distribution table has a negative or non-finite probability".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if fmath::abs(total - 1.0) > 1e-12 {
            return Err(CoreError::Validation(format!(
                "distribution table sums to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(DistributionTable {
            variables,
            supports,
            probabilities,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn supports(&self) -> &[Vec<f64>] {
        &self.supports
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn cells(&self) -> usize {
        self.probabilities.len()
    }

    fn strides(&self) -> Vec<usize> {
        let n = self.supports.len();
        let mut strides = alloc::vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.supports[i + 1].len();
        }
        strides
    }

    /// Assignment (one value per variable) at a flat cell index.
    pub fn assignment(&self, mut index: usize) -> Vec<f64> {
        let strides = self.strides();
        self.supports
            .iter()
            .zip(&strides)
            .map(|(support, stride)| {
                let pos = index / stride;
                index %= stride;
                support[pos]
            })
            .collect()
    }

    /// Probability of an exact joint assignment (values must match the
    /// support grid bit for bit).
    pub fn prob_of(&self, assignment: &[f64]) -> Result<f64> {
        if assignment.len() != self.variables.len() {
            return Err(CoreError::shape(
                self.variables.len(),
                assignment.len(),
                "assignment length",
            ));
        }
        let mut index = 0usize;
        for ((support, value), stride) in self.supports.iter().zip(assignment).zip(self.strides()) {
            let pos = support.iter().position(|s| s == value).ok_or_else(|| {
                CoreError::Validation(format!("value {value} not in the variable's support"))
            })?;
            index += pos * stride;
        }
        Ok(self.probabilities[index])
    }

    /// Marginal over `keep`, in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<DistributionTable> {
        let positions: Vec<usize> = keep
            .iter()
            .map(|name| {
                self.variables
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| CoreError::Validation(format!("unknown variable '{name}'")))
            })
            .collect::<Result<_>>()?;
        let kept_supports: Vec<Vec<f64>> = positions.iter().map(|&p| self.supports[p].clone()).collect();
        let cells: usize = kept_supports.iter().map(Vec::len).product();
        let mut probs = alloc::vec![0.0; cells];
        let strides = {
            let mut s = alloc::vec![1usize; positions.len()];
            for i in (0..positions.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * kept_supports[i + 1].len();
            }
            s
        };
        for (cell, p) in self.probabilities.iter().enumerate() {
            let full = self.assignment(cell);
            let mut idx = 0usize;
            for (k, &pos) in positions.iter().enumerate() {
                let value = full[pos];
                let vpos = self.supports[pos]
                    .iter()
                    .position(|s| *s == value)
                    .expect("assignment value in support");
                idx += vpos * strides[k];
            }
            probs[idx] += p;
        }
        DistributionTable::new(keep.iter().map(|s| String::from(*s)).collect(), kept_supports, probs)
    }

    /// Total variation distance; requires identical variables and
    /// supports.
    pub fn tv_distance(&self, other: &DistributionTable) -> Result<f64> {
        if self.variables != other.variables || self.supports != other.supports {
            return Err(CoreError::Precondition(
                "total variation distance needs identical variables and supports".into(),
            ));
        }
        let sum: f64 = self
            .probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| fmath::abs(a - b))
            .sum();
        Ok(sum / 2.0)
    }

    /// Empirical distribution of sample rows on a fixed support grid.
    /// Rows with out-of-support values are an error.
    pub fn from_samples(
        variables: Vec<String>,
        supports: Vec<Vec<f64>>,
        rows: &[Vec<f64>],
    ) -> Result<DistributionTable> {
        if rows.is_empty() {
            return Err(CoreError::Precondition("no sample rows".into()));
        }
        let cells: usize = supports.iter().map(Vec::len).product();
        let mut counts = alloc::vec![0.0; cells];
        let mut strides = alloc::vec![1usize; supports.len()];
        for i in (0..supports.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * supports[i + 1].len();
        }
        for row in rows {
            let mut idx = 0usize;
            for ((support, value), stride) in supports.iter().zip(row).zip(&strides) {
                let pos = support.iter().position(|s| s == value).ok_or_else(|| {
                    CoreError::Validation(format!("sample value {value} not in declared support"))
                })?;
                idx += pos * stride;
            }
            counts[idx] += 1.0;
        }
        let n = rows.len() as f64;
        for c in &mut counts {
            *c /= n;
        }
        DistributionTable::new(variables, supports, counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn two_by_two() -> DistributionTable {
        DistributionTable::new(
            vec!["x".to_string(), "y".to_string()],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![0.45, 0.05, 0.05, 0.45],
        )
        .unwrap()
    }

    #[test]
    fn prob_lookup_row_major() {
        let t = two_by_two();
        assert_eq!(t.prob_of(&[0.0, 0.0]).unwrap(), 0.45);
        assert_eq!(t.prob_of(&[0.0, 1.0]).unwrap(), 0.05);
        assert_eq!(t.prob_of(&[1.0, 0.0]).unwrap(), 0.05);
        assert_eq!(t.prob_of(&[1.0, 1.0]).unwrap(), 0.45);
    }

    #[test]
    fn marginal_collapses_correctly() {
        let t = two_by_two();
        let m = t.marginal(&["y"]).unwrap();
        assert_eq!(m.probabilities(), &[0.5, 0.5]);
        let mx = t.marginal(&["x"]).unwrap();
        assert_eq!(mx.probabilities(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_reorders() {
        let t = DistributionTable::new(
            vec!["x".to_string(), "y".to_string()],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let swapped = t.marginal(&["y", "x"]).unwrap();
        assert_eq!(swapped.prob_of(&[1.0, 0.0]).unwrap(), 0.2);
        assert_eq!(swapped.prob_of(&[0.0, 1.0]).unwrap(), 0.3);
    }

    #[test]
    fn tv_distance_of_identical_tables_is_zero() {
        let t = two_by_two();
        assert_eq!(t.tv_distance(&t).unwrap(), 0.0);
    }

    #[test]
    fn bad_sum_rejected() {
        let r = DistributionTable::new(
            vec!["x".to_string()],
            vec![vec![0.0, 1.0]],
            vec![0.6, 0.6],
        );
        assert!(r.is_err());
    }

    #[test]
    fn empirical_counts_normalize() {
        let rows = vec![vec![0.0], vec![1.0], vec![1.0], vec![1.0]];
        let t = DistributionTable::from_samples(
            vec!["x".to_string()],
            vec![vec![0.0, 1.0]],
            &rows,
        )
        .unwrap();
        assert_eq!(t.probabilities(), &[0.25, 0.75]);
    }
}
