use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on `|sum - 1|` accepted by [`DistributionVector::new`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector over joint-action profiles (or over occupancy states).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistributionVector(Vec<f64>);

impl DistributionVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, NORMALIZATION_TOL)
    }

    pub fn with_tolerance(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Shape("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "distribution entry {p} is negative or not finite"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotNormalized(sum));
        }
        Ok(Self(probs))
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidParameter(format!("weights sum to {sum}")));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over an empty set");
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n, "point mass outside support");
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        Self(v)
    }

    /// Wraps a vector produced by an internal computation that is already
    /// normalized up to floating-point drift.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.0.iter().enumerate() {
            if *p < self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl std::ops::Index<usize> for DistributionVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_and_negative() {
        assert!(matches!(
            DistributionVector::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized(_))
        ));
        assert!(DistributionVector::new(vec![1.5, -0.5]).is_err());
        assert!(DistributionVector::new(vec![]).is_err());
        assert!(DistributionVector::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn weights_are_normalized() {
        let d = DistributionVector::from_weights(vec![1.0, 3.0]).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
        assert_eq!(d.argmin(), 0);
    }
}
