//! Finite coordinate spaces carrying a diagonal inner product.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability weighting.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A finite coordinate space with inner product `[f, g] = Σ w_i f_i g_i`.
///
/// Two kinds exist: probability spaces (strictly positive weights summing
/// to one, e.g. the stationary measure on vertices or the uniform measure on
/// edges) and the standard Euclidean space with unit weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSpace {
    weights: Vec<f64>,
    euclidean: bool,
}

impl WeightedSpace {
    /// Probability weighting; rejects empty, non-positive or unnormalized weights.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is {w}, must be strictly positive"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            weights,
            euclidean: false,
        })
    }

    /// Strictly positive weights of arbitrary total mass.
    pub fn positive(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidWeights("weights must be strictly positive".into()));
        }
        Ok(Self {
            weights,
            euclidean: false,
        })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        Self::probability(vec![1.0 / dim as f64; dim])
    }

    /// Standard Euclidean `ℝⁿ`.
    pub fn euclidean(dim: usize) -> Self {
        Self {
            weights: vec![1.0; dim],
            euclidean: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_euclidean(&self) -> bool {
        self.euclidean
    }

    /// `[f, g]` in this space.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Weighted mean of a scalar function; only meaningful for probability spaces.
    pub fn mean(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Whether two spaces define the same inner product (weights agree to `tol`).
    pub fn compatible_with(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300))
    }

    /// Reorders coordinates: entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            weights: perm.iter().map(|&p| self.weights[p]).collect(),
            euclidean: self.euclidean,
        }
    }
}
