use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::SampleRecord;

/// Dwell-weighted histogram of sampled `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KPosterior {
    /// Accumulated weight at index `k` (index 0 unused).
    pub weights: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Mode; the smallest `k` wins ties.
    pub map_k: usize,
}

impl KPosterior {
    /// Builds the histogram from `(k, dwell)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut weights = vec![0.0];
        let mut any = false;
        for (k, w) in pairs {
            assert!(k >= 1, "k must be positive");
            if k >= weights.len() {
                weights.resize(k + 1, 0.0);
            }
            weights[k] += w;
            any = true;
        }
        if !any {
            return Err(Error::EmptySamples);
        }
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        let mut map_k = 1;
        for (k, &w) in weights.iter().enumerate().skip(1) {
            if w > weights[map_k] {
                map_k = k;
            }
        }
        Ok(Self {
            weights,
            probabilities,
            map_k,
        })
    }

    pub fn probability(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    /// Largest `k` with non-zero weight.
    pub fn max_k(&self) -> usize {
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

pub fn k_posterior(samples: &[SampleRecord]) -> Result<KPosterior> {
    KPosterior::from_pairs(samples.iter().map(|s| (s.k, s.dwell)))
}
