use std::f64::consts::PI;

use super::{ComponentModel, ComponentSummary};

/// Univariate Gaussian components with a shared known variance and a flat
/// prior of width `a` on each component mean.
///
/// Per component, `ln P = −ln a − ((n−1)/2) ln(2πσ²) − ½ ln n − SS/(2σ²)`
/// where `SS` is the within-component sum of squared deviations.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    x: Vec<f64>,
    sigma2: f64,
    width: f64,
    ln_width: f64,
    ln_two_pi_sigma2: f64,
    inv_two_sigma2: f64,
    /// `½ ln(n/(n+1)) − ½ ln(2πσ²)` indexed by `n`.
    weight_prefactor: Vec<f64>,
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaussianStats {
    pub n: usize,
    pub mean: f64,
    pub ss: f64,
}

impl GaussianModel {
    pub fn new(x: Vec<f64>, sigma2: f64, width: f64) -> Self {
        assert!(sigma2 > 0.0 && width > 0.0);
        let ln_two_pi_sigma2 = (2.0 * PI * sigma2).ln();
        let weight_prefactor = (0..=x.len())
            .map(|n| {
                if n == 0 {
                    f64::NAN
                } else {
                    0.5 * (n as f64 / (n as f64 + 1.0)).ln() - 0.5 * ln_two_pi_sigma2
                }
            })
            .collect();
        Self {
            x,
            sigma2,
            width,
            ln_width: width.ln(),
            ln_two_pi_sigma2,
            inv_two_sigma2: 0.5 / sigma2,
            weight_prefactor,
        }
    }

    /// Data range plus six standard deviations.
    pub fn default_width(x: &[f64], sigma2: f64) -> f64 {
        let (lo, hi) = x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        (hi - lo) + 6.0 * sigma2.sqrt()
    }

    pub fn data(&self) -> &[f64] {
        &self.x
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn width(&self) -> f64 {
        self.width
    }
}

impl ComponentModel for GaussianModel {
    type Stats = GaussianStats;

    fn n_obs(&self) -> usize {
        self.x.len()
    }

    fn empty_stats(&self) -> GaussianStats {
        GaussianStats::default()
    }

    fn reset(&self, stats: &mut GaussianStats) {
        *stats = GaussianStats::default();
    }

    #[inline]
    fn count(&self, stats: &GaussianStats) -> usize {
        stats.n
    }

    #[inline]
    fn add_obs(&self, s: &mut GaussianStats, i: usize) {
        let x = self.x[i];
        s.n += 1;
        let d = x - s.mean;
        s.mean += d / s.n as f64;
        s.ss += d * (x - s.mean);
    }

    #[inline]
    fn remove_obs(&self, s: &mut GaussianStats, i: usize) {
        debug_assert!(s.n >= 1, "removing from an empty component");
        let x = self.x[i];
        if s.n == 1 {
            *s = GaussianStats::default();
            return;
        }
        let old_mean = s.mean;
        s.n -= 1;
        s.mean = (old_mean * (s.n + 1) as f64 - x) / s.n as f64;
        s.ss = (s.ss - (x - s.mean) * (x - old_mean)).max(0.0);
    }

    #[inline]
    fn log_weight_existing(&self, s: &GaussianStats, i: usize) -> f64 {
        debug_assert!(s.n >= 1, "weight against an empty component");
        let n = s.n as f64;
        let d = self.x[i] - s.mean;
        self.weight_prefactor[s.n] - (n / (n + 1.0)) * d * d * self.inv_two_sigma2
    }

    #[inline]
    fn log_singleton(&self, _i: usize) -> f64 {
        -self.ln_width
    }

    fn log_component(&self, s: &GaussianStats) -> f64 {
        let n = s.n as f64;
        -self.ln_width - 0.5 * (n - 1.0) * self.ln_two_pi_sigma2 - 0.5 * n.ln() - s.ss * self.inv_two_sigma2
    }

    fn summarize(&self, s: &GaussianStats) -> ComponentSummary {
        ComponentSummary::Gaussian {
            size: s.n,
            mean: s.mean,
            variance: self.sigma2 / s.n as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::log_marginal_likelihood;
    use crate::state::PartitionState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stats(model: &GaussianModel, idx: &[u32]) -> GaussianStats {
        model.stats_of(idx)
    }

    #[test]
    fn weight_for_matching_singleton() {
        let m = GaussianModel::new(vec![0.0, 0.0], 1.0, 10.0);
        let w = m.log_weight_existing(&stats(&m, &[0]), 1).exp();
        assert!((w - 0.28209479177387814).abs() < 1e-12, "{w}");
        // Oracle: ratio of closed-form marginals with and without obs 1.
        let joined = PartitionState::from_assignment(&[0, 0]).unwrap();
        let one = GaussianModel::new(vec![0.0], 1.0, 10.0);
        let alone = PartitionState::single_component(1);
        let ratio = (log_marginal_likelihood(&m, &joined) - log_marginal_likelihood(&one, &alone)).exp();
        assert!((w - ratio).abs() < 1e-12);
    }

    #[test]
    fn single_observation_marginal() {
        let m = GaussianModel::new(vec![3.7], 1.0, 10.0);
        let lml = log_marginal_likelihood(&m, &PartitionState::single_component(1));
        assert!((lml + 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn incremental_matches_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..1000).map(|_| 1e3 + rng.random_range(-50.0..50.0)).collect();
        let m = GaussianModel::new(x.clone(), 1.0, 1.0);
        let mut s = m.empty_stats();
        (0..x.len()).for_each(|i| m.add_obs(&mut s, i));
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        assert!(((s.mean - mean) / mean).abs() < 1e-9);
        assert!(((s.ss - ss) / ss).abs() < 1e-9);

        // Remove half again and compare with the batch values of the rest.
        (0..500).for_each(|i| m.remove_obs(&mut s, i));
        let rest = &x[500..];
        let mean = rest.iter().sum::<f64>() / 500.0;
        let ss: f64 = rest.iter().map(|v| (v - mean).powi(2)).sum();
        assert!(((s.mean - mean) / mean).abs() < 1e-9);
        assert!(((s.ss - ss) / ss).abs() < 1e-9);
    }

    #[test]
    fn add_then_remove_restores() {
        let m = GaussianModel::new(vec![1.25, -3.5, 8.0, 0.1], 2.0, 30.0);
        let before = stats(&m, &[0, 1, 2]);
        let mut s = before;
        m.add_obs(&mut s, 3);
        m.remove_obs(&mut s, 3);
        assert_eq!(s.n, before.n);
        assert!((s.mean - before.mean).abs() < 1e-9 * before.mean.abs().max(1.0));
        assert!((s.ss - before.ss).abs() < 1e-9 * before.ss.max(1.0));
    }

    #[test]
    fn squared_deviation_identity() {
        // n' σ'² − n σ² = (n/n') (x − x̄)²
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..40);
            let x: Vec<f64> = (0..=n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let m = GaussianModel::new(x.clone(), 1.0, 1.0);
            let members: Vec<u32> = (0..n as u32).collect();
            let s = stats(&m, &members);
            let mut s2 = s;
            m.add_obs(&mut s2, n);
            let lhs = s2.ss - s.ss;
            let rhs = (n as f64 / (n as f64 + 1.0)) * (x[n] - s.mean).powi(2);
            assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn posterior_summary() {
        let m = GaussianModel::new(vec![1.0, 3.0], 4.0, 10.0);
        assert_eq!(
            m.summarize(&stats(&m, &[0, 1])),
            ComponentSummary::Gaussian { size: 2, mean: 2.0, variance: 2.0 }
        );
    }
}
