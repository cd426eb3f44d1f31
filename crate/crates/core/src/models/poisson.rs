use super::{ComponentModel, ComponentSummary};
use crate::special::ln_gamma;

/// Poisson components with a Gamma(α, β) prior on each mean.
///
/// Per component, `ln P = α ln β − lnΓ(α) + lnΓ(X+α) − (X+α) ln(n+β)` with
/// `X` the component's total count. The data factor `−Σ ln x_i!` is
/// computed once.
#[derive(Debug, Clone)]
pub struct PoissonModel {
    x: Vec<u64>,
    shape: f64,
    rate: f64,
    /// `lnΓ(m + α)` for `m = 0..=Σx`.
    ln_gamma_shift: Vec<f64>,
    /// `ln(n + β)` for `n = 0..=N+1`.
    ln_n_rate: Vec<f64>,
    ln_gamma_shape: f64,
    shape_ln_rate: f64,
    ln_data: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoissonStats {
    pub n: usize,
    pub sum: u64,
}

impl PoissonModel {
    pub fn new(x: Vec<u64>, shape: f64, rate: f64) -> Self {
        assert!(shape > 0.0 && rate > 0.0);
        let total: u64 = x.iter().sum();
        let ln_gamma_shift = (0..=total).map(|m| ln_gamma(m as f64 + shape)).collect();
        let ln_n_rate = (0..=x.len() + 1).map(|n| (n as f64 + rate).ln()).collect();
        let ln_data = -x.iter().map(|&v| ln_gamma(v as f64 + 1.0)).sum::<f64>();
        Self {
            x,
            shape,
            rate,
            ln_gamma_shift,
            ln_n_rate,
            ln_gamma_shape: ln_gamma(shape),
            shape_ln_rate: shape * rate.ln(),
            ln_data,
        }
    }

    pub fn data(&self) -> &[u64] {
        &self.x
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl ComponentModel for PoissonModel {
    type Stats = PoissonStats;

    fn n_obs(&self) -> usize {
        self.x.len()
    }

    fn empty_stats(&self) -> PoissonStats {
        PoissonStats::default()
    }

    fn reset(&self, stats: &mut PoissonStats) {
        *stats = PoissonStats::default();
    }

    #[inline]
    fn count(&self, stats: &PoissonStats) -> usize {
        stats.n
    }

    #[inline]
    fn add_obs(&self, s: &mut PoissonStats, i: usize) {
        s.n += 1;
        s.sum += self.x[i];
    }

    #[inline]
    fn remove_obs(&self, s: &mut PoissonStats, i: usize) {
        assert!(s.n >= 1 && s.sum >= self.x[i], "observation {i} is not counted");
        s.n -= 1;
        s.sum -= self.x[i];
    }

    #[inline]
    fn log_weight_existing(&self, s: &PoissonStats, i: usize) -> f64 {
        debug_assert!(s.n >= 1, "weight against an empty component");
        let xi = self.x[i];
        let big_x = s.sum as f64 + self.shape;
        self.ln_gamma_shift[(s.sum + xi) as usize] - self.ln_gamma_shift[s.sum as usize]
            + big_x * self.ln_n_rate[s.n]
            - (big_x + xi as f64) * self.ln_n_rate[s.n + 1]
    }

    #[inline]
    fn log_singleton(&self, i: usize) -> f64 {
        let xi = self.x[i];
        self.ln_gamma_shift[xi as usize] - self.ln_gamma_shape + self.shape_ln_rate
            - (xi as f64 + self.shape) * self.ln_n_rate[1]
    }

    fn log_component(&self, s: &PoissonStats) -> f64 {
        self.shape_ln_rate - self.ln_gamma_shape + self.ln_gamma_shift[s.sum as usize]
            - (s.sum as f64 + self.shape) * self.ln_n_rate[s.n]
    }

    fn log_data_factor(&self) -> f64 {
        self.ln_data
    }

    fn summarize(&self, s: &PoissonStats) -> ComponentSummary {
        let shape = s.sum as f64 + self.shape;
        let rate = s.n as f64 + self.rate;
        ComponentSummary::Poisson {
            size: s.n,
            shape,
            rate,
            mean: shape / rate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_example() {
        // Component {2}, adding x = 1, α = β = 1: Γ(4)/Γ(3) · 2³/3⁴
        let m = PoissonModel::new(vec![2, 1], 1.0, 1.0);
        let w = m.log_weight_existing(&m.stats_of(&[0]), 1).exp();
        assert!((w - 24.0 / 81.0).abs() < 1e-14, "{w}");
    }

    #[test]
    fn singleton_factor_example() {
        // Γ(1)/Γ(1) · β^α/(β+1)^(x+α) with x = 0, α = β = 1
        let m = PoissonModel::new(vec![0, 4], 1.0, 1.0);
        assert!((m.log_singleton(0).exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn add_updates_sum() {
        let m = PoissonModel::new(vec![2, 3, 3], 1.0, 1.0);
        let mut s = m.stats_of(&[0, 1]);
        assert_eq!(s, PoissonStats { n: 2, sum: 5 });
        m.add_obs(&mut s, 2);
        assert_eq!(s, PoissonStats { n: 3, sum: 8 });
        m.remove_obs(&mut s, 2);
        assert_eq!(s, PoissonStats { n: 2, sum: 5 });
    }

    #[test]
    #[should_panic]
    fn removing_uncounted_panics() {
        let m = PoissonModel::new(vec![2, 3], 1.0, 1.0);
        let mut s = m.empty_stats();
        m.remove_obs(&mut s, 0);
    }

    #[test]
    fn posterior_mean() {
        let m = PoissonModel::new(vec![6, 8], 1.0, 0.01);
        match m.summarize(&m.stats_of(&[0, 1])) {
            ComponentSummary::Poisson { mean, shape, rate, .. } => {
                assert_eq!(shape, 15.0);
                assert!((rate - 2.01).abs() < 1e-15);
                assert!((mean - 7.462686567164179).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
