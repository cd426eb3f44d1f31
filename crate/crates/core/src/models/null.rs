use super::{ComponentModel, ComponentSummary};

/// Constant likelihood. Sampling with it draws from the prior, which makes it
/// the reference model for testing the proposal mechanism.
#[derive(Debug, Clone)]
pub struct NullModel {
    n: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NullStats {
    pub n: usize,
}

impl NullModel {
    pub fn new(n_obs: usize) -> Self {
        Self { n: n_obs }
    }
}

impl ComponentModel for NullModel {
    type Stats = NullStats;

    fn n_obs(&self) -> usize {
        self.n
    }

    fn empty_stats(&self) -> NullStats {
        NullStats::default()
    }

    fn reset(&self, stats: &mut NullStats) {
        stats.n = 0;
    }

    #[inline]
    fn count(&self, stats: &NullStats) -> usize {
        stats.n
    }

    #[inline]
    fn add_obs(&self, stats: &mut NullStats, _i: usize) {
        stats.n += 1;
    }

    #[inline]
    fn remove_obs(&self, stats: &mut NullStats, i: usize) {
        assert!(stats.n >= 1, "observation {i} is not counted");
        stats.n -= 1;
    }

    #[inline]
    fn log_weight_existing(&self, _stats: &NullStats, _i: usize) -> f64 {
        0.0
    }

    #[inline]
    fn log_singleton(&self, _i: usize) -> f64 {
        0.0
    }

    fn log_component(&self, _stats: &NullStats) -> f64 {
        0.0
    }

    fn summarize(&self, stats: &NullStats) -> ComponentSummary {
        ComponentSummary::Null { size: stats.n }
    }
}
