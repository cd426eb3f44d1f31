//! Fixtures shared by the criterion benches under `benches/`.

use mixmc_core::synth::generate;
use mixmc_core::{Dataset, ModelConfig, RunConfig, SynthSpec};

/// Well-separated Gaussian data: `k` components with means `3, 6, ..., 3k`
/// and unit variance.
pub fn gaussian_fixture(k: usize, n: usize, seed: u64) -> Dataset {
    generate(&SynthSpec::gaussian(k, n, seed)).expect("valid spec").data
}

/// Known unit variance, default prior width.
pub fn gaussian_config(burn_in_sweeps: usize, sample_sweeps: usize, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::new(ModelConfig::Gaussian {
        sigma2: 1.0,
        prior_width: None,
    });
    cfg.burn_in_sweeps = burn_in_sweeps;
    cfg.sample_sweeps = sample_sweeps;
    cfg.seed = seed;
    cfg
}

pub fn categorical_fixture(k: usize, n: usize, seed: u64) -> Dataset {
    generate(&SynthSpec::categorical(k, n, 10, 4, seed)).expect("valid spec").data
}
