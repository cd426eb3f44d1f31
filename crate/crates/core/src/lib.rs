//! Rejection-free Monte Carlo over the marginal posterior of finite mixture
//! models with an unknown number of components.
//!
//! Component parameters are integrated out, so the chain moves only over the
//! number of components `k` and the assignment `z`. Each step removes one
//! observation and reinserts it with probability proportional to the exact
//! posterior weight of every destination, including a brand new component.
//!
//! ```
//! use mixmc_core::{run, Dataset, ModelConfig, RunConfig};
//!
//! let data = Dataset::Real(vec![0.1, -0.3, 0.2, 30.1, 29.8, 30.4]);
//! let mut cfg = RunConfig::new(ModelConfig::Gaussian { sigma2: 1.0, prior_width: None });
//! cfg.burn_in_sweeps = 200;
//! cfg.sample_sweeps = 500;
//! let out = run(&data, &cfg).unwrap();
//! let post = mixmc_core::diagnostics::k_posterior(&out.records).unwrap();
//! assert_eq!(post.map_k, 2);
//! ```

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod models;
pub mod priors;
pub mod sampler;
pub mod special;
pub mod state;
pub mod synth;

pub use data::{CategoricalData, DataKind, Dataset, IngestOptions};
pub use error::{Error, Result};
pub use models::{ComponentModel, ComponentSummary, Model, ModelConfig};
pub use priors::{KPrior, PriorConfig};
pub use sampler::{run, run_chains, Init, RunConfig, RunOutput, SampleRecord};
pub use state::PartitionState;
pub use synth::{SynthFamily, SynthSpec, Synthetic};
