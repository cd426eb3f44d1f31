//! Integrable component likelihoods.
//!
//! A model owns its data and knows how to keep per-component sufficient
//! statistics. Everything the sampler needs is a ratio of closed-form
//! marginal likelihoods, expressed through these statistics:
//!
//! * [`ComponentModel::log_weight_existing`]: `ln P(x|k,z_{-i},z_i=s) − ln P(x|k,z_{-i})`
//! * [`ComponentModel::log_singleton`]: the marginal likelihood factor of a
//!   component holding only observation `i`.
//! * [`ComponentModel::log_component`]: one component's factor of
//!   `ln P(x|k,z)`.

mod categorical;
mod gaussian;
mod null;
mod poisson;

pub use categorical::{CategoricalModel, CategoricalStats};
pub use gaussian::{GaussianModel, GaussianStats};
pub use null::{NullModel, NullStats};
pub use poisson::{PoissonModel, PoissonStats};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::state::PartitionState;

pub trait ComponentModel {
    type Stats: Clone + std::fmt::Debug;

    fn n_obs(&self) -> usize;

    fn empty_stats(&self) -> Self::Stats;

    /// Returns `stats` to the empty state, keeping allocations.
    fn reset(&self, stats: &mut Self::Stats);

    /// Number of observations counted in `stats`.
    fn count(&self, stats: &Self::Stats) -> usize;

    fn add_obs(&self, stats: &mut Self::Stats, i: usize);

    /// `i` must currently be counted in `stats`.
    fn remove_obs(&self, stats: &mut Self::Stats, i: usize);

    /// Log weight of placing `i` in the component described by `stats`,
    /// which must not contain `i` and must be non-empty.
    fn log_weight_existing(&self, stats: &Self::Stats, i: usize) -> f64;

    /// Log marginal likelihood of a component holding only `i`.
    fn log_singleton(&self, i: usize) -> f64;

    /// This component's factor of the log marginal likelihood.
    fn log_component(&self, stats: &Self::Stats) -> f64;

    /// Factor of the marginal likelihood that depends on the data alone.
    fn log_data_factor(&self) -> f64 {
        0.0
    }

    /// Posterior summary of the component parameters given its members.
    fn summarize(&self, stats: &Self::Stats) -> ComponentSummary;

    /// Statistics of a component built from scratch.
    fn stats_of(&self, members: &[u32]) -> Self::Stats {
        let mut s = self.empty_stats();
        for &i in members {
            self.add_obs(&mut s, i as usize);
        }
        s
    }
}

/// Model family and hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelConfig {
    /// Constant likelihood; the sampler then draws from the prior.
    Null,
    /// Known variance, uniform prior of width `prior_width` on each mean.
    /// `None` resolves to the data range plus six standard deviations.
    Gaussian { sigma2: f64, prior_width: Option<f64> },
    /// Gamma(shape, rate) prior on each mean.
    Poisson { gamma_shape: f64, gamma_rate: f64 },
    /// Symmetric Dirichlet(theta_eta) prior on each response distribution.
    Categorical { theta_eta: f64 },
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Null => "null",
            ModelConfig::Gaussian { .. } => "gaussian",
            ModelConfig::Poisson { .. } => "poisson",
            ModelConfig::Categorical { .. } => "categorical",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            ModelConfig::Null => Ok(()),
            ModelConfig::Gaussian { sigma2, prior_width } => {
                positive("sigma2", sigma2)?;
                prior_width.map_or(Ok(()), |a| positive("prior width", a))
            }
            ModelConfig::Poisson {
                gamma_shape,
                gamma_rate,
            } => {
                positive("gamma shape", gamma_shape)?;
                positive("gamma rate", gamma_rate)
            }
            ModelConfig::Categorical { theta_eta } => positive("theta eta", theta_eta),
        }
    }

    /// Fills defaults that depend on the data.
    pub fn resolve(&self, data: &Dataset) -> ModelConfig {
        match (*self, data) {
            (
                ModelConfig::Gaussian {
                    sigma2,
                    prior_width: None,
                },
                Dataset::Real(x),
            ) => ModelConfig::Gaussian {
                sigma2,
                prior_width: Some(GaussianModel::default_width(x, sigma2)),
            },
            (cfg, _) => cfg,
        }
    }
}

/// A concrete model, for dispatch from configuration.
#[derive(Debug, Clone)]
pub enum Model {
    Null(NullModel),
    Gaussian(GaussianModel),
    Poisson(PoissonModel),
    Categorical(CategoricalModel),
}

impl Model {
    pub fn build(cfg: &ModelConfig, data: &Dataset) -> Result<Self> {
        cfg.validate()?;
        if data.n_obs() == 0 {
            return Err(Error::data("dataset is empty"));
        }
        let mismatch = || {
            Error::data(format!(
                "{} model cannot use {:?} data",
                cfg.name(),
                data.kind()
            ))
        };
        Ok(match (cfg.resolve(data), data) {
            (ModelConfig::Null, d) => Model::Null(NullModel::new(d.n_obs())),
            (
                ModelConfig::Gaussian {
                    sigma2,
                    prior_width,
                },
                Dataset::Real(x),
            ) => Model::Gaussian(GaussianModel::new(
                x.clone(),
                sigma2,
                prior_width.expect("resolved"),
            )),
            (
                ModelConfig::Poisson {
                    gamma_shape,
                    gamma_rate,
                },
                Dataset::Count(x),
            ) => Model::Poisson(PoissonModel::new(x.clone(), gamma_shape, gamma_rate)),
            (ModelConfig::Categorical { theta_eta }, Dataset::Categorical(c)) => {
                Model::Categorical(CategoricalModel::new(c.clone(), theta_eta))
            }
            _ => return Err(mismatch()),
        })
    }
}

/// Posterior summary of one component's parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ComponentSummary {
    Null {
        size: usize,
    },
    /// Posterior of the mean under the flat prior: Normal(mean, variance).
    Gaussian { size: usize, mean: f64, variance: f64 },
    /// Gamma(shape, rate) posterior of the Poisson mean.
    Poisson {
        size: usize,
        shape: f64,
        rate: f64,
        mean: f64,
    },
    /// Dirichlet posterior means, one vector per question.
    Categorical { size: usize, probs: Vec<Vec<f64>> },
}

impl ComponentSummary {
    pub fn size(&self) -> usize {
        match self {
            ComponentSummary::Null { size }
            | ComponentSummary::Gaussian { size, .. }
            | ComponentSummary::Poisson { size, .. }
            | ComponentSummary::Categorical { size, .. } => *size,
        }
    }
}

/// `ln P(x | k, z)` computed from scratch for a complete state.
pub fn log_marginal_likelihood<M: ComponentModel>(model: &M, state: &PartitionState) -> f64 {
    model.log_data_factor()
        + (0..state.k())
            .map(|r| model.log_component(&model.stats_of(state.members(r))))
            .sum::<f64>()
}

/// Per-component posterior summaries, in label order.
pub fn estimate_parameters<M: ComponentModel>(
    model: &M,
    state: &PartitionState,
) -> Vec<ComponentSummary> {
    (0..state.k())
        .map(|r| model.summarize(&model.stats_of(state.members(r))))
        .collect()
}
