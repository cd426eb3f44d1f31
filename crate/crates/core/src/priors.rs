//! Priors on the number of components and on assignments without empty
//! components, evaluated in log space.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_binomial, ln_factorial, ln_gamma};

/// Prior on the number of components `k`, supported on `1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ratio", rename_all = "lowercase")]
pub enum KPrior {
    Uniform,
    /// `P(k) ∝ a^k`, normalized over `1..=N`.
    Geometric(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub k_prior: KPrior,
    /// Concentration of the assignment prior. `1.0` gives the uniform prior
    /// over component sizes.
    pub eta: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            k_prior: KPrior::Uniform,
            eta: 1.0,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        if let KPrior::Geometric(a) = self.k_prior {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::config(format!("geometric ratio must lie in (0, 1), got {a}")));
            }
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }
}

/// `ln P(k)` for `1 <= k <= n_obs`.
pub fn log_k_prior(prior: KPrior, k: usize, n_obs: usize) -> f64 {
    assert!(
        (1..=n_obs).contains(&k),
        "k = {k} outside the support 1..={n_obs}"
    );
    match prior {
        KPrior::Uniform => -(n_obs as f64).ln(),
        KPrior::Geometric(a) => {
            let ln_a = a.ln();
            // ln Σ_{j=1}^{N} a^j = ln a + ln(1 - a^N) - ln(1 - a)
            let ln_norm = ln_a + (-(n_obs as f64 * ln_a).exp_m1()).ln() - (-a).ln_1p();
            k as f64 * ln_a - ln_norm
        }
    }
}

/// `ln[(N - k) B(N - k, kη)]`, with the `k = N` limit equal to zero.
///
/// Written as `lnΓ(N-k+1) + lnΓ(kη) - lnΓ(N-k+kη)`, which is finite at
/// `k = N`.
pub fn log_scaled_beta(n_obs: usize, k: usize, eta: f64) -> f64 {
    assert!((1..=n_obs).contains(&k));
    let m = (n_obs - k) as f64;
    let y = k as f64 * eta;
    ln_gamma(m + 1.0) + ln_gamma(y) - ln_gamma(m + y)
}

/// `ln P(z | k, η)` for the prior that forbids empty components.
///
/// Only the component sizes matter. `η = 1` uses the closed form
/// `C(N-1, k-1)^{-1} Π n_r! / N!`.
pub fn log_assignment_prior(sizes: &[usize], eta: f64) -> f64 {
    assert!(!sizes.is_empty(), "at least one component required");
    assert!(
        sizes.iter().all(|&n| n >= 1),
        "empty components are outside the support"
    );
    let n: usize = sizes.iter().sum();
    let k = sizes.len();
    if eta == 1.0 {
        return -ln_binomial(n - 1, k - 1) + sizes.iter().map(|&s| ln_factorial(s)).sum::<f64>()
            - ln_factorial(n);
    }
    let ln_gamma_eta = ln_gamma(eta);
    let per_component: f64 = sizes
        .iter()
        .map(|&s| (s as f64).ln() + ln_gamma(s as f64 + eta - 1.0) - ln_gamma_eta)
        .sum();
    log_scaled_beta(n, k, eta) + per_component - ln_factorial(n)
}

/// Draws 0-based labels from `P(z | k, η)`.
///
/// `k` distinct observations chosen uniformly seed the components; the rest
/// follow a Dirichlet-categorical(η) urn over the non-seed members.
pub fn sample_assignment<R: Rng + ?Sized>(n: usize, k: usize, eta: f64, rng: &mut R) -> Vec<usize> {
    assert!((1..=n).contains(&k), "k = {k} outside 1..={n}");
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..k {
        let pick = rng.random_range(j..n);
        order.swap(j, pick);
    }
    let mut z = vec![0; n];
    for (r, &i) in order[..k].iter().enumerate() {
        z[i] = r;
    }
    // Urn: with probability c / (c + kη) copy the label of a uniformly chosen
    // earlier non-seed draw, otherwise pick a label uniformly.
    let mut drawn: Vec<usize> = Vec::with_capacity(n - k);
    let mass = k as f64 * eta;
    for &i in &order[k..] {
        let c = drawn.len() as f64;
        let r = if rng.random::<f64>() * (c + mass) < c {
            drawn[rng.random_range(0..drawn.len())]
        } else {
            rng.random_range(0..k)
        };
        drawn.push(r);
        z[i] = r;
    }
    z
}

/// Per-dataset tables used in the sampler's inner loop.
#[derive(Debug, Clone)]
pub struct PriorTables {
    n_obs: usize,
    eta: f64,
    /// Index `k` holds the log of the prior part of the new-component
    /// weight when the move starts from `k` components.
    log_new: Vec<f64>,
    /// Index `n` holds the component-selection rate for a component of size
    /// `n`.
    rate: Vec<f64>,
}

impl PriorTables {
    pub fn new(prior: &PriorConfig, n_obs: usize) -> Self {
        assert!(n_obs >= 1);
        let eta = prior.eta;
        let mut log_new = vec![f64::NEG_INFINITY; n_obs + 1];
        for (k, slot) in log_new.iter_mut().enumerate().take(n_obs).skip(1) {
            let prior_ratio = log_k_prior(prior.k_prior, k + 1, n_obs) - log_k_prior(prior.k_prior, k, n_obs);
            let assignment = if eta == 1.0 {
                // k² / (N - k)
                2.0 * (k as f64).ln() - ((n_obs - k) as f64).ln()
            } else {
                (k as f64).ln() + log_scaled_beta(n_obs, k + 1, eta) - log_scaled_beta(n_obs, k, eta)
            };
            *slot = assignment + prior_ratio;
        }
        // k = 0 only happens for N = 1: the detached observation has nowhere
        // else to go.
        log_new[0] = 0.0;
        let rate = (0..=n_obs)
            .map(|n| match n {
                0 => 0.0,
                1 => 1.0,
                _ => (n as f64 - 1.0) / (n as f64 + eta - 2.0),
            })
            .collect();
        Self {
            n_obs,
            eta,
            log_new,
            rate,
        }
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Log of the non-likelihood factor of the new-component weight, where
    /// `k` is the component count before the new component is added.
    /// `-inf` at `k = N`, where no new component can be created, and 0 at
    /// `k = 0`.
    #[inline]
    pub fn log_new_component(&self, k: usize) -> f64 {
        self.log_new[k]
    }

    /// Selection rate `u` for a component with `n` members.
    #[inline]
    pub fn selection_rate(&self, n: usize) -> f64 {
        self.rate[n]
    }
}

/// Log of the new-component weight, prior part plus the model's singleton
/// factor, for a move that starts from `k` components.
pub fn log_weight_new(tables: &PriorTables, k: usize, log_singleton: f64) -> f64 {
    assert!(k >= 1 && k < tables.n_obs, "a new component needs 1 <= k < N");
    tables.log_new_component(k) + log_singleton
}
