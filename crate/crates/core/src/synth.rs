//! Seeded synthetic datasets with known component labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::{CategoricalData, Dataset};
use crate::error::{Error, Result};
use crate::priors::sample_assignment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SynthFamily {
    /// Component `r` (1-based) is `Normal(spacing · r, σ)`.
    Gaussian { spacing: f64, sigma: f64 },
    /// Counts drawn `Poisson(μ_r)`; `weights` default to an equal split.
    Poisson { means: Vec<f64>, weights: Option<Vec<f64>> },
    /// Assignments from the assignment prior, per-class response
    /// probabilities from a symmetric Dirichlet.
    Categorical {
        cardinalities: Vec<u32>,
        theta_eta: f64,
        assignment_eta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub family: SynthFamily,
    pub k_true: usize,
    pub n_obs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    /// 0-based generating labels.
    pub labels: Vec<u32>,
}

impl SynthSpec {
    pub fn gaussian(k: usize, n: usize, seed: u64) -> Self {
        Self {
            family: SynthFamily::Gaussian {
                spacing: 3.0,
                sigma: 1.0,
            },
            k_true: k,
            n_obs: n,
            seed,
        }
    }

    pub fn categorical(k: usize, n: usize, questions: usize, answers: u32, seed: u64) -> Self {
        Self {
            family: SynthFamily::Categorical {
                cardinalities: vec![answers; questions],
                theta_eta: 1.0,
                assignment_eta: 1.0,
            },
            k_true: k,
            n_obs: n,
            seed,
        }
    }

    pub fn poisson(means: Vec<f64>, n: usize, seed: u64) -> Self {
        Self {
            k_true: means.len(),
            family: SynthFamily::Poisson { means, weights: None },
            n_obs: n,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_true == 0 || self.n_obs < self.k_true {
            return Err(Error::config(format!(
                "need 1 <= k_true <= n_obs, got k_true = {}, n_obs = {}",
                self.k_true, self.n_obs
            )));
        }
        match &self.family {
            SynthFamily::Gaussian { spacing, sigma } => {
                if !(*spacing > 0.0 && spacing.is_finite()) || !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::config("spacing and sigma must be positive"));
                }
            }
            SynthFamily::Poisson { means, weights } => {
                if means.len() != self.k_true {
                    return Err(Error::config("one mean per component is required"));
                }
                if means.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
                    return Err(Error::config("Poisson means must be positive"));
                }
                if let Some(w) = weights {
                    if w.len() != self.k_true || w.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                        return Err(Error::config("one positive weight per component is required"));
                    }
                }
            }
            SynthFamily::Categorical {
                cardinalities,
                theta_eta,
                assignment_eta,
            } => {
                if cardinalities.is_empty() || cardinalities.iter().any(|&c| c < 2) {
                    return Err(Error::config("need at least one question, each with >= 2 answers"));
                }
                if !(theta_eta.is_finite() && *theta_eta > 0.0 && assignment_eta.is_finite() && *assignment_eta > 0.0) {
                    return Err(Error::config("Dirichlet parameters must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Equal split with the remainder going to earlier components.
pub fn equal_split(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|r| n / k + usize::from(r < n % k)).collect()
}

/// Largest-remainder apportionment of `n` by `weights`, at least one each.
pub fn weighted_split(n: usize, weights: &[f64]) -> Vec<usize> {
    let k = weights.len();
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let short = n - sizes.iter().sum::<usize>();
    for &r in order.iter().take(short) {
        sizes[r] += 1;
    }
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let donor = (0..k).max_by_key(|&r| (sizes[r], std::cmp::Reverse(r))).unwrap();
        sizes[donor] -= 1;
        sizes[empty] += 1;
    }
    sizes
}

fn block_labels(sizes: &[usize]) -> Vec<u32> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(r, &s)| std::iter::repeat_n(r as u32, s))
        .collect()
}

pub fn gen_gaussian(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let SynthFamily::Gaussian { spacing, sigma } = spec.family else {
        return Err(Error::config("expected a Gaussian spec"));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = block_labels(&equal_split(spec.n_obs, spec.k_true));
    let x = labels
        .iter()
        .map(|&r| {
            let normal = Normal::new(spacing * (r as f64 + 1.0), sigma).expect("validated");
            normal.sample(&mut rng)
        })
        .collect();
    Ok(Synthetic {
        data: Dataset::Real(x),
        labels,
    })
}

pub fn gen_poisson(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let SynthFamily::Poisson { means, weights } = &spec.family else {
        return Err(Error::config("expected a Poisson spec"));
    };
    let sizes = match weights {
        Some(w) => weighted_split(spec.n_obs, w),
        None => equal_split(spec.n_obs, spec.k_true),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = block_labels(&sizes);
    let dists: Vec<Poisson<f64>> = means.iter().map(|&m| Poisson::new(m).expect("validated")).collect();
    let x = labels.iter().map(|&r| dists[r as usize].sample(&mut rng) as u64).collect();
    Ok(Synthetic {
        data: Dataset::Count(x),
        labels,
    })
}

fn dirichlet<R: Rng>(dim: usize, gamma: &Gamma<f64>, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 {
            return g.into_iter().map(|x| x / total).collect();
        }
    }
}

pub fn gen_categorical(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let SynthFamily::Categorical {
        cardinalities,
        theta_eta,
        assignment_eta,
    } = &spec.family
    else {
        return Err(Error::config("expected a categorical spec"));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z = sample_assignment(spec.n_obs, spec.k_true, *assignment_eta, &mut rng);
    let gamma = Gamma::new(*theta_eta, 1.0).expect("validated");
    // theta[r][q] is a probability vector over answers
    let theta: Vec<Vec<Vec<f64>>> = (0..spec.k_true)
        .map(|_| {
            cardinalities
                .iter()
                .map(|&c| dirichlet(c as usize, &gamma, &mut rng))
                .collect()
        })
        .collect();
    let q = cardinalities.len();
    let mut codes = Vec::with_capacity(spec.n_obs * q);
    for &r in &z {
        for probs in &theta[r] {
            let pick = crate::special::select_linear(probs, 1.0, rng.random());
            codes.push(pick as u32);
        }
    }
    let data = CategoricalData::from_codes(spec.n_obs, cardinalities.clone(), codes)?;
    Ok(Synthetic {
        data: Dataset::Categorical(data),
        labels: z.into_iter().map(|r| r as u32).collect(),
    })
}

/// Dispatches on `spec.family`.
pub fn generate(spec: &SynthSpec) -> Result<Synthetic> {
    match spec.family {
        SynthFamily::Gaussian { .. } => gen_gaussian(spec),
        SynthFamily::Poisson { .. } => gen_poisson(spec),
        SynthFamily::Categorical { .. } => gen_categorical(spec),
    }
}
