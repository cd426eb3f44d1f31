//! Brute-force reference computations used as test oracles.
//!
//! Nothing here calls into the library's numerics; special functions come
//! from statrs and the Gaussian marginal is integrated numerically.

#![allow(dead_code)]

use std::collections::HashMap;

use statrs::function::gamma::ln_gamma;

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<u32>> {
    fn grow(prefix: &mut Vec<u32>, max: u32, n: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for l in 0..=max + 1 {
            prefix.push(l);
            grow(prefix, max.max(l), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    grow(&mut prefix, 0, n, &mut out);
    out
}

/// First-appearance relabeling.
pub fn canonical(z: &[u32]) -> Vec<u32> {
    let mut map = HashMap::new();
    z.iter()
        .map(|l| {
            let next = map.len() as u32;
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub fn blocks(z: &[u32]) -> Vec<Vec<usize>> {
    let k = z.iter().max().map_or(0, |m| *m as usize + 1);
    let mut out = vec![Vec::new(); k];
    for (i, &l) in z.iter().enumerate() {
        out[l as usize].push(i);
    }
    out
}

fn ln_fact(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `ln P(z | k, η)` for a labeled assignment with block sizes `sizes`.
pub fn log_assignment_prior(sizes: &[usize], eta: f64) -> f64 {
    let n: usize = sizes.iter().sum();
    let k = sizes.len();
    let kf = k as f64;
    let nk = (n - k) as f64;
    // (N − k) B(N − k, kη) = Γ(N − k + 1) Γ(kη) / Γ(N − k + kη)
    let scaled_beta = ln_gamma(nk + 1.0) + ln_gamma(kf * eta) - ln_gamma(nk + kf * eta);
    let per_block: f64 = sizes
        .iter()
        .map(|&m| (m as f64).ln() + ln_gamma(m as f64 + eta - 1.0) - ln_gamma(eta))
        .sum();
    -ln_fact(n) + scaled_beta + per_block
}

#[derive(Debug, Clone)]
pub enum Likelihood {
    Null,
    Gaussian { x: Vec<f64>, sigma2: f64, width: f64 },
    Poisson { x: Vec<u64>, shape: f64, rate: f64 },
    Categorical { rows: Vec<Vec<u32>>, card: Vec<u32>, eta: f64 },
}

/// `ln ∫ Π_i Normal(x_i | μ, σ²) dμ` by composite Simpson on a window of
/// ±15 posterior standard deviations.
fn gaussian_block(x: &[f64], sigma2: f64) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let half = 15.0 * (sigma2 / n).sqrt();
    let log_f = |mu: f64| {
        x.iter()
            .map(|xi| -0.5 * (2.0 * std::f64::consts::PI * sigma2).ln() - (xi - mu).powi(2) / (2.0 * sigma2))
            .sum::<f64>()
    };
    let peak = log_f(mean);
    let intervals = 4000;
    let h = 2.0 * half / intervals as f64;
    let mut acc = 0.0;
    for j in 0..=intervals {
        let w = if j == 0 || j == intervals {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (log_f(mean - half + j as f64 * h) - peak).exp();
    }
    peak + (acc * h / 3.0).ln()
}

pub fn log_likelihood(lik: &Likelihood, z: &[u32]) -> f64 {
    let bs = blocks(z);
    match lik {
        Likelihood::Null => 0.0,
        Likelihood::Gaussian { x, sigma2, width } => bs
            .iter()
            .map(|b| {
                let xs: Vec<f64> = b.iter().map(|&i| x[i]).collect();
                gaussian_block(&xs, *sigma2) - width.ln()
            })
            .sum(),
        Likelihood::Poisson { x, shape, rate } => bs
            .iter()
            .map(|b| {
                let n = b.len() as f64;
                let s: f64 = b.iter().map(|&i| x[i] as f64).sum();
                let lf: f64 = b.iter().map(|&i| ln_fact(x[i] as usize)).sum();
                shape * rate.ln() - ln_gamma(*shape) + ln_gamma(s + shape) - (s + shape) * (n + rate).ln() - lf
            })
            .sum(),
        Likelihood::Categorical { rows, card, eta } => bs
            .iter()
            .map(|b| {
                let n = b.len() as f64;
                let mut total = 0.0;
                for (q, &c) in card.iter().enumerate() {
                    let c = c as usize;
                    let mut counts = vec![0usize; c];
                    for &i in b {
                        counts[rows[i][q] as usize] += 1;
                    }
                    total += ln_gamma(eta * c as f64) - ln_gamma(n + eta * c as f64);
                    total += counts.iter().map(|&m| ln_gamma(m as f64 + eta) - ln_gamma(*eta)).sum::<f64>();
                }
                total
            })
            .sum(),
    }
}

/// Exact posterior over set partitions of `0..n` with a uniform prior on
/// `k`, summing the `k!` labelings of each partition.
pub fn partition_posterior(lik: &Likelihood, n: usize, eta: f64) -> Vec<(Vec<u32>, f64)> {
    let parts = set_partitions(n);
    let logs: Vec<f64> = parts
        .iter()
        .map(|z| {
            let sizes: Vec<usize> = blocks(z).iter().map(Vec::len).collect();
            let k = sizes.len();
            -(n as f64).ln() + ln_fact(k) + log_assignment_prior(&sizes, eta) + log_likelihood(lik, z)
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    parts
        .into_iter()
        .zip(logs)
        .map(|(z, l)| (z, (l - max).exp() / total))
        .collect()
}

/// Component selection rate of the continuous-time kernel.
pub fn selection_rate(size: usize, eta: f64) -> f64 {
    if size == 1 {
        1.0
    } else {
        (size as f64 - 1.0) / (size as f64 + eta - 2.0)
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Runs `$body` with `$m` bound to the concrete model inside a
/// `mixmc_core::Model`.
#[macro_export]
macro_rules! with_model {
    ($model:expr, |$m:ident| $body:expr) => {
        match &$model {
            mixmc_core::Model::Null($m) => $body,
            mixmc_core::Model::Gaussian($m) => $body,
            mixmc_core::Model::Poisson($m) => $body,
            mixmc_core::Model::Categorical($m) => $body,
        }
    };
}

/// The small fixed datasets shared by the stationarity checks.
pub mod fixtures {
    use super::Likelihood;
    use mixmc_core::{CategoricalData, Dataset, ModelConfig};

    pub struct Case {
        pub name: &'static str,
        pub data: Dataset,
        pub config: ModelConfig,
        pub oracle: Likelihood,
    }

    pub fn cases() -> Vec<Case> {
        let gx = vec![-1.2, -0.4, 0.3, 2.5, 3.1];
        let px = vec![0, 1, 1, 4, 6];
        let rows: Vec<Vec<u32>> = vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![1, 1], vec![0, 0]];
        let codes = rows.iter().flatten().copied().collect();
        vec![
            Case {
                name: "gaussian",
                data: Dataset::Real(gx.clone()),
                config: ModelConfig::Gaussian {
                    sigma2: 1.0,
                    prior_width: Some(20.0),
                },
                oracle: Likelihood::Gaussian {
                    x: gx,
                    sigma2: 1.0,
                    width: 20.0,
                },
            },
            Case {
                name: "poisson",
                data: Dataset::Count(px.clone()),
                config: ModelConfig::Poisson {
                    gamma_shape: 1.0,
                    gamma_rate: 1.0,
                },
                oracle: Likelihood::Poisson {
                    x: px,
                    shape: 1.0,
                    rate: 1.0,
                },
            },
            Case {
                name: "categorical",
                data: Dataset::Categorical(CategoricalData::from_codes(5, vec![2, 2], codes).unwrap()),
                config: ModelConfig::Categorical { theta_eta: 1.0 },
                oracle: Likelihood::Categorical {
                    rows,
                    card: vec![2, 2],
                    eta: 1.0,
                },
            },
        ]
    }
}
