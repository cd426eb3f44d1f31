use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ConsensusMatrix;
use crate::error::{Error, Result};
use crate::special::select_linear;
use crate::state::canonicalize;

pub const POWER_TOLERANCE: f64 = 1e-8;
pub const POWER_MAX_ITERATIONS: usize = 10_000;
pub const KMEANS_RESTARTS: usize = 50;
const LLOYD_MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralConsensus {
    /// 0-based cluster labels in first-appearance order.
    pub labels: Vec<u32>,
    /// Row `i` holds observation `i`'s coordinates on the leading eigenvectors.
    pub embedding: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// Leading `m` eigenpairs of a symmetric positive semi-definite matrix by
/// power iteration with deflation against the vectors already found.
///
/// Each vector is accepted once `‖Cv − λv‖ ≤ 1e−8 · max(λ, 1)`. Signs are
/// fixed so the largest-magnitude entry is positive.
pub fn top_eigenvectors(c: &ConsensusMatrix, m: usize, seed: u64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = c.n();
    let m = m.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(m);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut w = vec![0.0; n];
    for idx in 0..m {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        project_out(&mut v, &vectors);
        if normalize(&mut v) == 0.0 {
            v = vec![1.0; n];
            project_out(&mut v, &vectors);
            normalize(&mut v);
        }
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for _ in 0..POWER_MAX_ITERATIONS {
            c.mul_vec(&v, &mut w);
            project_out(&mut w, &vectors);
            let lambda = dot(&v, &w);
            residual = w.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            if residual <= POWER_TOLERANCE * lambda.abs().max(1.0) {
                converged = true;
                values.push(lambda);
                break;
            }
            if normalize(&mut w) == 0.0 {
                // v lies in the null space of the deflated operator
                converged = true;
                values.push(0.0);
                break;
            }
            std::mem::swap(&mut v, &mut w);
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: POWER_MAX_ITERATIONS,
                residual,
            });
        }
        project_out(&mut v, &vectors);
        normalize(&mut v);
        let pivot = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        debug_assert_eq!(vectors.len(), idx);
        vectors.push(v);
    }
    Ok((values, vectors))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn kmeans_once<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> (Vec<u32>, f64) {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            select_linear(&d2, total, rng.random())
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }
    let dim = points[0].len();
    let mut labels = vec![u32::MAX; n];
    for _ in 0..LLOYD_MAX_ITERATIONS {
        let mut changed = false;
        for (l, p) in labels.iter_mut().zip(points) {
            let j = nearest(p, &centers).0 as u32;
            if *l != j {
                *l = j;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(points) {
            counts[l as usize] += 1;
            sums[l as usize].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    let inertia = labels.iter().zip(points).map(|(&l, p)| sq_dist(p, &centers[l as usize])).sum();
    (labels, inertia)
}

/// Lloyd's algorithm from k-means++ seeds, keeping the lowest-inertia result
/// over `restarts` runs. Labels are returned in first-appearance order.
pub fn kmeans(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Vec<u32> {
    assert!(k >= 1, "k must be positive");
    if points.is_empty() {
        return Vec::new();
    }
    let k = k.min(points.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<u32>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let run = kmeans_once(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    canonicalize(&best.unwrap().0)
}

/// Embeds observations on the two leading eigenvectors of `C` and groups
/// them with k-means.
pub fn spectral_consensus(c: &ConsensusMatrix, k: usize, seed: u64) -> Result<SpectralConsensus> {
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if c.n() == 0 {
        return Err(Error::EmptySamples);
    }
    let (eigenvalues, vectors) = top_eigenvectors(c, 2, seed)?;
    let embedding: Vec<Vec<f64>> = (0..c.n()).map(|i| vectors.iter().map(|v| v[i]).collect()).collect();
    let labels = kmeans(&embedding, k, KMEANS_RESTARTS, seed.wrapping_add(1));
    Ok(SpectralConsensus {
        labels,
        embedding,
        eigenvalues,
    })
}
