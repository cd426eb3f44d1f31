use super::{ComponentModel, ComponentSummary};
use crate::data::CategoricalData;
use crate::special::ln_gamma;

/// Latent class model: independent categorical responses per question with
/// a symmetric Dirichlet(η) prior on each class's response probabilities.
///
/// Per class, `ln P = Σ_q [lnΓ(η k_q) − lnΓ(n + η k_q) + Σ_x (lnΓ(m_qx + η) − lnΓ(η))]`.
#[derive(Debug, Clone)]
pub struct CategoricalModel {
    data: CategoricalData,
    eta: f64,
    /// Start of question `q`'s block in a flat count vector.
    offsets: Vec<usize>,
    /// Flat count index of each `(i, q)` response, row-major.
    cells: Vec<u32>,
    /// `ln(m + η)` for `m = 0..=N`.
    ln_count_eta: Vec<f64>,
    /// `ln(n + η k_q)` at `q * (N + 1) + n`.
    ln_size_eta: Vec<f64>,
    ln_singleton: f64,
}

/// Class size and response tallies `m_qx`, flattened question by question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalStats {
    pub n: usize,
    pub counts: Vec<u32>,
}

impl CategoricalModel {
    pub fn new(data: CategoricalData, eta: f64) -> Self {
        assert!(eta > 0.0);
        let n = data.n_obs();
        let q = data.n_questions();
        let mut offsets = Vec::with_capacity(q + 1);
        let mut acc = 0;
        for &kq in data.cardinalities() {
            offsets.push(acc);
            acc += kq as usize;
        }
        offsets.push(acc);
        let cells = (0..n)
            .flat_map(|i| {
                let offsets = &offsets;
                data.row(i)
                    .iter()
                    .enumerate()
                    .map(move |(j, &x)| (offsets[j] + x as usize) as u32)
            })
            .collect();
        let ln_count_eta = (0..=n).map(|m| (m as f64 + eta).ln()).collect();
        let ln_size_eta = data
            .cardinalities()
            .iter()
            .flat_map(|&kq| (0..=n).map(move |m| (m as f64 + eta * kq as f64).ln()))
            .collect();
        let ln_singleton = -data.cardinalities().iter().map(|&kq| (kq as f64).ln()).sum::<f64>();
        Self {
            data,
            eta,
            offsets,
            cells,
            ln_count_eta,
            ln_size_eta,
            ln_singleton,
        }
    }

    pub fn data(&self) -> &CategoricalData {
        &self.data
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    fn cells_of(&self, i: usize) -> &[u32] {
        let q = self.data.n_questions();
        &self.cells[i * q..(i + 1) * q]
    }
}

impl ComponentModel for CategoricalModel {
    type Stats = CategoricalStats;

    fn n_obs(&self) -> usize {
        self.data.n_obs()
    }

    fn empty_stats(&self) -> CategoricalStats {
        CategoricalStats {
            n: 0,
            counts: vec![0; *self.offsets.last().unwrap()],
        }
    }

    fn reset(&self, stats: &mut CategoricalStats) {
        stats.n = 0;
        stats.counts.iter_mut().for_each(|c| *c = 0);
    }

    #[inline]
    fn count(&self, stats: &CategoricalStats) -> usize {
        stats.n
    }

    #[inline]
    fn add_obs(&self, s: &mut CategoricalStats, i: usize) {
        s.n += 1;
        for &c in self.cells_of(i) {
            s.counts[c as usize] += 1;
        }
    }

    #[inline]
    fn remove_obs(&self, s: &mut CategoricalStats, i: usize) {
        assert!(s.n >= 1, "observation {i} is not counted");
        s.n -= 1;
        for &c in self.cells_of(i) {
            let m = &mut s.counts[c as usize];
            assert!(*m >= 1, "observation {i} is not counted");
            *m -= 1;
        }
    }

    #[inline]
    fn log_weight_existing(&self, s: &CategoricalStats, i: usize) -> f64 {
        debug_assert!(s.n >= 1, "weight against an empty component");
        let stride = self.data.n_obs() + 1;
        let mut w = 0.0;
        for (q, &c) in self.cells_of(i).iter().enumerate() {
            w += self.ln_count_eta[s.counts[c as usize] as usize] - self.ln_size_eta[q * stride + s.n];
        }
        w
    }

    #[inline]
    fn log_singleton(&self, _i: usize) -> f64 {
        self.ln_singleton
    }

    fn log_component(&self, s: &CategoricalStats) -> f64 {
        let ln_gamma_eta = ln_gamma(self.eta);
        let mut total = 0.0;
        for (q, &kq) in self.data.cardinalities().iter().enumerate() {
            let a = self.eta * kq as f64;
            total += ln_gamma(a) - ln_gamma(s.n as f64 + a);
            for &m in &s.counts[self.offsets[q]..self.offsets[q + 1]] {
                total += ln_gamma(m as f64 + self.eta) - ln_gamma_eta;
            }
        }
        total
    }

    fn summarize(&self, s: &CategoricalStats) -> ComponentSummary {
        let probs = self
            .data
            .cardinalities()
            .iter()
            .enumerate()
            .map(|(q, &kq)| {
                let denom = s.n as f64 + self.eta * kq as f64;
                s.counts[self.offsets[q]..self.offsets[q + 1]]
                    .iter()
                    .map(|&m| (m as f64 + self.eta) / denom)
                    .collect()
            })
            .collect();
        ComponentSummary::Categorical { size: s.n, probs }
    }
}
