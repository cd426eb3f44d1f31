use crate::error::{Error, Result};
use crate::sampler::SampleRecord;
use crate::state::PartitionState;

/// Streaming co-membership counts over the strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusAccumulator {
    n: usize,
    pairs: Vec<f64>,
    total: f64,
}

#[inline]
fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl ConsensusAccumulator {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            pairs: vec![0.0; n * n.saturating_sub(1) / 2],
            total: 0.0,
        }
    }

    pub fn n_obs(&self) -> usize {
        self.n
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    fn add_group(&mut self, members: &[u32], weight: f64) {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                self.pairs[tri_index(self.n, lo as usize, hi as usize)] += weight;
            }
        }
    }

    pub fn add_state(&mut self, state: &PartitionState, weight: f64) {
        assert_eq!(state.n_obs(), self.n);
        for r in 0..state.k() {
            self.add_group(state.members(r), weight);
        }
        self.total += weight;
    }

    pub fn add_assignment(&mut self, z: &[u32], weight: f64) {
        assert_eq!(z.len(), self.n);
        let k = z.iter().max().map_or(0, |&m| m as usize + 1);
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); k];
        for (i, &r) in z.iter().enumerate() {
            groups[r as usize].push(i as u32);
        }
        for g in &groups {
            self.add_group(g, weight);
        }
        self.total += weight;
    }

    /// Element-wise sum with another chain's accumulator.
    pub fn merge(&mut self, other: &ConsensusAccumulator) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.pairs.iter_mut().zip(&other.pairs) {
            *a += b;
        }
        self.total += other.total;
    }

    /// Raw accumulated weight for pair `(i, j)`, `i != j`.
    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.pairs[tri_index(self.n, lo, hi)]
    }

    pub fn finish(&self) -> Result<ConsensusMatrix> {
        if self.total <= 0.0 {
            return Err(Error::EmptySamples);
        }
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
            for j in i + 1..n {
                let v = self.pairs[tri_index(n, i, j)] / self.total;
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(ConsensusMatrix { n, data })
    }
}

/// Symmetric `N × N` matrix of co-membership rates with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ConsensusMatrix {
    /// Wraps a row-major matrix, checking symmetry, range and diagonal.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::data(format!("expected {} entries, got {}", n * n, data.len())));
        }
        for i in 0..n {
            if (data[i * n + i] - 1.0).abs() > 1e-9 {
                return Err(Error::data(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !(-1e-12..=1.0 + 1e-12).contains(&v) || (v - data[j * n + i]).abs() > 1e-9 {
                    return Err(Error::data(format!("entry ({i}, {j}) = {v} breaks symmetry or range")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `y = C x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Dwell-weighted co-membership rates from recorded assignment snapshots.
pub fn consensus(samples: &[SampleRecord]) -> Result<ConsensusMatrix> {
    let first = samples.first().ok_or(Error::EmptySamples)?;
    let n = first.assignment.as_ref().ok_or(Error::MissingAssignments)?.len();
    let mut acc = ConsensusAccumulator::new(n);
    for s in samples {
        let z = s.assignment.as_ref().ok_or(Error::MissingAssignments)?;
        acc.add_assignment(z, s.dwell);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(z: Vec<u32>, dwell: f64) -> SampleRecord {
        SampleRecord {
            sweep: 0,
            k: *z.iter().max().unwrap() as usize + 1,
            log_likelihood: 0.0,
            log_posterior: 0.0,
            dwell,
            assignment: Some(z),
        }
    }

    #[test]
    fn single_component_gives_all_ones() {
        let c = consensus(&[record(vec![0, 0, 0], 1.0)]).unwrap();
        assert!(c.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn half_coincidence() {
        let c = consensus(&[record(vec![0, 0, 1], 1.0), record(vec![0, 1, 1], 1.0)]).unwrap();
        assert_eq!(c.get(0, 1), 0.5);
        assert_eq!(c.get(1, 2), 0.5);
        assert_eq!(c.get(0, 2), 0.0);
    }

    #[test]
    fn requires_snapshots() {
        let mut r = record(vec![0], 1.0);
        r.assignment = None;
        assert!(matches!(consensus(&[r]), Err(Error::MissingAssignments)));
        assert!(matches!(consensus(&[]), Err(Error::EmptySamples)));
    }

    #[test]
    fn state_and_assignment_paths_agree() {
        let z = [0usize, 1, 0, 2, 1, 1];
        let state = PartitionState::from_assignment(&z).unwrap();
        let mut a = ConsensusAccumulator::new(6);
        a.add_state(&state, 2.0);
        let mut b = ConsensusAccumulator::new(6);
        b.add_assignment(&state.assignment(), 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn merge_sums_weights() {
        let mut a = ConsensusAccumulator::new(3);
        a.add_assignment(&[0, 0, 1], 1.0);
        let mut b = ConsensusAccumulator::new(3);
        b.add_assignment(&[0, 1, 1], 3.0);
        a.merge(&b);
        let c = a.finish().unwrap();
        assert_eq!(c.get(0, 1), 0.25);
        assert_eq!(c.get(1, 2), 0.75);
    }

    #[test]
    fn from_dense_validates() {
        assert!(ConsensusMatrix::from_dense(2, vec![1.0, 0.3, 0.3, 1.0]).is_ok());
        assert!(ConsensusMatrix::from_dense(2, vec![1.0, 0.3, 0.4, 1.0]).is_err());
        assert!(ConsensusMatrix::from_dense(2, vec![0.9, 0.3, 0.3, 1.0]).is_err());
    }
}
