use crate::data::CategoricalData;
use crate::error::{Error, Result};
use crate::sampler::{SampleObserver, SampleRecord};
use crate::state::PartitionState;

/// `Σ_{r,x} m log₂(N m / (n_r n_x)) / N` for one question, given the
/// per-class tallies flattened as `tallies[r * card + x]`.
fn question_mi(tallies: &[u64], class_sizes: &[u64], marginal: &[u64], n: f64) -> f64 {
    let card = marginal.len();
    let mut acc = 0.0;
    for (r, &nr) in class_sizes.iter().enumerate() {
        if nr == 0 {
            continue;
        }
        for (x, &nx) in marginal.iter().enumerate() {
            let m = tallies[r * card + x];
            if m == 0 {
                continue;
            }
            let m = m as f64;
            acc += m * (n * m / (nr as f64 * nx as f64)).ln();
        }
    }
    (acc / n / std::f64::consts::LN_2).max(0.0)
}

fn marginals(data: &CategoricalData) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = data.cardinalities().iter().map(|&c| vec![0; c as usize]).collect();
    for i in 0..data.n_obs() {
        for (q, &x) in data.row(i).iter().enumerate() {
            out[q][x as usize] += 1;
        }
    }
    out
}

fn mi_from_groups<'g>(
    data: &CategoricalData,
    marg: &[Vec<u64>],
    groups: impl Iterator<Item = &'g [u32]> + Clone,
) -> Vec<f64> {
    let n = data.n_obs() as f64;
    let sizes: Vec<u64> = groups.clone().map(|g| g.len() as u64).collect();
    let mut out = Vec::with_capacity(marg.len());
    for (q, mq) in marg.iter().enumerate() {
        let card = mq.len();
        let mut tallies = vec![0u64; sizes.len() * card];
        for (r, g) in groups.clone().enumerate() {
            for &i in g {
                tallies[r * card + data.code(i as usize, q) as usize] += 1;
            }
        }
        out.push(question_mi(&tallies, &sizes, mq, n));
    }
    out
}

fn groups_of(z: &[u32]) -> Vec<Vec<u32>> {
    let k = z.iter().max().map_or(0, |&m| m as usize + 1);
    let mut groups = vec![Vec::new(); k];
    for (i, &r) in z.iter().enumerate() {
        groups[r as usize].push(i as u32);
    }
    groups
}

/// Per-question mutual information in bits between a single assignment and
/// the responses.
pub fn mutual_information_of(z: &[u32], data: &CategoricalData) -> Vec<f64> {
    assert_eq!(z.len(), data.n_obs());
    let groups = groups_of(z);
    mi_from_groups(data, &marginals(data), groups.iter().map(Vec::as_slice))
}

/// Dwell-weighted average of [`mutual_information_of`] over recorded snapshots.
pub fn mutual_information(samples: &[SampleRecord], data: &CategoricalData) -> Result<Vec<f64>> {
    let mut acc = MutualInfoAccumulator::new(data);
    for s in samples {
        let z = s.assignment.as_ref().ok_or(Error::MissingAssignments)?;
        acc.add_assignment(z, s.dwell);
    }
    acc.finish()
}

/// Streaming form of [`mutual_information`].
#[derive(Debug, Clone)]
pub struct MutualInfoAccumulator<'a> {
    data: &'a CategoricalData,
    marginals: Vec<Vec<u64>>,
    sums: Vec<f64>,
    total: f64,
}

impl<'a> MutualInfoAccumulator<'a> {
    pub fn new(data: &'a CategoricalData) -> Self {
        Self {
            data,
            marginals: marginals(data),
            sums: vec![0.0; data.n_questions()],
            total: 0.0,
        }
    }

    fn add(&mut self, mi: Vec<f64>, weight: f64) {
        for (s, v) in self.sums.iter_mut().zip(mi) {
            *s += weight * v;
        }
        self.total += weight;
    }

    pub fn add_assignment(&mut self, z: &[u32], weight: f64) {
        let groups = groups_of(z);
        let mi = mi_from_groups(self.data, &self.marginals, groups.iter().map(Vec::as_slice));
        self.add(mi, weight);
    }

    pub fn merge(&mut self, other: &MutualInfoAccumulator<'_>) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn finish(&self) -> Result<Vec<f64>> {
        if self.total <= 0.0 {
            return Err(Error::EmptySamples);
        }
        Ok(self.sums.iter().map(|s| s / self.total).collect())
    }
}

impl SampleObserver for MutualInfoAccumulator<'_> {
    fn observe(&mut self, state: &PartitionState, dwell: f64) {
        let mi = mi_from_groups(self.data, &self.marginals, (0..state.k()).map(|r| state.members(r)));
        self.add(mi, dwell);
    }
}
