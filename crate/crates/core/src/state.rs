//! The sampled partition `(k, z)`.
//!
//! Each component owns a member array stored in a *slot*. Labels `0..k` map
//! to slots through `label_slot`, so relabeling a component is a swap of two
//! integers and never touches its members. Observations record the slot they
//! live in, which keeps `z_i` available in O(1) without rewriting the
//! assignments of a relabeled component. Freed slots keep their allocation
//! and are reused when a component is created.
//!
//! Labels are 0-based here; reports add one.

use crate::error::{Error, Result};

const DETACHED: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct PartitionState {
    slots: Vec<Vec<u32>>,
    label_slot: Vec<u32>,
    slot_label: Vec<u32>,
    obs_slot: Vec<u32>,
    free: Vec<u32>,
    detached: usize,
}

/// Outcome of [`PartitionState::remove_member`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Removal {
    pub obs: usize,
    /// Slot the observation was removed from. When `deleted` is set the slot
    /// is now free.
    pub slot: usize,
    /// The component became empty and was deleted; the former last label now
    /// occupies the removed label.
    pub deleted: bool,
}

impl PartitionState {
    /// All `n` observations in one component.
    pub fn single_component(n: usize) -> Self {
        assert!(n >= 1, "a partition needs at least one observation");
        assert!(n < DETACHED as usize);
        Self {
            slots: vec![(0..n as u32).collect()],
            label_slot: vec![0],
            slot_label: vec![0],
            obs_slot: vec![0; n],
            free: Vec::new(),
            detached: 0,
        }
    }

    /// Every observation in its own component.
    pub fn all_singletons(n: usize) -> Self {
        let z: Vec<usize> = (0..n).collect();
        Self::from_assignment(&z).expect("singleton labels are always valid")
    }

    /// Builds a state from 0-based labels. Labels must be exactly `0..k` with
    /// every component non-empty.
    pub fn from_assignment(z: &[usize]) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::data("cannot build a partition of zero observations"));
        }
        let k = z.iter().max().unwrap() + 1;
        let mut slots = vec![Vec::new(); k];
        for (i, &r) in z.iter().enumerate() {
            slots[r].push(i as u32);
        }
        if let Some(r) = slots.iter().position(Vec::is_empty) {
            return Err(Error::data(format!("component {} is empty", r + 1)));
        }
        Ok(Self {
            slots,
            label_slot: (0..k as u32).collect(),
            slot_label: (0..k as u32).collect(),
            obs_slot: z.iter().map(|&r| r as u32).collect(),
            free: Vec::new(),
            detached: 0,
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.label_slot.len()
    }

    #[inline]
    pub fn n_obs(&self) -> usize {
        self.obs_slot.len()
    }

    /// Number of slots ever allocated; per-component side tables indexed by
    /// slot need this many entries.
    #[inline]
    pub fn slot_capacity(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn slot(&self, label: usize) -> usize {
        self.label_slot[label] as usize
    }

    #[inline]
    pub fn size(&self, label: usize) -> usize {
        self.slots[self.slot(label)].len()
    }

    #[inline]
    pub fn members(&self, label: usize) -> &[u32] {
        &self.slots[self.slot(label)]
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k()).map(move |r| self.size(r))
    }

    /// Current label of observation `i`, or `None` while it is detached.
    #[inline]
    pub fn label_of(&self, i: usize) -> Option<usize> {
        match self.obs_slot[i] {
            DETACHED => None,
            s => Some(self.slot_label[s as usize] as usize),
        }
    }

    /// Snapshot of `z` with 0-based labels. Panics if an observation is
    /// detached.
    pub fn assignment(&self) -> Vec<u32> {
        assert_eq!(self.detached, 0, "assignment snapshot of a detached state");
        self.obs_slot
            .iter()
            .map(|&s| self.slot_label[s as usize])
            .collect()
    }

    /// Labels renumbered by order of first appearance. Two states describe
    /// the same set partition iff their canonical labels are equal.
    pub fn canonical_labels(&self) -> Vec<u32> {
        canonicalize(&self.assignment())
    }

    /// Detaches the `idx`-th member of component `label` by overwriting it
    /// with the last member. An emptied component is deleted and the last
    /// label is moved into its place.
    pub fn remove_member(&mut self, label: usize, idx: usize) -> Removal {
        let k = self.k();
        assert!(label < k, "component {label} out of range (k = {k})");
        let slot = self.label_slot[label] as usize;
        let members = &mut self.slots[slot];
        assert!(
            idx < members.len(),
            "member index {idx} out of range (n = {})",
            members.len()
        );
        let obs = members.swap_remove(idx) as usize;
        self.obs_slot[obs] = DETACHED;
        self.detached += 1;

        let deleted = members.is_empty();
        if deleted {
            let last = k - 1;
            if label != last {
                let moved = self.label_slot[last];
                self.label_slot[label] = moved;
                self.slot_label[moved as usize] = label as u32;
            }
            self.label_slot.pop();
            self.free.push(slot as u32);
        }
        Removal { obs, slot, deleted }
    }

    /// Attaches detached observation `obs` to component `label`, or to a new
    /// component when `label == k`. Returns the slot it now lives in.
    pub fn insert_member(&mut self, obs: usize, label: usize) -> usize {
        let k = self.k();
        assert!(label <= k, "target component {label} out of range (k = {k})");
        assert_eq!(self.obs_slot[obs], DETACHED, "observation {obs} is already assigned");
        let slot = if label == k {
            let slot = match self.free.pop() {
                Some(s) => s as usize,
                None => {
                    self.slots.push(Vec::new());
                    self.slot_label.push(0);
                    self.slots.len() - 1
                }
            };
            debug_assert!(self.slots[slot].is_empty());
            self.label_slot.push(slot as u32);
            self.slot_label[slot] = label as u32;
            slot
        } else {
            self.label_slot[label] as usize
        };
        self.slots[slot].push(obs as u32);
        self.obs_slot[obs] = slot as u32;
        self.detached -= 1;
        slot
    }

    /// Full consistency check of every invariant. O(N + slots).
    pub fn audit(&self) -> std::result::Result<(), String> {
        let k = self.k();
        if k == 0 || k > self.n_obs() {
            return Err(format!("k = {k} outside 1..={}", self.n_obs()));
        }
        if self.detached != 0 {
            return Err(format!("{} observations detached", self.detached));
        }
        let mut seen = vec![false; self.n_obs()];
        let mut total = 0;
        let mut live = vec![false; self.slots.len()];
        for label in 0..k {
            let slot = self.label_slot[label] as usize;
            if live[slot] {
                return Err(format!("slot {slot} used by two labels"));
            }
            live[slot] = true;
            if self.slot_label[slot] as usize != label {
                return Err(format!("slot {slot} maps back to the wrong label"));
            }
            let members = &self.slots[slot];
            if members.is_empty() {
                return Err(format!("component {label} is empty"));
            }
            for &i in members {
                let i = i as usize;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(format!("observation {i} listed twice"));
                }
                if self.obs_slot[i] as usize != slot {
                    return Err(format!("observation {i} has a stale slot"));
                }
            }
            total += members.len();
        }
        if total != self.n_obs() {
            return Err(format!("sizes sum to {total}, expected {}", self.n_obs()));
        }
        for &s in &self.free {
            if live[s as usize] || !self.slots[s as usize].is_empty() {
                return Err(format!("free slot {s} is in use"));
            }
        }
        Ok(())
    }
}

/// Renumbers labels by order of first appearance.
pub fn canonicalize(z: &[u32]) -> Vec<u32> {
    let mut map: Vec<u32> = Vec::new();
    let mut next = 0;
    let mut out = Vec::with_capacity(z.len());
    for &r in z {
        let r = r as usize;
        if r >= map.len() {
            map.resize(r + 1, u32::MAX);
        }
        if map[r] == u32::MAX {
            map[r] = next;
            next += 1;
        }
        out.push(map[r]);
    }
    out
}
