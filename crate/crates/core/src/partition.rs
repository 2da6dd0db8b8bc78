//! Pair-state coding and the diagonal / indistinguishable / distinguishable split.

use crate::error::{Error, Result};
use crate::model::PbnModel;
use crate::stateset::StateSet;
use crate::stp::LogicalMatrix;

/// Index arithmetic on the pair space of a network with `2^n` states.
///
/// Pair `(i, j)` (0-based states) is linearised as `i * 2^n + j`, matching
/// `δ_{2^n}^{i+1} ⋉ δ_{2^n}^{j+1} = δ_{2^{2n}}^{i 2^n + j + 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairSpace {
    states: usize,
}

impl PairSpace {
    pub fn new(n: usize) -> Self {
        PairSpace { states: 1 << n }
    }

    pub fn for_model(model: &PbnModel) -> Self {
        PairSpace {
            states: model.state_count(),
        }
    }

    /// `2^n`.
    pub fn states(&self) -> usize {
        self.states
    }

    /// `2^{2n}`.
    pub fn size(&self) -> usize {
        self.states * self.states
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.states + j
    }

    #[inline]
    pub fn pair(&self, z: usize) -> (usize, usize) {
        (z / self.states, z % self.states)
    }

    pub fn check(&self, z: usize) -> Result<()> {
        if z >= self.size() {
            return Err(Error::OutOfRange {
                index: z + 1,
                max: self.size(),
            });
        }
        Ok(())
    }

    /// `(i, j) ↦ (j, i)`.
    #[inline]
    pub fn mirror(&self, z: usize) -> usize {
        let (i, j) = self.pair(z);
        self.index(j, i)
    }

    /// Representative with `i <= j`.
    #[inline]
    pub fn canonical(&self, z: usize) -> usize {
        z.min(self.mirror(z))
    }

    #[inline]
    pub fn is_diagonal(&self, z: usize) -> bool {
        let (i, j) = self.pair(z);
        i == j
    }

    pub fn mirror_set(&self, s: &StateSet) -> StateSet {
        StateSet::from_indices(self.size(), s.iter().map(|z| self.mirror(z)))
    }

    /// `s ∪ mirror(s)`.
    pub fn mirror_close(&self, s: &StateSet) -> StateSet {
        let mut out = s.clone();
        for z in s.iter() {
            out.insert(self.mirror(z));
        }
        out
    }

    /// Canonical representatives of `s`, ascending and deduplicated.
    pub fn canonical_members(&self, s: &StateSet) -> Vec<usize> {
        let mut v: Vec<usize> = s.iter().map(|z| self.canonical(z)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn diagonal(&self) -> StateSet {
        StateSet::from_indices(self.size(), (0..self.states).map(|i| self.index(i, i)))
    }
}

/// `S0` (diagonal), `S1` (equal outputs, `i < j`), `S2` (different outputs, `i < j`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub s0: StateSet,
    pub s1: StateSet,
    pub s2: StateSet,
}

/// Splits the pair space according to the output matrix `output` (`2^q × 2^n`).
pub fn partition_by_output(output: &LogicalMatrix) -> Partition {
    let states = output.cols();
    let space = PairSpace { states };
    let mut s1 = StateSet::empty(space.size());
    let mut s2 = StateSet::empty(space.size());
    for i in 0..states {
        for j in i + 1..states {
            let z = space.index(i, j);
            if output.index(i) == output.index(j) {
                s1.insert(z);
            } else {
                s2.insert(z);
            }
        }
    }
    Partition {
        s0: space.diagonal(),
        s1,
        s2,
    }
}

pub fn partition_states(model: &PbnModel) -> Partition {
    partition_by_output(model.output())
}
