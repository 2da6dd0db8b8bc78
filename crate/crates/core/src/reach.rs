//! Probability-one (robust) reachability on the pair space.
//!
//! A state reaches a target robustly when every switching sequence over the
//! positive-probability subnetworks drives it into the target. "Probability
//! one" is decided by support containment, never by summing floats.

use crate::augmented::AugmentedSystem;
use crate::model::PbnModel;
use crate::partition::PairSpace;
use crate::stateset::StateSet;

/// Layers `R_1, R_2, .., R_t*` of the robust backward fixpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachResult {
    pub layers: Vec<StateSet>,
    pub union: StateSet,
}

impl ReachResult {
    /// `t*`, the index of the last nonempty layer.
    pub fn steps(&self) -> usize {
        self.layers.len()
    }
}

/// `{ j ∉ exclude : support(Q col j) ⊆ target }`.
pub fn one_step_robust(target: &StateSet, aug: &AugmentedSystem, exclude: &StateSet) -> StateSet {
    let mut out = StateSet::empty(aug.size());
    for j in 0..aug.size() {
        if !exclude.contains(j) && aug.support(j).iter().all(|&s| target.contains(s as usize)) {
            out.insert(j);
        }
    }
    out
}

/// Layered robust reachable set of `target`.
///
/// Layer `k` holds the states outside `target ∪ R_1 ∪ .. ∪ R_{k-1}` whose whole
/// support lies in that accumulated set. Computed with per-state counters of
/// support members not yet settled, decremented while walking predecessors of
/// the target and then of each newly settled layer.
pub fn robust_reach(target: &StateSet, aug: &AugmentedSystem) -> ReachResult {
    let size = aug.size();
    let mut settled = target.clone();
    let mut pending: Vec<u32> = (0..size)
        .map(|z| {
            if settled.contains(z) {
                0
            } else {
                aug.support(z).len() as u32
            }
        })
        .collect();

    let mut frontier: Vec<usize> = target.iter().collect();
    let mut layers = Vec::new();
    let mut union = StateSet::empty(size);
    loop {
        let mut next = Vec::new();
        for &s in &frontier {
            for &w in aug.predecessors(s) {
                let w = w as usize;
                if settled.contains(w) {
                    continue;
                }
                pending[w] -= 1;
                if pending[w] == 0 {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        let mut layer = StateSet::empty(size);
        for &w in &next {
            settled.insert(w);
            layer.insert(w);
        }
        union.union_with(&layer);
        layers.push(layer);
        frontier = next;
    }
    ReachResult { layers, union }
}

/// Independent check of [`robust_reach`]: iterates
/// `reach(z) = z ∈ target ∨ ∀v, p_v > 0: reach(F_v z)` from the target
/// upwards, evaluating pair successors straight from the network matrices.
/// Returns the fixpoint including the target itself.
pub fn robust_reach_oracle(target: &StateSet, model: &PbnModel, depth_cap: usize) -> StateSet {
    let space = PairSpace::for_model(model);
    let active = model.active_networks();
    let nets = model.networks();
    let mut reach: Vec<bool> = (0..space.size()).map(|z| target.contains(z)).collect();
    for _ in 0..depth_cap {
        let prev = reach.clone();
        let mut changed = false;
        for z in 0..space.size() {
            if prev[z] {
                continue;
            }
            let (i, j) = space.pair(z);
            let all = active.iter().all(|&v| {
                let l = &nets[v];
                prev[space.index(l.index(i), l.index(j))]
            });
            if all {
                reach[z] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    StateSet::from_indices(space.size(), (0..space.size()).filter(|&z| reach[z]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augmented::build_augmented;
    use crate::model::random_model;
    use crate::stp::LogicalMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The layered fixpoint written out literally with one-step sweeps.
    fn layered_by_sweeps(target: &StateSet, aug: &AugmentedSystem) -> ReachResult {
        let mut acc = target.clone();
        let mut layers = Vec::new();
        let mut union = StateSet::empty(aug.size());
        loop {
            let layer = one_step_robust(&acc, aug, &acc);
            if layer.is_empty() {
                break;
            }
            acc.union_with(&layer);
            union.union_with(&layer);
            layers.push(layer);
        }
        ReachResult { layers, union }
    }

    #[test]
    fn trivial_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = random_model(&mut rng, 2, 1, 2, 0.0);
        let aug = build_augmented(&model).unwrap();
        let full = StateSet::full(aug.size());
        let none = StateSet::empty(aug.size());
        assert_eq!(one_step_robust(&full, &aug, &none), full);
        assert!(one_step_robust(&none, &aug, &none).is_empty());
        let r = robust_reach(&none, &aug);
        assert!(r.union.is_empty() && r.steps() == 0);
    }

    #[test]
    fn deterministic_chain_is_a_basin() {
        // 1 -> 2 -> 3 -> 3, 4 -> 4 on a two-node network.
        let l = LogicalMatrix::from_delta(4, &[2, 3, 3, 4]).unwrap();
        let h = LogicalMatrix::from_delta(2, &[1, 1, 1, 1]).unwrap();
        let model = PbnModel::new(2, 1, vec![l], h, vec![1.0]).unwrap();
        let aug = build_augmented(&model).unwrap();
        let sp = aug.space();
        let target = StateSet::from_indices(16, [sp.index(2, 2)]);
        let r = robust_reach(&target, &aug);
        // every pair made of states from {1, 2, 3} collapses onto (3, 3)
        let expected: Vec<usize> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| sp.index(i, j))
            .filter(|&z| z != sp.index(2, 2))
            .collect();
        let mut got = r.union.to_vec();
        got.sort_unstable();
        let mut want = expected;
        want.sort_unstable();
        assert_eq!(got, want);
        assert_eq!(r.steps(), 2);
    }

    #[test]
    fn counter_walk_matches_sweeps_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..60 {
            let model = random_model(&mut rng, 3, 1, 3, 0.3);
            let aug = build_augmented(&model).unwrap();
            let target = StateSet::from_indices(
                aug.size(),
                (0..aug.size()).filter(|z| z % 7 == 3 || z % 11 == 0),
            );
            let fast = robust_reach(&target, &aug);
            assert_eq!(fast, layered_by_sweeps(&target, &aug));
            let oracle = robust_reach_oracle(&target, &model, aug.size());
            assert_eq!(fast.union.union(&target), oracle);
            for (a, la) in fast.layers.iter().enumerate() {
                assert!(la.is_disjoint(&target));
                for lb in &fast.layers[a + 1..] {
                    assert!(la.is_disjoint(lb));
                }
            }
            // idempotence
            let again = robust_reach(&target.union(&fast.union), &aug);
            assert!(again.union.is_empty());
        }
    }

    #[test]
    fn escaping_branch_blocks_fixed_point() {
        // state 1 stays under net 1 and leaves to 2 under net 2; 2 is absorbing.
        let a = LogicalMatrix::from_delta(2, &[1, 2]).unwrap();
        let b = LogicalMatrix::from_delta(2, &[2, 2]).unwrap();
        let h = LogicalMatrix::from_delta(1, &[1, 1]).unwrap();
        let model = PbnModel::new(1, 0, vec![a, b], h, vec![0.5, 0.5]).unwrap();
        let aug = build_augmented(&model).unwrap();
        let sp = aug.space();
        // target the pair (1,1): (1,2) can never reach it since state 2 is absorbing
        let target = StateSet::from_indices(4, [sp.index(0, 0)]);
        let r = robust_reach(&target, &aug);
        assert!(r.union.is_empty());
        let oracle = robust_reach_oracle(&target, &model, 16);
        assert_eq!(oracle, target);
    }
}
