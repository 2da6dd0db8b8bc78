//! Search for the pair-state sets that must become output-distinguishable for
//! an unobservable network to become observable.
//!
//! Sets reported here hold canonical `(i, j), i < j` pair indices; every set
//! handed to reachability is mirror-closed first.

use std::collections::HashSet;

use crate::augmented::{build_augmented_with, AugmentedSystem};
use crate::error::{Error, Result};
use crate::feedback;
use crate::model::PbnModel;
use crate::partition::{partition_states, PairSpace, Partition};
use crate::reach::robust_reach;
use crate::stateset::StateSet;
use crate::stp::Limits;

/// Default cap on the size of a set whose subsets are enumerated.
pub const DEFAULT_MAX_SUBSET: usize = 20;

/// Default cap on the number of candidate target sets.
pub const DEFAULT_MAX_CANDIDATES: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub max_subset: usize,
    pub max_candidates: u64,
    pub limits: Limits,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            max_subset: DEFAULT_MAX_SUBSET,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            limits: Limits::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observability {
    pub observable: bool,
    /// Indistinguishable pairs that cannot robustly reach a distinguishable one.
    pub witness: StateSet,
}

/// States of `S1` outside the robust reach of the mirror-closed `S2`.
pub fn observability_of(aug: &AugmentedSystem, partition: &Partition) -> Observability {
    let target = aug.space().mirror_close(&partition.s2);
    let reached = robust_reach(&target, aug).union.union(&target);
    let witness = partition.s1.difference(&reached);
    Observability {
        observable: witness.is_empty(),
        witness,
    }
}

pub fn is_observable(model: &PbnModel) -> Result<Observability> {
    let aug = build_augmented_with(model, &Limits::default())?;
    Ok(observability_of(&aug, &partition_states(model)))
}

/// States of `set` that hit the diagonal in one step under some subnetwork.
pub fn one_step_to_diagonal(set: &StateSet, aug: &AugmentedSystem) -> StateSet {
    let sp = aug.space();
    StateSet::from_indices(
        aug.size(),
        set.iter()
            .filter(|&z| aug.support(z).iter().any(|&s| sp.is_diagonal(s as usize))),
    )
}

/// States of `set` fixed by some positive-probability subnetwork (`Q_zz > 0`).
pub fn positive_prob_fixed_points(set: &StateSet, aug: &AugmentedSystem) -> StateSet {
    StateSet::from_indices(
        aug.size(),
        set.iter()
            .filter(|&z| aug.support(z).binary_search(&(z as u32)).is_ok()),
    )
}

/// Largest subset of `c` that no positive-probability transition leaves.
pub fn maximum_invariant_set(c: &StateSet, aug: &AugmentedSystem) -> StateSet {
    let mut current = c.clone();
    let mut queue: Vec<usize> = c
        .iter()
        .filter(|&z| aug.support(z).iter().any(|&s| !c.contains(s as usize)))
        .collect();
    for &z in &queue {
        current.remove(z);
    }
    while let Some(s) = queue.pop() {
        for &w in aug.predecessors(s) {
            let w = w as usize;
            if current.remove(w) {
                queue.push(w);
            }
        }
    }
    current
}

/// Inclusion-minimal nonempty `G ⊆ pool` with
/// `pool \ G ⊆ R(mirror_close(G ∪ external)) ∪ mirror_close(G ∪ external)`,
/// in ascending size and then lexicographic order. `pool` holds canonical
/// pairs.
///
/// A pool state misses the target exactly when it can follow support edges
/// forever without touching it, i.e. when it reaches a cycle of unsettled
/// states. When every successor of an unsettled pool state is settled or in
/// the pool (always the case inside [`analyze`]), the valid sets are the
/// feedback vertex sets of the pool graph, and the minimal ones factor over
/// its cyclic strongly connected components. That search is refused once a
/// set would exceed `max_subset` states or more than `2^max_subset` steps or
/// sets are needed. Otherwise the whole pool is searched lasso by lasso and
/// pools larger than `max_subset` are refused.
pub fn omega_sets(
    pool: &StateSet,
    aug: &AugmentedSystem,
    external: &StateSet,
    max_subset: usize,
) -> Result<Vec<StateSet>> {
    let limit = 1u64.checked_shl(max_subset as u32).unwrap_or(u64::MAX);
    omega_sets_capped(pool, aug, external, max_subset, limit)
}

/// [`omega_sets`] refusing families of more than `max_sets` sets.
pub fn omega_sets_capped(
    pool: &StateSet,
    aug: &AugmentedSystem,
    external: &StateSet,
    max_subset: usize,
    max_sets: u64,
) -> Result<Vec<StateSet>> {
    let sp = aug.space();
    let members = sp.canonical_members(pool);
    if members.is_empty() {
        return Ok(Vec::new());
    }
    let base = sp.mirror_close(external);
    let settled = robust_reach(&base, aug).union.union(&base);
    let live: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&z| !settled.contains(z))
        .collect();
    let to_sets = |sets: Vec<Vec<usize>>| -> Vec<StateSet> {
        sets.into_iter()
            .map(|g| StateSet::from_indices(aug.size(), g))
            .collect()
    };
    if live.is_empty() {
        // nothing is needed, so every single state is a minimal choice
        return Ok(to_sets(members.iter().map(|&z| vec![z]).collect()));
    }

    let mut adj = Vec::with_capacity(live.len());
    let mut closed = true;
    for &z in &live {
        let mut succ = Vec::new();
        for &s in aug.support(z) {
            let c = sp.canonical(s as usize);
            if let Ok(i) = live.binary_search(&c) {
                succ.push(i);
            } else if !settled.contains(c) {
                closed = false;
            }
        }
        succ.sort_unstable();
        succ.dedup();
        adj.push(succ);
    }
    if closed {
        return Ok(to_sets(feedback_route(&live, &adj, max_subset, max_sets)?));
    }

    if members.len() > max_subset {
        return Err(Error::Resource(format!(
            "minimal-set search over {} states exceeds the cap of {max_subset}; \
             raise --max-subset or analyse a smaller network",
            members.len()
        )));
    }
    let mut search = LassoSearch {
        aug,
        sp,
        members: &members,
        base: &base,
        seen: HashSet::new(),
        found: Vec::new(),
        parent: vec![usize::MAX; aug.size()],
    };
    search.visit(&mut Vec::new())?;
    let mut found = search.found;
    if found.len() as u64 > max_sets {
        return Err(Error::Resource(format!(
            "more than {max_sets} minimal sets; raise the candidate cap or analyse a smaller network"
        )));
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for g in found {
        if !kept
            .iter()
            .any(|k| k.iter().all(|z| g.binary_search(z).is_ok()))
        {
            kept.push(g);
        }
    }
    Ok(to_sets(kept))
}

/// Products of the minimal feedback sets of each cyclic component, mapped
/// back to pair indices.
fn feedback_route(
    live: &[usize],
    adj: &[Vec<usize>],
    max_subset: usize,
    max_sets: u64,
) -> Result<Vec<Vec<usize>>> {
    let limit = 1u64.checked_shl(max_subset as u32).unwrap_or(u64::MAX);
    let refuse = |why: String| {
        Error::Resource(format!(
            "minimal-set search over {} states {why}; raise --max-subset or analyse a smaller network",
            live.len()
        ))
    };
    let mut budget = limit;
    let mut families = Vec::new();
    for comp in feedback::cyclic_components(adj) {
        let sets =
            feedback::minimal_feedback_sets(adj, &comp, &mut budget, max_subset).map_err(|e| {
                match e {
                    feedback::Exhausted::Steps => {
                        refuse(format!("needs more than 2^{max_subset} steps"))
                    }
                    feedback::Exhausted::Size => refuse(format!(
                        "needs sets of more than {max_subset} states (a cyclic block of {} states)",
                        comp.len()
                    )),
                }
            })?;
        families.push(sets);
    }
    let count = families
        .iter()
        .try_fold(1u64, |acc, f| acc.checked_mul(f.len() as u64))
        .filter(|&c| c <= limit.min(max_sets))
        .ok_or_else(|| refuse(format!("yields more than {} sets", limit.min(max_sets))))?;
    let largest: usize = families
        .iter()
        .map(|f| f.iter().map(Vec::len).max().unwrap_or(0))
        .sum();
    if largest > max_subset {
        return Err(refuse(format!(
            "yields sets of {largest} states, above the cap of {max_subset}"
        )));
    }
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(count as usize);
    out.push(Vec::new());
    for family in &families {
        out = out
            .iter()
            .flat_map(|prefix| {
                family.iter().map(move |f| {
                    let mut g = prefix.clone();
                    g.extend(f.iter().map(|&i| live[i]));
                    g
                })
            })
            .collect();
    }
    for g in &mut out {
        g.sort_unstable();
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

struct LassoSearch<'a> {
    aug: &'a AugmentedSystem,
    sp: PairSpace,
    members: &'a [usize],
    base: &'a StateSet,
    seen: HashSet<Vec<usize>>,
    found: Vec<Vec<usize>>,
    /// BFS scratch, `usize::MAX` when unvisited.
    parent: Vec<usize>,
}

impl LassoSearch<'_> {
    /// `chosen` is sorted ascending.
    fn visit(&mut self, chosen: &mut Vec<usize>) -> Result<()> {
        if self
            .found
            .iter()
            .any(|f| f.iter().all(|z| chosen.binary_search(z).is_ok()))
        {
            return Ok(());
        }
        if !self.seen.insert(chosen.clone()) {
            return Ok(());
        }
        let mut target = self.base.clone();
        for &z in chosen.iter() {
            target.insert(z);
            target.insert(self.sp.mirror(z));
        }
        let settled = robust_reach(&target, self.aug).union.union(&target);
        let failing: Vec<usize> = self
            .members
            .iter()
            .copied()
            .filter(|&z| !settled.contains(z))
            .collect();
        if failing.is_empty() {
            self.found.push(chosen.clone());
            return Ok(());
        }
        for z in self.branch_states(&failing, &settled) {
            let at = chosen.binary_search(&z).unwrap_err();
            chosen.insert(at, z);
            let r = self.visit(chosen);
            chosen.remove(at);
            r?;
        }
        Ok(())
    }

    /// Pool states on a short lasso of unsettled states starting at a failing
    /// pool state. Cycles through a pool state are preferred, shortest first.
    fn branch_states(&mut self, failing: &[usize], settled: &StateSet) -> Vec<usize> {
        let members = self.members;
        let in_pool = move |z: usize| members.binary_search(&z).is_ok();
        let mut best: Option<Vec<usize>> = None;
        for &y in failing.iter().take(8) {
            if let Some(cycle) = self.cycle_through(y, settled) {
                let on_pool: Vec<usize> = cycle.into_iter().filter(|&z| in_pool(z)).collect();
                if best.as_ref().is_none_or(|b| on_pool.len() < b.len()) {
                    let done = on_pool.len() == 1;
                    best = Some(on_pool);
                    if done {
                        break;
                    }
                }
            }
        }
        if let Some(b) = best {
            return b;
        }
        // no failing state lies on a cycle: walk from one until an orbit repeats
        let mut walk = vec![failing[0]];
        let mut z = failing[0];
        loop {
            let next = self
                .aug
                .support(z)
                .iter()
                .map(|&s| self.sp.canonical(s as usize))
                .find(|&s| !settled.contains(s))
                .expect("an unsettled state has an unsettled successor");
            if walk.contains(&next) {
                break;
            }
            walk.push(next);
            z = next;
        }
        walk.retain(|&z| in_pool(z));
        walk.sort_unstable();
        walk
    }

    /// Canonical states of a shortest cycle through the orbit of `y` among
    /// unsettled states, if any.
    fn cycle_through(&mut self, y: usize, settled: &StateSet) -> Option<Vec<usize>> {
        let mut visited = vec![y];
        let mut head = 0;
        let mut cycle = None;
        'bfs: while head < visited.len() {
            let u = visited[head];
            head += 1;
            for &s in self.aug.support(u) {
                let w = self.sp.canonical(s as usize);
                if settled.contains(w) {
                    continue;
                }
                if w == y {
                    let mut c = vec![u];
                    let mut at = u;
                    while at != y {
                        at = self.parent[at];
                        c.push(at);
                    }
                    c.sort_unstable();
                    c.dedup();
                    cycle = Some(c);
                    break 'bfs;
                }
                if self.parent[w] == usize::MAX && w != y {
                    self.parent[w] = u;
                    visited.push(w);
                }
            }
        }
        for &v in &visited {
            self.parent[v] = usize::MAX;
        }
        cycle
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub partition: Partition,
    /// Indistinguishable-output pairs that robustly reach `S2`.
    pub m_set: StateSet,
    /// `S1 \ M`.
    pub n_set: StateSet,
    pub n1: StateSet,
    pub p: StateSet,
    /// `N1 ∪ P ∪ S2`.
    pub gamma: StateSet,
    pub n_prime: StateSet,
    pub invariant: StateSet,
    pub omega: Vec<StateSet>,
    pub n_second: StateSet,
    pub omega_prime: Vec<StateSet>,
    /// Alternatives `N1 ∪ P ∪ Ω_v ∪ Ω'_w`; empty iff observable.
    pub candidates: Vec<StateSet>,
    pub observable: bool,
}

pub fn minimal_targets(model: &PbnModel) -> Result<AnalysisReport> {
    minimal_targets_with(model, &AnalysisConfig::default())
}

pub fn minimal_targets_with(model: &PbnModel, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let aug = build_augmented_with(model, &config.limits)?;
    analyze(&aug, partition_states(model), config)
}

/// Runs the search on a prebuilt augmented system.
pub fn analyze(
    aug: &AugmentedSystem,
    partition: Partition,
    config: &AnalysisConfig,
) -> Result<AnalysisReport> {
    let sp: PairSpace = aug.space();
    let size = aug.size();
    let canon = |s: &StateSet| StateSet::from_indices(size, sp.canonical_members(s));

    let s2_closed = sp.mirror_close(&partition.s2);
    let m_set = robust_reach(&s2_closed, aug)
        .union
        .intersection(&partition.s1);
    let n_set = partition.s1.difference(&m_set);
    let n1 = one_step_to_diagonal(&n_set, aug);
    let p = positive_prob_fixed_points(&n_set, aug);
    let forced = n1.union(&p);
    let gamma = forced.union(&partition.s2);
    let gamma_closed = sp.mirror_close(&gamma);
    let empty = StateSet::empty(size);

    if n_set.is_empty() {
        return Ok(AnalysisReport {
            partition,
            m_set,
            n_set,
            n1,
            p,
            gamma,
            n_prime: empty.clone(),
            invariant: empty.clone(),
            omega: Vec::new(),
            n_second: empty,
            omega_prime: Vec::new(),
            candidates: Vec::new(),
            observable: true,
        });
    }

    let reach_gamma = robust_reach(&gamma_closed, aug).union;
    let n_prime = n_set.difference(&forced).difference(&reach_gamma);

    let (invariant, omega, n_second, omega_prime) = if n_prime.is_empty() {
        (empty.clone(), Vec::new(), empty.clone(), Vec::new())
    } else {
        let invariant = canon(&maximum_invariant_set(&sp.mirror_close(&n_prime), aug));
        let omega = if invariant.is_empty() {
            Vec::new()
        } else {
            omega_sets_capped(
                &invariant,
                aug,
                &gamma_closed,
                config.max_subset,
                config.max_candidates,
            )?
        };
        let base = gamma_closed.union(&sp.mirror_close(&invariant));
        let reach_base = robust_reach(&base, aug).union;
        let n_second = n_prime.difference(&invariant).difference(&reach_base);
        let omega_prime = if n_second.is_empty() {
            Vec::new()
        } else {
            let external = base.union(&reach_base);
            omega_sets_capped(
                &n_second,
                aug,
                &external,
                config.max_subset,
                config.max_candidates,
            )?
        };
        (invariant, omega, n_second, omega_prime)
    };

    let none = [empty.clone()];
    let omegas: &[StateSet] = if omega.is_empty() { &none } else { &omega };
    let omegas_prime: &[StateSet] = if omega_prime.is_empty() {
        &none
    } else {
        &omega_prime
    };
    let pairs = (omegas.len() as u64).saturating_mul(omegas_prime.len() as u64);
    if pairs > config.max_candidates {
        return Err(Error::Resource(format!(
            "{} x {} combinations exceed the cap of {} candidate sets; \
             raise the candidate cap or analyse a smaller network",
            omegas.len(),
            omegas_prime.len(),
            config.max_candidates
        )));
    }
    let mut candidates: Vec<StateSet> = Vec::new();
    let mut distinct = HashSet::new();
    for a in omegas {
        for b in omegas_prime {
            let c = forced.union(a).union(b);
            if distinct.insert(c.clone()) {
                candidates.push(c);
            }
        }
    }

    Ok(AnalysisReport {
        partition,
        m_set,
        n_set,
        n1,
        p,
        gamma,
        n_prime,
        invariant,
        omega,
        n_second,
        omega_prime,
        candidates,
        observable: false,
    })
}

/// Whether making `extra` output-distinguishable (on top of `S2`) leaves no
/// indistinguishable pair behind.
pub fn covers_all_indistinguishable(
    aug: &AugmentedSystem,
    partition: &Partition,
    extra: &StateSet,
) -> bool {
    let target = aug.space().mirror_close(&partition.s2.union(extra));
    let reached = robust_reach(&target, aug).union.union(&target);
    partition.s1.is_subset(&reached)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augmented::build_augmented;
    use crate::stp::LogicalMatrix;

    fn swap_model() -> PbnModel {
        // Two nodes; both subnetworks swap states 1 <-> 2 and 3 <-> 4.
        let l = LogicalMatrix::from_delta(4, &[2, 1, 4, 3]).unwrap();
        let h = LogicalMatrix::from_delta(2, &[1, 1, 2, 2]).unwrap();
        PbnModel::new(2, 1, vec![l.clone(), l], h, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn invariant_set_cases() {
        let model = swap_model();
        let aug = build_augmented(&model).unwrap();
        let sp = aug.space();
        let s0 = sp.diagonal();
        assert_eq!(maximum_invariant_set(&s0, &aug), s0);
        let full = StateSet::full(aug.size());
        assert_eq!(maximum_invariant_set(&full, &aug), full);
        // (1,2) -> (2,1) -> (1,2): invariant only together with its mirror
        let z = sp.index(0, 1);
        let single = StateSet::from_indices(16, [z]);
        assert!(maximum_invariant_set(&single, &aug).is_empty());
        let pair = sp.mirror_close(&single);
        assert_eq!(maximum_invariant_set(&pair, &aug), pair);
    }

    #[test]
    fn omega_on_two_cycle() {
        // (1,3) <-> (2,4) under every subnetwork.
        let model = swap_model();
        let aug = build_augmented(&model).unwrap();
        let sp = aug.space();
        let z1 = sp.index(0, 2);
        let z2 = sp.index(1, 3);
        let pool = StateSet::from_indices(16, [z1, z2]);
        let om = omega_sets(&pool, &aug, &StateSet::empty(16), 20).unwrap();
        assert_eq!(
            om,
            vec![
                StateSet::from_indices(16, [z1]),
                StateSet::from_indices(16, [z2])
            ]
        );
        assert!(
            omega_sets(&StateSet::empty(16), &aug, &StateSet::empty(16), 20)
                .unwrap()
                .is_empty()
        );
        assert!(matches!(
            omega_sets(&pool, &aug, &StateSet::empty(16), 0),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn self_loop_omega() {
        let model = swap_model();
        let aug = build_augmented(&model).unwrap();
        let sp = aug.space();
        // (1,2) maps to its own mirror, a self-loop after canonicalisation
        let z = sp.index(0, 1);
        let pool = StateSet::from_indices(16, [z]);
        let om = omega_sets(&pool, &aug, &StateSet::empty(16), 20).unwrap();
        assert_eq!(om, vec![pool]);
    }

    #[test]
    fn injective_output_is_observable() {
        let l = LogicalMatrix::from_delta(4, &[2, 1, 4, 3]).unwrap();
        let model = PbnModel::new(2, 2, vec![l], LogicalMatrix::identity(4), vec![1.0]).unwrap();
        let obs = is_observable(&model).unwrap();
        assert!(obs.observable && obs.witness.is_empty());
        let report = minimal_targets(&model).unwrap();
        assert!(report.observable && report.candidates.is_empty());
    }

    #[test]
    fn swap_model_pipeline() {
        let model = swap_model();
        let report = minimal_targets(&model).unwrap();
        assert!(!report.observable);
        let aug = build_augmented(&model).unwrap();
        for c in &report.candidates {
            assert!(covers_all_indistinguishable(&aug, &report.partition, c));
        }
    }
}
