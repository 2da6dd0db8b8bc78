//! Stochastic and exhaustive checks of distinguishability, driven directly by
//! the network matrices.
//!
//! Random streams use ChaCha8 seeded with `seed_from_u64`; trial `t` of an
//! estimate uses seed `seed + t` (wrapping). Both copies of the network always
//! share one switching draw per step.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::PbnModel;
use crate::partition::PairSpace;

/// Default work budget for [`exhaustive_distinguishability`].
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    /// `x(0..=T)`, 0-based state indices.
    pub states: Vec<usize>,
    /// `y(0..=T)`, 0-based output indices.
    pub outputs: Vec<usize>,
    /// `σ(0..T)`, 0-based subnetwork indices.
    pub switches: Vec<usize>,
    pub seed: u64,
}

fn check_state(model: &PbnModel, x: usize) -> Result<()> {
    if x >= model.state_count() {
        return Err(Error::OutOfRange {
            index: x + 1,
            max: model.state_count(),
        });
    }
    Ok(())
}

fn switching(model: &PbnModel) -> WeightedIndex<f64> {
    WeightedIndex::new(model.probs()).expect("validated probabilities have positive mass")
}

pub fn sample_trajectory(
    model: &PbnModel,
    x0: usize,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    check_state(model, x0)?;
    let dist = switching(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = model.output();
    let mut states = Vec::with_capacity(horizon + 1);
    let mut outputs = Vec::with_capacity(horizon + 1);
    let mut switches = Vec::with_capacity(horizon);
    let mut x = x0;
    states.push(x);
    outputs.push(h.index(x));
    for _ in 0..horizon {
        let v = dist.sample(&mut rng);
        x = model.networks()[v].index(x);
        switches.push(v);
        states.push(x);
        outputs.push(h.index(x));
    }
    Ok(Trajectory {
        states,
        outputs,
        switches,
        seed,
    })
}

/// Fraction of trials in which the outputs from `x0` and `x1` differ at some
/// time in `0..=horizon`.
pub fn estimate_distinguishability(
    model: &PbnModel,
    x0: usize,
    x1: usize,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_state(model, x0)?;
    check_state(model, x1)?;
    if trials == 0 {
        return Err(Error::Argument("at least one trial is required".into()));
    }
    let dist = switching(model);
    let h = model.output();
    let nets = model.networks();
    let mut separated = 0usize;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let (mut a, mut b) = (x0, x1);
        let mut differ = h.index(a) != h.index(b);
        for _ in 0..horizon {
            if differ {
                break;
            }
            let v = dist.sample(&mut rng);
            a = nets[v].index(a);
            b = nets[v].index(b);
            differ = h.index(a) != h.index(b);
        }
        if differ {
            separated += 1;
        }
    }
    Ok(separated as f64 / trials as f64)
}

/// True iff every switching sequence of length `horizon` over the
/// positive-probability subnetworks separates the outputs from `x0` and `x1`
/// at some time `t <= horizon`.
///
/// Memoised over pair-states; `budget` bounds `horizon * 4^n * active`.
pub fn exhaustive_distinguishability(
    model: &PbnModel,
    x0: usize,
    x1: usize,
    horizon: usize,
    budget: u64,
) -> Result<bool> {
    check_state(model, x0)?;
    check_state(model, x1)?;
    let sp = PairSpace::for_model(model);
    let active = model.active_networks();
    let work = (horizon as u128) * (sp.size() as u128) * (active.len() as u128);
    if work > budget as u128 {
        return Err(Error::Resource(format!(
            "exhaustive check needs about {work} steps, above the budget of {budget}; \
             use the analytic reachability verdict instead"
        )));
    }
    let h = model.output();
    let nets = model.networks();
    let differ_now: Vec<bool> = (0..sp.size())
        .map(|z| {
            let (i, j) = sp.pair(z);
            h.index(i) != h.index(j)
        })
        .collect();
    let mut sep = differ_now.clone();
    for _ in 0..horizon {
        let prev = sep.clone();
        for z in 0..sp.size() {
            if differ_now[z] {
                continue;
            }
            let (i, j) = sp.pair(z);
            sep[z] = active
                .iter()
                .all(|&v| prev[sp.index(nets[v].index(i), nets[v].index(j))]);
        }
    }
    Ok(sep[sp.index(x0, x1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_model;

    #[test]
    fn zero_horizon_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = random_model(&mut rng, 3, 1, 3, 0.0);
        let t = sample_trajectory(&model, 2, 0, 9).unwrap();
        assert_eq!(t.states, vec![2]);
        assert_eq!(t.outputs, vec![model.output().index(2)]);
        assert!(t.switches.is_empty());
        let a = sample_trajectory(&model, 1, 30, 42).unwrap();
        let b = sample_trajectory(&model, 1, 30, 42).unwrap();
        assert_eq!(a, b);
        for (k, &v) in a.switches.iter().enumerate() {
            assert_eq!(a.states[k + 1], model.networks()[v].index(a.states[k]));
        }
        assert!(sample_trajectory(&model, 8, 1, 0).is_err());
    }

    #[test]
    fn single_network_ignores_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = random_model(&mut rng, 3, 1, 1, 0.0);
        let a = sample_trajectory(&model, 0, 12, 1).unwrap();
        let b = sample_trajectory(&model, 0, 12, 2).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn equal_states_never_separate() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = random_model(&mut rng, 3, 1, 2, 0.0);
        assert_eq!(
            estimate_distinguishability(&model, 5, 5, 20, 50, 1).unwrap(),
            0.0
        );
        assert!(
            !exhaustive_distinguishability(&model, 5, 5, 20, DEFAULT_EXHAUSTIVE_BUDGET).unwrap()
        );
        assert!(estimate_distinguishability(&model, 5, 5, 20, 0, 1).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = random_model(&mut rng, 3, 1, 2, 0.0);
        assert!(matches!(
            exhaustive_distinguishability(&model, 0, 1, 1000, 1000),
            Err(Error::Resource(_))
        ));
    }
}
