//! The parallel (augmented) system: two copies of the network driven by one
//! switching signal, its expected transition matrix `Q` and pair output `K`.

use crate::error::Result;
use crate::model::PbnModel;
use crate::partition::PairSpace;
use crate::stp::{Limits, LogicalMatrix, RealMatrix};

/// Column-compressed nonnegative matrix with unit column sums.
///
/// Only subnetworks with positive probability contribute entries, so the
/// stored pattern of a column is exactly its support.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    vals: Vec<f64>,
}

impl StochasticMatrix {
    /// Mixes logical matrices: `Σ_v probs[v] · mats[v]`, skipping `probs[v] == 0`.
    pub fn mixture(mats: &[LogicalMatrix], probs: &[f64]) -> StochasticMatrix {
        let rows = mats[0].rows();
        let cols = mats[0].cols();
        let active: Vec<usize> = (0..mats.len()).filter(|&v| probs[v] > 0.0).collect();
        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::with_capacity(cols * active.len());
        let mut vals = Vec::with_capacity(cols * active.len());
        let mut scratch: Vec<(usize, f64)> = Vec::with_capacity(active.len());
        col_ptr.push(0);
        for c in 0..cols {
            scratch.clear();
            scratch.extend(active.iter().map(|&v| (mats[v].index(c), probs[v])));
            scratch.sort_by_key(|&(r, _)| r);
            let start = row_idx.len();
            for &(r, p) in &scratch {
                if row_idx.len() > start && *row_idx.last().unwrap() as usize == r {
                    *vals.last_mut().unwrap() += p;
                } else {
                    row_idx.push(r as u32);
                    vals.push(p);
                }
            }
            col_ptr.push(row_idx.len());
        }
        StochasticMatrix {
            rows,
            col_ptr,
            row_idx,
            vals,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    /// Rows with positive probability in column `col`, ascending.
    #[inline]
    pub fn support(&self, col: usize) -> &[u32] {
        &self.row_idx[self.col_ptr[col]..self.col_ptr[col + 1]]
    }

    /// `(row, probability)` pairs of one column, ascending by row.
    pub fn column(&self, col: usize) -> Vec<(usize, f64)> {
        let r = self.col_ptr[col]..self.col_ptr[col + 1];
        self.row_idx[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&i, &p)| (i as usize, p))
            .collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let sup = self.support(col);
        match sup.binary_search(&(row as u32)) {
            Ok(k) => self.vals[self.col_ptr[col] + k],
            Err(_) => 0.0,
        }
    }

    /// Largest `|Σ_i Q_ij - 1|` over columns.
    pub fn max_column_sum_error(&self) -> f64 {
        (0..self.cols())
            .map(|c| {
                (self.vals[self.col_ptr[c]..self.col_ptr[c + 1]]
                    .iter()
                    .sum::<f64>()
                    - 1.0)
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::from_columns(
            self.rows,
            (0..self.cols()).map(|c| self.column(c)).collect(),
        )
        .expect("stochastic matrix has positive dimensions")
    }
}

/// Parallel system of a model.
#[derive(Clone, Debug)]
pub struct AugmentedSystem {
    n: usize,
    space: PairSpace,
    probs: Vec<f64>,
    transitions: Vec<LogicalMatrix>,
    q: StochasticMatrix,
    k: LogicalMatrix,
    pred_ptr: Vec<usize>,
    pred_idx: Vec<u32>,
}

impl AugmentedSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.transitions.len()
    }

    pub fn space(&self) -> PairSpace {
        self.space
    }

    /// `2^{2n}`.
    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `F_v`, one per subnetwork (including zero-probability ones).
    pub fn transitions(&self) -> &[LogicalMatrix] {
        &self.transitions
    }

    pub fn q(&self) -> &StochasticMatrix {
        &self.q
    }

    /// `K = H ⊗ H`.
    pub fn k(&self) -> &LogicalMatrix {
        &self.k
    }

    /// Pair-states reachable in one step from `z` with positive probability.
    #[inline]
    pub fn support(&self, z: usize) -> &[u32] {
        self.q.support(z)
    }

    /// States `w` with `z ∈ support(w)`.
    #[inline]
    pub fn predecessors(&self, z: usize) -> &[u32] {
        &self.pred_idx[self.pred_ptr[z]..self.pred_ptr[z + 1]]
    }
}

pub fn build_augmented(model: &PbnModel) -> Result<AugmentedSystem> {
    build_augmented_with(model, &Limits::default())
}

/// Builds `F_v`, `Q = Σ p_v F_v` and `K = H ⊗ H` by index arithmetic:
/// `F_v` maps pair `(i, j)` to `(L_v(i), L_v(j))`.
pub fn build_augmented_with(model: &PbnModel, limits: &Limits) -> Result<AugmentedSystem> {
    let space = PairSpace::for_model(model);
    let size = space.size();
    limits.check(size, model.m(), "augmented transition table")?;
    let states = space.states();
    let transitions = model
        .networks()
        .iter()
        .map(|l| {
            let idx = (0..size)
                .map(|z| {
                    let (i, j) = space.pair(z);
                    space.index(l.index(i), l.index(j))
                })
                .collect();
            LogicalMatrix::new(size, idx)
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(states * states, size);
    let q = StochasticMatrix::mixture(&transitions, model.probs());
    let k = model.output().kron(model.output())?;

    let mut counts = vec![0usize; size + 1];
    for z in 0..size {
        for &s in q.support(z) {
            counts[s as usize + 1] += 1;
        }
    }
    for i in 0..size {
        counts[i + 1] += counts[i];
    }
    let pred_ptr = counts.clone();
    let mut fill = counts;
    let mut pred_idx = vec![0u32; pred_ptr[size]];
    for z in 0..size {
        for &s in q.support(z) {
            let slot = &mut fill[s as usize];
            pred_idx[*slot] = z as u32;
            *slot += 1;
        }
    }

    Ok(AugmentedSystem {
        n: model.n(),
        space,
        probs: model.probs().to_vec(),
        transitions,
        q,
        k,
        pred_ptr,
        pred_idx,
    })
}

/// One-step transition probabilities `P^x = Σ_v p_v L_v`.
pub fn expected_transition(model: &PbnModel) -> StochasticMatrix {
    StochasticMatrix::mixture(model.networks(), model.probs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mixture_merges_duplicate_rows() {
        let a = LogicalMatrix::from_delta(2, &[1, 2]).unwrap();
        let b = LogicalMatrix::from_delta(2, &[1, 1]).unwrap();
        let q = StochasticMatrix::mixture(&[a, b], &[0.25, 0.75]);
        assert_eq!(q.column(0), vec![(0, 1.0)]);
        assert_eq!(q.column(1), vec![(0, 0.75), (1, 0.25)]);
        assert_eq!(q.support(1), &[0, 1]);
        assert_eq!(q.get(1, 1), 0.25);
    }

    #[test]
    fn zero_probability_subnetworks_leave_no_support() {
        let a = LogicalMatrix::from_delta(2, &[1, 2]).unwrap();
        let b = LogicalMatrix::from_delta(2, &[2, 1]).unwrap();
        let q = StochasticMatrix::mixture(&[a, b], &[1.0, 0.0]);
        assert_eq!(q.support(0), &[0]);
        assert_eq!(q.support(1), &[1]);
    }

    #[test]
    fn random_models_keep_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let model = random_model(&mut rng, 3, 1, 3, 0.3);
            let aug = build_augmented(&model).unwrap();
            let sp = aug.space();
            assert!(aug.q().max_column_sum_error() < 1e-9);
            for z in 0..aug.size() {
                if sp.is_diagonal(z) {
                    assert!(aug.support(z).iter().all(|&s| sp.is_diagonal(s as usize)));
                }
                for s in 0..aug.size() {
                    assert_eq!(aug.q().get(sp.mirror(s), sp.mirror(z)), aug.q().get(s, z));
                }
                for &s in aug.support(z) {
                    assert!(aug.predecessors(s as usize).contains(&(z as u32)));
                }
            }
        }
    }

    #[test]
    fn single_subnetwork_expectation_is_the_network() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = random_model(&mut rng, 3, 1, 1, 0.0);
        let px = expected_transition(&model);
        assert_eq!(px.to_real(), model.networks()[0].to_real());
    }

    #[test]
    fn cap_applies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = random_model(&mut rng, 3, 1, 2, 0.0);
        let limits = Limits { max_entries: 100 };
        assert!(build_augmented_with(&model, &limits).is_err());
    }
}
