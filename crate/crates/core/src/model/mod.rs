//! Probabilistic Boolean network models: state coding, structure matrices,
//! network assembly and the validated [`PbnModel`].
//!
//! State and pair indices are 0-based throughout the library: index `k`
//! denotes the canonical vector `δ_{2^n}^{k+1}`. The bit convention
//! identifies `1` with `δ_2^1`, so `k = Σ_r (1 - bit_r) 2^{n-1-r}`.

mod expr;
mod format;

pub use expr::{parse_expr, parse_expr_at, BoolExpr};
pub use format::{parse_model, render_model};

use rand::Rng;

use crate::error::{Error, Result};
use crate::stp::LogicalMatrix;

/// Largest supported node or output count.
pub const MAX_NODES: usize = 24;

const PROB_TOLERANCE: f64 = 1e-9;

/// Bits of state `k` (0-based), most significant variable first.
pub fn decode_state(k: usize, n: usize) -> Result<Vec<bool>> {
    let count = 1usize << n;
    if k >= count {
        return Err(Error::OutOfRange {
            index: k + 1,
            max: count,
        });
    }
    Ok((0..n).map(|r| (k >> (n - 1 - r)) & 1 == 0).collect())
}

/// Inverse of [`decode_state`].
pub fn encode_state(bits: &[bool]) -> usize {
    let n = bits.len();
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| !b)
        .map(|(r, _)| 1usize << (n - 1 - r))
        .sum()
}

/// Value of variable `var` (0-based) in state `k` without allocating.
#[inline]
pub fn state_bit(k: usize, var: usize, n: usize) -> bool {
    (k >> (n - 1 - var)) & 1 == 0
}

/// Structure matrix `M_f ∈ L_{2×2^n}` of a Boolean rule over `x1..xn`.
pub fn structure_matrix(f: &BoolExpr, n: usize) -> Result<LogicalMatrix> {
    if let Some(v) = f.max_var() {
        if v >= n {
            return Err(Error::OutOfRange {
                index: v + 1,
                max: n,
            });
        }
    }
    let mut bits = vec![false; n];
    let idx = (0..1usize << n)
        .map(|k| {
            for (r, b) in bits.iter_mut().enumerate() {
                *b = state_bit(k, r, n);
            }
            if f.eval(&bits) {
                0
            } else {
                1
            }
        })
        .collect();
    LogicalMatrix::new(2, idx)
}

/// Khatri-Rao fold of per-node structure matrices into the network matrix.
pub fn assemble_network(per_node: &[LogicalMatrix]) -> Result<LogicalMatrix> {
    let (first, rest) = per_node
        .split_first()
        .ok_or_else(|| Error::Argument("no node matrices to assemble".into()))?;
    let cols = first.cols();
    for m in per_node {
        if m.rows() != 2 || m.cols() != cols {
            return Err(Error::Argument(format!(
                "node matrices must all be 2x{cols}, found {}x{}",
                m.rows(),
                m.cols()
            )));
        }
    }
    rest.iter()
        .try_fold(first.clone(), |acc, m| acc.khatri_rao(m))
}

/// A validated probabilistic Boolean network `x(t+1) = L_σ x(t)`, `y = H x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PbnModel {
    n: usize,
    q: usize,
    networks: Vec<LogicalMatrix>,
    output: LogicalMatrix,
    probs: Vec<f64>,
}

impl PbnModel {
    pub fn new(
        n: usize,
        q: usize,
        networks: Vec<LogicalMatrix>,
        output: LogicalMatrix,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::Validation(format!(
                "state count must be in 1..={MAX_NODES}, got {n}"
            )));
        }
        if q > MAX_NODES {
            return Err(Error::Validation(format!(
                "output count must be at most {MAX_NODES}, got {q}"
            )));
        }
        if networks.is_empty() {
            return Err(Error::Validation(
                "at least one subnetwork is required".into(),
            ));
        }
        if probs.len() != networks.len() {
            return Err(Error::Validation(format!(
                "{} subnetworks but {} probabilities",
                networks.len(),
                probs.len()
            )));
        }
        let size = 1usize << n;
        for (v, l) in networks.iter().enumerate() {
            if l.rows() != size || l.cols() != size {
                return Err(Error::Validation(format!(
                    "subnetwork {} matrix is {}x{}, expected {size}x{size}",
                    v + 1,
                    l.rows(),
                    l.cols()
                )));
            }
        }
        if output.rows() != 1usize << q || output.cols() != size {
            return Err(Error::Validation(format!(
                "output matrix is {}x{}, expected {}x{size}",
                output.rows(),
                output.cols(),
                1usize << q
            )));
        }
        if let Some(bad) = probs
            .iter()
            .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(Error::Validation(format!(
                "probability {bad} is outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::Validation(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        if probs.iter().all(|&p| p == 0.0) {
            return Err(Error::Validation(
                "no subnetwork has positive probability".into(),
            ));
        }
        Ok(PbnModel {
            n,
            q,
            networks,
            output,
            probs,
        })
    }

    /// Number of state nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of outputs.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of subnetworks.
    pub fn m(&self) -> usize {
        self.networks.len()
    }

    /// `2^n`.
    pub fn state_count(&self) -> usize {
        1 << self.n
    }

    pub fn networks(&self) -> &[LogicalMatrix] {
        &self.networks
    }

    pub fn output(&self) -> &LogicalMatrix {
        &self.output
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Subnetworks that can fire, i.e. with `p_v > 0`.
    pub fn active_networks(&self) -> Vec<usize> {
        (0..self.m()).filter(|&v| self.probs[v] > 0.0).collect()
    }

    /// Same dynamics with a different output map.
    pub fn with_output(&self, q: usize, output: LogicalMatrix) -> Result<Self> {
        PbnModel::new(self.n, q, self.networks.clone(), output, self.probs.clone())
    }
}

/// Random model for tests and benchmarks. Each subnetwork probability is set
/// to zero with chance `zero_chance`; at least one stays positive.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    q: usize,
    m: usize,
    zero_chance: f64,
) -> PbnModel {
    let size = 1usize << n;
    let networks = (0..m)
        .map(|_| {
            LogicalMatrix::new(size, (0..size).map(|_| rng.random_range(0..size)).collect())
                .expect("valid random network")
        })
        .collect();
    let out_rows = 1usize << q;
    let output = LogicalMatrix::new(
        out_rows,
        (0..size).map(|_| rng.random_range(0..out_rows)).collect(),
    )
    .expect("valid random output");
    let probs = random_probs(rng, m, zero_chance);
    PbnModel::new(n, q, networks, output, probs).expect("valid random model")
}

/// Random model in the style of Kauffman networks: every node of every
/// subnetwork, and every output, reads `k` distinct random variables through
/// a uniformly random truth table.
pub fn random_kauffman_model<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    q: usize,
    m: usize,
    k: usize,
    zero_chance: f64,
) -> PbnModel {
    let k = k.min(n);
    let size = 1usize << n;
    let states: Vec<Vec<bool>> = (0..size)
        .map(|x| decode_state(x, n).expect("in range"))
        .collect();
    let mut vector_map = |count: usize| -> Vec<usize> {
        let rules: Vec<(Vec<usize>, Vec<bool>)> = (0..count)
            .map(|_| {
                let inputs = rand::seq::index::sample(rng, n, k).into_vec();
                let table = (0..1usize << k).map(|_| rng.random_bool(0.5)).collect();
                (inputs, table)
            })
            .collect();
        states
            .iter()
            .map(|bits| {
                let next: Vec<bool> = rules
                    .iter()
                    .map(|(inputs, table)| {
                        let row = inputs
                            .iter()
                            .fold(0, |acc, &v| acc << 1 | usize::from(bits[v]));
                        table[row]
                    })
                    .collect();
                encode_state(&next)
            })
            .collect()
    };
    let networks: Vec<LogicalMatrix> = (0..m)
        .map(|_| LogicalMatrix::new(size, vector_map(n)).expect("valid random network"))
        .collect();
    let output = LogicalMatrix::new(1usize << q, vector_map(q)).expect("valid random output");
    let probs = random_probs(rng, m, zero_chance);
    PbnModel::new(n, q, networks, output, probs).expect("valid random model")
}

/// Weights drawn from `1..=20` (or zero with chance `zero_chance`), normalised;
/// at least one stays positive.
fn random_probs<R: Rng + ?Sized>(rng: &mut R, m: usize, zero_chance: f64) -> Vec<f64> {
    let mut weights: Vec<f64> = (0..m)
        .map(|_| {
            if rng.random_bool(zero_chance) {
                0.0
            } else {
                rng.random_range(1..=20) as f64
            }
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        let v = rng.random_range(0..m);
        weights[v] = 1.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(rows: usize, idx: &[usize]) -> LogicalMatrix {
        LogicalMatrix::from_delta(rows, idx).unwrap()
    }

    #[test]
    fn state_codes() {
        assert_eq!(decode_state(0, 3).unwrap(), vec![true, true, true]);
        assert_eq!(decode_state(7, 3).unwrap(), vec![false, false, false]);
        assert_eq!(decode_state(3, 3).unwrap(), vec![true, false, false]);
        assert_eq!(encode_state(&[true, false, false]), 3);
        assert!(matches!(
            decode_state(8, 3),
            Err(Error::OutOfRange { index: 9, max: 8 })
        ));
        for n in 1..=12 {
            for k in 0..1usize << n {
                assert_eq!(encode_state(&decode_state(k, n).unwrap()), k);
            }
        }
    }

    #[test]
    fn structure_matrices() {
        let not_x2 = parse_expr("!x2").unwrap();
        assert_eq!(
            structure_matrix(&not_x2, 3).unwrap(),
            delta(2, &[2, 2, 1, 1, 2, 2, 1, 1])
        );
        assert_eq!(
            structure_matrix(&parse_expr("x1").unwrap(), 1).unwrap(),
            LogicalMatrix::identity(2)
        );
        let h = parse_expr("(x2 & !x3) | ((x1 <-> x3) & !x2)").unwrap();
        assert_eq!(
            structure_matrix(&h, 3).unwrap(),
            delta(2, &[2, 1, 1, 2, 2, 1, 2, 1])
        );
        assert!(structure_matrix(&parse_expr("x4").unwrap(), 3).is_err());
    }

    #[test]
    fn assemble_subnetworks() {
        let rules = |srcs: [&str; 3]| -> LogicalMatrix {
            let per: Vec<_> = srcs
                .iter()
                .map(|s| structure_matrix(&parse_expr(s).unwrap(), 3).unwrap())
                .collect();
            assemble_network(&per).unwrap()
        };
        assert_eq!(
            rules(["!x2", "!x1 & !x3", "x2"]),
            delta(8, &[7, 7, 4, 4, 7, 5, 4, 2])
        );
        assert_eq!(
            rules(["x1", "x2", "x2"]),
            delta(8, &[1, 1, 4, 4, 5, 5, 8, 8])
        );
        assert_eq!(rules(["x1", "x2", "x3"]), LogicalMatrix::identity(8));
        assert!(assemble_network(&[]).is_err());
        assert!(assemble_network(&[delta(2, &[1, 2]), delta(2, &[1, 2, 1, 2])]).is_err());
    }

    #[test]
    fn model_validation() {
        let l = LogicalMatrix::identity(2);
        let h = LogicalMatrix::identity(2);
        assert!(PbnModel::new(1, 1, vec![l.clone()], h.clone(), vec![1.0]).is_ok());
        let err = PbnModel::new(1, 1, vec![l.clone(), l.clone()], h.clone(), vec![0.5, 0.4]);
        assert!(matches!(err, Err(Error::Validation(_))));
        let err = PbnModel::new(1, 1, vec![l.clone()], h.clone(), vec![1.0, 0.0]);
        assert!(matches!(err, Err(Error::Validation(_))));
        let err = PbnModel::new(2, 1, vec![l.clone()], h.clone(), vec![1.0]);
        assert!(matches!(err, Err(Error::Validation(_))));
        let err = PbnModel::new(1, 1, vec![l], h, vec![1.2]);
        assert!(matches!(err, Err(Error::Validation(_))));
    }
}
