//! Minimum measurement selection.
//!
//! Each extra measurement reads one state variable, `y = x_m`. A pair becomes
//! output-distinguishable under `x_m` exactly when the two states differ in bit
//! `m`. Choosing measurements for a target set is then an exact minimum set
//! cover over the rows of a truth matrix.

use crate::analysis::{is_observable, AnalysisReport};
use crate::error::{Error, Result};
use crate::model::{state_bit, PbnModel};
use crate::partition::PairSpace;
use crate::stateset::StateSet;
use crate::stp::{BooleanMatrix, LogicalMatrix};

fn check_var(var: usize, n: usize) -> Result<()> {
    if var >= n {
        return Err(Error::OutOfRange {
            index: var + 1,
            max: n,
        });
    }
    Ok(())
}

/// `H_m ∈ L_{2×2^n}` for the measurement `y = x_{var+1}`.
pub fn single_variable_output(var: usize, n: usize) -> Result<LogicalMatrix> {
    check_var(var, n)?;
    let idx = (0..1usize << n)
        .map(|k| if state_bit(k, var, n) { 0 } else { 1 })
        .collect();
    LogicalMatrix::new(2, idx)
}

/// `Υ_m`: pairs whose states differ in variable `var`. Mirror-closed.
pub fn distinguishable_under(var: usize, n: usize) -> Result<StateSet> {
    check_var(var, n)?;
    let sp = PairSpace::new(n);
    let mut set = StateSet::empty(sp.size());
    for i in 0..sp.states() {
        for j in 0..sp.states() {
            if state_bit(i, var, n) != state_bit(j, var, n) {
                set.insert(sp.index(i, j));
            }
        }
    }
    Ok(set)
}

/// Rows are state variables, columns are target pairs (canonical, ascending).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthMatrix {
    pub bits: BooleanMatrix,
    pub column_states: Vec<usize>,
}

impl TruthMatrix {
    pub fn rows(&self) -> usize {
        self.bits.rows()
    }

    pub fn cols(&self) -> usize {
        self.bits.cols()
    }

    pub fn from_bits(bits: BooleanMatrix) -> Self {
        let column_states = (0..bits.cols()).collect();
        TruthMatrix {
            bits,
            column_states,
        }
    }
}

pub fn truth_matrix(target: &StateSet, n: usize) -> Result<TruthMatrix> {
    let sp = PairSpace::new(n);
    if target.universe() != sp.size() {
        return Err(Error::Argument(format!(
            "target set lives in a universe of {} pairs, expected {}",
            target.universe(),
            sp.size()
        )));
    }
    if let Some(z) = target.iter().find(|&z| sp.is_diagonal(z)) {
        return Err(Error::Argument(format!(
            "diagonal pair {} cannot be separated by any measurement",
            z + 1
        )));
    }
    let column_states = sp.canonical_members(target);
    let bits = BooleanMatrix::from_fn(n, column_states.len(), |var, c| {
        let (i, j) = sp.pair(column_states[c]);
        state_bit(i, var, n) != state_bit(j, var, n)
    });
    Ok(TruthMatrix {
        bits,
        column_states,
    })
}

/// All minimum-cardinality row sets whose OR covers every column, each sorted
/// ascending, listed lexicographically.
pub fn min_cover(phi: &TruthMatrix) -> Result<Vec<Vec<usize>>> {
    let rows = phi.rows();
    let cols = phi.cols();
    if let Some(c) = (0..cols).find(|&c| (0..rows).all(|r| !phi.bits.get(r, c))) {
        return Err(Error::Infeasible(format!(
            "pair-state {} is not separated by any single variable",
            phi.column_states[c] + 1
        )));
    }
    if cols == 0 {
        return Ok(vec![Vec::new()]);
    }
    let words = cols.div_ceil(64);
    let mut full = vec![!0u64; words];
    if !cols.is_multiple_of(64) {
        full[words - 1] = (1u64 << (cols % 64)) - 1;
    }
    let row_bits: Vec<&[u64]> = (0..rows).map(|r| phi.bits.row_words(r)).collect();

    let mut acc = vec![0u64; words];
    for size in 1..=rows {
        let mut found = Vec::new();
        let mut pick: Vec<usize> = (0..size).collect();
        loop {
            acc.iter_mut().for_each(|w| *w = 0);
            for &r in &pick {
                for (a, b) in acc.iter_mut().zip(row_bits[r]) {
                    *a |= b;
                }
            }
            if acc == full {
                found.push(pick.clone());
            }
            // next combination in lexicographic order
            let mut i = size;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if pick[i] != i + rows - size {
                    pick[i] += 1;
                    for j in i + 1..size {
                        pick[j] = pick[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
        if !found.is_empty() {
            return Ok(found);
        }
    }
    unreachable!("the full row set covers every column once no column is empty")
}

/// Output matrix `G = H * H̄` after adding measurements of `vars` (0-based,
/// applied in the given order), returned with the new output count.
pub fn extended_output(model: &PbnModel, vars: &[usize]) -> Result<(usize, LogicalMatrix)> {
    let mut g = model.output().clone();
    for &v in vars {
        g = g.khatri_rao(&single_variable_output(v, model.n())?)?;
    }
    Ok((model.q() + vars.len(), g))
}

/// The model with extra measurements of `vars`.
pub fn with_measurements(model: &PbnModel, vars: &[usize]) -> Result<PbnModel> {
    let (q, g) = extended_output(model, vars)?;
    model.with_output(q, g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidatePlan {
    /// Canonical target pairs.
    pub target: Vec<usize>,
    pub truth: TruthMatrix,
    /// Minimum covers (0-based variables); empty when infeasible.
    pub covers: Vec<Vec<usize>>,
    /// Common cardinality of `covers`.
    pub lambda: Option<usize>,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorPlan {
    pub per_candidate: Vec<CandidatePlan>,
    /// `(candidate index, variables)` pairs achieving the global minimum.
    pub global_optima: Vec<(usize, Vec<usize>)>,
    pub lambda: usize,
    /// Lexicographically smallest optimum.
    pub suggested: Vec<usize>,
    /// `G` for the suggested measurements.
    pub extended_output: LogicalMatrix,
    /// Observability of the model with `G` as its output.
    pub verified_observable: bool,
}

/// Minimum measurements over every candidate target set of `report`.
pub fn global_min_sensors(report: &AnalysisReport, model: &PbnModel) -> Result<SensorPlan> {
    if report.observable {
        return Err(Error::Argument(
            "the network is already observable; no measurements are needed".into(),
        ));
    }
    let mut per_candidate = Vec::with_capacity(report.candidates.len());
    for cand in &report.candidates {
        let truth = truth_matrix(cand, model.n())?;
        let target = truth.column_states.clone();
        let plan = match min_cover(&truth) {
            Ok(covers) => CandidatePlan {
                target,
                lambda: covers.first().map(Vec::len),
                covers,
                truth,
                diagnostic: None,
            },
            Err(e @ Error::Infeasible(_)) => CandidatePlan {
                target,
                truth,
                covers: Vec::new(),
                lambda: None,
                diagnostic: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        per_candidate.push(plan);
    }
    let lambda = per_candidate
        .iter()
        .filter_map(|c| c.lambda)
        .min()
        .ok_or_else(|| Error::Infeasible("no candidate target set admits a cover".into()))?;
    let mut global_optima = Vec::new();
    for (ci, c) in per_candidate.iter().enumerate() {
        if c.lambda == Some(lambda) {
            for cover in &c.covers {
                global_optima.push((ci, cover.clone()));
            }
        }
    }
    let suggested = global_optima
        .iter()
        .map(|(_, v)| v.clone())
        .min()
        .expect("at least one optimum");
    let (_, extended) = extended_output(model, &suggested)?;
    let verified_observable = is_observable(&with_measurements(model, &suggested)?)?.observable;
    Ok(SensorPlan {
        per_candidate,
        global_optima,
        lambda,
        suggested,
        extended_output: extended,
        verified_observable,
    })
}
