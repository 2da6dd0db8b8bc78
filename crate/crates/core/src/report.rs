//! Serializable analysis report and DOT export.
//!
//! Every index in a report is 1-based: pair-states are listed both as the
//! linear index `k` of `δ_{4^n}^k` and as the state pair `(i, j)`; variables
//! are `1..=n`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisReport;
use crate::augmented::AugmentedSystem;
use crate::model::PbnModel;
use crate::partition::{PairSpace, Partition};
use crate::sensors::SensorPlan;
use crate::stateset::StateSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRef {
    pub index: usize,
    pub pair: (usize, usize),
}

impl PairRef {
    pub fn new(space: &PairSpace, z: usize) -> Self {
        let (i, j) = space.pair(z);
        PairRef {
            index: z + 1,
            pair: (i + 1, j + 1),
        }
    }
}

fn listing(space: &PairSpace, s: &StateSet) -> Vec<PairRef> {
    space
        .canonical_members(s)
        .into_iter()
        .map(|z| PairRef::new(space, z))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub n: usize,
    pub q: usize,
    pub m: usize,
    pub p: Vec<f64>,
    pub states: usize,
    pub pair_states: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionListing {
    pub s0: Vec<PairRef>,
    pub s1: Vec<PairRef>,
    pub s2: Vec<PairRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisListing {
    pub observable: bool,
    pub distinguishable_s1: Vec<PairRef>,
    pub indistinguishable: Vec<PairRef>,
    pub n1: Vec<PairRef>,
    pub fixed_points: Vec<PairRef>,
    pub gamma: Vec<PairRef>,
    pub n_prime: Vec<PairRef>,
    pub invariant: Vec<PairRef>,
    pub omega: Vec<Vec<PairRef>>,
    pub n_second: Vec<PairRef>,
    pub omega_prime: Vec<Vec<PairRef>>,
    pub candidates: Vec<Vec<PairRef>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateListing {
    pub target: Vec<PairRef>,
    /// Row `v` lists, per target pair, whether measuring `x_{v+1}` separates it.
    pub truth_matrix: Vec<Vec<u8>>,
    pub lambda: Option<usize>,
    pub min_covers: Vec<Vec<usize>>,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    /// 1-based candidate number.
    pub candidate: usize,
    pub variables: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorListing {
    pub lambda: usize,
    pub candidates: Vec<CandidateListing>,
    pub global_optima: Vec<Optimum>,
    pub suggested: Vec<usize>,
    pub extended_output: String,
    pub verified_observable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub sensors: bool,
    pub max_subset: usize,
    pub max_candidates: u64,
    pub max_entries: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub analysis_ms: f64,
    pub sensors_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: ModelSummary,
    pub partition: PartitionListing,
    pub analysis: AnalysisListing,
    pub sensors: Option<SensorListing>,
    pub config: ConfigEcho,
    pub timing: Timing,
}

impl Report {
    pub fn build(
        model: &PbnModel,
        analysis: &AnalysisReport,
        plan: Option<&SensorPlan>,
        config: ConfigEcho,
        timing: Timing,
    ) -> Report {
        let sp = PairSpace::for_model(model);
        let l = |s: &StateSet| listing(&sp, s);
        let sensors = plan.map(|plan| SensorListing {
            lambda: plan.lambda,
            candidates: plan
                .per_candidate
                .iter()
                .map(|c| CandidateListing {
                    target: c.target.iter().map(|&z| PairRef::new(&sp, z)).collect(),
                    truth_matrix: (0..c.truth.rows())
                        .map(|r| {
                            (0..c.truth.cols())
                                .map(|col| u8::from(c.truth.bits.get(r, col)))
                                .collect()
                        })
                        .collect(),
                    lambda: c.lambda,
                    min_covers: c.covers.iter().map(|v| one_based(v)).collect(),
                    diagnostic: c.diagnostic.clone(),
                })
                .collect(),
            global_optima: plan
                .global_optima
                .iter()
                .map(|(c, v)| Optimum {
                    candidate: c + 1,
                    variables: one_based(v),
                })
                .collect(),
            suggested: one_based(&plan.suggested),
            extended_output: plan.extended_output.to_string(),
            verified_observable: plan.verified_observable,
        });
        Report {
            model: ModelSummary {
                n: model.n(),
                q: model.q(),
                m: model.m(),
                p: model.probs().to_vec(),
                states: sp.states(),
                pair_states: sp.size(),
            },
            partition: PartitionListing {
                s0: l(&analysis.partition.s0),
                s1: l(&analysis.partition.s1),
                s2: l(&analysis.partition.s2),
            },
            analysis: AnalysisListing {
                observable: analysis.observable,
                distinguishable_s1: l(&analysis.m_set),
                indistinguishable: l(&analysis.n_set),
                n1: l(&analysis.n1),
                fixed_points: l(&analysis.p),
                gamma: l(&analysis.gamma),
                n_prime: l(&analysis.n_prime),
                invariant: l(&analysis.invariant),
                omega: analysis.omega.iter().map(l).collect(),
                n_second: l(&analysis.n_second),
                omega_prime: analysis.omega_prime.iter().map(l).collect(),
                candidates: analysis.candidates.iter().map(l).collect(),
            },
            sensors,
            config,
            timing,
        }
    }

    /// Plain-text summary for terminals.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let pairs = |v: &[PairRef]| -> String {
            let items: Vec<String> = v
                .iter()
                .map(|p| format!("{} ({},{})", p.index, p.pair.0, p.pair.1))
                .collect();
            format!("{{{}}}", items.join(", "))
        };
        let m = &self.model;
        writeln!(s, "model: n={} q={} m={} p={:?}", m.n, m.q, m.m, m.p).unwrap();
        writeln!(
            s,
            "pair states: {} (|S0|={} |S1|={} |S2|={})",
            m.pair_states,
            self.partition.s0.len(),
            self.partition.s1.len(),
            self.partition.s2.len()
        )
        .unwrap();
        let a = &self.analysis;
        writeln!(s, "observable: {}", a.observable).unwrap();
        if !a.observable {
            writeln!(s, "indistinguishable N: {}", pairs(&a.indistinguishable)).unwrap();
            writeln!(s, "N1: {}", pairs(&a.n1)).unwrap();
            writeln!(s, "P: {}", pairs(&a.fixed_points)).unwrap();
            writeln!(s, "N': {}", pairs(&a.n_prime)).unwrap();
            if !a.invariant.is_empty() {
                writeln!(s, "I(N'): {}", pairs(&a.invariant)).unwrap();
                writeln!(s, "N'': {}", pairs(&a.n_second)).unwrap();
            }
            for (k, c) in a.candidates.iter().enumerate() {
                writeln!(s, "candidate {}: {}", k + 1, pairs(c)).unwrap();
            }
        }
        if let Some(sens) = &self.sensors {
            writeln!(s, "minimum measurements: {}", sens.lambda).unwrap();
            for o in &sens.global_optima {
                let vars: Vec<String> = o.variables.iter().map(|v| format!("x{v}")).collect();
                writeln!(s, "  candidate {}: {}", o.candidate, vars.join(", ")).unwrap();
            }
            let vars: Vec<String> = sens.suggested.iter().map(|v| format!("x{v}")).collect();
            writeln!(
                s,
                "suggested: {} (observable after extension: {})",
                vars.join(", "),
                sens.verified_observable
            )
            .unwrap();
        }
        s
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

/// State-transfer graph of `S1` in DOT syntax.
///
/// Vertices are the canonical `S1` pairs. An edge `a -> b` carries the
/// probability that `a` moves to `b` or its mirror; mass leaving `S1` is
/// summarised in each vertex label as `to S0` / `to S2`.
pub fn s1_graph_dot(aug: &AugmentedSystem, partition: &Partition) -> String {
    let sp = aug.space();
    let s1_closed = sp.mirror_close(&partition.s1);
    let mut out = String::from("digraph S1 {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    let mut edges = String::new();
    for z in partition.s1.iter() {
        let (i, j) = sp.pair(z);
        let mut to_s0 = 0.0;
        let mut to_s2 = 0.0;
        let mut succ: Vec<(usize, f64)> = Vec::new();
        for (s, p) in aug.q().column(z) {
            if sp.is_diagonal(s) {
                to_s0 += p;
            } else if s1_closed.contains(s) {
                let c = sp.canonical(s);
                match succ.iter_mut().find(|(t, _)| *t == c) {
                    Some(e) => e.1 += p,
                    None => succ.push((c, p)),
                }
            } else {
                to_s2 += p;
            }
        }
        let mut label = format!("{} ({},{})", z + 1, i + 1, j + 1);
        if to_s0 > 0.0 {
            write!(label, "\\nto S0: {}", round(to_s0)).unwrap();
        }
        if to_s2 > 0.0 {
            write!(label, "\\nto S2: {}", round(to_s2)).unwrap();
        }
        writeln!(out, "  s{} [label=\"{}\"];", z + 1, label).unwrap();
        succ.sort_by_key(|&(t, _)| t);
        for (t, p) in succ {
            writeln!(
                edges,
                "  s{} -> s{} [label=\"{}\"];",
                z + 1,
                t + 1,
                round(p)
            )
            .unwrap();
        }
    }
    out.push_str(&edges);
    out.push_str("}\n");
    out
}

fn round(p: f64) -> f64 {
    (p * 1e9).round() / 1e9
}
