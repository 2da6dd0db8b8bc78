//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use pbn_minobs::model::{random_model, structure_matrix};
use pbn_minobs::sensors::with_measurements;
use pbn_minobs::stp::{khatri_rao, stp_multiply};
use pbn_minobs::{
    build_augmented, exhaustive_distinguishability, global_min_sensors, is_observable, min_cover,
    minimal_targets, parse_model, partition_states, robust_reach, truth_matrix, BoolExpr,
    BooleanMatrix, Limits, PairSpace, PbnModel, RealMatrix, StateSet, TruthMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_pbn-minobs");
const MODEL_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/apoptosis.pbn");

const PROB_TOL: f64 = 1e-12;
const Q_BUILD_LIMIT: Duration = Duration::from_millis(10);
const ANALYZE_CLI_LIMIT: Duration = Duration::from_secs(1);
const SCALE_LIMIT: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    }};
}

fn apoptosis() -> PbnModel {
    parse_model(&std::fs::read_to_string(MODEL_PATH).unwrap()).unwrap()
}

fn one_based(s: &StateSet) -> Vec<usize> {
    s.iter().map(|z| z + 1).collect()
}

/// Bit `r` of state `k` (1-based index `k + 1`), with `x = 1` first.
fn bits(k: usize, n: usize) -> Vec<bool> {
    (0..n).map(|r| (k >> (n - 1 - r)) & 1 == 0).collect()
}

fn criterion_1() -> Outcome {
    let model = apoptosis();
    // column j: (row, probability), 1-based
    let table: &[(usize, &[(usize, f64)])] = &[
        (4, &[(4, 0.07), (20, 0.63), (36, 0.03), (52, 0.27)]),
        (5, &[(5, 0.07), (23, 0.63), (37, 0.03), (55, 0.27)]),
        (7, &[(8, 0.07), (24, 0.63), (36, 0.03), (52, 0.27)]),
        (11, &[(4, 0.07), (20, 0.63), (36, 0.03), (52, 0.27)]),
        (14, &[(5, 0.07), (21, 0.63), (37, 0.03), (53, 0.27)]),
        (16, &[(8, 0.07), (22, 0.63), (36, 0.03), (50, 0.27)]),
        (22, &[(29, 1.0)]),
        (24, &[(26, 0.27), (28, 0.03), (30, 0.63), (32, 0.07)]),
        (29, &[(29, 0.1), (31, 0.9)]),
        (31, &[(28, 0.3), (32, 0.7)]),
        (48, &[(34, 0.27), (36, 0.03), (38, 0.63), (40, 0.07)]),
    ];
    let mut best = Duration::MAX;
    let mut aug = None;
    for _ in 0..5 {
        let start = Instant::now();
        let built = build_augmented(&model).map_err(|e| e.to_string())?;
        best = best.min(start.elapsed());
        aug = Some(built);
    }
    let aug = aug.unwrap();
    for &(j, entries) in table {
        for row in 1..=64 {
            let want = entries.iter().find(|(r, _)| *r == row).map_or(0.0, |e| e.1);
            let got = aug.q().get(row - 1, j - 1);
            ensure!(
                (got - want).abs() <= PROB_TOL,
                "Q[{row},{j}] = {got}, expected {want}"
            );
        }
    }
    ensure!(best < Q_BUILD_LIMIT, "Q construction took {best:?}");
    Ok(format!("11 columns exact to {PROB_TOL:e}; build {best:?}"))
}

fn criterion_2() -> Outcome {
    let model = apoptosis();
    let part = partition_states(&model);
    let ref_s0 = [1, 10, 19, 28, 37, 46, 55, 64];
    let ref_s2 = [2, 3, 6, 8, 12, 13, 15, 20, 21, 23, 30, 32, 38, 40, 47, 56];
    let ref_s1 = [4, 5, 7, 11, 14, 16, 22, 24, 29, 31, 48];
    ensure!(
        one_based(&part.s0) == ref_s0,
        "S0 = {:?}",
        one_based(&part.s0)
    );
    ensure!(
        one_based(&part.s2) == ref_s2,
        "S2 = {:?}",
        one_based(&part.s2)
    );

    // direct enumeration of equal-output pairs i < j
    let h = model.output();
    let mut oracle = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            if h.index(i) == h.index(j) {
                oracle.push(i * 8 + j + 1);
            }
        }
    }
    let s1 = one_based(&part.s1);
    ensure!(s1 == oracle, "S1 = {s1:?}, enumeration gives {oracle:?}");
    let extra: Vec<usize> = s1.iter().copied().filter(|k| !ref_s1.contains(k)).collect();
    let missing: Vec<usize> = ref_s1.iter().copied().filter(|k| !s1.contains(k)).collect();
    ensure!(
        extra == [39] && missing.is_empty(),
        "extra {extra:?}, missing {missing:?}"
    );
    let (i, j) = PairSpace::new(3).pair(38);
    Ok(format!(
        "S0, S2 exact; S1 = reference + {{39}}\n    diagnostic: 39 = ({},{}) has y = {} for both states, so it belongs to S1; \
         the reference listing omits it",
        i + 1,
        j + 1,
        h.index(i) + 1
    ))
}

fn criterion_3() -> Outcome {
    let report = minimal_targets(&apoptosis()).map_err(|e| e.to_string())?;
    ensure!(!report.observable, "model reported observable");
    ensure!(
        one_based(&report.n1) == [5, 14, 24, 31],
        "N1 = {:?}",
        one_based(&report.n1)
    );
    ensure!(
        one_based(&report.p) == [4, 5, 29],
        "P = {:?}",
        one_based(&report.p)
    );
    ensure!(
        report.n_prime.is_empty(),
        "N' = {:?}",
        one_based(&report.n_prime)
    );
    let cands: Vec<Vec<usize>> = report.candidates.iter().map(one_based).collect();
    ensure!(
        cands == [vec![4, 5, 14, 24, 29, 31]],
        "candidates {cands:?}"
    );
    Ok("N1, P, N' and the single candidate match".into())
}

fn criterion_4() -> Outcome {
    let model = apoptosis();
    let report = minimal_targets(&model).map_err(|e| e.to_string())?;
    let phi = truth_matrix(&report.candidates[0], 3).map_err(|e| e.to_string())?;
    let xi: [[u8; 3]; 5] = [[0, 1, 1], [1, 0, 0], [1, 0, 0], [1, 0, 1], [1, 1, 1]];
    for (c, want) in xi.iter().enumerate() {
        let got: Vec<u8> = phi.bits.column(c).into_iter().map(u8::from).collect();
        ensure!(got == want, "column {} = {got:?}, expected {want:?}", c + 1);
    }
    let covers = min_cover(&phi).map_err(|e| e.to_string())?;
    ensure!(covers == [vec![0, 1], vec![0, 2]], "covers {covers:?}");
    let plan = global_min_sensors(&report, &model).map_err(|e| e.to_string())?;
    ensure!(plan.lambda == 2, "lambda = {}", plan.lambda);
    for cover in &covers {
        let extended = with_measurements(&model, cover).map_err(|e| e.to_string())?;
        ensure!(
            is_observable(&extended)
                .map_err(|e| e.to_string())?
                .observable,
            "extension by {cover:?} is not observable"
        );
    }
    let start = Instant::now();
    let out = Command::new(BIN)
        .args(["analyze", MODEL_PATH, "--sensors", "--quiet"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(
        out.status.success(),
        "analyze --sensors exited with {:?}",
        out.status.code()
    );
    ensure!(
        elapsed < ANALYZE_CLI_LIMIT,
        "analyze --sensors took {elapsed:?}"
    );
    Ok(format!(
        "covers {{x1,x2}}, {{x1,x3}}, lambda 2, both observable; CLI run {elapsed:?}"
    ))
}

/// Pairs outside `target` from which every switching sequence over active
/// subnetworks enters `target`, by unrolling `4^n` steps on the networks.
fn reach_oracle(model: &PbnModel, target: &StateSet) -> StateSet {
    let states = model.state_count();
    let size = states * states;
    let active = model.active_networks();
    let nets = model.networks();
    let mut hit: Vec<bool> = (0..size).map(|z| target.contains(z)).collect();
    for _ in 0..size {
        let prev = hit.clone();
        for (z, h) in hit.iter_mut().enumerate() {
            if !target.contains(z) {
                let (i, j) = (z / states, z % states);
                *h = active
                    .iter()
                    .all(|&v| prev[nets[v].index(i) * states + nets[v].index(j)]);
            }
        }
    }
    StateSet::from_indices(size, (0..size).filter(|&z| hit[z] && !target.contains(z)))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let models = 240;
    let mut with_zero = 0;
    let mut verdicts = 0;
    for k in 0..models {
        let n = rng.random_range(1..=4);
        let q = rng.random_range(1..=2);
        let m = rng.random_range(1..=3);
        let model = random_model(&mut rng, n, q, m, 0.3);
        if model.probs().contains(&0.0) {
            with_zero += 1;
        }
        let aug = build_augmented(&model).map_err(|e| e.to_string())?;
        let part = partition_states(&model);
        let sp = aug.space();
        let target = sp.mirror_close(&part.s2);
        let union = robust_reach(&target, &aug).union;
        ensure!(
            union == reach_oracle(&model, &target),
            "model {k}: union differs from the oracle"
        );
        for z in part.s1.iter() {
            let (i, j) = sp.pair(z);
            let exhaustive = exhaustive_distinguishability(&model, i, j, 1 << (2 * n), u64::MAX)
                .map_err(|e| e.to_string())?;
            ensure!(
                exhaustive == union.contains(z),
                "model {k}: pair {} analytic {} vs exhaustive {exhaustive}",
                z + 1,
                union.contains(z)
            );
            verdicts += 1;
        }
    }
    ensure!(with_zero > 0, "no model had a zero-probability subnetwork");
    Ok(format!(
        "{models} models ({with_zero} with zero-probability subnetworks), {verdicts} S1 verdicts"
    ))
}

fn naive_covers(rows: &[Vec<bool>], cols: usize) -> Option<Vec<Vec<usize>>> {
    let r = rows.len();
    let mut best: Option<usize> = None;
    let mut found = Vec::new();
    for mask in 1u32..1 << r {
        let pick: Vec<usize> = (0..r).filter(|i| mask >> i & 1 == 1).collect();
        if (0..cols).all(|c| pick.iter().any(|&i| rows[i][c])) {
            match best {
                Some(b) if pick.len() > b => {}
                Some(b) if pick.len() == b => found.push(pick),
                _ => {
                    best = Some(pick.len());
                    found = vec![pick];
                }
            }
        }
    }
    found.sort();
    best.map(|_| found)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cases = 600;
    let mut infeasible = 0;
    for k in 0..cases {
        let r = rng.random_range(1..=12);
        let c = rng.random_range(1..=20);
        let density = rng.random_range(0.05..0.6);
        let rows: Vec<Vec<bool>> = (0..r)
            .map(|_| (0..c).map(|_| rng.random_bool(density)).collect())
            .collect();
        let phi = TruthMatrix::from_bits(BooleanMatrix::from_fn(r, c, |i, j| rows[i][j]));
        match (min_cover(&phi), naive_covers(&rows, c)) {
            (Ok(got), Some(want)) => ensure!(got == want, "case {k}: {got:?} vs {want:?}"),
            (Err(_), None) => infeasible += 1,
            (got, want) => return Err(format!("case {k}: {got:?} vs {want:?}")),
        }
    }
    Ok(format!(
        "{cases} matrices up to 12x20 ({infeasible} infeasible) match full enumeration"
    ))
}

fn random_real(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RealMatrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| f64::from(rng.random_range(-3i32..=3)))
        .collect();
    RealMatrix::from_rows(rows, cols, &data).unwrap()
}

fn random_expr(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> BoolExpr {
    if depth == 0 || rng.random_bool(0.3) {
        return if rng.random_bool(0.9) {
            BoolExpr::Var(rng.random_range(0..n))
        } else {
            BoolExpr::Const(rng.random_bool(0.5))
        };
    }
    let a = Box::new(random_expr(rng, n, depth - 1));
    match rng.random_range(0..6) {
        0 => BoolExpr::Not(a),
        op => {
            let b = Box::new(random_expr(rng, n, depth - 1));
            match op {
                1 => BoolExpr::And(a, b),
                2 => BoolExpr::Or(a, b),
                3 => BoolExpr::Xor(a, b),
                4 => BoolExpr::Implies(a, b),
                _ => BoolExpr::Iff(a, b),
            }
        }
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let instances = 1000;
    for k in 0..instances {
        let dims: Vec<usize> = (0..6).map(|_| rng.random_range(1..=8)).collect();
        let a = random_real(&mut rng, dims[0], dims[1]);
        let b = random_real(&mut rng, dims[2], dims[3]);
        let c = random_real(&mut rng, dims[4], dims[5]);
        let left = stp_multiply(&stp_multiply(&a, &b).unwrap(), &c).map_err(|e| e.to_string())?;
        let right = stp_multiply(&a, &stp_multiply(&b, &c).unwrap()).map_err(|e| e.to_string())?;
        ensure!(
            left.max_abs_diff(&right) == Some(0.0),
            "instance {k}: not associative for dims {dims:?}"
        );
    }
    for k in 0..instances {
        let (r, inner, c) = (
            rng.random_range(1..=8),
            rng.random_range(1..=8),
            rng.random_range(1..=8),
        );
        let a = random_real(&mut rng, r, inner);
        let b = random_real(&mut rng, inner, c);
        let s = stp_multiply(&a, &b).map_err(|e| e.to_string())?;
        let m = a
            .matmul(&b, &Limits::default())
            .map_err(|e| e.to_string())?;
        ensure!(
            s.max_abs_diff(&m) == Some(0.0),
            "instance {k}: conforming product differs"
        );
    }
    // the Khatri-Rao product of two logical columns is their Kronecker product
    let e = khatri_rao(&RealMatrix::identity(2), &RealMatrix::identity(2))
        .map_err(|e| e.to_string())?;
    ensure!(
        e.get(0, 0) == 1.0 && e.get(3, 1) == 1.0,
        "khatri_rao(I2, I2) is wrong"
    );
    let rules = 500;
    for k in 0..rules {
        let n = rng.random_range(1..=5);
        let f = random_expr(&mut rng, n, 4);
        let m = structure_matrix(&f, n).map_err(|e| e.to_string())?;
        for s in 0..1usize << n {
            let want = if f.eval(&bits(s, n)) { 0 } else { 1 };
            ensure!(
                m.index(s) == want,
                "rule {k} ({f}) disagrees at state {}",
                s + 1
            );
        }
    }
    Ok(format!(
        "{instances} associativity and {instances} conforming instances, {rules} rules"
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut models = 0;
    let mut candidates = 0;
    let mut refused = 0;
    let mut attempts = 0;
    while models < 200 {
        attempts += 1;
        ensure!(attempts < 20_000, "too few unobservable models");
        let n = rng.random_range(2..=4);
        let m = rng.random_range(1..=3);
        let model = random_model(&mut rng, n, 1, m, 0.2);
        let report = match minimal_targets(&model) {
            Ok(r) => r,
            Err(pbn_minobs::Error::Resource(_)) => {
                refused += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        if report.observable {
            continue;
        }
        models += 1;
        let aug = build_augmented(&model).map_err(|e| e.to_string())?;
        let part = partition_states(&model);
        let sp = aug.space();
        for cand in &report.candidates {
            let target = sp.mirror_close(&cand.union(&part.s2));
            let covered = robust_reach(&target, &aug).union.union(&target);
            ensure!(
                part.s1.is_subset(&covered),
                "model {models}: a candidate leaves S1 uncovered"
            );
            candidates += 1;
        }
    }
    Ok(format!(
        "{candidates} candidates on {models} unobservable models ({refused} refused by caps)"
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let model = random_model(&mut rng, 6, 1, 4, 0.0);
    let start = Instant::now();
    let report = minimal_targets(&model);
    let outcome = report.and_then(|r| {
        if r.observable {
            Ok((r, None))
        } else {
            global_min_sensors(&r, &model).map(|p| (r, Some(p)))
        }
    });
    let elapsed = start.elapsed();
    match outcome {
        Ok((r, plan)) => {
            ensure!(elapsed < SCALE_LIMIT, "pipeline took {elapsed:?}");
            Ok(format!(
                "n=6 m=4: {} candidates, lambda {:?}, {elapsed:?}",
                r.candidates.len(),
                plan.map(|p| p.lambda)
            ))
        }
        Err(e) => Err(format!("n=6 m=4 pipeline stopped after {elapsed:?}: {e}")),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("transition matrix columns", criterion_1),
        ("output partition", criterion_2),
        ("pipeline sets", criterion_3),
        ("sensor selection", criterion_4),
        ("reachability oracle", criterion_5),
        ("cover optimality", criterion_6),
        ("matrix kernel properties", criterion_7),
        ("closed-loop sufficiency", criterion_8),
        ("scale n=6 m=4", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", k + 1);
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
