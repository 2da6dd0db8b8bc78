use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pbn_minobs::analysis::{analyze, DEFAULT_MAX_CANDIDATES, DEFAULT_MAX_SUBSET};
use pbn_minobs::augmented::build_augmented_with;
use pbn_minobs::partition::partition_states;
use pbn_minobs::report::{ConfigEcho, PairRef, Timing};
use pbn_minobs::simulate::{exhaustive_distinguishability, DEFAULT_EXHAUSTIVE_BUDGET};
use pbn_minobs::stp::DEFAULT_MAX_ENTRIES;
use pbn_minobs::{
    global_min_sensors, parse_model, robust_reach, s1_graph_dot, AnalysisConfig, Error, Limits,
    PairSpace, PbnModel, Report, Result, StateSet,
};

/// Environment variable overriding the matrix dimension cap.
const MAX_DIM_VAR: &str = "PBN_MINOBS_MAX_DIM";

#[derive(Parser)]
#[command(
    name = "pbn-minobs",
    version,
    about = "Observability analysis and minimum sensor placement for probabilistic Boolean networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model file.
    Validate { path: PathBuf },
    /// Run the full analysis and emit a JSON report.
    Analyze(AnalyzeArgs),
    /// Probability-one reachable set of a target.
    Reach {
        path: PathBuf,
        /// `S0`, `S1`, `S2` (both orientations of each pair) or a
        /// comma-separated list of 1-based pair indices, taken as given.
        #[arg(long)]
        target: String,
    },
    /// Monte Carlo estimate of output distinguishability for a state pair.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    path: PathBuf,
    /// Also compute minimum measurement sets.
    #[arg(long)]
    sensors: bool,
    /// Write the S1 state-transfer graph in DOT syntax.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Suppress the text summary.
    #[arg(long)]
    quiet: bool,
    #[arg(long, value_name = "CAP", default_value_t = DEFAULT_MAX_SUBSET)]
    max_subset: usize,
    #[arg(long, value_name = "CAP", default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: u64,
}

#[derive(Args)]
struct SimulateArgs {
    path: PathBuf,
    /// 1-based states, e.g. `1,4`.
    #[arg(long, value_name = "I,J")]
    pair: String,
    /// Horizon.
    #[arg(long = "T", value_name = "STEPS", default_value_t = 20)]
    horizon: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let limits = limits_from_env()?;
    match cli.command {
        Command::Validate { path } => {
            let model = load(&path)?;
            println!("ok: n={} q={} m={}", model.n(), model.q(), model.m());
            Ok(())
        }
        Command::Analyze(args) => cmd_analyze(args, limits),
        Command::Reach { path, target } => cmd_reach(&path, &target, limits),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn limits_from_env() -> Result<Limits> {
    match std::env::var(MAX_DIM_VAR) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&x| x > 0)
            .map(|max_entries| Limits { max_entries })
            .ok_or_else(|| {
                Error::Argument(format!(
                    "{MAX_DIM_VAR} must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(Limits {
            max_entries: DEFAULT_MAX_ENTRIES,
        }),
    }
}

fn load(path: &Path) -> Result<PbnModel> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Argument(format!("cannot write {}: {e}", path.display())))
}

fn cmd_analyze(args: AnalyzeArgs, limits: Limits) -> Result<()> {
    let model = load(&args.path)?;
    let config = AnalysisConfig {
        max_subset: args.max_subset,
        max_candidates: args.max_candidates,
        limits,
    };
    let start = Instant::now();
    let aug = build_augmented_with(&model, &limits)?;
    let partition = partition_states(&model);
    if let Some(dot) = &args.dot {
        write_file(dot, &s1_graph_dot(&aug, &partition))?;
    }
    let analysis = analyze(&aug, partition, &config)?;
    let analysis_ms = start.elapsed().as_secs_f64() * 1e3;

    let (plan, sensors_ms) = if args.sensors && !analysis.observable {
        let start = Instant::now();
        let plan = global_min_sensors(&analysis, &model)?;
        (Some(plan), Some(start.elapsed().as_secs_f64() * 1e3))
    } else {
        (None, None)
    };
    let report = Report::build(
        &model,
        &analysis,
        plan.as_ref(),
        ConfigEcho {
            sensors: args.sensors,
            max_subset: config.max_subset,
            max_candidates: config.max_candidates,
            max_entries: limits.max_entries,
        },
        Timing {
            analysis_ms,
            sensors_ms,
        },
    );
    let json = serde_json::to_string_pretty(&report).expect("reports always serialize");
    match &args.out {
        Some(out) => write_file(out, &(json + "\n"))?,
        None => println!("{json}"),
    }
    if !args.quiet {
        eprint!("{}", report.summary());
    }
    Ok(())
}

fn parse_index_list(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| {
                Error::Argument(format!("expected a 1-based index, got {:?}", t.trim()))
            })
        })
        .collect()
}

fn target_set(spec: &str, model: &PbnModel) -> Result<StateSet> {
    let sp = PairSpace::for_model(model);
    let partition = partition_states(model);
    match spec.trim().to_ascii_uppercase().as_str() {
        "S0" => return Ok(sp.mirror_close(&partition.s0)),
        "S1" => return Ok(sp.mirror_close(&partition.s1)),
        "S2" => return Ok(sp.mirror_close(&partition.s2)),
        _ => {}
    }
    if !spec.trim().starts_with(|c: char| c.is_ascii_digit()) {
        return Err(Error::Argument(format!(
            "unknown target {spec:?}; use S0, S1, S2 or a list of 1-based pair indices"
        )));
    }
    let mut set = StateSet::empty(sp.size());
    for k in parse_index_list(spec)? {
        if k == 0 || k > sp.size() {
            return Err(Error::OutOfRange {
                index: k,
                max: sp.size(),
            });
        }
        set.insert(k - 1);
    }
    Ok(set)
}

fn format_states(sp: &PairSpace, s: &StateSet) -> String {
    let items: Vec<String> = s
        .iter()
        .map(|z| {
            let p = PairRef::new(sp, z);
            format!("{} ({},{})", p.index, p.pair.0, p.pair.1)
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

fn cmd_reach(path: &Path, spec: &str, limits: Limits) -> Result<()> {
    let model = load(path)?;
    let target = target_set(spec, &model)?;
    let aug = build_augmented_with(&model, &limits)?;
    let sp = aug.space();
    let result = robust_reach(&target, &aug);
    println!("target: {} states", target.len());
    println!("layers: {}", result.steps());
    for (t, layer) in result.layers.iter().enumerate() {
        println!("R{}: {}", t + 1, format_states(&sp, layer));
    }
    println!("union: {}", format_states(&sp, &result.union));
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let model = load(&args.path)?;
    let states = parse_index_list(&args.pair)?;
    let [i, j] = states[..] else {
        return Err(Error::Argument(format!(
            "expected a pair i,j, got {:?}",
            args.pair
        )));
    };
    for k in [i, j] {
        if k == 0 || k > model.state_count() {
            return Err(Error::OutOfRange {
                index: k,
                max: model.state_count(),
            });
        }
    }
    let (x0, x1) = (i - 1, j - 1);
    let estimate = pbn_minobs::estimate_distinguishability(
        &model,
        x0,
        x1,
        args.horizon,
        args.trials,
        args.seed,
    )?;
    println!(
        "pair ({i},{j}) T={} trials={} seed={}: estimate {estimate}",
        args.horizon, args.trials, args.seed
    );
    match exhaustive_distinguishability(&model, x0, x1, args.horizon, DEFAULT_EXHAUSTIVE_BUDGET) {
        Ok(v) => println!("distinguishable under every switching sequence within T: {v}"),
        Err(Error::Resource(msg)) => println!("exhaustive check skipped: {msg}"),
        Err(e) => return Err(e),
    }
    Ok(())
}
