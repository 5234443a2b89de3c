//! Command-line front end. All semantics live in the library; this file only
//! parses arguments, wires files to library calls, and maps failures onto
//! exit codes:
//!
//! - `2` — bad input (scenario, trace, formula, or flag)
//! - `3` — inputs parse but the question is not answerable as posed
//! - `4` — a resource cap cut the answer short (`FLPE_CAP` overrides caps)

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flpe::logic::{Engine, Entailment, Formula, LogicError, LogicId};
use flpe::measure::{
    check_emergence, detect_transition, encode_outcome, sweep, EmergenceInputs, MeasureError,
    SweptFeature, Transform,
};
use flpe::report::{
    render_emergence, render_exploration, render_sweep, triviality_verdict, Format,
};
use flpe::scenario::Scenario;
use flpe::scheduler::{explore, run, SchedulerError};
use flpe::trace::{parse_trace, render_trace, TraceMeta};

const EXIT_INPUT: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser)]
#[command(name = "flpe", version, about = "Crash-fault consensus lab: run, explore, measure, and read outcomes through paraconsistent logics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Bounds {
    /// Override the scenario's depth bound.
    #[arg(long)]
    depth: Option<usize>,
    /// Override the scenario's state cap (env FLPE_CAP beats this flag).
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded execution and emit a replayable trace.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate every schedule within the bounds and list the terminals.
    Explore {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the crash budget from 0 up and report profiles per value.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a transform (add-oracle, pad:K) and ask whether the baseline
    /// failure is suppressed or re-emerges.
    Emergence {
        #[arg(long)]
        scenario: PathBuf,
        /// `add-oracle` or `pad:K` for K dummy messages.
        #[arg(long)]
        transform: String,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide one entailment, or judge a premise set's triviality.
    Logic {
        /// cpl, c1..c8, or mbc.
        #[arg(long)]
        logic: String,
        /// Premises, comma separated: "A, ~A, oA".
        #[arg(long)]
        gamma: String,
        /// Goal formula; without it the premise set is judged for triviality.
        #[arg(long)]
        goal: Option<String>,
        /// Negation-closure rounds for the valuation fragment.
        #[arg(long, default_value_t = 1)]
        closure: usize,
        /// Closure size cap (env FLPE_CAP beats this flag).
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Replay a trace, encode its outcome as assertions, and judge them
    /// under each requested logic.
    Bridge {
        #[arg(long)]
        trace: PathBuf,
        /// May repeat; defaults to cpl and mbc.
        #[arg(long = "logic")]
        logics: Vec<String>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Input(String),
    Precondition(String),
    Resource(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Precondition(m) | CliError::Resource(m) => m,
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> CliError {
        match e {
            MeasureError::Model(_) | MeasureError::Protocol(_) => CliError::Input(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<LogicError> for CliError {
    fn from(e: LogicError) -> CliError {
        match e {
            LogicError::ClosureCap(_) => CliError::Resource(e.to_string()),
            LogicError::UnknownLogic(_) => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flpe: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario, seed, out } => cmd_run(&scenario, seed, out.as_deref()),
        Command::Explore { scenario, bounds, format, out } => {
            cmd_explore(&scenario, &bounds, format, out.as_deref())
        }
        Command::Sweep { scenario, bounds, format, out } => {
            cmd_sweep(&scenario, &bounds, format, out.as_deref())
        }
        Command::Emergence { scenario, transform, bounds, format, out } => {
            cmd_emergence(&scenario, &transform, &bounds, format, out.as_deref())
        }
        Command::Logic { logic, gamma, goal, closure, cap } => {
            cmd_logic(&logic, &gamma, goal.as_deref(), closure, cap)
        }
        Command::Bridge { trace, logics, cap, out } => {
            cmd_bridge(&trace, &logics, cap, out.as_deref())
        }
    }
}

// ------------------------------------------------------------------ plumbing

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    Scenario::parse(&read_file(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
    }
}

/// Effective cap: `FLPE_CAP` env, then the `--cap` flag, then the fallback.
fn effective_cap(flag: Option<usize>, fallback: usize) -> Result<usize, CliError> {
    match std::env::var("FLPE_CAP") {
        Err(_) => Ok(flag.unwrap_or(fallback)),
        Ok(raw) => raw
            .parse()
            .map_err(|_| CliError::Input(format!("FLPE_CAP is not a number: `{raw}`"))),
    }
}

fn parse_formula(s: &str) -> Result<Formula, CliError> {
    s.trim().parse().map_err(|e| CliError::Input(format!("`{}`: {e}", s.trim())))
}

fn parse_gamma(s: &str) -> Result<Vec<Formula>, CliError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_formula).collect()
}

// ------------------------------------------------------------------ commands

fn cmd_run(path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<(), CliError> {
    let scenario = load_scenario(path)?;
    let topology = scenario.topology().map_err(|e| CliError::Input(e.to_string()))?;
    let initial = flpe::model::initial_configuration(&topology, &scenario.values)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let protocol = scenario.protocol().map_err(|e| CliError::Input(e.to_string()))?;
    let policy = scenario.policy();
    let mut adversary = scenario.adversary().ok_or_else(|| {
        CliError::Precondition("the exhaustive adversary drives `explore`, not `run`".into())
    })?;
    if let Some(seed) = seed {
        adversary.seed = seed;
    }

    let execution =
        run(&topology, initial, protocol.as_ref(), &policy, &adversary, scenario.step_bound)
            .map_err(|e| match e {
                SchedulerError::ExhaustiveNotRunnable => CliError::Precondition(e.to_string()),
                _ => CliError::Input(e.to_string()),
            })?;
    let meta = TraceMeta {
        scenario: scenario.name.clone(),
        seed: adversary.seed,
        step_bound: scenario.step_bound,
        depth_bound: scenario.depth_bound,
        crash_budget: scenario.crash_budget,
        processes: scenario.processes,
        values: scenario.values.clone(),
        protocol: scenario.protocol.clone(),
        known_faulty: scenario.known_faulty.clone(),
        oracle_depth: scenario.oracle_depth,
        quorum: scenario.timeout_quorum,
    };
    let truncated = execution.truncated;
    emit(out, &render_trace(&meta, &execution))?;
    if truncated {
        return Err(CliError::Resource(format!(
            "run stopped at the step bound ({}) before quiescence",
            scenario.step_bound
        )));
    }
    Ok(())
}

fn cmd_explore(
    path: &Path,
    bounds: &Bounds,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let scenario = load_scenario(path)?;
    let topology = scenario.topology().map_err(|e| CliError::Input(e.to_string()))?;
    let initial = flpe::model::initial_configuration(&topology, &scenario.values)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let protocol = scenario.protocol().map_err(|e| CliError::Input(e.to_string()))?;
    let policy = scenario.policy();
    let depth = bounds.depth.unwrap_or(scenario.depth_bound);
    let cap = effective_cap(bounds.cap, scenario.state_cap)?;

    let exploration = explore(&topology, &initial, protocol.as_ref(), &policy, depth, cap);
    let partial = exploration.partial;
    emit(out, &render_exploration(&exploration, &topology, format))?;
    if partial {
        return Err(CliError::Resource(format!("state cap {cap} reached; counts are lower bounds")));
    }
    Ok(())
}

fn cmd_sweep(
    path: &Path,
    bounds: &Bounds,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let scenario = load_scenario(path)?;
    let topology = scenario.topology().map_err(|e| CliError::Input(e.to_string()))?;
    let protocol = scenario.protocol().map_err(|e| CliError::Input(e.to_string()))?;
    let depth = bounds.depth.unwrap_or(scenario.depth_bound);
    let cap = effective_cap(bounds.cap, scenario.state_cap)?;

    let swept = sweep(
        &topology,
        &scenario.values,
        protocol.as_ref(),
        SweptFeature::FaultCount,
        scenario.crash_budget,
        depth,
        cap,
    )?;
    let transition = detect_transition(&swept);
    let partial = swept.partial();
    emit(out, &render_sweep(&swept, transition.as_ref(), format))?;
    if partial {
        return Err(CliError::Resource(format!("state cap {cap} reached; counts are lower bounds")));
    }
    Ok(())
}

fn cmd_emergence(
    path: &Path,
    transform: &str,
    bounds: &Bounds,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let scenario = load_scenario(path)?;
    let transform = match transform {
        "add-oracle" => Transform::AddOracle,
        other => match other.strip_prefix("pad:").and_then(|k| k.parse::<u32>().ok()) {
            Some(k) if k > 0 => Transform::Pad(k),
            _ => {
                return Err(CliError::Input(format!(
                    "unknown transform `{other}` (expected add-oracle or pad:K)"
                )))
            }
        },
    };
    let topology = scenario.topology().map_err(|e| CliError::Input(e.to_string()))?;
    let depth = bounds.depth.unwrap_or(scenario.depth_bound);
    let cap = effective_cap(bounds.cap, scenario.state_cap)?;
    let inputs = EmergenceInputs {
        topology: &topology,
        values: &scenario.values,
        protocol_key: &scenario.protocol,
        quorum: scenario.timeout_quorum,
        known_faulty: &scenario.known_faulty,
        budget: scenario.crash_budget,
        depth_bound: depth,
        state_cap: cap,
    };
    let report = check_emergence(&inputs, transform)?;
    emit(out, &render_emergence(&report, format))
}

fn cmd_logic(
    logic: &str,
    gamma: &str,
    goal: Option<&str>,
    closure: usize,
    cap: Option<usize>,
) -> Result<(), CliError> {
    let id = LogicId::parse(logic).map_err(|e| CliError::Input(e.to_string()))?;
    let gamma = parse_gamma(gamma)?;
    let cap = effective_cap(cap, flpe::logic::DEFAULT_CLOSURE_CAP)?;
    let engine = Engine::new(id).with_closure_rounds(closure).with_closure_cap(cap);

    match goal {
        Some(goal) => {
            let goal = parse_formula(goal)?;
            match engine.entails(&gamma, &goal)? {
                Entailment::Entails => println!("ENTAILS"),
                Entailment::Counterexample(v) => println!("COUNTEREXAMPLE {v}"),
            }
        }
        None => {
            let check = engine.explosion_check(&gamma)?;
            println!("{}: {}", id.key(), triviality_verdict(check.inconsistent, check.trivial));
        }
    }
    Ok(())
}

fn cmd_bridge(
    path: &Path,
    logics: &[String],
    cap: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let trace = parse_trace(&read_file(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let execution =
        trace.replay().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let (topology, ..) =
        trace.reconstruct().map_err(|e| CliError::Input(e.to_string()))?;

    let gamma = encode_outcome(execution.final_config(), &topology, &trace.meta.values);
    let rendered: Vec<String> = gamma.iter().map(|f| f.to_string()).collect();
    let mut lines = format!("outcome: {}\n", rendered.join(", "));

    let keys: Vec<String> = if logics.is_empty() {
        vec!["cpl".into(), "mbc".into()]
    } else {
        logics.to_vec()
    };
    let mut seen = BTreeSet::new();
    let cap = effective_cap(cap, flpe::logic::DEFAULT_CLOSURE_CAP)?;
    for key in keys {
        if !seen.insert(key.clone()) {
            continue;
        }
        let id = LogicId::parse(&key).map_err(|e| CliError::Input(e.to_string()))?;
        let engine = Engine::new(id).with_closure_cap(cap);
        let check = engine.explosion_check(&gamma)?;
        let label = if id == LogicId::Cpl { "CPL".to_string() } else { id.key() };
        lines.push_str(&format!(
            "{label}: {}\n",
            triviality_verdict(check.inconsistent, check.trivial)
        ));
    }
    emit(out, &lines)
}
