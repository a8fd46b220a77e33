use clap::{Args, Parser, Subcommand, ValueEnum};
use drrt_bench::{aggregate, read_plan, run_algorithm, run_suite, run_suite_with_threads, write_plan, write_records, write_summary, Algorithm, ExperimentSpec};
use drrt_core::roadmap::{
    build_grid, generate_carp_hard, random_assignment, random_spanning_tree, read_assignment, read_map, write_assignment,
    write_map, MapSetDescriptor,
};
use drrt_core::validate::validate_plan;
use drrt_core::{Assignment, Roadmap};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "drrt", version, about = "Multi-agent path planning on roadmaps: generators, planners and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a roadmap (and, for carp-hard, its assignment).
    GenMap(GenMapArgs),
    /// Draw a random assignment on a map.
    GenTasks(GenTasksArgs),
    /// Solve one instance and emit the plan CSV and a metrics line.
    Plan(PlanArgs),
    /// Run an experiment config and emit records and summary CSVs.
    Bench(BenchArgs),
    /// Check a plan CSV against a map and assignment.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    Grid,
    SpanningTree,
    Densify,
    CarpHard,
}

#[derive(Args)]
struct GenMapArgs {
    kind: MapKind,
    #[arg(long, default_value_t = 20)]
    w: usize,
    #[arg(long, default_value_t = 20)]
    h: usize,
    /// Densification steps (densify).
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Map of the densified series to write, 0 being the spanning tree.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Agent count (carp-hard).
    #[arg(long, default_value_t = 10)]
    agents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Map file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Assignment file for carp-hard; required for that kind.
    #[arg(long)]
    tasks_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenTasksArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    agents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoKind {
    Drrt,
    Carp,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    tasks: PathBuf,
    #[arg(long, value_enum, default_value = "drrt")]
    algo: AlgoKind,
    /// Ordering attempts (carp) or connector attempts (drrt).
    #[arg(long)]
    attempts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4.0)]
    delta: f64,
    #[arg(long, default_value_t = 5)]
    nn: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Seconds; 0 disables the limit.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Planning horizon (carp) or connector horizon (drrt) in timesteps.
    #[arg(long)]
    horizon: Option<u32>,
    /// Plan CSV; stdout when omitted (the metrics line then goes to stderr).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    /// Records CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    tasks: PathBuf,
    #[arg(long)]
    plan: PathBuf,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Planning(String),
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenMap(a) => gen_map(a),
        Command::GenTasks(a) => gen_tasks(a),
        Command::Plan(a) => plan(a),
        Command::Bench(a) => bench(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Planning(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => Ok(io::stdout().write_all(bytes)?),
    }
}

fn load_instance(map: &Path, tasks: &Path) -> Result<(Roadmap, Assignment), Failure> {
    let g: Roadmap = read_map(&read_text(map)?)?;
    let a = read_assignment(&read_text(tasks)?)?;
    a.validate(&g)?;
    Ok((g, a))
}

fn gen_map(args: GenMapArgs) -> Result<(), Failure> {
    let g = match args.kind {
        MapKind::Grid => build_grid::<f64>(args.w, args.h, 1.0)?,
        MapKind::SpanningTree => random_spanning_tree(&build_grid::<f64>(args.w, args.h, 1.0)?, args.seed)?,
        MapKind::Densify => {
            let maps = MapSetDescriptor {
                width: args.w,
                height: args.h,
                density_steps: args.steps,
                seed: args.seed,
            }
            .build::<f64>()?;
            maps.into_iter()
                .nth(args.index)
                .ok_or_else(|| Failure::Input(format!("--index must be at most {}", args.steps)))?
        }
        MapKind::CarpHard => {
            let tasks_out = args
                .tasks_out
                .as_deref()
                .ok_or_else(|| Failure::Input("carp-hard needs --tasks-out".into()))?;
            let (g, a) = generate_carp_hard::<f64>(args.agents, args.seed)?;
            emit(Some(tasks_out), write_assignment(&a).as_bytes())?;
            g
        }
    };
    emit(args.out.as_deref(), write_map(&g).as_bytes())
}

fn gen_tasks(args: GenTasksArgs) -> Result<(), Failure> {
    let g: Roadmap = read_map(&read_text(&args.map)?)?;
    let a = random_assignment(&g, args.agents, args.seed)?;
    emit(args.out.as_deref(), write_assignment(&a).as_bytes())
}

fn plan(args: PlanArgs) -> Result<(), Failure> {
    let (g, a) = load_instance(&args.map, &args.tasks)?;
    if !(args.time_limit >= 0.0 && args.time_limit.is_finite()) {
        return Err(Failure::Input("--time-limit must be a non-negative number".into()));
    }
    let algorithm = match args.algo {
        AlgoKind::Drrt => Algorithm::Drrt,
        AlgoKind::Carp => Algorithm::Carp {
            attempts: args.attempts.unwrap_or(1),
        },
    };
    let spec = ExperimentSpec {
        delta: args.delta,
        nn_count: args.nn,
        max_iters: args.max_iters,
        time_limit: (args.time_limit > 0.0).then(|| Duration::from_secs_f64(args.time_limit)),
        connector_attempts: match args.algo {
            AlgoKind::Drrt => args.attempts.unwrap_or(drrt_core::carp::CONNECTOR_ATTEMPTS),
            AlgoKind::Carp => drrt_core::carp::CONNECTOR_ATTEMPTS,
        },
        horizon: args.horizon,
        ..ExperimentSpec::densified_grid()
    };
    if spec.nn_count == 0 || spec.max_iters == 0 || spec.connector_attempts == 0 || args.attempts == Some(0) {
        return Err(Failure::Input("--nn, --max-iters and --attempts must be positive".into()));
    }
    if !(spec.delta >= 0.0 && spec.delta.is_finite()) {
        return Err(Failure::Input("--delta must be finite and non-negative".into()));
    }
    let outcome = run_algorithm(algorithm, &g, &a, &spec, args.seed);
    let steps = outcome.plan.as_ref().map(|p| p.len() - 1);
    let metrics = format!(
        "algo={algorithm} success={} steps={} iterations={} time_s={:.6}",
        steps.is_some(),
        steps.map_or("-".to_string(), |s| s.to_string()),
        outcome.iterations,
        outcome.time_s
    );
    let Some(path) = outcome.plan else {
        println!("{metrics}");
        return Err(Failure::Planning(format!(
            "planning failed: {}",
            outcome.reason.unwrap_or_default()
        )));
    };
    let mut csv = Vec::new();
    write_plan(&path, &mut csv)?;
    emit(args.out.as_deref(), &csv)?;
    if args.out.is_some() {
        println!("{metrics}");
    } else {
        eprintln!("{metrics}");
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut spec = ExperimentSpec::parse(&read_text(&args.config)?)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let records = match args.threads {
        Some(n) if n > 0 => run_suite_with_threads(&spec, n)?,
        Some(_) => return Err(Failure::Input("--threads must be positive".into())),
        None => run_suite(&spec)?,
    };
    let mut csv = Vec::new();
    write_records(&records, &mut csv)?;
    emit(args.out.as_deref(), &csv)?;
    let mut summary = Vec::new();
    write_summary(&aggregate(&records), &mut summary)?;
    match args.summary.as_deref() {
        Some(p) => emit(Some(p), &summary)?,
        None => io::stderr().write_all(&summary)?,
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let (g, a) = load_instance(&args.map, &args.tasks)?;
    let plan = read_plan(fs::File::open(&args.plan).map_err(|e| Failure::Input(format!("{}: {e}", args.plan.display())))?)?;
    match validate_plan(&plan, &g, &a) {
        Ok(()) => {
            println!("ok");
            Ok(())
        }
        Err(v) => {
            println!("violation: {v}");
            Err(Failure::Planning(format!("plan rejected: {v}")))
        }
    }
}
