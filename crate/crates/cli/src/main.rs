//! `camnet`: run, compare and benchmark camera controllers on scenario files.
//!
//! Exit codes: 0 on success, 2 on configuration errors (bad flags, unreadable
//! or invalid scenario), 3 on runtime errors.

mod lists;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use camnet::metrics::{self, BenchTarget};
use camnet::sim::BeliefSnapshot;
use camnet::{ControllerKind, Execution, RunConfig, RunRecord, Scenario, SpawnMode, World};

use output::{AggregateDoc, BenchDoc, CompareDoc, CompareRow, RunSummaryDoc, SeedScore, VERSION};

const OUT_ENV: &str = "CAMNET_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "camnet", version = VERSION, about = "Active camera coordination on a grid world")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one controller for one or more seeds.
    Run(RunArgs),
    /// Run all five controllers on seed-matched trajectories.
    Compare(CompareArgs),
    /// Time the planner across target counts and fit a line.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "out")]
    out: PathBuf,

    /// Number of seeds run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Single-threaded execution and no wall-clock fields in outputs, so
    /// repeated invocations produce byte-identical files.
    #[arg(long)]
    reproducible: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,

    /// Controller name; overrides the scenario file.
    #[arg(long)]
    controller: Option<String>,

    /// Number of uniformly spawned targets; overrides the scenario file.
    #[arg(long)]
    targets: Option<usize>,

    /// Horizon τ; overrides the scenario file.
    #[arg(long)]
    steps: Option<usize>,

    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,

    /// Seed list, e.g. `1..20` or `3,5,8`.
    #[arg(long)]
    seeds: Option<String>,

    /// Write the top-K belief states per target and step (default K = 5).
    #[arg(long, num_args = 0..=1, default_missing_value = "5", value_name = "K")]
    emit_beliefs: Option<usize>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    scenario: PathBuf,

    /// Target counts, e.g. `5,10,20`.
    #[arg(long)]
    targets: String,

    /// Seed list, e.g. `1..20`.
    #[arg(long)]
    seeds: String,

    #[arg(long)]
    steps: Option<usize>,

    /// Also write every per-run table under `runs/`.
    #[arg(long)]
    emit_runs: bool,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    scenario: PathBuf,

    #[arg(long, default_value = "5,10,20,40")]
    m_values: String,

    /// Timed repeats per m; the first is discarded.
    #[arg(long, default_value_t = 11)]
    repeats: usize,

    /// Time the planner with no targets as a constant-cost control.
    #[arg(long)]
    stub: bool,

    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<camnet::Error> for Failure {
    fn from(e: camnet::Error) -> Self {
        match e {
            camnet::Error::Config(_) | camnet::Error::Parse(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("writing {}: {e}", path.display()))
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(msg) | Failure::Runtime(msg) => eprintln!("camnet: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

struct Loaded {
    scenario: Scenario,
    label: String,
    hash: String,
    world: Arc<World>,
}

fn load(path: &Path) -> CliResult<Loaded> {
    let scenario = Scenario::load(path).map_err(|e| match e {
        camnet::Error::Io(io) => Failure::Config(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    })?;
    let hash = scenario.content_hash()?;
    let world = Arc::new(scenario.world()?);
    let label = scenario
        .name
        .clone()
        .unwrap_or_else(|| path.display().to_string());
    Ok(Loaded {
        scenario,
        label,
        hash,
        world,
    })
}

fn check_jobs(jobs: usize) -> CliResult<()> {
    if jobs == 0 {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    Ok(())
}

/// Maps `f` over `0..n` on `jobs` threads, preserving order.
fn run_jobs<T, F>(jobs: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(|| (0..n).into_par_iter().map(f).collect());
        }
    }
    let _ = jobs;
    (0..n).map(f).collect()
}

struct Job {
    kind: ControllerKind,
    seed: u64,
    spawn: SpawnMode,
}

struct Finished {
    record: RunRecord,
    elapsed: f64,
}

fn execute(loaded: &Loaded, job: &Job, tau: usize, top_k: Option<usize>, exec: Execution) -> CliResult<Finished> {
    let start = Instant::now();
    let m = job.spawn.num_targets();
    let mut controller = loaded
        .scenario
        .build_controller(job.kind, loaded.world.clone(), m, exec)?;
    let config = RunConfig {
        tau,
        seed: job.seed,
        spawn: job.spawn.clone(),
        belief_top_k: top_k,
    };
    let record = camnet::run(&loaded.world, controller.as_mut(), &config)
        .map_err(|e| Failure::Runtime(format!("{} seed {}: {e}", job.kind, job.seed)))?;
    info!("{} m={m} seed={} done", job.kind, job.seed);
    Ok(Finished {
        record,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

fn table_bytes(record: &RunRecord) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    record
        .write_table(&mut buf)
        .map_err(|e| Failure::Runtime(format!("formatting run table: {e}")))?;
    Ok(buf)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    output::write_atomic(dir, name, bytes).map_err(|e| io_failure(&dir.join(name), e))?;
    Ok(())
}

fn write_doc<T: serde::Serialize>(dir: &Path, name: &str, doc: &T) -> CliResult<()> {
    output::write_json(dir, name, doc).map_err(|e| io_failure(&dir.join(name), e))?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    check_jobs(args.output.jobs)?;
    let loaded = load(&args.scenario)?;
    let scenario = &loaded.scenario;
    let kind = match &args.controller {
        Some(name) => name.parse::<ControllerKind>()?,
        None => scenario.controller.kind,
    };
    let spawn = match args.targets {
        Some(m) => SpawnMode::Uniform(m),
        None => scenario.spawn(&loaded.world.map)?,
    };
    let tau = args.steps.unwrap_or(scenario.tau);
    let seeds = match (&args.seeds, args.seed) {
        (Some(spec), _) => lists::parse_u64_list(spec, "seed").map_err(Failure::Config)?,
        (None, Some(s)) => vec![s],
        (None, None) => vec![scenario.seed],
    };
    let exec = if args.output.reproducible {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let jobs = if args.output.reproducible { 1 } else { args.output.jobs };
    let m = spawn.num_targets();

    let job_list: Vec<Job> = seeds
        .iter()
        .map(|&seed| Job {
            kind,
            seed,
            spawn: spawn.clone(),
        })
        .collect();
    let results = run_jobs(jobs, job_list.len(), |i| {
        execute(&loaded, &job_list[i], tau, args.emit_beliefs, exec)
    });

    let out = &args.output.out;
    let mut scores = Vec::with_capacity(results.len());
    for (job, result) in job_list.iter().zip(results) {
        let done = result?;
        let record = &done.record;
        let stem = format!("{kind}-m{m}-seed{}", job.seed);
        let summary = metrics::summarize(record)?;
        write_file(out, &format!("{stem}.csv"), &table_bytes(record)?)?;
        write_doc(
            out,
            &format!("{stem}.json"),
            &RunSummaryDoc {
                version: VERSION,
                scenario: &loaded.label,
                scenario_hash: &loaded.hash,
                controller: kind.name(),
                seed: job.seed,
                num_targets: m,
                tau,
                percent_obs: summary.percent_obs,
                per_step_obs: &summary.per_step_obs,
                belief_conflicts: record.conflicts,
                elapsed_seconds: (!args.output.reproducible).then_some(done.elapsed),
            },
        )?;
        if args.emit_beliefs.is_some() {
            let beliefs: &[BeliefSnapshot] = &record.beliefs;
            write_doc(out, &format!("{stem}-beliefs.json"), &beliefs)?;
        }
        println!("{kind} m={m} seed={} percent_obs={:.2}", job.seed, summary.percent_obs);
        scores.push(SeedScore {
            seed: job.seed,
            percent_obs: summary.percent_obs,
        });
    }

    if seeds.len() > 1 {
        let values: Vec<f64> = scores.iter().map(|s| s.percent_obs).collect();
        let agg = metrics::aggregate_values(&values)?;
        println!(
            "{kind} m={m} seeds={} mean={:.2} stddev={:.2}",
            seeds.len(),
            agg.mean,
            agg.stddev
        );
        write_doc(
            out,
            &format!("{kind}-m{m}-aggregate.json"),
            &AggregateDoc {
                version: VERSION,
                scenario: &loaded.label,
                scenario_hash: &loaded.hash,
                controller: kind.name(),
                num_targets: m,
                tau,
                seeds,
                percent_obs: agg,
                per_seed: scores,
            },
        )?;
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> CliResult<()> {
    check_jobs(args.output.jobs)?;
    let loaded = load(&args.scenario)?;
    let m_values = lists::parse_usize_list(&args.targets, "target count").map_err(Failure::Config)?;
    let seeds = lists::parse_u64_list(&args.seeds, "seed").map_err(Failure::Config)?;
    let tau = args.steps.unwrap_or(loaded.scenario.tau);
    let exec = if args.output.reproducible {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let jobs = if args.output.reproducible { 1 } else { args.output.jobs };

    let mut job_list = Vec::new();
    for &m in &m_values {
        for &kind in &ControllerKind::ALL {
            for &seed in &seeds {
                job_list.push(Job {
                    kind,
                    seed,
                    spawn: SpawnMode::Uniform(m),
                });
            }
        }
    }
    let results = run_jobs(jobs, job_list.len(), |i| execute(&loaded, &job_list[i], tau, None, exec));

    let out = &args.output.out;
    let runs_dir = out.join("runs");
    let mut rows: Vec<CompareRow> = Vec::new();
    for (job, result) in job_list.iter().zip(results) {
        let done = result?;
        let m = job.spawn.num_targets();
        if args.emit_runs {
            let name = format!("{}-m{m}-seed{}.csv", job.kind, job.seed);
            write_file(&runs_dir, &name, &table_bytes(&done.record)?)?;
        }
        let score = SeedScore {
            seed: job.seed,
            percent_obs: metrics::percent_obs(&done.record)?,
        };
        match rows.last_mut() {
            Some(row) if row.controller == job.kind.name() && row.num_targets == m => row.per_seed.push(score),
            _ => rows.push(CompareRow {
                controller: job.kind.name().to_string(),
                num_targets: m,
                percent_obs: metrics::aggregate_values(&[score.percent_obs])?,
                per_seed: vec![score],
            }),
        }
    }

    let mut table = String::from("controller,m,mean_percent_obs,stddev,min,max,seeds\n");
    for row in &mut rows {
        let values: Vec<f64> = row.per_seed.iter().map(|s| s.percent_obs).collect();
        row.percent_obs = metrics::aggregate_values(&values)?;
        let a = &row.percent_obs;
        table.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4},{:.4},{}\n",
            row.controller, row.num_targets, a.mean, a.stddev, a.min, a.max, a.count
        ));
    }
    print!("{table}");
    write_file(out, "compare.csv", table.as_bytes())?;
    write_doc(
        out,
        "compare.json",
        &CompareDoc {
            version: VERSION,
            scenario: &loaded.label,
            scenario_hash: &loaded.hash,
            tau,
            seeds,
            rows,
        },
    )
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let loaded = load(&args.scenario)?;
    let m_values = lists::parse_usize_list(&args.m_values, "m value").map_err(Failure::Config)?;
    let target = if args.stub {
        BenchTarget::ConstantStub
    } else {
        BenchTarget::Planner
    };
    let report = metrics::scaling_bench(&loaded.world, &m_values, args.repeats, target)?;
    println!("m,median_seconds");
    for row in &report.rows {
        println!("{},{:.6e}", row.m, row.median_seconds);
    }
    println!(
        "fit: intercept={:.6e} slope={:.6e} r2={:.4}",
        report.fit.intercept, report.fit.slope, report.fit.r_squared
    );
    let ratio = match (report.runtime(40), report.runtime(10)) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    if let Some(r) = ratio {
        println!("runtime(40)/runtime(10) = {r:.3}");
    }
    write_doc(
        &args.out,
        "bench.json",
        &BenchDoc {
            version: VERSION,
            scenario: &loaded.label,
            scenario_hash: &loaded.hash,
            seed: loaded.scenario.seed,
            mode: if args.stub { "stub" } else { "planner" },
            repeats: args.repeats,
            report: &report,
            ratio_40_over_10: ratio,
        },
    )
}
