use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oscmodel::config::{ConfigError, FlatConfig};
use oscmodel::metrics::MetricSeries;
use oscmodel::run::{self, RunError};
use oscmodel::scenario;
use oscmodel::sweep::{self, SweepError, SweepPlan};
use oscmodel::trace::{self, Interpolation, TimeAlignment, TraceError};
use oscmodel::{validate, Execution};

#[derive(Parser)]
#[command(name = "oscsim", version, about = "Coupled-oscillator model of bulk-synchronous parallel programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override a config key, e.g. `--set noise.coefficient=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed applied to every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (1 = sequential).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named preset.
    Scenario {
        /// gssor-uni, gssor-bidir, noise-sweep or jacobi-desync
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one numeric config key over several values and seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted key path, e.g. `noise.coefficient`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Runs per value; run k uses seed `--seed + k`.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compute metrics from a `rank,time,iteration` trace.
    Trace {
        #[arg(long)]
        trace: PathBuf,
        /// Comma-separated metric names (default: all).
        #[arg(long)]
        metrics: Option<String>,
        /// Simulation output directory to compare against.
        #[arg(long)]
        sim: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "step")]
        mode: Mode,
        /// Multiply trace time by this factor instead of normalizing both
        /// axes to [0, 1] when comparing.
        #[arg(long)]
        time_scale: Option<f64>,
        /// Config supplying topology, potential and output options.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Step,
    Linear,
}

enum Failure {
    Config(String),
    Integration(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Integration(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Integration(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Integration(_) => Failure::Integration(e.to_string()),
            RunError::Io { .. } => Failure::Io(e.to_string()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Run(r) => r.into(),
            SweepError::Config(c) => c.into(),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn prepare(mut flat: FlatConfig, common: &Common) -> Result<FlatConfig> {
    for o in &common.overrides {
        flat.apply_override(o)?;
    }
    if let Some(seed) = common.seed {
        flat.apply_seed(seed);
    }
    Ok(flat)
}

fn simulate_flat(flat: &FlatConfig, dir: &Path, exec: Execution) -> Result<run::RunOutcome> {
    let cfg = validate(flat.build()?).map_err(|r| Failure::Config(format!("invalid configuration: {r}")))?;
    Ok(run::simulate_to_dir(&cfg, dir, exec)?)
}

fn report(dir: &Path, outcome: &run::RunOutcome) {
    let resync = outcome
        .summary
        .resync
        .time()
        .map_or_else(|| "not reached".to_string(), |t| format!("{t}"));
    println!(
        "{}: final R = {:.6}, resync time = {resync}",
        dir.display(),
        outcome.summary.final_r
    );
}

fn cmd_simulate(config: &Path, common: &Common) -> Result<()> {
    let flat = prepare(FlatConfig::load(config)?, common)?;
    let outcome = simulate_flat(&flat, &common.out, Execution::with_jobs(common.jobs))?;
    report(&common.out, &outcome);
    Ok(())
}

fn cmd_scenario(name: &str, common: &Common) -> Result<()> {
    let base = prepare(scenario::preset(name).map_err(|e| Failure::Config(e.to_string()))?, common)?;
    if name != "noise-sweep" {
        let outcome = simulate_flat(&base, &common.out, Execution::with_jobs(common.jobs))?;
        report(&common.out, &outcome);
        return Ok(());
    }
    let points: Vec<(PathBuf, FlatConfig)> = scenario::noise_sweep_points()
        .into_iter()
        .map(|(sub, c)| {
            let mut flat = base.clone();
            flat.apply_override(&format!("noise.coefficient={c:?}"))?;
            Ok((common.out.join(sub), flat))
        })
        .collect::<Result<_>>()?;
    let results = Execution::with_jobs(common.jobs).map(&points, |(dir, flat)| {
        simulate_flat(flat, dir, Execution::Sequential).map(|o| (dir.clone(), o))
    });
    for r in results {
        let (dir, outcome) = r?;
        report(&dir, &outcome);
    }
    Ok(())
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::Config(format!("--values: `{s}` is not a number")))
        })
        .collect()
}

fn cmd_sweep(config: &Path, param: &str, values: &str, seeds: usize, common: &Common) -> Result<()> {
    let base = prepare(FlatConfig::load(config)?, common)?;
    let plan = SweepPlan {
        parameter: param.to_string(),
        values: parse_values(values)?,
        seeds,
        base_seed: common.seed.unwrap_or(0),
    };
    let result = sweep::run_sweep(&base, &plan, Execution::with_jobs(common.jobs))?;
    result.write(&base.build()?, &common.out)?;
    for p in &result.points {
        let median = p
            .median_resync
            .map_or_else(|| "not reached".to_string(), |t| format!("{t}"));
        println!(
            "{param} = {}: {}/{} reached, median resync time = {median}",
            p.value, p.reached, p.runs
        );
    }
    Ok(())
}

struct TraceArgs<'a> {
    trace: &'a Path,
    metrics: Option<&'a str>,
    sim: Option<&'a Path>,
    mode: Mode,
    time_scale: Option<f64>,
    config: Option<&'a Path>,
}

fn io_failure(context: String) -> impl FnOnce(std::io::Error) -> Failure {
    move |e| Failure::Io(format!("{context}: {e}"))
}

fn cmd_trace(args: TraceArgs, common: &Common) -> Result<()> {
    let timeline = trace::load_trace(args.trace)?;
    let mut flat = match args.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::parse("")?,
    };
    let (start, end) = timeline.span();
    let duration = if end > start { end - start } else { 1.0 };
    flat.apply_override(&format!("oscillators={}", timeline.ranks()))?;
    flat.apply_override(&format!("t_end={duration:?}"))?;
    if let Some(m) = args.metrics {
        flat.apply_override(&format!("output.metrics={m}"))?;
    }
    let flat = prepare(flat, common)?;
    let cfg = validate(flat.build()?).map_err(|r| Failure::Config(format!("invalid configuration: {r}")))?;
    let mode = match args.mode {
        Mode::Step => Interpolation::Step,
        Mode::Linear => Interpolation::Linear,
    };
    let exec = Execution::with_jobs(common.jobs);
    let outcome = run::analyze_trace(&cfg, &timeline, mode, exec)?;
    run::write_outputs(&outcome, cfg.config(), &common.out)?;
    report(&common.out, &outcome);

    let Some(sim_dir) = args.sim else {
        return Ok(());
    };
    let alignment = args.time_scale.map_or(TimeAlignment::Normalized, TimeAlignment::Scale);
    let mut compared = 0;
    for series in &outcome.series {
        let path = sim_dir.join(run::file_name(series));
        if !path.exists() {
            eprintln!("note: {} not in {}, skipping", series.name, sim_dir.display());
            continue;
        }
        let sim = MetricSeries::read_csv(&path, &series.name)
            .map_err(|e| Failure::Config(format!("reading {}: {e}", path.display())))?;
        let rep = trace::compare(&[sim], std::slice::from_ref(series), &series.name, alignment)?;
        let csv = common.out.join(format!("compare_{}.csv", series.name));
        rep.write_csv(&csv).map_err(io_failure(format!("writing {}", csv.display())))?;
        let txt = common.out.join(format!("compare_{}.txt", series.name));
        fs::write(&txt, rep.summary()).map_err(io_failure(format!("writing {}", txt.display())))?;
        println!(
            "compare {}: max |delta| = {:.6}, correlation = {:.4}, lag = {}",
            series.name, rep.max_abs, rep.correlation, rep.lag
        );
        compared += 1;
    }
    if compared == 0 {
        return Err(Failure::Config(format!(
            "no selected metric found in {}",
            sim_dir.display()
        )));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { config, common } => cmd_simulate(config, common),
        Command::Scenario { name, common } => cmd_scenario(name, common),
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            common,
        } => cmd_sweep(config, param, values, *seeds, common),
        Command::Trace {
            trace,
            metrics,
            sim,
            mode,
            time_scale,
            config,
            common,
        } => cmd_trace(
            TraceArgs {
                trace,
                metrics: metrics.as_deref(),
                sim: sim.as_deref(),
                mode: *mode,
                time_scale: *time_scale,
                config: config.as_deref(),
            },
            common,
        ),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
