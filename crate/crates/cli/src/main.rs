mod config;
mod report;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use reserve_core::bench::run_bench;
use reserve_core::checkpoint;
use reserve_core::domain::Spacing;
use reserve_core::jsonl::{write_log, LogReader, ParseMode};
use reserve_core::replay::Replayer;
use reserve_core::simulation::{
    generate_stream, record_log, run_experiment, tune_hyperparams, ExperimentSetting,
};
use reserve_core::{Engine, Variant};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{Config, CONFIG_ENV};
use report::{ReplayReport, SimulateReport, TuneReport, SIMULATE_FORMAT};

#[derive(Parser)]
#[command(
    name = "reserve",
    version,
    about = "Online reserve prices for second-price auctions"
)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a train/test experiment on a synthetic stream.
    Simulate(SimulateArgs),
    /// Feed a JSONL auction log through an engine.
    Replay(ReplayArgs),
    /// Measure per-auction latency on the censored and uncensored paths.
    Bench(BenchArgs),
    /// Grid-search the revenue model's forgetting rate and prior precision.
    Tune(TuneArgs),
    /// Work with engine checkpoint files.
    #[command(subcommand)]
    Checkpoint(CheckpointCommand),
}

#[derive(Subcommand)]
enum CheckpointCommand {
    /// Print a checkpoint's header.
    Inspect { path: PathBuf },
}

fn parse_upper<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_uppercase()))
        .map_err(|_| format!("unknown value `{s}`"))
}

fn parse_spacing(s: &str) -> Result<Spacing, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
        .map_err(|_| format!("unknown spacing `{s}`"))
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Number of floor levels including the zero level.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long, value_parser = parse_spacing)]
    spacing: Option<Spacing>,
    /// Upper bound on stored users and on stored placements.
    #[arg(long)]
    capacity: Option<usize>,
}

impl EngineArgs {
    fn apply(&self, c: &mut Config) {
        if let Some(v) = self.seed {
            c.seed = v;
        }
        let g = &mut c.engine.grid;
        if let Some(v) = self.levels {
            g.levels = v;
        }
        if let Some(v) = self.grid_min {
            g.min = v;
        }
        if let Some(v) = self.grid_max {
            g.max = v;
        }
        if let Some(v) = self.spacing {
            g.spacing = v;
        }
        if self.capacity.is_some() {
            c.engine.capacity = self.capacity;
        }
    }
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    auctions: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    placements: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long, value_parser = parse_upper::<ExperimentSetting>)]
    setting: Option<ExperimentSetting>,
}

impl StreamArgs {
    fn apply(&self, c: &mut Config) {
        if let Some(v) = self.auctions {
            c.stream.n_auctions = v;
        }
        if let Some(v) = self.users {
            c.stream.n_users = v;
        }
        if let Some(v) = self.placements {
            c.stream.n_placements = v;
        }
        if let Some(v) = self.train_fraction {
            c.experiment.train_fraction = v;
        }
        if let Some(v) = self.setting {
            c.experiment.setting = v;
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    stream: StreamArgs,
    /// Engine variants to run (repeatable); all four by default.
    #[arg(long = "variant", value_parser = parse_upper::<Variant>)]
    variants: Vec<Variant>,
    /// Tune on the training split before testing.
    #[arg(long)]
    tune: bool,
    /// Also run every variant with uncensored feedback.
    #[arg(long)]
    uncensored_reference: bool,
    /// Directory for report.json and report.txt.
    #[arg(long)]
    out: PathBuf,
    /// Also write the whole stream as a JSONL log, with the floors an engine
    /// of the first variant chose in closed loop.
    #[arg(long)]
    log_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_parser = parse_upper::<Variant>)]
    variant: Option<Variant>,
    #[arg(long)]
    log: PathBuf,
    /// Start from this checkpoint; its grid and variant must match.
    #[arg(long)]
    checkpoint_in: Option<PathBuf>,
    #[arg(long)]
    checkpoint_out: Option<PathBuf>,
    /// Skip and count malformed or out-of-order lines instead of aborting.
    #[arg(long)]
    lenient: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    latent_dim: Option<usize>,
    #[arg(long, value_parser = parse_upper::<Variant>)]
    variant: Option<Variant>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    placements: Option<usize>,
    /// Auctions run before timing starts.
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long, value_parser = parse_upper::<Variant>)]
    variant: Option<Variant>,
    /// Forgetting rates per second (comma separated).
    #[arg(long, value_delimiter = ',')]
    rates: Vec<f64>,
    /// Prior precisions (comma separated).
    #[arg(long, value_delimiter = ',')]
    precisions: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes to stdout, treating a closed pipe as success.
fn say(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T, table: String) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            write_json(path, value)?;
            say(&table)
        }
        None => say(&(serde_json::to_string_pretty(value)? + "\n")),
    }
}

fn simulate(mut config: Config, args: SimulateArgs) -> anyhow::Result<()> {
    args.engine.apply(&mut config);
    args.stream.apply(&mut config);
    config.resolve_seed();
    if !args.variants.is_empty() {
        config.experiment.variants = args.variants.clone();
    }
    config.experiment.tune |= args.tune;
    config.experiment.uncensored_reference |= args.uncensored_reference;
    if let Some(&v) = config.experiment.variants.first() {
        config.engine.variant = v;
    }
    let engine_config = config.engine_config()?;
    let stream_config = config.stream_config()?;
    let result = run_experiment(
        config.experiment.setting,
        &engine_config,
        &stream_config,
        &config.experiment_options(),
    )?;
    let report = SimulateReport {
        format: SIMULATE_FORMAT.into(),
        seed: config.seed,
        config,
        result,
    };
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let table = report::simulate_table(&report);
    write_json(&args.out.join("report.json"), &report)?;
    std::fs::write(args.out.join("report.txt"), &table)?;
    say(&table)?;
    if let Some(path) = &args.log_out {
        let stream = generate_stream(&stream_config)?;
        let mut engine = Engine::new(engine_config)?;
        let log = record_log(&mut engine, &stream)?;
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_log(std::io::BufWriter::new(file), &log)?;
    }
    Ok(())
}

fn replay(mut config: Config, args: ReplayArgs) -> anyhow::Result<()> {
    args.engine.apply(&mut config);
    if let Some(v) = args.variant {
        config.engine.variant = v;
    }
    let engine_config = config.engine_config()?;
    let mut engine = Engine::new(engine_config)?;
    let checkpoint_in = match &args.checkpoint_in {
        Some(path) => {
            checkpoint::load_into(path, &mut engine)
                .with_context(|| format!("loading checkpoint {}", path.display()))?;
            Some(checkpoint::inspect(&checkpoint::encode(&engine)?)?)
        }
        None => None,
    };
    let mode = if args.lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    };
    let file = File::open(&args.log).with_context(|| format!("opening {}", args.log.display()))?;
    let mut reader = LogReader::new(BufReader::new(file), mode).after(engine.last_update());
    let mut replayer = Replayer::new(&mut engine, mode);
    for item in reader.by_ref() {
        let (line, event) = item?;
        replayer.feed(line, &event)?;
    }
    for r in reader.into_rejected() {
        replayer.reject(r);
    }
    let diagnostics = replayer.finish();
    let checkpoint_out = match &args.checkpoint_out {
        Some(path) => {
            checkpoint::save(path, &engine)?;
            Some(checkpoint::inspect(&checkpoint::encode(&engine)?)?)
        }
        None => None,
    };
    let report = ReplayReport {
        log: args.log.display().to_string(),
        checkpoint_in,
        checkpoint_out,
        diagnostics,
    };
    emit(args.out.as_deref(), &report, report::replay_table(&report))
}

fn bench(mut config: Config, args: BenchArgs) -> anyhow::Result<()> {
    let b = &mut config.bench;
    b.seed = args.seed.unwrap_or(config.seed);
    b.levels = args.levels.unwrap_or(b.levels);
    b.latent_dim = args.latent_dim.unwrap_or(b.latent_dim);
    b.variant = args.variant.unwrap_or(b.variant);
    b.users = args.users.unwrap_or(b.users);
    b.placements = args.placements.unwrap_or(b.placements);
    b.warmup = args.warmup.unwrap_or(b.warmup);
    b.iterations = args.iterations.unwrap_or(b.iterations);
    let report = run_bench(&config.bench)?;
    emit(args.out.as_deref(), &report, report::bench_table(&report))
}

fn tune(mut config: Config, args: TuneArgs) -> anyhow::Result<()> {
    args.engine.apply(&mut config);
    args.stream.apply(&mut config);
    config.resolve_seed();
    if let Some(v) = args.variant {
        config.engine.variant = v;
    }
    if !args.rates.is_empty() {
        config.tune.forgetting_rates = args.rates.clone();
    }
    if !args.precisions.is_empty() {
        config.tune.precisions = args.precisions.clone();
    }
    let engine_config = config.engine_config()?;
    let stream = generate_stream(&config.stream_config()?)?;
    let fraction = config.experiment.train_fraction;
    anyhow::ensure!(
        (0.0..1.0).contains(&fraction),
        "train fraction must be in [0, 1)"
    );
    let split = (stream.len() as f64 * fraction).round() as usize;
    let setting = config.experiment.setting;
    let result = tune_hyperparams(&config.tune, setting, &engine_config, &stream[..split])?;
    let report = TuneReport {
        seed: config.seed,
        setting,
        train_auctions: split,
        best_cell: result.best_cell,
        best: result.best,
        cells: result.cells,
    };
    emit(args.out.as_deref(), &report, report::tune_table(&report))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(a) => simulate(config, a),
        Command::Replay(a) => replay(config, a),
        Command::Bench(a) => bench(config, a),
        Command::Tune(a) => tune(config, a),
        Command::Checkpoint(CheckpointCommand::Inspect { path }) => {
            let bytes =
                std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            say(&(serde_json::to_string_pretty(&checkpoint::inspect(&bytes)?)? + "\n"))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
