//! Command-line driver for the factor-number experiments.
//!
//! Subcommands cover the four experiment families (single model, table grid,
//! parameter sweep, scaling studies) plus preset discovery. Every run prints
//! a manifest to stderr and writes CSV to stdout or `--out`. All randomness
//! is keyed by the master seed, so reruns with the same seed are reproducible
//! byte for byte except for the trailing timestamp column; worker count only
//! sizes the thread pool and never changes results.

mod config;
mod report;

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use hffactors_core::bounds::{
    concentration_study, default_concentration_grid, default_eigen_d_grid, default_jump_grid,
    eigen_scaling_study, jump_norm_study, GridPoint,
};
use hffactors_core::montecarlo::{run_experiment, run_sweep, ModelConfig};
use hffactors_core::presets::{sweep_preset, table_preset, SWEEP_PRESETS, TABLE_PRESETS};

use config::{parse_config, to_flat_toml};
use report::{
    push_concentration_rows, push_eigen_rows, push_experiment_rows, push_jump_rows,
    push_sweep_rows, BOUNDS_HEADER, EXPERIMENT_HEADER, SWEEP_HEADER,
};

/// Usage or configuration errors exit 2, failures during a run exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

#[derive(Parser)]
#[command(name = "hffactors", version, about = "Factor-number estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Override the replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Thread pool size; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a flat key-value config file.
    Simulate {
        /// Path to the config file.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a table preset over its full (n, d) grid.
    Table {
        /// Preset id, table1 through table8.
        #[arg(long)]
        preset: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a sweep preset over its parameter grid.
    Sweep {
        /// Preset id, fig1 through fig4.
        #[arg(long)]
        preset: String,
        /// Override the parameter grid, comma-separated values.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a scaling study: concentration, jumpnorm or eigenscaling.
    Bounds {
        /// Study id.
        #[arg(long)]
        study: String,
        /// Override the (d, n) grid, comma-separated DxN pairs, e.g.
        /// 100x390,400x390. The eigenscaling study needs a single shared n.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// List the built-in presets.
    ListPresets,
}

/// What a run resolved to; echoed to stderr before the work starts.
struct RunManifest {
    command: &'static str,
    source: String,
    master_seed: u64,
    out: Option<PathBuf>,
    workers: Option<usize>,
    timestamp: String,
}

impl RunManifest {
    fn new(command: &'static str, source: String, master_seed: u64, run: &RunArgs) -> Self {
        RunManifest {
            command,
            source,
            master_seed,
            out: run.out.clone(),
            workers: run.workers,
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }

    fn announce(&self) {
        let out = self
            .out
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<stdout>".to_string());
        let workers = self
            .workers
            .map(|w| w.to_string())
            .unwrap_or_else(|| "auto".to_string());
        eprintln!(
            "hffactors {}: {} seed={} workers={} out={} at {}",
            self.command, self.source, self.master_seed, workers, out, self.timestamp
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, run } => cmd_simulate(&config, &run),
        Command::Table { preset, run } => cmd_table(&preset, &run),
        Command::Sweep { preset, grid, run } => cmd_sweep(&preset, grid.as_deref(), &run),
        Command::Bounds { study, grid, run } => cmd_bounds(&study, grid.as_deref(), &run),
        Command::ListPresets => {
            cmd_list_presets();
            Ok(())
        }
    }
}

/// Open the output sink before simulating so a bad path fails fast as a
/// usage error instead of discarding a finished run.
fn open_sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                CliError::config(format!("out: cannot write {}: {e}", path.display()))
            })?;
            Ok(Box::new(file))
        }
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn write_csv(sink: &mut dyn Write, content: &str) -> Result<(), CliError> {
    sink.write_all(content.as_bytes())
        .map_err(|e| CliError::runtime(format!("writing output: {e}")))
}

/// Run `work` on a pool of the requested size; parallelism only spreads
/// replications across threads, results are identical for any worker count.
fn with_pool<T: Send>(
    workers: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match workers {
        None => Ok(work()),
        Some(0) => Err(CliError::config("workers: must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map(|pool| pool.install(work))
            .map_err(|e| CliError::runtime(format!("thread pool: {e}"))),
    }
}

fn apply_overrides(cfg: &mut ModelConfig, run: &RunArgs) -> Result<(), CliError> {
    if let Some(reps) = run.reps {
        cfg.replications = reps;
    }
    if let Some(seed) = run.seed {
        cfg.master_seed = seed;
    }
    cfg.validate().map_err(|e| CliError::config(e.to_string()))
}

fn cmd_simulate(config_path: &PathBuf, run: &RunArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::config(format!("config: cannot read {}: {e}", config_path.display()))
    })?;
    let mut cfg = parse_config(&text)?;
    apply_overrides(&mut cfg, run)?;

    let manifest = RunManifest::new("simulate", config_path.display().to_string(), cfg.master_seed, run);
    let mut sink = open_sink(&run.out)?;
    manifest.announce();

    let report = with_pool(run.workers, || run_experiment(&cfg))?
        .map_err(|e| CliError::runtime(e.to_string()))?;

    let mut csv = String::from(EXPERIMENT_HEADER);
    csv.push('\n');
    push_experiment_rows(&mut csv, "custom", &report, &manifest.timestamp);
    write_csv(sink.as_mut(), &csv)
}

fn cmd_table(preset_id: &str, run: &RunArgs) -> Result<(), CliError> {
    let mut preset = table_preset(preset_id).ok_or_else(|| {
        CliError::config(format!(
            "preset: unknown table preset {preset_id:?}, expected table1 through table8"
        ))
    })?;
    apply_overrides(&mut preset.base, run)?;

    let manifest = RunManifest::new("table", preset_id.to_string(), preset.base.master_seed, run);
    let mut sink = open_sink(&run.out)?;
    manifest.announce();

    let reports = with_pool(run.workers, || {
        preset
            .cell_configs()
            .iter()
            .map(run_experiment)
            .collect::<Result<Vec<_>, _>>()
    })?
    .map_err(|e| CliError::runtime(e.to_string()))?;

    let mut csv = String::from(EXPERIMENT_HEADER);
    csv.push('\n');
    for report in &reports {
        push_experiment_rows(&mut csv, preset_id, report, &manifest.timestamp);
    }
    write_csv(sink.as_mut(), &csv)
}

fn parse_value_grid(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| {
                CliError::config(format!("grid: {tok:?} is not a number"))
            })
        })
        .collect()
}

fn cmd_sweep(preset_id: &str, grid: Option<&str>, run: &RunArgs) -> Result<(), CliError> {
    let mut preset = sweep_preset(preset_id).ok_or_else(|| {
        CliError::config(format!(
            "preset: unknown sweep preset {preset_id:?}, expected fig1 through fig4"
        ))
    })?;
    apply_overrides(&mut preset.base, run)?;
    if let Some(grid) = grid {
        preset.values = parse_value_grid(grid)?;
        if preset.values.is_empty() {
            return Err(CliError::config("grid: needs at least one value"));
        }
    }

    let manifest = RunManifest::new("sweep", preset_id.to_string(), preset.base.master_seed, run);
    let mut sink = open_sink(&run.out)?;
    manifest.announce();

    let points = with_pool(run.workers, || {
        run_sweep(&preset.base, preset.parameter, &preset.values)
    })?
    .map_err(|e| CliError::runtime(e.to_string()))?;

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    push_sweep_rows(&mut csv, &preset, &points, &manifest.timestamp);
    write_csv(sink.as_mut(), &csv)
}

/// Parse a comma-separated list of DxN pairs such as `100x390,400x390`.
fn parse_point_grid(text: &str) -> Result<Vec<GridPoint>, CliError> {
    text.split(',')
        .map(str::trim)
        .map(|tok| {
            let bad = || CliError::config(format!("grid: {tok:?} is not a DxN pair like 100x390"));
            let (d, n) = tok.split_once('x').ok_or_else(bad)?;
            Ok(GridPoint {
                d: d.trim().parse().map_err(|_| bad())?,
                n: n.trim().parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

// Scaling-study noise defaults: match the main experiments (theta 1.5,
// phi 0.1) with a mid-range jump activity.
const BOUNDS_THETA: f64 = 1.5;
const BOUNDS_PHI: f64 = 0.1;
const BOUNDS_ALPHA: f64 = 0.5;
const BOUNDS_DEFAULT_REPS: usize = 200;
const BOUNDS_DEFAULT_SEED: u64 = 42;

fn cmd_bounds(study: &str, grid: Option<&str>, run: &RunArgs) -> Result<(), CliError> {
    let reps = run.reps.unwrap_or(BOUNDS_DEFAULT_REPS);
    let seed = run.seed.unwrap_or(BOUNDS_DEFAULT_SEED);
    let points = grid.map(parse_point_grid).transpose()?;

    let manifest = RunManifest::new("bounds", study.to_string(), seed, run);
    let mut csv = String::from(BOUNDS_HEADER);
    csv.push('\n');

    // Validate the study id (and the grid shape) before opening the sink so
    // usage errors never leave an empty output file behind.
    enum Study {
        Concentration(Vec<GridPoint>),
        Jump(Vec<GridPoint>),
        Eigen(Vec<usize>, usize),
    }
    let plan = match study {
        "concentration" => {
            Study::Concentration(points.unwrap_or_else(default_concentration_grid))
        }
        "jumpnorm" => Study::Jump(points.unwrap_or_else(default_jump_grid)),
        "eigenscaling" => {
            let (d_grid, n) = match points {
                None => (default_eigen_d_grid(), 390),
                Some(points) => {
                    let n = points.first().map(|p| p.n).unwrap_or(390);
                    if points.iter().any(|p| p.n != n) {
                        return Err(CliError::config(
                            "grid: eigenscaling tracks growth in d at one fixed n, \
                             so all pairs must share the same n",
                        ));
                    }
                    (points.iter().map(|p| p.d).collect(), n)
                }
            };
            Study::Eigen(d_grid, n)
        }
        other => {
            return Err(CliError::config(format!(
                "study: unknown study {other:?}, expected concentration, jumpnorm or eigenscaling"
            )));
        }
    };

    let mut sink = open_sink(&run.out)?;
    manifest.announce();

    match plan {
        Study::Concentration(grid) => {
            let study = with_pool(run.workers, || {
                concentration_study(&grid, BOUNDS_THETA, BOUNDS_PHI, reps, seed)
            })?
            .map_err(|e| CliError::runtime(e.to_string()))?;
            push_concentration_rows(&mut csv, &study, &manifest.timestamp);
        }
        Study::Jump(grid) => {
            let study = with_pool(run.workers, || {
                jump_norm_study(&grid, BOUNDS_ALPHA, BOUNDS_THETA, BOUNDS_PHI, reps, seed)
            })?
            .map_err(|e| CliError::runtime(e.to_string()))?;
            push_jump_rows(&mut csv, &study, &manifest.timestamp);
        }
        Study::Eigen(d_grid, n) => {
            let study = with_pool(run.workers, || eigen_scaling_study(&d_grid, n, reps, seed))?
                .map_err(|e| CliError::runtime(e.to_string()))?;
            push_eigen_rows(&mut csv, &study, &manifest.timestamp);
        }
    }
    write_csv(sink.as_mut(), &csv)
}

fn cmd_list_presets() {
    println!("id        kind   model");
    for id in TABLE_PRESETS {
        let preset = table_preset(id).expect("built-in preset");
        let base = &preset.base;
        let alpha = base
            .nts_alpha()
            .map(|a| format!(" (alpha {a})"))
            .unwrap_or_default();
        println!(
            "{id:<9} table  {} factors, {} noise{alpha}; {} cells, {} replications, seed {}",
            base.factor_label(),
            base.idio_label(),
            preset.grid.len(),
            base.replications,
            base.master_seed,
        );
    }
    for id in SWEEP_PRESETS {
        let preset = sweep_preset(id).expect("built-in preset");
        let base = &preset.base;
        let alpha = base
            .nts_alpha()
            .map(|a| format!(" (alpha {a})"))
            .unwrap_or_default();
        let values: Vec<String> = preset.values.iter().map(|v| v.to_string()).collect();
        println!(
            "{id:<9} sweep  {} over [{}]; {} factors, {} noise{alpha}, n {} d {}",
            preset.parameter.label(),
            values.join(", "),
            base.factor_label(),
            base.idio_label(),
            base.n,
            base.d,
        );
    }
    println!();
    println!("# config template (defaults shown):");
    print!("{}", to_flat_toml(&ModelConfig::default()));
}
