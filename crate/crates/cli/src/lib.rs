//! `peqml` command-line runner.
//!
//! Settings come from built-in defaults, then an optional TOML file
//! (`--config`), then command-line flags. Outputs land in `--out`, else
//! `$PEQML_OUT_DIR`, else `out_dir` from the file, else `./out`.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod commands;
pub mod config;
pub mod output;

use config::{Config, NoiseFlags};
use output::Outputs;

pub const OUT_DIR_ENV: &str = "PEQML_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "peqml",
    version,
    about = "Pulse-efficient transpilation experiments on a simulated device"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Turns every noise source on or off.
    #[arg(long, global = true, value_enum)]
    pub noise: Option<Toggle>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn is_on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transpile circuit files and report schedule durations.
    Transpile(TranspileArgs),
    /// Train the parity classifier on the synthetic task.
    QnnTrain(QnnArgs),
    /// Quantum-kernel SVM classification of handwritten digits.
    KernelClassify(KernelArgs),
    /// Loss and gradient magnitudes of the TFIM ansatz against width.
    NibpSweep(NibpArgs),
    /// Subsample the digits CSV, optionally reducing it with a truncated SVD.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
pub struct TranspileArgs {
    /// Circuit files in the line-oriented text format.
    pub inputs: Vec<PathBuf>,
    /// Pipeline name, `cnot` or `pe`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Dynamical decoupling in idle windows.
    #[arg(long, value_enum)]
    pub dd: Option<Toggle>,
}

#[derive(Debug, Args)]
pub struct QnnArgs {
    /// Comma-separated qubit counts.
    #[arg(long, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,
    /// Comma-separated modes such as `cnot`, `pe` or `pe+dd`.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<String>>,
    /// SPSA iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Shots per circuit.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Dynamical decoupling in idle windows.
    #[arg(long, value_enum)]
    pub dd: Option<Toggle>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Digits CSV, `label,p0,...,p783` per row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated qubit counts.
    #[arg(long, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,
    /// Comma-separated digit labels.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<usize>>,
    /// Comma-separated modes such as `cnot`, `pe` or `pe+dd`.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<String>>,
    /// Shots per circuit.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Training samples per class.
    #[arg(long)]
    pub per_class_train: Option<usize>,
    /// Test samples per class.
    #[arg(long)]
    pub per_class_test: Option<usize>,
    /// SVM regularisation.
    #[arg(long)]
    pub c: Option<f64>,
    /// Dynamical decoupling in idle windows.
    #[arg(long, value_enum)]
    pub dd: Option<Toggle>,
}

#[derive(Debug, Args)]
pub struct NibpArgs {
    /// Smallest width.
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Largest width.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Parameter sets per width.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated modes such as `cnot`, `pe` or `pe+dd`.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<String>>,
    /// Dynamical decoupling in idle windows.
    #[arg(long, value_enum)]
    pub dd: Option<Toggle>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Digits CSV, `label,p0,...,p783` per row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated digit labels.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<usize>>,
    /// Training samples per class.
    #[arg(long)]
    pub per_class_train: Option<usize>,
    /// Test samples per class.
    #[arg(long)]
    pub per_class_test: Option<usize>,
    /// Reduce to this many SVD features; raw pixels when absent.
    #[arg(long)]
    pub features: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Applies command-line overrides to the file configuration.
pub fn resolve(cli: &Cli) -> anyhow::Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    set(&mut cfg.seed, cli.seed);
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if let Some(t) = cli.noise {
        cfg.noise = NoiseFlags::all(t.is_on());
    }
    let on = |t: Option<Toggle>| t.map(Toggle::is_on);
    match &cli.command {
        Command::Transpile(a) => {
            let t = &mut cfg.transpile;
            if !a.inputs.is_empty() {
                t.inputs = a.inputs.clone();
            }
            set(&mut t.mode, a.mode.clone());
            set(&mut t.dd, on(a.dd));
        }
        Command::QnnTrain(a) => {
            let q = &mut cfg.qnn;
            set(&mut q.qubits, a.qubits.clone());
            set(&mut q.modes, a.modes.clone());
            set(&mut q.iterations, a.iterations);
            if a.shots.is_some() {
                q.shots = a.shots;
            }
            set(&mut q.dd, on(a.dd));
        }
        Command::KernelClassify(a) => {
            let k = &mut cfg.kernel;
            set(&mut k.data, a.data.clone());
            set(&mut k.qubits, a.qubits.clone());
            set(&mut k.classes, a.classes.clone());
            set(&mut k.modes, a.modes.clone());
            if a.shots.is_some() {
                k.shots = a.shots;
            }
            set(&mut k.per_class_train, a.per_class_train);
            set(&mut k.per_class_test, a.per_class_test);
            set(&mut k.c, a.c);
            set(&mut k.dd, on(a.dd));
        }
        Command::NibpSweep(a) => {
            let s = &mut cfg.nibp;
            set(&mut s.n_min, a.n_min);
            set(&mut s.n_max, a.n_max);
            set(&mut s.samples, a.samples);
            set(&mut s.modes, a.modes.clone());
            set(&mut s.dd, on(a.dd));
        }
        Command::Ingest(a) => {
            let i = &mut cfg.ingest;
            set(&mut i.data, a.data.clone());
            set(&mut i.classes, a.classes.clone());
            set(&mut i.per_class_train, a.per_class_train);
            set(&mut i.per_class_test, a.per_class_test);
            if a.features.is_some() {
                i.features = a.features;
            }
        }
    }
    Ok(cfg)
}

pub fn output_dir(cli: &Cli, cfg: &Config) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Everything in a configuration that can change results. The output
/// directory and worker count are left out so runs that differ only in
/// those produce identical files.
#[derive(Debug, Serialize)]
pub struct Resolved<'a, S: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub device: &'a peqml_core::DeviceParams,
    pub noise: &'a NoiseFlags,
    pub settings: &'a S,
}

#[derive(Debug, Serialize)]
pub struct Metrics<'a, S: Serialize, R: Serialize> {
    pub config: Resolved<'a, S>,
    pub results: R,
}

pub fn metrics<'a, S: Serialize, R: Serialize>(
    command: &'a str,
    cfg: &'a Config,
    settings: &'a S,
    results: R,
) -> Metrics<'a, S, R> {
    Metrics {
        config: Resolved {
            command,
            seed: cfg.seed,
            device: &cfg.device,
            noise: &cfg.noise,
            settings,
        },
        results,
    }
}

fn build_outputs(command: &Command, cfg: &Config) -> anyhow::Result<Outputs> {
    match command {
        Command::Transpile(_) => commands::transpile::run(cfg),
        Command::QnnTrain(_) => commands::qnn::run(cfg),
        Command::KernelClassify(_) => commands::kernel::run(cfg),
        Command::NibpSweep(_) => commands::nibp::run(cfg),
        Command::Ingest(_) => commands::ingest::run(cfg),
    }
}

/// Runs the command and writes its outputs; returns the written paths.
pub fn execute(cli: &Cli) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = resolve(cli)?;
    let dir = output_dir(cli, &cfg);
    let outputs = peqml_experiments::with_workers(cfg.workers, || build_outputs(&cli.command, &cfg))??;
    outputs
        .commit(&dir)
        .with_context(|| format!("writing outputs to {}", dir.display()))
}
