//! `tabkip`: distill, sweep, calibrate, project, and generate data from a
//! TOML run configuration.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
//! failure (divergence or an unsolvable kernel system).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tabkip::ErrorCategory;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Lib(tabkip::Error),
}

impl From<tabkip::Error> for Failure {
    fn from(e: tabkip::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Lib(e) => match e.category() {
                ErrorCategory::Config => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numerical => 3,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tabkip", version, about = "Kernel inducing point distillation for imbalanced tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for this run (overrides run.out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every random choice (overrides run.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweep and calibrate (overrides run.jobs).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write into an existing output directory.
    #[arg(long, global = true)]
    force: bool,

    /// Override a config value, e.g. `--set distill.m=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Distill one coreset and export it with its loss trace.
    Distill,
    /// Run the objective x size x classifier x seed grid.
    Sweep,
    /// Grid-search the asig decision-boundary shift.
    Calibrate,
    /// Project the data and any coresets onto two principal components.
    Project,
    /// Write a synthetic imbalanced dataset.
    Gen,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.run.jobs = jobs;
    }
    if let Some(out) = cli.out {
        cfg.run.out = Some(out);
    }
    let out = cfg
        .run
        .out
        .clone()
        .ok_or_else(|| Failure::Config("no output directory (pass --out or set run.out)".into()))?;
    match cli.command {
        Command::Distill => commands::cmd_distill(&cfg, &out, cli.force),
        Command::Sweep => commands::cmd_sweep(&cfg, &out, cli.force),
        Command::Calibrate => commands::cmd_calibrate(&cfg, &out, cli.force),
        Command::Project => commands::cmd_project(&cfg, &out, cli.force),
        Command::Gen => commands::cmd_gen(&cfg, &out, cli.force),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tabkip: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
