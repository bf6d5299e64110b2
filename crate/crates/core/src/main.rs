use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fermidot::cli::{self, ExperimentConfig, Table};
use fermidot::Error;

#[derive(Parser)]
#[command(name = "fermidot", version, about = "Non-Markovian double-quantum-dot dynamics and entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output table; defaults to `output.path` or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Oracle modes per lead (overrides `oracle.modes`).
    #[arg(long)]
    oracle_modes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Time evolution of one configuration.
    Evolve(Common),
    /// Steady-state entanglement over one or two parameter axes.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Bound states and relaxation class of a cutoff spectrum.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Also run the time-domain solver and report the |U| plateau.
        #[arg(long)]
        plateau: bool,
    },
    /// Compare the solver against the discretized-bath oracle.
    Verify(Common),
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn run(cli: Cli) -> Result<(Table, Option<PathBuf>), Error> {
    let common = match &cli.command {
        Command::Evolve(c) | Command::Verify(c) => c,
        Command::Sweep { common, .. } | Command::Classify { common, .. } => common,
    };
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(k) = common.oracle_modes {
        if k < 2 {
            return Err(Error::Config("--oracle-modes: must be >= 2".into()));
        }
        cfg.oracle.modes = k;
    }
    let out = common.out.clone().or_else(|| cfg.output.path.clone());
    let table = match &cli.command {
        Command::Evolve(_) => cli::run_evolution(&cfg)?,
        Command::Sweep { workers, .. } => cli::run_sweep(&cfg, *workers)?,
        Command::Classify { plateau, .. } => cli::run_classify(&cfg, *plateau)?,
        Command::Verify(_) => cli::run_verify(&cfg, cfg.oracle.modes)?,
    };
    Ok((table, out))
}

fn emit(table: &Table, out: Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write_to(&mut w)?;
            w.flush()
        }
        None => table.write_to(std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let (table, out) = match run(Cli::parse()) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::exit_code(&e) as u8);
        }
    };
    if let Err(e) = emit(&table, out) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(3);
    }
    if let Some(v) = &table.verdict {
        eprintln!("error: {v}");
        return ExitCode::from(4);
    }
    ExitCode::SUCCESS
}
