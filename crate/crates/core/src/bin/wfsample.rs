use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wfsample::cli::{load_config, run, Command};

#[derive(Parser)]
#[command(name = "wfsample", version, about = "Wave front sets from Fourier samples on lattices")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the weight-function and weight-sequence conditions.
    WeightsCheck(Io),
    /// Generator, dual, shortest vectors and the separation check.
    LatticeInfo(Io),
    /// Fourier coefficients of a periodic source.
    FourierSeries(Io),
    /// One (x0, direction) pair.
    Analyze(Io),
    /// Verdicts over seeds and a direction grid.
    Wavefront(Io),
    /// Lattice and continuous analyzers side by side.
    Equivalence(Io),
}

#[derive(Args)]
struct Io {
    /// TOML run configuration.
    config: PathBuf,
    /// Overrides [output].json.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Overrides [output].csv.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides [output].svg_dir.
    #[arg(long)]
    svg_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, io) = match cli.command {
        Cmd::WeightsCheck(io) => (Command::WeightsCheck, io),
        Cmd::LatticeInfo(io) => (Command::LatticeInfo, io),
        Cmd::FourierSeries(io) => (Command::FourierSeries, io),
        Cmd::Analyze(io) => (Command::Analyze, io),
        Cmd::Wavefront(io) => (Command::Wavefront, io),
        Cmd::Equivalence(io) => (Command::Equivalence, io),
    };
    let result = load_config(&io.config).and_then(|mut cfg| {
        // command-line paths are relative to the working directory
        let cwd = std::env::current_dir().unwrap_or_default();
        if let Some(p) = io.json {
            cfg.output.json = Some(cwd.join(p));
        }
        if let Some(p) = io.csv {
            cfg.output.csv = Some(cwd.join(p));
        }
        if let Some(p) = io.svg_dir {
            cfg.output.svg_dir = Some(cwd.join(p));
        }
        let report = run(command, &cfg)?;
        report.write(&cfg)?;
        if cfg.output.json.is_none() {
            print!("{}", report.to_json_string());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wfsample {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
