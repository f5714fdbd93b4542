use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use regconv::report::{self, Command, RunConfig, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "regconv", version, about = "Convergence diagnostics for multiple series and improper integrals")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the Pringsheim, regular, absolute and complete diagnoses on a corpus member.
    Diagnose(Common),
    /// Sum a corpus series one axis at a time under every axis permutation.
    Successive(Common),
    /// Iterated limits, their regular check and final limit for a corpus integrand.
    Fubini(Common),
    /// List the corpus.
    Corpus(Output),
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the report's table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record wall-clock time in the report (makes reports differ between runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct Common {
    /// Corpus label.
    #[arg(long)]
    source: Option<String>,
    /// Dimension, for labels registered in several dimensions.
    #[arg(long)]
    m: Option<usize>,
    /// Defaults to the corpus entry's eps.
    #[arg(long)]
    eps: Option<f64>,
    /// Per-axis horizon (series) or extent (integrands); defaults to the corpus entry's.
    #[arg(long)]
    horizon: Option<usize>,
    /// Largest number of boxes scanned exhaustively by the regular diagnosis.
    #[arg(long)]
    budget: Option<u128>,
    #[arg(long)]
    pin_depth: Option<usize>,
    /// Per-axis tail tolerance for successive summation.
    #[arg(long)]
    tol: Option<f64>,
    /// Per-axis term cap for successive summation.
    #[arg(long)]
    cap: Option<usize>,
    /// Cell width for integrals.
    #[arg(long)]
    delta: Option<f64>,
    /// Gauss-Legendre order per axis.
    #[arg(long)]
    q: Option<usize>,
    /// Number of outer axes of the split.
    #[arg(long)]
    p: Option<usize>,
    /// Outer dimensions of a split chain, e.g. `2,1`.
    #[arg(long, value_delimiter = ',')]
    chain: Vec<usize>,
    /// Sample this many lattice probe boxes.
    #[arg(long)]
    random_probes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            source: self.source.clone(),
            m: self.m,
            eps: self.eps,
            horizon: self.horizon,
            box_budget: self.budget,
            pin_depth: self.pin_depth,
            tol: self.tol,
            cap: self.cap,
            delta: self.delta,
            q: self.q,
            p: self.p,
            chain: self.chain.clone(),
            random_probes: self.random_probes,
            seed: self.seed,
        }
    }
}

fn emit(report: &report::Report, output: &Output) -> Result<(), regconv::Error> {
    let json = report.to_json()?;
    match &output.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => writeln!(io::stdout().lock(), "{json}")?,
    }
    if let Some(path) = &output.csv {
        report::write_csv(report, File::create(path)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (command, cfg, output) = match &cli.command {
        Cmd::Diagnose(c) => (Command::Diagnose, c.config(), &c.output),
        Cmd::Successive(c) => (Command::Successive, c.config(), &c.output),
        Cmd::Fubini(c) => (Command::Fubini, c.config(), &c.output),
        Cmd::Corpus(o) => (Command::Corpus, RunConfig::default(), o),
    };
    let mut report = match report::run(command, cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    if output.timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    if let Err(e) = emit(&report, output) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    ExitCode::from(report.outcome.exit_code as u8)
}
