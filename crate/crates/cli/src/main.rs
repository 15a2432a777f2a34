use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hpfl_cli::{
    run_complexity, run_convergence, run_quadcheck, solve, write_csv, CliError, Command, ExperimentConfig,
    OrderRule, RightHandSide,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Solve,
    Convergence,
    Quadcheck,
    Complexity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rhs {
    One,
    Exp,
}

/// hp-FEM for the 1d integral fractional Laplacian on (-1, 1).
#[derive(Debug, Parser)]
#[command(name = "hpfl", version)]
struct Args {
    command: Cmd,
    /// Fractional order, 0 < s < 1.
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Geometric grading factor, 0 < sigma < 1.
    #[arg(long, default_value_t = 0.25)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    lmin: usize,
    /// Last layer count; `solve` uses this value only.
    #[arg(long, default_value_t = 6)]
    lmax: usize,
    /// Quadrature order n = floor(lambda * p).
    #[arg(long, default_value_t = 1.2, conflicts_with = "n")]
    lambda: f64,
    /// Fixed quadrature order, overrides --lambda.
    #[arg(long)]
    n: Option<usize>,
    /// Reference order m = m_factor * p.
    #[arg(long, default_value_t = 6)]
    m_factor: usize,
    #[arg(long, value_enum, default_value_t = Rhs::One)]
    f: Rhs,
    /// Output CSV file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write wall_ms as NA so repeated runs are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Use the per-entry O(L^6) assembly.
    #[arg(long)]
    naive: bool,
    /// First quadrature order of `quadcheck`.
    #[arg(long, default_value_t = 5)]
    nmin: usize,
    /// Last quadrature order of `quadcheck`.
    #[arg(long, default_value_t = 30)]
    nmax: usize,
}

impl Args {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            command: match self.command {
                Cmd::Solve => Command::Solve,
                Cmd::Convergence => Command::Convergence,
                Cmd::Quadcheck => Command::Quadcheck,
                Cmd::Complexity => Command::Complexity,
            },
            s: self.s,
            sigma: self.sigma,
            l_min: self.lmin,
            l_max: self.lmax,
            n_rule: self.n.map_or(OrderRule::Multiplier(self.lambda), OrderRule::Fixed),
            m_factor: self.m_factor,
            f: match self.f {
                Rhs::One => RightHandSide::One,
                Rhs::Exp => RightHandSide::Exp,
            },
            seed: self.seed,
            deterministic: self.deterministic,
            naive: self.naive,
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let config = args.config();
    let table = match config.command {
        Command::Solve => solve(&config)?,
        Command::Convergence => run_convergence(&config)?,
        Command::Quadcheck => run_quadcheck(&config, args.nmin..=args.nmax)?,
        Command::Complexity => run_complexity(&config)?,
    };
    let out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    write_csv(&table, out)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
