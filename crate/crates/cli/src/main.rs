//! Command-line front end: solves, sweeps, the conditioning table, matrix
//! dumps and the property suite. Every subcommand writes CSV.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use bernfad::caputo::example;
use bernfad::harness::{
    condition_table, conditioning_study, error_table, run_example, spatial_sweep, temporal_sweep, RunConfig,
};
use bernfad::opmatrix::{build_derivative_matrix, build_interior_pair, BandedMatrix};
use bernfad::verify::verify;
use bernfad::BernsteinBasis;

#[derive(Parser)]
#[command(name = "bernfad", version, about = "Bernstein Petrov-Galerkin solver for time-fractional advection-dispersion")]
struct Cli {
    /// Seed for every randomised check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a built-in example and report final-time errors.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Polynomial degree.
        #[arg(long = "N", default_value_t = 4)]
        n: usize,
        /// Number of time steps.
        #[arg(long = "M", default_value_t = 10)]
        m: usize,
        /// Write the coefficient history to this CSV file.
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence sweep in time (fixed N) or space (fixed M).
    Sweep {
        #[arg(long, value_enum)]
        mode: SweepMode,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated M values (time) or N values (space).
        #[arg(long, value_delimiter = ',')]
        list: Option<Vec<usize>>,
        /// Fixed degree for time sweeps.
        #[arg(long = "N", default_value_t = 14)]
        n: usize,
        /// Fixed step count for space sweeps.
        #[arg(long = "M", default_value_t = 400)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Condition numbers of the operator matrix against the Hilbert matrix.
    Cond {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.025)]
        tau: f64,
        /// With --kappa2, a single pair; otherwise (0.1, 2) and (1, 1).
        #[arg(long, requires = "kappa2")]
        kappa1: Option<f64>,
        #[arg(long, requires = "kappa1")]
        kappa2: Option<f64>,
        #[arg(long = "Nmin", default_value_t = 4)]
        n_min: usize,
        #[arg(long = "Nmax", default_value_t = 11)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump D_p (or the interior pair D̃_1, D̃_2) on [0, 1].
    Matrices {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Print D̃_1 and D̃_2 instead of D_p.
        #[arg(long)]
        interior: bool,
    },
    /// Run the property suite; exits nonzero if any property fails.
    Verify {
        /// Only properties whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Time,
    Space,
}

#[derive(clap::Args)]
struct ProblemArgs {
    /// ex1, ex2, ex3 or ex4.
    #[arg(long, default_value = "ex1")]
    problem: String,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Defaults to the example's value.
    #[arg(long)]
    kappa1: Option<f64>,
    /// Defaults to the example's value.
    #[arg(long)]
    kappa2: Option<f64>,
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
}

impl ProblemArgs {
    fn config(&self, n: usize, m: usize) -> Result<(bernfad::caputo::ManufacturedSolution, RunConfig)> {
        let ex = example(&self.problem)?;
        let cfg = RunConfig {
            alpha: self.alpha,
            kappa1: self.kappa1.unwrap_or(ex.kappa.0),
            kappa2: self.kappa2.unwrap_or(ex.kappa.1),
            degree: n,
            steps: m,
            horizon: self.horizon,
        };
        Ok((ex, cfg))
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn dump(name: &str, m: &BandedMatrix, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "# {name} ({}x{}, bandwidths {},{})", m.rows(), m.cols(), m.lower(), m.upper())?;
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{}", m.get(i, j))).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    writeln!(out, "row,col,value")?;
    for (i, j, v) in m.iter_entries() {
        writeln!(out, "{i},{j},{v}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve { problem, n, m, history, out } => {
            let (ex, cfg) = problem.config(n, m)?;
            let (h, report) = run_example(&ex, &cfg)?;
            if let Some(path) = history {
                h.write_csv(File::create(&path).with_context(|| format!("creating {}", path.display()))?)?;
            }
            output(&out)?.write_all(error_table(&[report]).emit()?.as_bytes())?;
        }
        Command::Sweep { mode, problem, list, n, m, out } => {
            let (ex, cfg) = problem.config(n, m)?;
            let table = match mode {
                SweepMode::Time => {
                    let list = list.unwrap_or_else(|| vec![25, 50, 100, 200, 400]);
                    temporal_sweep(&ex, &cfg, &list)?
                }
                SweepMode::Space => {
                    let list = list.unwrap_or_else(|| vec![4, 6, 8, 10, 12, 14]);
                    spatial_sweep(&ex, &cfg, &list)?
                }
            };
            output(&out)?.write_all(table.to_table().emit()?.as_bytes())?;
        }
        Command::Cond { alpha, tau, kappa1, kappa2, n_min, n_max, out } => {
            if n_min < 2 || n_max < n_min {
                bail!("need 2 ≤ Nmin ≤ Nmax");
            }
            let pairs = match (kappa1, kappa2) {
                (Some(a), Some(b)) => vec![(a, b)],
                _ => vec![(0.1, 2.0), (1.0, 1.0)],
            };
            let degrees: Vec<usize> = (n_min..=n_max).collect();
            let rows = conditioning_study(alpha, tau, &pairs, &degrees)?;
            output(&out)?.write_all(condition_table(&rows).emit()?.as_bytes())?;
        }
        Command::Matrices { n, p, interior } => {
            let basis = BernsteinBasis::unit(n);
            let mut out = io::stdout().lock();
            if interior {
                let (d1, d2) = build_interior_pair(&basis)?;
                dump("interior D1", &d1, &mut out)?;
                dump("interior D2", &d2, &mut out)?;
            } else {
                dump(&format!("D_{p}"), &build_derivative_matrix(&basis, p)?, &mut out)?;
            }
        }
        Command::Verify { filter } => {
            let report = verify(filter.as_deref(), cli.seed);
            io::stdout().lock().write_all(report.to_table().emit()?.as_bytes())?;
            return Ok(report.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // The suite assembles many deliberately hard systems; their warnings are noise there.
    let level = if matches!(cli.command, Command::Verify { .. }) { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
