//! `dimwit`: local bounds, see-saw lower bounds and dimension-witness reports
//! for two-party Bell functionals.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, EXIT_OTHER};

#[derive(Parser)]
#[command(
    name = "dimwit",
    version,
    about = "Dimension witnesses for Bell functionals"
)]
struct Cli {
    /// Worker threads (default: all available cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct SeedArg {
    /// Master seed for random restarts.
    #[arg(long, env = "DIMWIT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone)]
pub struct SearchArgs {
    /// Random restarts (default: 50, plus 50·d − 50 when the larger dimension d is at least 3).
    #[arg(long)]
    pub restarts: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Stop a restart once one iteration gains less than this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Marginals {
    /// Read marginals from the partner's setting 0.
    PartnerZero,
    /// Average over partner settings; rejects signaling tables.
    Average,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    Iphi,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a functional on a probability table (CSV with columns x,y,a,b,p).
    Eval {
        /// `.bell` file or catalog name.
        functional: String,
        table: PathBuf,
        #[arg(long, value_enum, default_value_t = Marginals::PartnerZero)]
        marginals: Marginals,
        #[arg(long)]
        json: bool,
    },
    /// Exact local bound by enumerating deterministic strategies.
    LocalBound {
        functional: String,
        #[arg(long, default_value_t = dimwit_core::localbound::DEFAULT_STRATEGY_CAP)]
        max_strategies: u128,
        #[arg(long)]
        json: bool,
    },
    /// Best-found quantum value in fixed local dimensions.
    Seesaw {
        functional: String,
        #[arg(long)]
        da: usize,
        #[arg(long)]
        db: usize,
        #[command(flatten)]
        search: SearchArgs,
        /// Pin the state to cos θ|00> + sin θ|11> (qubits only).
        #[arg(long, conflicts_with = "fixed_gamma")]
        fixed_theta: Option<f64>,
        /// Pin the state to (|00> + γ|11> + |22>)/sqrt(2 + γ²) (qutrits only).
        #[arg(long)]
        fixed_gamma: Option<f64>,
        /// Reject non-projective starting models.
        #[arg(long)]
        projective_only: bool,
        #[arg(long)]
        json: bool,
    },
    /// Local bound and qubit/qutrit values over a grid of angles, as CSV.
    Curve {
        #[arg(long, value_enum, default_value_t = Family::Iphi)]
        family: Family,
        /// Number of grid points over [0, π], both ends included.
        #[arg(long, default_value_t = 64)]
        steps: usize,
        /// Dimension pair; only `2,3` is supported.
        #[arg(long, default_value = "2,3")]
        dims: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Output CSV path; a `<out>.manifest.json` sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare best-found values at d and d+1 (exit 0 if witnessed, 1 if not).
    Witness {
        functional: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = dimwit_core::catalog::DEFAULT_GAP_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Built-in functionals.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Vector see-saw on a correlation matrix.
    Grothendieck {
        /// Square correlation matrix CSV.
        #[arg(short = 'm', long = "matrix")]
        matrix: PathBuf,
        /// Dimension of the unit vectors.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List catalog names.
    List,
    /// Print a catalog entry as a `.bell` file.
    Emit {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
    }
    match cli.command {
        Command::Eval {
            functional,
            table,
            marginals,
            json,
        } => commands::eval(&functional, &table, marginals, json),
        Command::LocalBound {
            functional,
            max_strategies,
            json,
        } => commands::local_bound(&functional, max_strategies, json),
        Command::Seesaw {
            functional,
            da,
            db,
            search,
            fixed_theta,
            fixed_gamma,
            projective_only,
            json,
        } => commands::seesaw(commands::SeesawArgs {
            functional: &functional,
            da,
            db,
            search: &search,
            fixed_theta,
            fixed_gamma,
            projective_only,
            json,
        }),
        Command::Curve {
            family: Family::Iphi,
            steps,
            dims,
            search,
            out,
        } => commands::curve(steps, &dims, &search, out.as_deref()),
        Command::Witness {
            functional,
            d,
            threshold,
            search,
        } => commands::witness(&functional, d, threshold, &search),
        Command::Catalog { action } => match action {
            CatalogAction::List => commands::catalog_list(),
            CatalogAction::Emit { name, out } => commands::catalog_emit(&name, out.as_deref()),
        },
        Command::Grothendieck {
            matrix,
            n,
            search,
            json,
        } => commands::grothendieck(&matrix, n, &search, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
