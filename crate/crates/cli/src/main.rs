use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqlocc_cli::commands::{self, CliError, Common, Example, OperatorBuilder, OperatorSource, DEFAULT_SEED};
use seqlocc_cli::report::Report;

#[derive(Parser)]
#[command(name = "seqlocc", version, about = "LOCC discrimination factorizability for multi-party sequence ensembles")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Output::Text, global = true)]
    output: Output,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Args)]
struct Search {
    /// See-saw restarts.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Sweeps per restart.
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// A product witness must reach -margin to refute.
    #[arg(long, default_value_t = 1e-7)]
    margin: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Factorizability report for a sequence of step ensembles.
    Analyze {
        /// Step ensemble files, in order.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Repeat the file sequence this many times.
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Duality gap for p_G.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "barrier")]
        solver: String,
        #[command(flatten)]
        search: Search,
    },
    /// Recompute the numbers of a worked example.
    Repro {
        #[arg(value_enum)]
        example: ExampleArg,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Number of steps L.
        #[arg(long, default_value_t = 2)]
        steps: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "barrier")]
        solver: String,
        #[command(flatten)]
        search: Search,
    },
    /// Block-positivity verdict for one operator.
    Cone {
        /// Operator file.
        #[arg(conflicts_with = "builder", required_unless_present = "builder")]
        file: Option<PathBuf>,
        #[arg(long, value_enum)]
        builder: Option<BuilderArg>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Try the known block-positive primitive as a certificate.
        #[arg(long)]
        allow_primitives: bool,
        #[command(flatten)]
        search: Search,
    },
    /// Global guessing probability of one ensemble.
    Pg {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "barrier")]
        solver: String,
    },
    /// Print a seeded random ensemble file.
    RandEnsemble {
        /// Local dimensions, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        parties: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleArg {
    Example1,
    Example2,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuilderArg {
    Primitive,
    Example1Violation,
    Zero,
    Ghz,
}

fn common(search: Search, tol: f64, solver: String, allow_primitives: bool) -> Common {
    Common {
        tol,
        restarts: search.restarts,
        iters: search.iters,
        seed: search.seed,
        margin: search.margin,
        allow_primitives,
        solver,
    }
}

fn run(command: Command, output: Output) -> Result<String, CliError> {
    let report: Report = match command {
        Command::Analyze { files, copies, tol, solver, search } => {
            commands::analyze(&files, copies, &common(search, tol, solver, true))?
        }
        Command::Repro { example, d, m, steps, tol, solver, search } => {
            let example = match example {
                ExampleArg::Example1 => Example::Example1,
                ExampleArg::Example2 => Example::Example2,
            };
            commands::repro(example, d, m, steps, &common(search, tol, solver, true))?
        }
        Command::Cone { file, builder, m, d, allow_primitives, search } => {
            let source = match (file, builder) {
                (Some(path), _) => OperatorSource::File(path),
                (None, Some(b)) => {
                    let builder = match b {
                        BuilderArg::Primitive => OperatorBuilder::Primitive,
                        BuilderArg::Example1Violation => OperatorBuilder::Example1Violation,
                        BuilderArg::Zero => OperatorBuilder::Zero,
                        BuilderArg::Ghz => OperatorBuilder::Ghz,
                    };
                    OperatorSource::Builder { builder, m, d }
                }
                (None, None) => return Err(CliError::Input("give an operator file or --builder".into())),
            };
            let defaults = Common::default();
            commands::cone(&source, &common(search, defaults.tol, defaults.solver, allow_primitives))?
        }
        Command::Pg { file, tol, solver } => {
            let c = Common { tol, solver, ..Common::default() };
            commands::pg(&file, &c)?
        }
        Command::RandEnsemble { parties, states, rank, seed } => {
            let file = commands::rand_ensemble(&parties, states, rank, seed)?;
            let json = serde_json::to_string_pretty(&file).map_err(|e| CliError::Internal(e.to_string()))?;
            return Ok(json + "\n");
        }
    };
    Ok(match output {
        Output::Text => report.to_text(),
        Output::Json => report.to_json() + "\n",
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, cli.output) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("seqlocc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
