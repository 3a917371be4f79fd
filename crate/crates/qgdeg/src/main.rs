use clap::{Parser, Subcommand};
use qgdeg::cli::{
    cmd_check, cmd_chi, cmd_classify, cmd_demo, cmd_hj, cmd_markov_enumerate,
    cmd_markov_mutate, cmd_markov_verify, cmd_mres, load_divisor, load_fan, parse_int_arg,
    parse_triple_arg, CliError, CmdResult,
};
use qgdeg::report::render;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exact-arithmetic certificates for the numerical invariants of
/// Q-Gorenstein degenerations: continued fractions, link homology, toric
/// M-resolutions, Riemann-Roch orthogonality ledgers, and Markov-type
/// equations.
#[derive(Parser)]
#[command(name = "qgdeg", version)]
struct Cli {
    /// Print only the machine-readable JSON report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continued-fraction and class-T invariants of 1/m(1,q).
    Hj { m: String, q: String },
    /// Classify the singular points of a fan file.
    Classify { fan: PathBuf },
    /// M-resolve every class-T cone of a fan file.
    Mres { fan: PathBuf },
    /// Check the lifting-criterion hypotheses of a divisor on a fan.
    Check { fan: PathBuf, divisor: PathBuf },
    /// Block ledgers and the chi matrix at one class-T point.
    Chi {
        fan: PathBuf,
        divisor: PathBuf,
        /// 1-based cone index of the class-T point in the input fan.
        #[arg(long)]
        point: usize,
        /// Also print the chi matrix under the n^2+1 second-Chern-class
        /// constant, for comparison only.
        #[arg(long = "paper-c2")]
        paper_c2: bool,
    },
    /// Markov-type equation tools.
    Markov {
        #[command(subcommand)]
        cmd: MarkovCommand,
    },
    /// Run the end-to-end pipeline on the built-in degenerate cubic data.
    Demo {
        /// Directory holding edited copies of the fixture files.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MarkovCommand {
    /// Check a triple against d1 r1^2 + d2 r2^2 + d3 r3^2 = lambda r1r2r3.
    Verify {
        /// Multiplicities d1,d2,d3.
        d: String,
        /// K^2 of the general fiber; lambda = sqrt(K^2 d1 d2 d3).
        ksq: String,
        /// The triple r1,r2,r3.
        r: String,
    },
    /// Replace one entry by the companion root of its quadratic.
    Mutate {
        d: String,
        ksq: String,
        r: String,
        /// Slot to mutate (1..=3).
        #[arg(long)]
        index: usize,
    },
    /// Breadth-first solution tree from a seed, pruned above a bound.
    Enumerate {
        d: String,
        ksq: String,
        /// Seed triple r1,r2,r3.
        #[arg(long)]
        seed: String,
        /// Prune solutions whose maximal entry exceeds this bound.
        #[arg(long)]
        bound: String,
    },
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Hj { m, q } => {
            let m = parse_int_arg(&m, "m")?;
            let q = parse_int_arg(&q, "q")?;
            cmd_hj(&m, &q)
        }
        Command::Classify { fan } => cmd_classify(&load_fan(&fan)?),
        Command::Mres { fan } => cmd_mres(&load_fan(&fan)?),
        Command::Check { fan, divisor } => {
            let fan = load_fan(&fan)?;
            let d = load_divisor(&divisor, &fan)?;
            cmd_check(&fan, &d)
        }
        Command::Chi {
            fan,
            divisor,
            point,
            paper_c2,
        } => {
            let fan = load_fan(&fan)?;
            let d = load_divisor(&divisor, &fan)?;
            cmd_chi(&fan, &d, point, paper_c2)
        }
        Command::Markov { cmd } => match cmd {
            MarkovCommand::Verify { d, ksq, r } => {
                let d = parse_triple_arg(&d, "d")?;
                let ksq = parse_int_arg(&ksq, "ksq")?;
                let r = parse_triple_arg(&r, "r")?;
                cmd_markov_verify(&d, &ksq, &r)
            }
            MarkovCommand::Mutate { d, ksq, r, index } => {
                let d = parse_triple_arg(&d, "d")?;
                let ksq = parse_int_arg(&ksq, "ksq")?;
                let r = parse_triple_arg(&r, "r")?;
                cmd_markov_mutate(&d, &ksq, &r, index)
            }
            MarkovCommand::Enumerate { d, ksq, seed, bound } => {
                let d = parse_triple_arg(&d, "d")?;
                let ksq = parse_int_arg(&ksq, "ksq")?;
                let seed = parse_triple_arg(&seed, "seed")?;
                let bound = parse_int_arg(&bound, "bound")?;
                cmd_markov_enumerate(&d, &ksq, &seed, &bound)
            }
        },
        Command::Demo { fixtures } => cmd_demo(fixtures.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(outcome) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report).expect("report serializes")
                );
            } else {
                print!("{}", render(&outcome.report));
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let kind = match &e {
                CliError::Usage(_) => "usage error",
                CliError::Io(_) => "io error",
                CliError::Math(_) => "invalid input",
            };
            eprintln!("qgdeg: {kind}: {e}");
            ExitCode::from(2)
        }
    }
}
