use std::path::PathBuf;
use std::process::ExitCode;

use aegen_cli::config::{open_oracle, OracleBlock, ORACLE_ENV};
use aegen_cli::{attack, eval, plot, CliError};
use aegen_core::encoding::dct_dims;
use aegen_core::imaging::read_image;
use aegen_core::oracle::{conformance, Mlp, RemoteConfig};
use aegen_core::scenarios::default_rotations;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aegen", version, about = "Multi-objective black-box adversarial example generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an attack described by a JSON config and export the front.
    Attack {
        config: PathBuf,
        /// Continue from checkpoint.json in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Robustness table of a clean image and an adversarial example under rotation.
    Eval {
        clean: PathBuf,
        ae: PathBuf,
        /// Rotation angles in degrees (default −60…60 step 15).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        angles: Option<Vec<f64>>,
        /// Remote oracle endpoint.
        #[arg(long, env = ORACLE_ENV, conflicts_with = "weights")]
        oracle: Option<String>,
        /// Built-in model weight file.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Labels counted as correct (default: clean top-1).
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the DCT genotype length for a W×H image.
    DctDims {
        #[arg(allow_negative_numbers = true)]
        width: i64,
        #[arg(allow_negative_numbers = true)]
        height: i64,
        #[arg(allow_negative_numbers = true)]
        n_patterns: i64,
        #[arg(allow_negative_numbers = true)]
        n_dct: i64,
    },
    /// Render front.csv as an SVG scatter (one panel per objective pair).
    Plot { front: PathBuf, out: PathBuf },
    /// Check a classification endpoint against the wire protocol.
    Conformance {
        #[arg(env = ORACLE_ENV)]
        endpoint: String,
        /// Compare answers with this built-in model.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
    },
    /// Print the JSON schema of attack configs.
    Schema,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Attack { config, resume } => {
            let outcome = attack::attack(&config, resume)?;
            println!(
                "{} feasible of {} front rows after {} generations ({} queries) -> {}",
                outcome.feasible,
                outcome.rows,
                outcome.generations,
                outcome.nominal_queries,
                outcome.output_dir.display()
            );
            Ok(if outcome.feasible > 0 { 0 } else { 1 })
        }
        Command::Eval { clean, ae, angles, oracle, weights, labels, csv } => {
            let block = match (weights, oracle) {
                (Some(weights), _) => OracleBlock::Builtin { weights },
                (None, Some(endpoint)) => {
                    OracleBlock::Remote { endpoint: Some(endpoint), timeout_ms: 30_000, retries: 2 }
                }
                (None, None) => return Err(CliError::config(format!("pass --weights or --oracle (or set {ORACLE_ENV})"))),
            };
            let oracle = open_oracle(&block)?;
            let clean = read_image(&clean).map_err(|e| CliError::config(format!("{}: {e}", clean.display())))?;
            let ae = read_image(&ae).map_err(|e| CliError::config(format!("{}: {e}", ae.display())))?;
            let angles = angles.unwrap_or_else(default_rotations);
            let (correct, rows) = eval::eval_robustness(&oracle, &clean, &ae, &angles, labels.as_deref())?;
            print!("{}", eval::to_text(&correct, &rows));
            if let Some(path) = csv {
                std::fs::write(path, eval::to_csv(&rows))?;
            }
            Ok(0)
        }
        Command::DctDims { width, height, n_patterns, n_dct } => {
            let args = [width, height, n_patterns, n_dct];
            if args.iter().any(|&a| a <= 0) {
                return Err(CliError::config(format!("all arguments must be positive, got {args:?}")));
            }
            let [w, h, ap, n] = args.map(|a| a as usize);
            println!("{}", dct_dims(w, h, ap, n));
            Ok(0)
        }
        Command::Plot { front, out } => {
            plot::plot_file(&front, &out)?;
            Ok(0)
        }
        Command::Conformance { endpoint, weights, samples, tolerance, timeout_ms } => {
            let reference = match weights {
                Some(path) => Some(Mlp::load(&path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?),
                None => None,
            };
            let config = RemoteConfig { endpoint, timeout_ms, retries: 0 };
            let report = conformance::run(
                &config,
                reference.as_ref().map(|m| (m as &dyn aegen_core::oracle::Backend, samples, tolerance)),
            );
            print!("{report}");
            match report.checks.first() {
                Some(info) if !info.passed => Ok(3),
                _ => Ok(if report.passed() { 0 } else { 1 }),
            }
        }
        Command::Schema => {
            let schema = aegen_cli::config::schema();
            println!("{}", serde_json::to_string_pretty(&schema).map_err(CliError::runtime)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
