use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pepin::{Backend, ExactMethod, DEFAULT_DELTA, DEFAULT_EPSILON};
use pepin_cli::{
    cmd_exact, cmd_gen, cmd_verify, count_formula, load_formula, mem, CliError, CountOptions, EXIT_OK,
    EXIT_PARAMETER, EXIT_VERIFY_FAILED,
};

#[derive(Parser)]
#[command(name = "pepin", version, about = "Approximate model counting for DNF formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Dense,
    Sparse,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Dense => Backend::Dense,
            BackendArg::Sparse => Backend::Sparse,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Brute,
    Incexc,
}

#[derive(clap::Args)]
struct Accuracy {
    /// Tolerance: the estimate is within (1 +/- eps) of the true count
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Failure probability
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, value_enum, default_value = "dense")]
    backend: BackendArg,
    /// Accept an empty cube; the count is then exactly 2^n
    #[arg(long)]
    allow_tautology: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of satisfying assignments
    Count {
        file: PathBuf,
        #[command(flatten)]
        accuracy: Accuracy,
        #[arg(long, env = "PEPIN_SEED", default_value_t = 0)]
        seed: u64,
        /// Print the full report as JSON
        #[arg(long)]
        json: bool,
        /// Print store payload and peak RSS growth during counting to stderr
        #[arg(long, hide = true)]
        mem_stats: bool,
    },
    /// Count exactly (small instances only)
    Exact {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long)]
        allow_tautology: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random formula with fixed-width cubes
    Gen {
        #[arg(long)]
        vars: u32,
        #[arg(long)]
        cubes: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, env = "PEPIN_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare repeated estimates against the exact count
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[command(flatten)]
        accuracy: Accuracy,
        /// First seed; run i uses seed + i
        #[arg(long = "seeds", env = "PEPIN_SEED", default_value_t = 1)]
        base_seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn options(accuracy: &Accuracy, seed: u64) -> CountOptions {
    CountOptions {
        epsilon: accuracy.epsilon,
        delta: accuracy.delta,
        seed,
        backend: accuracy.backend.into(),
        allow_tautology: accuracy.allow_tautology,
    }
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Count { file, accuracy, seed, json, mem_stats } => {
            let opts = options(&accuracy, seed);
            opts.validate()?;
            let formula = load_formula(&file, opts.allow_tautology)?;
            let baseline = mem_stats.then(|| (mem::reset_peak_rss(), mem::current_rss()));
            let report = count_formula(&file, &formula, &opts)?;
            if let Some((reset, before)) = baseline {
                let payload = (report.thresh as usize * formula.num_vars() as usize).div_ceil(4);
                let delta = match (reset, before, mem::peak_rss()) {
                    (true, Some(b), Some(p)) => serde_json::json!(p.saturating_sub(b)),
                    _ => serde_json::Value::Null,
                };
                eprintln!("{}", serde_json::json!({ "payload_bytes": payload, "peak_rss_delta_bytes": delta }));
            }
            if json {
                println!("{}", serde_json::to_string(&report).unwrap());
            } else {
                print!("{}", report.to_human());
            }
            Ok(EXIT_OK)
        }
        Command::Exact { file, method, allow_tautology, json } => {
            let method = match method {
                MethodArg::Auto => None,
                MethodArg::Brute => Some(ExactMethod::Brute),
                MethodArg::Incexc => Some(ExactMethod::InclusionExclusion),
            };
            let report = cmd_exact(&file, method, allow_tautology)?;
            if json {
                println!("{}", serde_json::to_string(&report).unwrap());
            } else {
                println!("{}", report.count);
            }
            Ok(EXIT_OK)
        }
        Command::Gen { vars, cubes, width, seed, output } => {
            let text = cmd_gen(vars, cubes, width, seed, output.as_deref())?;
            if output.is_none() {
                print!("{text}");
            }
            Ok(EXIT_OK)
        }
        Command::Verify { file, runs, accuracy, base_seed, json } => {
            let summary = cmd_verify(&file, runs, base_seed, &options(&accuracy, base_seed))?;
            if json {
                println!("{}", serde_json::to_string(&summary).unwrap());
            } else {
                println!(
                    "{}: exact {} ({}), {} runs\nwithin eps: {:.3}  mean rel. error: {:.4}  max rel. error: {:.4}\n{}",
                    summary.file.display(),
                    summary.exact,
                    summary.method,
                    summary.runs,
                    summary.fraction_within,
                    summary.mean_relative_error,
                    summary.max_relative_error,
                    if summary.passed { "PASS" } else { "FAIL" },
                );
            }
            Ok(if summary.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARAMETER as u8 } else { EXIT_OK as u8 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
