use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sylvenc::harness::{check_enclosure, generate, run_benchmark, BenchConfig, Family, GenSpec, EXIT_OK, EXIT_UNVERIFIED};
use sylvenc::{solve, Enclosure, Method, SolveOptions, System};

/// Verified enclosures for interval equations A X B + C X D = F.
#[derive(Parser)]
#[command(name = "sylvenc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enclose the solution set of a system read from JSON.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "mkw")]
        method: Method,
        /// Write the enclosure here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Sample member solutions and count those inside an enclosure.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        enclosure: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a generated test system as JSON.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        m: usize,
        /// Defaults to `m`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time and compare methods over a size sweep.
    Bench {
        #[arg(long, default_value = "kyc31")]
        family: Family,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1e-6)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "mkw,itr")]
        methods: Vec<Method>,
        /// Sampled member solutions per size, skipped above the baseline cap.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = sylvenc::baseline::DEFAULT_CAP)]
    baseline_cap: usize,
    /// Krawczyk iteration cap.
    #[arg(long, default_value_t = sylvenc::mkw::DEFAULT_KMAX)]
    kmax: usize,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            kmax: self.kmax,
            tol: self.tol,
            max_iter: self.max_iter,
            baseline_cap: self.baseline_cap,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

fn read_system(path: &Path) -> sylvenc::Result<System> {
    let sys: System = serde_json::from_str(&fs::read_to_string(path)?)?;
    sys.validate()?;
    Ok(sys)
}

fn emit(output: Option<&Path>, text: &str) -> sylvenc::Result<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> sylvenc::Result<i32> {
    match cli.command {
        Command::Solve {
            input,
            method,
            output,
            solver,
        } => {
            let sys = read_system(&input)?;
            let enc = solve(&sys, method, &solver.options())?;
            emit(output.as_deref(), &(serde_json::to_string_pretty(&enc)? + "\n"))?;
            if !enc.verified {
                eprintln!("{method}: not verified: {}", enc.message.as_deref().unwrap_or("no reason given"));
                return Ok(EXIT_UNVERIFIED);
            }
            Ok(EXIT_OK)
        }
        Command::Check {
            input,
            enclosure,
            samples,
            seed,
        } => {
            let sys = read_system(&input)?;
            let enc: Enclosure = serde_json::from_str(&fs::read_to_string(&enclosure)?)?;
            let report = check_enclosure(&sys, &enc, samples, seed)?;
            println!("{report}");
            Ok(report.exit_code())
        }
        Command::Gen {
            family,
            m,
            n,
            alpha,
            seed,
            output,
        } => {
            let sys = generate(&GenSpec {
                family,
                m,
                n: n.unwrap_or(m),
                alpha,
                seed,
            })?;
            emit(output.as_deref(), &(serde_json::to_string_pretty(&sys)? + "\n"))?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            family,
            sizes,
            alpha,
            seed,
            methods,
            samples,
            repeats,
            format,
            output,
            solver,
        } => {
            let report = run_benchmark(&BenchConfig {
                family,
                sizes,
                alpha,
                seed,
                methods,
                samples,
                repeats,
                solve: solver.options(),
            })?;
            let text = match format {
                Format::Csv => report.to_csv(),
                Format::Jsonl => report.to_jsonl()?,
            };
            emit(output.as_deref(), &text)?;
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
