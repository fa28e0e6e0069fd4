use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use dialectica::cli::{self, CliError, Options, Report, Workspace};

#[derive(Parser)]
#[command(name = "dialectica", version, about = "Dialectica triples, realizer extraction and LOOP_D")]
struct Cli {
    /// Workspace file (TOML) with budgets, model and contracts.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Nat inputs range over 0..=N (default 8).
    #[arg(long, global = true, value_name = "N")]
    budget_nat: Option<u64>,
    #[arg(long, global = true, value_name = "D")]
    fn_depth: Option<usize>,
    #[arg(long, global = true, value_name = "K")]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Append wall-clock time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Print the signature and matrix of each formula in a file.
    Translate { file: PathBuf },
    /// Synthesize a derivation script and test every obligation.
    Check { file: PathBuf },
    /// Synthesize a derivation script and print its realizers.
    Extract { file: PathBuf },
    /// Run a LOOP_D command forward and backward.
    Run {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        dual: String,
        #[arg(long)]
        trace: bool,
    },
    /// Gradient of a VecR command by its backward pass.
    Grad {
        file: PathBuf,
        #[arg(long)]
        point: String,
        /// Covector to pull back; all ones when omitted.
        #[arg(long)]
        covector: Option<String>,
    },
    /// Run the built-in battery.
    Selftest,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let workspace = match &cli.config {
        Some(p) => Workspace::load(p)?,
        None => Workspace::default(),
    };
    let mut opts = Options {
        workspace,
        budget_nat: cli.budget_nat,
        fn_depth: cli.fn_depth,
        seed: cli.seed,
        trace: false,
    };
    opts.budget().validate()?;
    match &cli.command {
        Command::Translate { file } => cli::translate(&read(file)?, &opts),
        Command::Check { file } => cli::check(&read(file)?, &opts),
        Command::Extract { file } => cli::extract(&read(file)?, &opts),
        Command::Run { file, state, dual, trace } => {
            opts.trace = *trace;
            cli::run(&read(file)?, state, dual, &opts)
        }
        Command::Grad { file, point, covector } => cli::grad(&read(file)?, point, covector.as_deref(), &opts),
        Command::Selftest => cli::selftest(&opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let start = Instant::now();
    match execute(&cli) {
        Ok(mut report) => {
            if cli.timing {
                report.timing_ms = Some(start.elapsed().as_millis());
            }
            match cli.format {
                Format::Text => print!("{}", report.to_text()),
                Format::Structured => print!("{}", report.to_structured()),
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
