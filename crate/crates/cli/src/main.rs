use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use specinv_cli::{configure_threads, run, CliError, Report, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "specinv", version, about = "Seeded numerical checks with JSON reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured suites and print the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the suite named in the config.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export one series of a report as CSV.
    Csv {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        series: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, suite, seed, out } => {
            let mut cfg = SuiteConfig::load(&config)?;
            if let Some(s) = suite {
                cfg.suite = s.parse::<Suite>()?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            configure_threads()?;
            let report = run(&cfg)?;
            let text = report.to_json();
            print!("{text}");
            if let Some(path) = out {
                std::fs::write(&path, &text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            }
            for r in report.records.iter().filter(|r| r.status == specinv_cli::Status::Fail) {
                eprintln!("FAIL {} measured={:?} bound={:?} {}", r.name, r.measured, r.bound, r.note.as_deref().unwrap_or(""));
            }
            match report.failures() {
                0 => Ok(()),
                n => Err(CliError::CheckFailure(n)),
            }
        }
        Command::Csv { report, series, out } => Report::load(&report)?.write_csv(&series, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("specinv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
