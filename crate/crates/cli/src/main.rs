//! `nlwave`: classification, frequency analysis, solving, scanning,
//! verification, time evolution and export.

mod commands;
mod config;
mod error;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{parse_coeffs, ConfigDocument};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "nlwave", version, about = "Small periodic solutions of u_tt - u_xx + f(u) = 0 on (0, pi)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    Csv,
    Spectrum,
    Loglog,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a nonlinearity given as "k=v,..." Taylor coefficients.
    AnalyzeF {
        #[arg(long)]
        coeffs: String,
    },
    /// Non-resonance margin and admissible indices of a frequency.
    Freq {
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        c: f64,
    },
    /// Solve for one n or every admissible n and write record files.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve over a frequency range and write a table.
    Scan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run verification checks ("all" or comma-separated names).
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate a record in time and measure its return.
    Evolve {
        #[arg(long)]
        record: PathBuf,
        #[arg(long, default_value_t = 1)]
        periods: usize,
    },
    /// Export a record grid or spectrum, or log-log data of a scan table.
    Export {
        #[arg(long, required_unless_present = "table")]
        record: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long, default_value_t = 64)]
        nt: usize,
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::AnalyzeF { coeffs } => commands::analyze_f(&parse_coeffs(&coeffs)?),
        Command::Freq { omega, lmax, coeffs, c } => {
            let f = coeffs.as_deref().map(parse_coeffs).transpose()?;
            if !(0.5..=1.5).contains(&omega) || lmax == 0 || !(c > 0.0) {
                return Err(CliError::Config("need omega in [0.5, 1.5], lmax >= 1 and c > 0".into()));
            }
            commands::freq(omega, lmax, f.as_ref(), c)
        }
        Command::Solve { config } => commands::solve(&ConfigDocument::load(&config)?),
        Command::Scan { config } => commands::scan(&ConfigDocument::load(&config)?),
        Command::Verify { suite, seed } => commands::verify(&suite, seed),
        Command::Evolve { record, periods } => commands::evolve(&record, periods),
        Command::Export { record, table, format, nt, nx, out } => {
            if nt == 0 || nx == 0 {
                return Err(CliError::Config("nt and nx must be >= 1".into()));
            }
            let text = match (format, &record, &table) {
                (ExportFormat::Loglog, _, Some(t)) => {
                    commands::export_loglog(&std::fs::read_to_string(t).map_err(|e| CliError::io(t, e))?)?
                }
                (ExportFormat::Loglog, _, None) => return Err(CliError::Config("loglog export needs --table".into())),
                (ExportFormat::Csv, Some(r), _) => commands::export_grid(&record::read_record(r)?, nt, nx),
                (ExportFormat::Spectrum, Some(r), _) => commands::export_spectrum(&record::read_record(r)?),
                _ => return Err(CliError::Config("csv and spectrum exports need --record".into())),
            };
            match out {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                    Ok(format!("wrote {}\n", path.display()))
                }
                None => Ok(text),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
