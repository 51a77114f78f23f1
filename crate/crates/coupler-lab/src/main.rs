//! `coupler-lab`: tabulates coupler energies, couplings and spectra from a
//! TOML configuration and writes CSV files.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numeric failure,
//! 3 validation failure. Errors end with a one-line JSON record on stderr.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Validation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Validation(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Validation(_) => "validation",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Validation(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl From<nlcoupler::Error> for CliError {
    fn from(e: nlcoupler::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// sin_β, cos_β and the E_g Fourier coefficients
    Series,
    /// Coupler ground energy: exact, series, classical and zero-point parts
    Eg,
    /// E_g′ and E_g″ from the analytic and perturbative routes
    Derivs,
    /// Pauli coupling table at the configured bias
    Couplings,
    /// Spectrum sweep: exact diagonalization against the reduced theories
    Spectrum,
    /// Couplings over a range of coupler biases
    Scan,
    /// Smallest series cutoff for a requested error
    Truncation,
    /// Built-in cross-checks
    Validate,
}

#[derive(Debug, Parser)]
#[command(name = "coupler-lab", version, about = "Nonlinear inductive coupler toolkit")]
struct Args {
    command: Command,
    /// TOML configuration (schema = 1)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Fourier cutoff, overriding [numerics] nu_max
    #[arg(long)]
    nu_max: Option<usize>,
    /// Exact-diagonalization mode truncations, e.g. 40,40,18
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Worker threads; COUPLER_LAB_THREADS takes precedence
    #[arg(long)]
    parallel: Option<usize>,
    /// Report couplings in the persistent-current basis (x <-> z)
    #[arg(long)]
    pc_basis: bool,
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("COUPLER_LAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("COUPLER_LAB_THREADS = {v:?} is not a thread count"))),
        _ => Ok(None),
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = config::load(&args.config)?;
    let ov = config::Overrides {
        nu_max: args.nu_max,
        dims: args.dims.clone(),
        threads: threads_from_env()?.or(args.parallel),
    };
    let res = config::resolve(&cfg, &ov)?;
    let out = args.out.as_path();
    nlcoupler::exec::with_threads(res.threads, || match args.command {
        Command::Series => commands::series(&cfg, &res, out),
        Command::Eg => commands::eg(&cfg, &res, out),
        Command::Derivs => commands::derivs(&cfg, &res, out),
        Command::Couplings => commands::couplings(&cfg, &res, out, args.pc_basis),
        Command::Spectrum => commands::spectrum(&cfg, &res, out),
        Command::Scan => commands::scan(&cfg, &res, out),
        Command::Truncation => commands::truncation(&cfg, &res, out),
        Command::Validate => {
            if commands::validate(&res, out)? {
                Ok(())
            } else {
                Err(CliError::Validation("one or more checks failed".into()))
            }
        }
    })
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("coupler-lab: {} error: {}", e.kind(), e.message());
            eprintln!(
                "{{\"status\":\"error\",\"kind\":\"{}\",\"exit_code\":{},\"message\":\"{}\"}}",
                e.kind(),
                e.code(),
                json_escape(e.message())
            );
            ExitCode::from(e.code())
        }
    }
}
