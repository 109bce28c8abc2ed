//! Command-line front end: `sweep`, `validate`, `mc` and `foxh`.
//!
//! Every command reads a flat dotted-key TOML file (see [`config`]); without
//! `--config` the shipped reference setup is used. Flags override the
//! matching `sweep.*` keys. Output is CSV: `#` lines with the resolved
//! configuration, then a header row, then data rows.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{foxh, run_mc, run_sweep, validate};
pub use config::{Config, Metric, Mode, SweepSpec};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "thzfade", version, about = "THz link outage, BER and capacity over FTR fading with pointing errors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the configured metric over the (L, φ, γ₀) grid.
    Sweep(CommonArgs),
    /// Cross-check analytic results against Monte Carlo; exits 1 on failure.
    Validate(CommonArgs),
    /// Monte Carlo estimates in the sweep schema.
    Mc(CommonArgs),
    /// Evaluate the Fox H function described by the foxh.* keys.
    Foxh(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file (defaults to the reference setup).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path (defaults to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// exact, asymptotic, mc, all, or a comma-separated list.
    #[arg(long)]
    pub mode: Option<String>,
    /// Relative tolerance of deterministic checks (Fox H: contour tolerance).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl CommonArgs {
    /// Load the config and apply flag overrides.
    pub fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Config::from_toml_str(&text)?
            }
            None => Config::reference(),
        };
        if let Some(s) = self.seed {
            cfg.sweep.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.sweep.samples = n;
        }
        if let Some(m) = &self.mode {
            cfg.sweep.modes = Mode::parse_set(m)?;
        }
        if let Some(t) = self.tolerance {
            cfg.sweep.tolerance = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Run a parsed command; `Ok(false)` means validation found failures.
pub fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Sweep(a) => a.emit(&run_sweep(&a.resolve()?, "sweep")?).map(|_| true),
        Command::Mc(a) => a.emit(&run_mc(&a.resolve()?)?).map(|_| true),
        Command::Foxh(a) => a.emit(&foxh(&a.resolve()?)?).map(|_| true),
        Command::Validate(a) => {
            let (report, passed) = validate(&a.resolve()?)?;
            a.emit(&report)?;
            Ok(passed)
        }
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
