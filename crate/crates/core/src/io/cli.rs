use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::commands::{
    cmd_constants, cmd_cool, cmd_fit, cmd_flop, cmd_heatrate, cmd_repro, cmd_scan, CoolArgs, FitArgs, FlopArgs,
    HeatrateArgs, ReproArgs, ScanArgs,
};
use super::config::{ExperimentConfig, CONFIG_ENV};
use crate::error::{Error, Result};

/// Simulation and thermometry for RF sideband cooling of a trapped ion.
#[derive(Debug, Parser)]
#[command(name = "ioncool", version)]
pub struct Cli {
    /// Config file (default: $IONCOOL_CONFIG, else built-in defaults).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config key, `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived constants of the configured trap.
    Constants,
    /// Frequency scan over one sideband.
    Scan(ScanArgs),
    /// Pulsed sideband cooling with the rate map.
    Cool(CoolArgs),
    /// Sideband Rabi flop.
    Flop(FlopArgs),
    /// Closed-loop heating-rate measurement.
    Heatrate(HeatrateArgs),
    /// Fit external CSV data.
    Fit(FitArgs),
    /// Regenerate the data behind one figure.
    Repro(ReproArgs),
    /// Print the effective configuration.
    Config,
}

impl Cli {
    pub fn load_config(&self) -> Result<ExperimentConfig> {
        let path = self
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        let base = match path {
            Some(p) => ExperimentConfig::load(&p)?,
            None => ExperimentConfig::default(),
        };
        base.with_overrides(&self.overrides)
    }

    pub fn execute(&self) -> Result<String> {
        let cfg = self.load_config()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", self.jobs.unwrap_or(0))))?;
        pool.install(|| match &self.command {
            Command::Constants => cmd_constants(&cfg).map(|r| r.to_string()),
            Command::Scan(a) => cmd_scan(&cfg, a).map(|r| r.to_string()),
            Command::Cool(a) => cmd_cool(&cfg, a).map(|r| r.to_string()),
            Command::Flop(a) => cmd_flop(&cfg, a).map(|r| r.to_string()),
            Command::Heatrate(a) => cmd_heatrate(&cfg, a).map(|r| r.to_string()),
            Command::Fit(a) => cmd_fit(&cfg, a).map(|r| r.to_string()),
            Command::Repro(a) => cmd_repro(&cfg, a).map(|r| r.to_string().trim_end().to_string()),
            Command::Config => Ok(cfg.to_text().trim_end().to_string()),
        })
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.execute() {
        Ok(report) => {
            println!("{report}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
