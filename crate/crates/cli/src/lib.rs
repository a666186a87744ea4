//! Command-line front end for `qcbnorm-core`.
//!
//! ```text
//! qcbnorm compute|verify [--channel FILE]... [--zoo NAME --params K=V...]
//!     [--alpha LIST] [--seed N] [--restarts N] [--trials N] [--dims dA,dB,dE]
//!     [--out PATH] [--format json|csv] [--no-timing] [--tol X] ...
//! ```
//!
//! Exit codes: 0 when every record passes, 1 when any record fails, 2 on
//! input or parse errors (no report is written then).

#![forbid(unsafe_code)]

pub mod channel_file;
pub mod commands;
pub mod report;

use channel_file::{parse_params, ChannelSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{run, Command, Format, RunConfig, Tolerances};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse channel file {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Parser, Debug)]
#[command(name = "qcbnorm", version, about = "Completely bounded quasi-norms, Rényi channel information and dispersion checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Compute quantities for the given channels.
    Compute(CommonArgs),
    /// Certify multiplicativity and additivity on random and named channel pairs.
    Verify(CommonArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Channel JSON file; repeatable.
    #[arg(long = "channel", value_name = "FILE")]
    pub channels: Vec<PathBuf>,
    /// Named channel: identity, trace_map, depolarizing, amplitude_damping, dephasing.
    #[arg(long)]
    pub zoo: Option<String>,
    /// Parameters of the named channel.
    #[arg(long, value_name = "K=V", num_args = 1.., requires = "zoo")]
    pub params: Vec<String>,
    /// Orders α, comma separated.
    #[arg(long = "alpha", value_delimiter = ',', default_value = "0.5,0.7,0.9")]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Random channel pairs sampled by `verify`.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Input, output and environment dimensions of random channels.
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "2,2,2")]
    pub dims: Vec<usize>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Omit timestamps and wall times.
    #[arg(long)]
    pub no_timing: bool,
    /// Override every tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Gap tolerance in bits (multiplicativity, additivity, primal/dual).
    #[arg(long)]
    pub tol_gap: Option<f64>,
    #[arg(long)]
    pub tol_dispersion: Option<f64>,
    /// Trace-distance tolerance of the center check.
    #[arg(long)]
    pub tol_center: Option<f64>,
    #[arg(long)]
    pub tol_cmi: Option<f64>,
}

impl CommonArgs {
    pub fn into_config(self, command: Command) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::new(command);
        cfg.channels = self.channels.into_iter().map(ChannelSpec::File).collect();
        if let Some(name) = &self.zoo {
            cfg.channels.push(ChannelSpec::zoo(name, &parse_params(&self.params)?)?);
        }
        cfg.alphas = self.alphas;
        cfg.seed = self.seed;
        cfg.restarts = self.restarts;
        cfg.trials = self.trials;
        cfg.dims = match self.dims[..] {
            [a, b, e] => (a, b, e),
            _ => return Err(CliError::Input("--dims takes three values".into())),
        };
        cfg.tolerances = match self.tol {
            Some(t) => Tolerances::uniform(t),
            None => Tolerances::default(),
        };
        let t = &mut cfg.tolerances;
        for (slot, v) in [
            (&mut t.gap, self.tol_gap),
            (&mut t.dispersion, self.tol_dispersion),
            (&mut t.center, self.tol_center),
            (&mut t.cmi, self.tol_cmi),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if [t.gap, t.dispersion, t.center, t.cmi, t.convexity].iter().any(|x| !(*x >= 0.0)) {
            return Err(CliError::Input("tolerances must be nonnegative".into()));
        }
        cfg.out = self.out;
        cfg.format = match self.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
        cfg.timing = !self.no_timing;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("QCBNORM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Input(format!("QCBNORM_THREADS = `{v}` is not a positive integer")))?;
        // A pool built earlier in the same process keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the command and writes the report; returns the exit code.
pub fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let report = run(cfg)?;
    let text = match cfg.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    eprintln!(
        "qcbnorm {}: {} records, {} passed, {} failed",
        report.command, report.summary.total, report.summary.passed, report.summary.failed
    );
    Ok(if report.all_pass() { EXIT_PASS } else { EXIT_FAIL })
}

/// Entry point shared by the binary and tests.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| {
        let cfg = match cli.command {
            Sub::Compute(a) => a.into_config(Command::Compute)?,
            Sub::Verify(a) => a.into_config(Command::Verify)?,
        };
        execute(&cfg)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
