//! Command-line front end: argument parsing, configuration and output.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::contours::ContourKind;
use crate::error::{FkError, Result};
use crate::model::{BoundsMode, D2Formula};
use crate::time_marching::TmScheme;

use config::{OutputFormat, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "fk-cim", version, about = "Contour-integral solver for the two-state Feynman-Kac system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate G1, G2 on the configured output times.
    Solve(CommonArgs),
    /// Run the time-marching reference over [0, t1].
    Reference(CommonArgs),
    /// Error against the reference for a range of node counts.
    Converge(CommonArgs),
    /// Node and step counts needed per accuracy target, with timings.
    Bench(CommonArgs),
    /// Mean occupation time of one state.
    Occupation(CommonArgs),
}

/// Flags shared by every subcommand; they override the configuration file.
#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub contour: Option<ContourKind>,
    #[arg(long = "n-nodes")]
    pub n_nodes: Option<usize>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Give the φ = 0 node full weight.
    #[arg(long = "debug-full-weight-k0")]
    pub debug_full_weight_k0: bool,
    #[arg(long = "d2-formula", value_enum)]
    pub d2_formula: Option<D2Formula>,
    #[arg(long, value_enum)]
    pub bounds: Option<BoundsMode>,
    #[arg(long = "tm-scheme", value_enum)]
    pub tm_scheme: Option<TmScheme>,
    /// Time-marching steps for `reference`.
    #[arg(long)]
    pub m: Option<usize>,
}

impl CommonArgs {
    /// Loads the configuration and applies command-line overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(c) = self.contour {
            cfg.contour = c;
        }
        if let Some(n) = self.n_nodes {
            cfg.n_nodes = n;
        }
        if let Some(t) = self.t0 {
            cfg.t0 = t;
        }
        if let Some(t) = self.t1 {
            cfg.t1 = t;
        }
        if let Some(p) = &self.output {
            cfg.output = Some(p.display().to_string());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if self.debug_full_weight_k0 {
            cfg.literal_full_weight_k0 = true;
        }
        if let Some(d) = self.d2_formula {
            cfg.d2_formula = d;
        }
        if let Some(b) = self.bounds {
            cfg.bounds = b;
        }
        if let Some(s) = self.tm_scheme {
            cfg.tm_scheme = s;
        }
        if let Some(m) = self.m {
            cfg.reference.m = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a)
            | Command::Reference(a)
            | Command::Converge(a)
            | Command::Bench(a)
            | Command::Occupation(a) => a,
        }
    }
}

/// Runs one parsed invocation and returns the rendered output and the config used.
pub fn execute(command: &Command) -> Result<(String, RunConfig, Vec<String>)> {
    let cfg = command.args().resolve()?;
    let out = match command {
        Command::Solve(_) => commands::cmd_solve(&cfg)?,
        Command::Reference(_) => commands::cmd_reference(&cfg)?,
        Command::Converge(_) => commands::cmd_converge(&cfg)?,
        Command::Bench(_) => commands::cmd_bench(&cfg)?,
        Command::Occupation(_) => commands::cmd_occupation(&cfg)?,
    };
    Ok((out.table.render(cfg.format, &cfg), cfg, out.warnings))
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command).and_then(|(text, cfg, warnings)| {
        for w in warnings {
            eprintln!("warning: {w}");
        }
        write_output(&text, cfg.output.as_deref())
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_output(text: &str, path: Option<&str>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(FkError::from),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
