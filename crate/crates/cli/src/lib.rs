//! Batch front end for `krein_core`: reads a flat configuration, runs one of
//! the `spectrum`, `evolve`, `check` or `report` pipelines and writes CSV,
//! JSON and optional SVG results.

pub mod bundle;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use bundle::ResultBundle;
pub use config::{Command, RawConfig, RunConfig};
pub use error::CliError;
pub use run::{execute, RunOutput};

/// Exit status for a run that completed but found a failed check or a
/// theorem violation.
pub const EXIT_FINDINGS: u8 = 2;
/// Exit status for configuration, input and runtime errors.
pub const EXIT_ERROR: u8 = 1;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CommandArg {
    Spectrum,
    Evolve,
    Check,
    Report,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Spectrum => Command::Spectrum,
            CommandArg::Evolve => Command::Evolve,
            CommandArg::Check => Command::Check,
            CommandArg::Report => Command::Report,
        }
    }
}

/// Spectra, evolution and Krein-space checks for 1D non-Hermitian Hamiltonians.
#[derive(Debug, Parser)]
#[command(name = "krein", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CommandArg,
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override a configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut raw = RawConfig::default();
    if let Some(path) = &cli.config {
        raw.load_file(path)?;
    }
    for (i, s) in cli.set.iter().enumerate() {
        raw.apply_override(s, i + 1)?;
    }
    let mut cfg = RunConfig::from_raw(&raw, cli.command.into())?;
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if cli.plot {
        cfg.output.plot = true;
        cfg.echo.insert("output.plot".into(), "true".into());
    }
    cfg.output.force = cli.force;
    Ok(cfg)
}

/// Runs the command and writes its outputs; returns the process exit status.
pub fn run_cli(cli: &Cli) -> Result<u8, CliError> {
    let cfg = resolve(cli)?;
    let mut out = execute(&cfg)?;
    let mut log = format!(
        "timestamp = {}\ntool = {} {}\ncommand = {}\n",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        out.bundle.provenance.tool,
        out.bundle.provenance.version,
        cfg.command.name(),
    );
    for f in &out.findings {
        log.push_str(&format!("finding = {f}\n"));
    }
    out.artifacts.add("run.log", log);
    let written = out.artifacts.write(&cfg.output.dir, cfg.output.force)?;

    for c in &out.bundle.checks {
        let residual = c.residual.map_or_else(|| "non-finite".to_string(), output::sci);
        println!("{:<20} {:<6} residual {residual}  tol {}", c.name, if c.passed { "pass" } else { "FAIL" }, output::sci(c.tol));
    }
    if let Some(s) = &out.bundle.spectrum {
        println!(
            "spectrum: {} eigenvalues ({} positive, {} negative, {} null, {} unresolved), max |Im| non-null {}",
            s.rows.len(),
            s.n_positive,
            s.n_negative,
            s.n_null,
            s.n_unresolved,
            output::sci(s.max_im_non_null)
        );
    }
    if let Some(e) = &out.bundle.evolution {
        let show = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), output::sci);
        println!(
            "evolution: {} steps, Krein drift {} (rel {}), Dirac drift {} (rel {})",
            e.n_steps,
            show(e.krein_drift.absolute),
            show(e.krein_drift.relative),
            show(e.dirac_drift.absolute),
            show(e.dirac_drift.relative)
        );
    }
    for f in &out.findings {
        println!("finding: {f}");
    }
    println!("wrote {} files to {}", written.len(), cfg.output.dir.display());
    Ok(if out.findings.is_empty() { 0 } else { EXIT_FINDINGS })
}
