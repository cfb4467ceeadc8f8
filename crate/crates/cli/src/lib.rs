//! Configuration-driven front end for `antonov-core`: parses a sectioned
//! config, runs the requested stage of the pipeline on a sized worker pool
//! and writes CSV/JSON/text artifacts stamped with the config hash.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use artifacts::{emit_report, render_report, ReportDocument, ReportFormat, SCHEMA_VERSION};
pub use commands::Run;
pub use config::RunConfig;
pub use error::{CliError, ConfigError, EXIT_CONFIG, EXIT_NUMERICS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the steady state and write its radial table.
    Solve,
    /// Tabulate radial periods over the support.
    Periods,
    /// Bands, trace bound, eigencurves and modes.
    Spectrum,
    /// Polytrope majorant against its envelope.
    Bounds,
    /// Full pipeline and human-readable summary.
    Report,
    /// Check the structural assumptions of the state.
    Validate,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "antonov", version, about = "Radial Antonov spectrum of self-gravitating equilibria")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[outputs] directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved. Every method is deterministic and the value is ignored.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `[grids] lambda_points`.
    #[arg(long, global = true)]
    pub lambda_points: Option<usize>,
}

impl Cli {
    /// The effective configuration: file (or defaults) plus flag overrides.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.lambda_points {
            if p < 2 {
                return Err(ConfigError::at(0, format!("--lambda-points must be at least 2, got {p}")).into());
            }
            cfg.grids.lambda_points = p;
        }
        if let Some(out) = &self.out {
            cfg.outputs.directory = out.clone();
        }
        Ok(cfg)
    }
}

/// Executes one subcommand and returns the text printed on success.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let run = Run::new(cli.run_config()?);
    let threads = cli
        .threads
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    if cli.seed.is_some() {
        log::debug!("--seed is reserved and has no effect");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    log::info!("{:?} with {threads} thread(s), config {}", cli.command, run.hash);
    pool.install(|| dispatch(cli.command, &run))
}

fn dispatch(command: Command, run: &Run) -> Result<String, CliError> {
    let out = run.out.display();
    match command {
        Command::Solve => {
            let h = commands::solve(run)?.header();
            Ok(format!("M = {:.16e}, R0 = {:.16e}, E0 = {:.16e} -> {out}", h.mass, h.r0, h.e0))
        }
        Command::Periods => {
            let ss = commands::solve_state(run)?;
            let t = commands::periods(run, &ss)?;
            Ok(format!("{} orbits -> {out}", t.rows.len()))
        }
        Command::Spectrum => {
            let ss = commands::solve_state(run)?;
            let rep = commands::spectrum(run, &ss)?;
            Ok(format!("{} -> {out}", rep.verdict()))
        }
        Command::Bounds => {
            let ss = commands::solve_state(run)?;
            let rep = commands::bounds(run, &ss)?;
            Ok(format!(
                "C_best = {:.6e}, refined {:.6e}, stable: {}, integrable: {} -> {out}",
                rep.c_best, rep.c_best_refined, rep.pass, rep.integrable
            ))
        }
        Command::Report => {
            let doc = commands::report(run)?;
            render_report(&doc, ReportFormat::Text)
        }
        Command::Validate => {
            let ss = commands::solve_state(run)?;
            let body = commands::validate(run, &ss)?;
            let v = body.violations();
            if v.is_empty() {
                Ok(format!(
                    "assumptions satisfied; |φ'| integral routes differ by {:.3e}",
                    body.assumptions.relative_gap
                ))
            } else {
                Err(CliError::Validation(v.join("; ")))
            }
        }
    }
}
