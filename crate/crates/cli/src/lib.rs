//! Command-line front end: loads a run configuration, runs the checks of one
//! subcommand in a fixed order and writes a reproducible report.
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 configuration
//! error, 3 the barycenter solver did not converge.

pub mod anchors;
mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use report::{write_file, ReportDocument, Runner, Status, Timings};

#[derive(Debug, Parser)]
#[command(name = "entlab", version, about = "Entropy rigidity experiments with reproducible reports")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `[run] seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory (default: `[output] dir`, then $ENTLAB_OUT_DIR, then ./entlab-out).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the report document on stdout instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the sweep tables as CSV.
    #[arg(long, global = true)]
    pub csv: bool,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Minimal-entropy scaling profile of the configured product.
    Entropy,
    /// Volume growth slopes of the product, unscaled and scaled.
    Growth(GrowthArgs),
    /// Barycenter solver, the forms H and K, and the Jacobian bound.
    Barycenter(BarycenterArgs),
    /// Randomized campaign against the determinant inequality.
    Bcg(TolArg),
    /// Energy of the finite natural maps.
    NaturalMap(TolArg),
    /// Shortcut model: corner lemma, distances, entropy sweep, branching.
    Shortcut(ShortcutArgs),
    /// Net graphs, approximation, GH bounds and transport on a sample space.
    Ghnet(TolArg),
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    /// Overrides `[growth] rho_hi`.
    #[arg(long)]
    pub rho_max: Option<f64>,
    /// Overrides `[growth] slope_tol`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BarycenterArgs {
    /// Overrides `[quadrature] count`.
    #[arg(long)]
    pub quad_count: Option<usize>,
    /// Overrides `[solver] tol`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TolArg {
    /// Overrides the subcommand's main tolerance: `[bcg] equality_tol`,
    /// `[natural_map] slack` or `[ghnet] eps`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ShortcutArgs {
    /// Overrides `[shortcut] etas` (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    /// Overrides `[shortcut] rho_hi`.
    #[arg(long)]
    pub rho_max: Option<f64>,
    /// Overrides `[shortcut] near_one_tol`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Entropy,
    Growth,
    Barycenter,
    Bcg,
    NaturalMap,
    Shortcut,
    Ghnet,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::Growth => "growth",
            Command::Barycenter => "barycenter",
            Command::Bcg => "bcg",
            Command::NaturalMap => "natural-map",
            Command::Shortcut => "shortcut",
            Command::Ghnet => "ghnet",
        }
    }
}

impl CliCommand {
    fn kind(&self) -> Command {
        match self {
            CliCommand::Entropy => Command::Entropy,
            CliCommand::Growth(_) => Command::Growth,
            CliCommand::Barycenter(_) => Command::Barycenter,
            CliCommand::Bcg(_) => Command::Bcg,
            CliCommand::NaturalMap(_) => Command::NaturalMap,
            CliCommand::Shortcut(_) => Command::Shortcut,
            CliCommand::Ghnet(_) => Command::Ghnet,
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        match self {
            CliCommand::Entropy => {}
            CliCommand::Growth(a) => {
                set(&mut cfg.growth.rho_hi, a.rho_max);
                set(&mut cfg.growth.slope_tol, a.tol);
            }
            CliCommand::Barycenter(a) => {
                set(&mut cfg.quadrature.count, a.quad_count);
                set(&mut cfg.solver.tol, a.tol);
            }
            CliCommand::Bcg(a) => set(&mut cfg.bcg.equality_tol, a.tol),
            CliCommand::NaturalMap(a) => set(&mut cfg.natural_map.slack, a.tol),
            CliCommand::Ghnet(a) => set(&mut cfg.ghnet.eps, a.tol),
            CliCommand::Shortcut(a) => {
                set(&mut cfg.shortcut.etas, a.eta.clone());
                set(&mut cfg.shortcut.rho_hi, a.rho_max);
                set(&mut cfg.shortcut.near_one_tol, a.tol);
            }
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Reads, overrides and validates the configuration for one invocation.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::general(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|mut e| {
                e.message = format!("{} ({})", e.message, path.display());
                e
            })?
        }
        None => RunConfig::default(),
    };
    cfg.resolve_subcommand(cli.command.kind())?;
    set(&mut cfg.run.seed, cli.seed);
    cli.command.apply(&mut cfg);
    cfg.validate().map_err(|mut e| {
        e.message = format!("{} (after command-line overrides)", e.message);
        e
    })?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Runs the checks of `cmd`. Setup problems that prevent any check from
/// running (an unreadable input space, say) are configuration errors.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Runner, ConfigError> {
    let mut runner = Runner::new();
    match cmd {
        Command::Entropy => commands::entropy::run(cfg, &mut runner),
        Command::Growth => commands::growth::run(cfg, &mut runner),
        Command::Barycenter => commands::barycenter::run(cfg, &mut runner),
        Command::Bcg => commands::bcg::run(cfg, &mut runner),
        Command::NaturalMap => commands::natural::run(cfg, &mut runner),
        Command::Shortcut => commands::shortcut::run(cfg, &mut runner),
        Command::Ghnet => commands::ghnet::run(cfg, &mut runner)?,
    }
    Ok(runner)
}

/// Assembles the report document for a finished run.
pub fn document(cmd: Command, cfg: &RunConfig, runner: &Runner) -> ReportDocument {
    let name = cmd.name();
    ReportDocument {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name.to_string(),
        status: runner.status,
        config: cfg.clone(),
        records: runner.records.clone(),
        tables: runner.tables.iter().map(|t| format!("{name}.{}.csv", t.name)).collect(),
        timings_file: format!("{name}.timings.json"),
    }
}

fn write_outputs(
    dir: &Path,
    cmd: Command,
    doc: &ReportDocument,
    runner: &Runner,
    csv: bool,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let name = cmd.name();
    let mut written = Vec::new();
    let report = dir.join(format!("{name}.json"));
    write_file(&report, &(serde_json::to_string_pretty(doc)? + "\n"))?;
    written.push(report);
    let timings =
        Timings { subcommand: name.to_string(), total_seconds: runner.elapsed(), checks: runner.timings.clone() };
    let tpath = dir.join(&doc.timings_file);
    write_file(&tpath, &(serde_json::to_string_pretty(&timings)? + "\n"))?;
    if csv {
        for (t, file) in runner.tables.iter().zip(&doc.tables) {
            let p = dir.join(file);
            write_file(&p, &t.to_csv())?;
            written.push(p);
        }
    }
    Ok(written)
}

/// A finished invocation: the report and the files written for it.
pub struct Invocation {
    pub document: ReportDocument,
    pub written: Vec<PathBuf>,
}

/// Resolves the configuration, runs the checks and writes the outputs,
/// without printing. Errors carry the message and the exit code.
pub fn execute(cli: &Cli) -> Result<Invocation, (String, i32)> {
    let config_error = |e: ConfigError| (e.to_string(), Status::ConfigError.exit_code());
    let cfg = resolve_config(cli).map_err(config_error)?;
    let cmd = cli.command.kind();
    let runner = run(cmd, &cfg).map_err(config_error)?;
    let document = document(cmd, &cfg, &runner);
    let dir = out_dir(cli, &cfg);
    let written = write_outputs(&dir, cmd, &document, &runner, cli.csv || cfg.output.csv)
        .map_err(|e| (format!("cannot write to {}: {e}", dir.display()), Status::ConfigError.exit_code()))?;
    Ok(Invocation { document, written })
}

/// [`execute`] on a full argument list, the program name first.
pub fn execute_args<I, T>(args: I) -> Result<Invocation, (String, i32)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| (e.to_string(), Status::ConfigError.exit_code()))?;
    execute(&cli)
}

/// Entry point of the binary; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::ConfigError.exit_code() } else { 0 };
        }
    };
    let Invocation { document: doc, written } = match execute(&cli) {
        Ok(inv) => inv,
        Err((message, code)) => {
            eprintln!("{message}");
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if cli.json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    } else {
        for r in &doc.records {
            let _ = writeln!(out, "{} {:<34} {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.summary);
        }
        let failed = doc.records.iter().filter(|r| !r.pass).count();
        let _ = writeln!(
            out,
            "{}: {} checks, {} failed; wrote {}",
            name_of(doc.status),
            doc.records.len(),
            failed,
            written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
        );
    }
    doc.status.exit_code()
}

fn name_of(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::CheckFailure => "check failure",
        Status::NonConvergence => "non-convergence",
        Status::ConfigError => "config error",
    }
}
