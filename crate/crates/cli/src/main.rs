//! `vulnmap`: ingest package and CVE dumps into a workspace, map CVEs onto
//! packages, and export frequency reports.

mod ingest;
mod map;
mod report;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vulnmap_core::report::{ExportFormat, ReportKind, DEFAULT_TOP_K, DEFAULT_TOP_LINKS};
use vulnmap_core::store::Workspace;

#[derive(Debug, Parser)]
#[command(name = "vulnmap", version, about = "Map CVE entries onto open-source packages")]
struct Cli {
    /// Workspace directory holding every pipeline stage.
    #[arg(long, global = true, env = "VULNMAP_WORKSPACE", default_value = "vulnmap-workspace")]
    workspace: PathBuf,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the package CSV, version CSV and CVE JSON into the workspace.
    Ingest(IngestArgs),
    /// Run the mapping strategies over the ingested records.
    Map(MapArgs),
    /// Export frequency reports.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Package metadata CSV (optionally gzip-compressed).
    #[arg(long)]
    packages: PathBuf,
    /// CVE dump: a JSON array or newline-delimited JSON (optionally gzip-compressed).
    #[arg(long)]
    cves: PathBuf,
    /// Version metadata CSV (optionally gzip-compressed).
    #[arg(long)]
    versions: Option<PathBuf>,
    /// TOML file overriding column names, CVE field names and platform aliases.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Strict,
    Fuzzy,
    Repository,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    All,
    First,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// Platform lookup table (TOML); the bundled table is used otherwise.
    #[arg(long)]
    lookup: Option<PathBuf>,
    /// Minimum fuzzy similarity for the partial strategy.
    #[arg(long, default_value_t = vulnmap_core::fuzzy::DEFAULT_CUTOFF, value_parser = parse_cutoff)]
    cutoff: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    strategy: Vec<StrategyArg>,
    /// Repository counting mode; both modes are written when omitted.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Also match Go packages on the last segment of their module path.
    #[arg(long)]
    go_last_segment: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report names separated by commas, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all", value_parser = parse_report)]
    report: Vec<String>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ExportFormat,
    /// Ranked rows before the `Others` bucket in share reports.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    /// Rows in the repository link report.
    #[arg(long, default_value_t = DEFAULT_TOP_LINKS)]
    top_links: usize,
}

fn parse_cutoff(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("cutoff must be within [0, 1], got {v}"))
    }
}

fn parse_report(s: &str) -> Result<String, String> {
    if s == "all" || s.parse::<ReportKind>().is_ok() {
        return Ok(s.to_string());
    }
    let names: Vec<&str> = ReportKind::ALL.iter().map(|k| k.name()).collect();
    Err(format!("expected `all` or one of: {}", names.join(", ")))
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let workspace = Workspace::create(&cli.workspace)?;
    let _lock = workspace.lock()?;
    match cli.command {
        Command::Ingest(args) => ingest::run(&workspace, &args),
        Command::Map(args) => map::run(&workspace, &args),
        Command::Report(args) => report::run(&workspace, &args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(usize::from(n));
    }
    let outcome = match pool.build() {
        Ok(pool) => pool.install(|| run(cli)),
        Err(e) => Err(e.into()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
