use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pbs::analysis::SlaOutcome;
use pbs::export::{export_curves, export_replication, export_sla, export_tradeoff, Format};
use pbs::PropagationProfile;
use tempfile::NamedTempFile;

use crate::api::{self, ApiError, Operation, SweepResult};
use crate::config::{load_scenario, FieldError, ScenarioConfig};
use crate::server::{self, ServeOptions, DEFAULT_MAX_TRIALS};

#[derive(Debug, Parser)]
#[command(name = "pbs", version, about = "Staleness bounds and Monte Carlo simulation for partial quorum replication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact staleness probabilities for random quorums.
    ///
    /// Prints the probability of a stale read with 12 significant digits;
    /// with --load, prints the quorum load bound on a second line.
    ClosedForm(ClosedFormArgs),
    /// Estimate staleness (or latency percentiles) by simulation; prints JSON.
    Simulate(SimulateArgs),
    /// Consistency curves along the axis in the scenario's `sweep` block (t if absent).
    Sweep(ExportArgs),
    /// Latency and t-visibility for each (r, w) pair at fixed n.
    Table(ExportArgs),
    /// Lowest-latency configuration meeting the scenario's `sla` block.
    Sla(ExportArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ClosedFormArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub w: u32,
    /// Versions of staleness tolerated.
    #[arg(long)]
    pub k: Option<u32>,
    /// Writes per read; gives the monotonic-reads bound.
    #[arg(long, conflicts_with = "k")]
    pub ratio: Option<f64>,
    /// Strict monotonic reads (requires --ratio).
    #[arg(long, requires = "ratio")]
    pub strict: bool,
    /// JSON propagation profile; gives the t-visibility bound at --t.
    #[arg(long, requires = "t", conflicts_with = "ratio")]
    pub profile_file: Option<PathBuf>,
    /// Milliseconds after commit (with --profile-file).
    #[arg(long)]
    pub t: Option<f64>,
    /// Also print the lower bound on quorum load.
    #[arg(long)]
    pub load: bool,
}

/// Scenario source: a JSON file, overridden field by field by flags.
#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lnkd-ssd, lnkd-disk, ymmr or wan.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub w: Option<u32>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Milliseconds after commit.
    #[arg(long)]
    pub t: Option<f64>,
    /// Comma-separated times after commit, in ms.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    /// Comma-separated consistency targets for t-visibility.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<f64>>,
    #[arg(long)]
    pub k: Option<u32>,
}

impl ScenarioArgs {
    fn resolve(&self) -> anyhow::Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_scenario(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(p) = &self.preset {
            cfg.preset = Some(p.clone());
            cfg.distributions = None;
        }
        macro_rules! set {
            ($($field:ident <- $flag:ident),*) => {$(
                if let Some(v) = self.$flag.clone() {
                    cfg.$field = Some(v);
                }
            )*};
        }
        set!(n <- n, r <- r, w <- w, trials <- trials, seed <- seed, t_ms <- t, t_grid <- t_grid, targets <- targets, k <- k);
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Report read/write latency percentiles instead of staleness.
    #[arg(long)]
    pub latency: bool,
    /// Extra latency percentiles, comma-separated.
    #[arg(long, value_delimiter = ',', requires = "latency")]
    pub percentiles: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Output file; only created if the run succeeds.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Requests asking for more trials are clamped to this.
    #[arg(long, default_value_t = DEFAULT_MAX_TRIALS, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_trials: u64,
    /// Directory of static files served outside /api.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or missing input the user can correct.
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        match e {
            ApiError::Field(f) => f.into(),
            ApiError::Core(e) => CliError::Runtime(e.into()),
        }
    }
}

/// Fixed-point for ordinary magnitudes, scientific below 1e-4.
pub fn significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    if magnitude < -4 {
        format!("{v:.*e}", digits - 1)
    } else {
        let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

fn closed_form(args: &ClosedFormArgs, out: &mut impl Write) -> Result<(), CliError> {
    let profile: Option<PropagationProfile> = match &args.profile_file {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Some(serde_json::from_reader(io::BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };
    let cfg = ScenarioConfig {
        n: Some(args.n),
        r: Some(args.r),
        w: Some(args.w),
        k: args.k,
        ratio: args.ratio,
        strict_monotonic: args.strict.then_some(true),
        profile,
        t_ms: args.t,
        ..ScenarioConfig::default()
    };
    let (_, result) = api::closed_form(&cfg)?;
    let mut text = significant(result.p_stale, 12);
    if args.load {
        text.push('\n');
        text.push_str(&significant(result.load_bound, 12));
    }
    writeln!(out, "{text}").context("writing output")?;
    Ok(())
}

fn simulate(args: &SimulateArgs, out: &mut impl Write) -> Result<(), CliError> {
    let mut cfg = args.scenario.resolve()?;
    let op = if args.latency {
        if let Some(p) = &args.percentiles {
            cfg.percentiles = Some(p.clone());
        }
        Operation::Latency
    } else {
        Operation::Estimate
    };
    let result = api::execute(op, &cfg)?;
    serde_json::to_writer_pretty(&mut *out, &result).context("writing output")?;
    writeln!(out).context("writing output")?;
    Ok(())
}

/// Writes through a temporary file in the destination directory so a failed
/// run never leaves a partial file at `path`.
fn write_atomically(path: &Path, write: impl FnOnce(&mut BufWriter<&mut NamedTempFile>) -> pbs::Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
    {
        let mut buf = BufWriter::new(&mut tmp);
        write(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn fmt_t(t: Option<f64>) -> String {
    t.map_or_else(|| "not reached".to_string(), |t| format!("{t:.3} ms"))
}

fn sweep(args: &ExportArgs, out: &mut impl Write) -> Result<(), CliError> {
    let cfg = args.scenario.resolve()?;
    let (_, result) = api::sweep(&cfg)?;
    let format = args.format.into();
    write_atomically(&args.out, |f| match &result {
        SweepResult::T { curves, .. } | SweepResult::WriteDistribution { curves, .. } => {
            export_curves(curves, format, f)
        }
        SweepResult::N { points, .. } => export_replication(points, format, f),
        SweepResult::Rw { table } => export_tradeoff(table, format, f),
    })?;
    let summary = match &result {
        SweepResult::Rw { table } => format!("{} rows", table.rows.len()),
        other => other
            .crossings()
            .iter()
            .map(|c| format!("{} reaches {} at {}", c.label, c.target, fmt_t(c.t_ms)))
            .collect::<Vec<_>>()
            .join("; "),
    };
    writeln!(out, "{summary} -> {}", args.out.display()).context("writing output")?;
    Ok(())
}

fn table(args: &ExportArgs, out: &mut impl Write) -> Result<(), CliError> {
    let cfg = args.scenario.resolve()?;
    let (_, table) = api::table(&cfg)?;
    write_atomically(&args.out, |f| export_tradeoff(&table, args.format.into(), f))?;
    writeln!(out, "n={}: {} rows -> {}", table.n, table.rows.len(), args.out.display()).context("writing output")?;
    Ok(())
}

fn sla(args: &ExportArgs, out: &mut impl Write) -> Result<(), CliError> {
    let cfg = args.scenario.resolve()?;
    let (_, report) = api::sla(&cfg)?;
    write_atomically(&args.out, |f| export_sla(&report, args.format.into(), f))?;
    let summary = match &report.outcome {
        SlaOutcome::Feasible { winner } => format!(
            "winner N={} R={} W={} objective={:.3} ms consistency={:.6}",
            winner.n, winner.r, winner.w, winner.objective_ms, winner.consistency.p_hat
        ),
        SlaOutcome::Infeasible { closest: Some(c) } => format!(
            "infeasible; closest N={} R={} W={} consistency={:.6}",
            c.n, c.r, c.w, c.consistency.p_hat
        ),
        SlaOutcome::Infeasible { closest: None } => "infeasible; no configuration satisfies the durability bound".into(),
    };
    writeln!(out, "{summary} -> {}", args.out.display()).context("writing output")?;
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let opts = ServeOptions {
        max_trials: args.max_trials,
        static_dir: args.static_dir.clone(),
    };
    if let Some(dir) = &opts.static_dir {
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("--static-dir {} is not a directory", dir.display())));
        }
    }
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async {
        let addr = SocketAddr::new(args.host, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr().context("resolving address")?);
        server::serve(listener, opts).await.context("serving")?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(())
}

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<(), CliError> {
    match &cli.command {
        Command::ClosedForm(a) => closed_form(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Table(a) => table(a, out),
        Command::Sla(a) => sla(a, out),
        Command::Serve(a) => serve(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(8.0 / 27.0, 12), "0.296296296296");
        assert_eq!(significant(0.0, 12), "0");
        assert_eq!(significant(1.884_283e-6, 3), "1.88e-6");
        assert_eq!(significant(12.5, 4), "12.50");
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(&path, r#"{"n":3,"r":1,"w":1,"preset":"ymmr","trials":10,"seed":1}"#).unwrap();
        let cli = Cli::try_parse_from(["pbs", "simulate", "--config", path.to_str().unwrap(), "--seed", "9", "--r", "2"]).unwrap();
        let Command::Simulate(args) = cli.command else { panic!() };
        let cfg = args.scenario.resolve().unwrap();
        assert_eq!((cfg.seed, cfg.r, cfg.trials), (Some(9), Some(2), Some(10)));
    }
}
