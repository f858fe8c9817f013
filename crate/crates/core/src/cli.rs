//! Batch runs behind the `mbstat` binary.
//!
//! Every flag is optional at parse time so that a TOML config file
//! (`--config`) can fill in what the command line leaves out. Flags win.
//! Defaults apply last.
//!
//! Outputs use shortest round-trip decimals and are byte-identical for
//! identical inputs, whatever the thread count.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagstats::{acf_curve, AcfOptions, Aggregate, DEFAULT_SCALE_THRESHOLD};
use crate::moments::{MomentConfig, MomentReport, DEFAULT_MAX_ORDER};
use crate::synth::{gen_tape, SynthMode, SynthParams};
use crate::tape::{parse_csv, CsvFormat, TradeTape};
use crate::windows::{plan_windows, Window, WindowSpec};

#[derive(Debug, Parser)]
#[command(name = "mbstat", version, about = "Market-based price statistics from trade tapes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Stats,
    Acf,
    Compare,
    Synth,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-window moments, VWAP and volatility as JSON lines.
    Stats(RunConfig),
    /// Autocorrelation curve of value, volume and price (JSON, plus CSV next to --output).
    Acf(RunConfig),
    /// Frequency-based vs market-based price moments per window, as CSV.
    Compare(RunConfig),
    /// Synthetic tape as tick,value,volume CSV.
    Synth(RunConfig),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Stats(_) => CommandKind::Stats,
            Command::Acf(_) => CommandKind::Acf,
            Command::Compare(_) => CommandKind::Compare,
            Command::Synth(_) => CommandKind::Synth,
        }
    }

    pub fn config(&self) -> &RunConfig {
        match self {
            Command::Stats(c) | Command::Acf(c) | Command::Compare(c) | Command::Synth(c) => c,
        }
    }
}

fn parse_format(s: &str) -> std::result::Result<CsvFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_aggregate(s: &str) -> std::result::Result<Aggregate, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<SynthMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Flags of every subcommand. Also the schema of the `--config` TOML file,
/// with the same kebab-case keys.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// TOML file supplying any flag not given on the command line.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Input tape CSV; stdin when absent or "-".
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent or "-".
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<CsvFormat>,
    /// Seconds per grid tick [default: 1].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Window width N in ticks, odd.
    #[arg(long)]
    pub window_n: Option<usize>,
    /// Step between window centers, in ticks [default: N].
    #[arg(long)]
    pub lag_step: Option<i64>,
    /// Highest moment order [default: 4, cap 8].
    #[arg(long)]
    pub max_order: Option<u32>,
    /// Largest lag in ticks, a multiple of the lag step.
    #[arg(long)]
    pub max_lag: Option<i64>,
    #[arg(long, value_parser = parse_aggregate)]
    pub aggregate: Option<Aggregate>,
    /// Relative threshold for correlation scales [default: 0.05].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Records a window needs to be valid [default: 1].
    #[arg(long)]
    pub min_trades: Option<usize>,
    /// Worker threads; falls back to MBSTAT_THREADS.
    #[arg(long, env = "MBSTAT_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<SynthMode>,
    #[arg(long)]
    pub len: Option<usize>,
    #[arg(long)]
    pub tau_a: Option<f64>,
    #[arg(long)]
    pub tau_b: Option<f64>,
    #[arg(long)]
    pub sigma_a: Option<f64>,
    #[arg(long)]
    pub sigma_b: Option<f64>,
    #[arg(long)]
    pub mean_a: Option<f64>,
    #[arg(long)]
    pub mean_b: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        RunConfig { config: $flags.config.clone(), $($field: $flags.$field.clone().or($file.$field),)* }
    };
}

impl RunConfig {
    /// Fills unset fields from `file`.
    pub fn overlay(&self, file: RunConfig) -> RunConfig {
        overlay!(
            self, file, input, output, format, epsilon, window_n, lag_step, max_order, max_lag,
            aggregate, threshold, min_trades, threads, mode, len, tau_a, tau_b, sigma_a, sigma_b,
            mean_a, mean_b, seed
        )
    }

    /// Applies `--config` if present.
    pub fn resolve_file(&self) -> Result<RunConfig> {
        match &self.config {
            None => Ok(self.clone()),
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let file: RunConfig =
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                Ok(self.overlay(file))
            }
        }
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        let n = self.window_n.ok_or_else(|| Error::param("--window-n is required"))?;
        let step = self.lag_step.unwrap_or(n as i64);
        WindowSpec::new(n, step)?.with_min_trades(self.min_trades.unwrap_or(1))
    }

    pub fn moment_config(&self) -> Result<MomentConfig> {
        MomentConfig::new(self.max_order.unwrap_or(DEFAULT_MAX_ORDER))
    }

    pub fn acf_options(&self) -> Result<AcfOptions> {
        let max_lag = self.max_lag.ok_or_else(|| Error::param("--max-lag is required"))?;
        Ok(AcfOptions {
            max_lag_ticks: max_lag,
            aggregate: self.aggregate.unwrap_or_default(),
            threshold: self.threshold.unwrap_or(DEFAULT_SCALE_THRESHOLD),
        })
    }

    pub fn synth_params(&self) -> Result<SynthParams> {
        let d = SynthParams::default();
        let p = SynthParams {
            mode: self.mode.unwrap_or(d.mode),
            length_ticks: self.len.unwrap_or(d.length_ticks),
            persistence_a_ticks: self.tau_a.unwrap_or(d.persistence_a_ticks),
            persistence_b_ticks: self.tau_b.unwrap_or(d.persistence_b_ticks),
            sigma_a: self.sigma_a.unwrap_or(d.sigma_a),
            sigma_b: self.sigma_b.unwrap_or(d.sigma_b),
            mean_a: self.mean_a.unwrap_or(d.mean_a),
            mean_b: self.mean_b.unwrap_or(d.mean_b),
            seed: self.seed.unwrap_or(d.seed),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn read_tape(&self) -> Result<TradeTape> {
        let format = self.format.unwrap_or_default();
        let epsilon = self.epsilon.unwrap_or(1.0);
        match self.input.as_deref() {
            None => parse_csv(io::stdin().lock(), format, epsilon),
            Some(p) if p == Path::new("-") => parse_csv(io::stdin().lock(), format, epsilon),
            Some(p) => parse_csv(BufReader::new(open(p)?), format, epsilon),
        }
    }

    fn thread_pool(&self) -> Result<Option<rayon::ThreadPool>> {
        match self.threads {
            None => Ok(None),
            Some(0) => Err(Error::param("--threads must be >= 1")),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(Some)
                .map_err(|e| Error::param(format!("thread pool: {e}"))),
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

/// Machine-readable account of a run, including everything that was flagged
/// rather than produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: CommandKind,
    pub records: usize,
    pub windows_planned: usize,
    pub windows_valid: usize,
    /// Centers of windows below `min_trades`.
    pub windows_flagged: Vec<i64>,
    /// Windows whose volatility came out negative.
    pub negative_volatility: usize,
    /// `(center, lag)` cells without surviving pairs; center absent in mean mode.
    pub empty_acf_points: Vec<(Option<i64>, i64)>,
    pub warnings: Vec<String>,
}

impl RunSummary {
    fn new(command: CommandKind, records: usize) -> Self {
        Self {
            command,
            records,
            windows_planned: 0,
            windows_valid: 0,
            windows_flagged: Vec::new(),
            negative_volatility: 0,
            empty_acf_points: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn note_windows(&mut self, windows: &[Window], spec: &WindowSpec) {
        self.windows_planned = windows.len();
        self.windows_valid = windows.iter().filter(|w| w.is_valid()).count();
        self.windows_flagged = windows.iter().filter(|w| !w.is_valid()).map(Window::center_tick).collect();
        if !self.windows_flagged.is_empty() {
            self.warnings.push(format!(
                "{} window(s) have fewer than {} trades and were skipped",
                self.windows_flagged.len(),
                spec.min_trades()
            ));
        }
    }
}

fn planned_or_no_data(tape: &TradeTape, spec: &WindowSpec) -> Result<Vec<Window>> {
    if tape.is_empty() {
        return Err(Error::no_data("tape has no records"));
    }
    let windows = plan_windows(tape, spec);
    if windows.is_empty() {
        return Err(Error::no_data(format!(
            "tape spans {} ticks, shorter than the window width {}",
            tape.span_ticks(),
            spec.width()
        )));
    }
    Ok(windows)
}

fn reports(tape: &TradeTape, windows: &[Window], cfg: &MomentConfig) -> Result<Vec<MomentReport>> {
    windows
        .par_iter()
        .filter(|w| w.is_valid())
        .map(|w| MomentReport::for_window(w, tape, cfg))
        .collect()
}

/// One JSON line per valid window, in center order.
pub fn write_stats<W: Write>(
    tape: &TradeTape,
    spec: &WindowSpec,
    cfg: &MomentConfig,
    mut out: W,
) -> Result<RunSummary> {
    let windows = planned_or_no_data(tape, spec)?;
    let mut summary = RunSummary::new(CommandKind::Stats, tape.len());
    summary.note_windows(&windows, spec);
    let reports = reports(tape, &windows, cfg)?;
    for r in &reports {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    summary.negative_volatility = reports.iter().filter(|r| r.volatility_negative).count();
    if summary.negative_volatility > 0 {
        summary.warnings.push(format!(
            "{} window(s) have negative market-based volatility",
            summary.negative_volatility
        ));
    }
    out.flush()?;
    Ok(summary)
}

/// `center_tick,n,freq_price,market_price,difference` with `difference = freq - market`.
pub fn write_compare<W: Write>(
    tape: &TradeTape,
    spec: &WindowSpec,
    cfg: &MomentConfig,
    mut out: W,
) -> Result<RunSummary> {
    let windows = planned_or_no_data(tape, spec)?;
    let mut summary = RunSummary::new(CommandKind::Compare, tape.len());
    summary.note_windows(&windows, spec);
    writeln!(out, "center_tick,n,freq_price,market_price,difference")?;
    for r in reports(tape, &windows, cfg)? {
        for (i, d) in r.divergence().iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.center_tick,
                i + 1,
                r.freq_price_moments[i],
                r.market_price_moments[i],
                d
            )?;
        }
    }
    out.flush()?;
    Ok(summary)
}

/// Pretty JSON curve to `json`, flat CSV to `csv` when given.
pub fn write_acf<W: Write>(
    tape: &TradeTape,
    spec: &WindowSpec,
    options: &AcfOptions,
    mut json: W,
    csv: Option<&mut dyn Write>,
) -> Result<RunSummary> {
    let windows = planned_or_no_data(tape, spec)?;
    let mut summary = RunSummary::new(CommandKind::Acf, tape.len());
    summary.note_windows(&windows, spec);
    let curve = acf_curve(tape, spec, options)?;
    serde_json::to_writer_pretty(&mut json, &curve)?;
    writeln!(json)?;
    json.flush()?;
    if let Some(csv) = csv {
        curve.write_csv(&mut *csv)?;
        csv.flush()?;
    }
    summary.empty_acf_points = curve.empty.iter().map(|e| (e.center_tick, e.lag_ticks)).collect();
    if !curve.empty.is_empty() {
        summary
            .warnings
            .push(format!("{} (center, lag) cell(s) had no surviving pairs", curve.empty.len()));
    }
    Ok(summary)
}

pub fn write_synth<W: Write>(params: &SynthParams, out: W) -> Result<RunSummary> {
    let tape = gen_tape(params)?;
    tape.emit_csv(out)?;
    Ok(RunSummary::new(CommandKind::Synth, tape.len()))
}

fn with_output<T>(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<T>) -> Result<T> {
    match path {
        Some(p) if p != Path::new("-") => {
            let mut w = BufWriter::new(create(p)?);
            let r = f(&mut w)?;
            w.flush()?;
            Ok(r)
        }
        _ => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            let r = f(&mut w)?;
            w.flush()?;
            Ok(r)
        }
    }
}

fn in_pool<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match cfg.thread_pool()? {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

pub fn run_stats(cfg: &RunConfig) -> Result<RunSummary> {
    let spec = cfg.window_spec()?;
    let moments = cfg.moment_config()?;
    let tape = cfg.read_tape()?;
    in_pool(cfg, || with_output(cfg.output.as_deref(), |w| write_stats(&tape, &spec, &moments, w)))
}

pub fn run_compare(cfg: &RunConfig) -> Result<RunSummary> {
    let spec = cfg.window_spec()?;
    let moments = cfg.moment_config()?;
    let tape = cfg.read_tape()?;
    in_pool(cfg, || with_output(cfg.output.as_deref(), |w| write_compare(&tape, &spec, &moments, w)))
}

/// CSV path written next to a JSON output: same stem, `.csv` extension.
pub fn acf_csv_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("csv")
}

pub fn run_acf(cfg: &RunConfig) -> Result<RunSummary> {
    let spec = cfg.window_spec()?;
    let options = cfg.acf_options()?;
    let tape = cfg.read_tape()?;
    in_pool(cfg, || match cfg.output.as_deref() {
        Some(p) if p != Path::new("-") => {
            let csv_path = acf_csv_path(p);
            if csv_path == p {
                return Err(Error::param("--output must not end in .csv for acf; the CSV is written next to it"));
            }
            let mut csv = BufWriter::new(create(&csv_path)?);
            let json = BufWriter::new(create(p)?);
            write_acf(&tape, &spec, &options, json, Some(&mut csv))
        }
        _ => with_output(None, |w| write_acf(&tape, &spec, &options, w, None)),
    })
}

pub fn run_synth(cfg: &RunConfig) -> Result<RunSummary> {
    let params = cfg.synth_params()?;
    with_output(cfg.output.as_deref(), |w| write_synth(&params, w))
}

/// Resolves `--config` and dispatches.
pub fn execute(command: &Command) -> Result<RunSummary> {
    let cfg = command.config().resolve_file()?;
    match command.kind() {
        CommandKind::Stats => run_stats(&cfg),
        CommandKind::Acf => run_acf(&cfg),
        CommandKind::Compare => run_compare(&cfg),
        CommandKind::Synth => run_synth(&cfg),
    }
}
