//! Command-line interface: one subcommand per experiment.
//!
//! Flag precedence is CLI over `--config` file over built-in defaults; the
//! fully resolved configuration is echoed into every JSON output. Exit codes:
//! 0 success, 1 validation error, 2 runtime failure, 3 excessive
//! trial-failure rate.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::lattice::Boundary;
use crate::runner::{
    self, load_config, AlphaParams, GenerateParams, HeatkernelParams, LilParams, TailParams,
    VolumeParams, WalkParams,
};
use crate::walks::WalkKind;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "percolil",
    version,
    about = "Monte Carlo walks on percolation clusters"
)]
pub struct Cli {
    /// Worker threads (default: PERCOLIL_THREADS, then the hardware count).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a bond configuration and write the binary bond file.
    Generate(GenerateArgs),
    /// Simulate coupled trajectories from a bond file; emit trajectory CSV.
    Walk(WalkArgs),
    /// Checkpointed |walk|/phi running maxima and the scaling estimate.
    Lil(LilArgs),
    /// Endpoint histogram of the jump chain and its Gaussian-shape fit.
    Heatkernel(HeatkernelArgs),
    /// Degree statistics seen from the walker and both alpha estimators.
    Alpha(AlphaArgs),
    /// Chemical-ball volumes (and optionally the growth-exponent fit).
    Volume(VolumeArgs),
    /// Tail curve of the maximal chemical displacement.
    Tail(TailArgs),
}

fn parse_boundary(s: &str) -> std::result::Result<Boundary, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_walk(s: &str) -> std::result::Result<WalkKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `lo..hi` inclusive integer range.
fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected lo..hi")?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad range start: {e}"))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad range end: {e}"))?;
    Ok((lo, hi))
}

/// A parsed gamma grid; the newtype keeps clap from treating the inner
/// vector as a multi-occurrence argument.
#[derive(Debug, Clone)]
pub struct GammaGrid(pub Vec<f64>);

/// Comma-separated list, or `lo..hi:step`.
fn parse_gammas(s: &str) -> std::result::Result<GammaGrid, String> {
    if let Some((range, step)) = s.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or("expected lo..hi:step")?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad start: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad end: {e}"))?;
        let step: f64 = step.trim().parse().map_err(|e| format!("bad step: {e}"))?;
        if !(step > 0.0 && hi >= lo) {
            return Err("need lo <= hi and step > 0".into());
        }
        let mut out = Vec::new();
        let mut i = 0;
        loop {
            let g = lo + step * i as f64;
            if g > hi + 1e-12 {
                break;
            }
            out.push(g);
            i += 1;
        }
        Ok(GammaGrid(out))
    } else {
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse()
                    .map_err(|e| format!("bad gamma {tok:?}: {e}"))
            })
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map(GammaGrid)
    }
}

macro_rules! override_field {
    ($params:expr, $cli:expr => $($field:ident),+ $(,)?) => {
        $(if let Some(v) = $cli.$field.clone() { $params.$field = v; })+
    };
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// JSON config file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GenerateArgs {
    pub fn resolved(&self) -> Result<GenerateParams> {
        let mut params: GenerateParams = match &self.config {
            Some(path) => load_config(path)?,
            None => GenerateParams::default(),
        };
        override_field!(params, self => d, l, p, seed, boundary, out);
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bond file produced by `generate`.
    #[arg(long)]
    bonds: Option<PathBuf>,
    #[arg(long, value_parser = parse_walk)]
    mode: Option<WalkKind>,
    /// Discrete horizon (myopic or blind modes).
    #[arg(long)]
    steps: Option<u64>,
    /// Real-time horizon (ctsrw mode).
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also emit checkpoint series at this geometric ratio.
    #[arg(long = "checkpoint-q")]
    checkpoint_q: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl WalkArgs {
    pub fn resolved(&self) -> Result<WalkParams> {
        let mut params: WalkParams = match &self.config {
            Some(path) => load_config(path)?,
            None => WalkParams::default(),
        };
        override_field!(params, self => bonds, mode, trials, seed, t0, out);
        if self.steps.is_some() {
            params.steps = self.steps;
        }
        if self.tmax.is_some() {
            params.tmax = self.tmax;
        }
        if self.checkpoint_q.is_some() {
            params.checkpoint_q = self.checkpoint_q;
        }
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct LilArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    /// Box half-width (default: 4 sqrt(horizon)).
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Conditioned environments shared round-robin by the trials.
    #[arg(long)]
    envs: Option<usize>,
    #[arg(long, value_parser = parse_walk)]
    walk: Option<WalkKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-attempts")]
    max_attempts: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-checkpoint CSV of the requested walk.
    #[arg(long = "series-out")]
    series_out: Option<PathBuf>,
}

impl LilArgs {
    pub fn resolved(&self) -> Result<LilParams> {
        let mut params: LilParams = match &self.config {
            Some(path) => load_config(path)?,
            None => LilParams::default(),
        };
        override_field!(params, self => p, d, boundary, q, t0, horizon, trials, envs, walk, seed, max_attempts, out);
        if self.l.is_some() {
            params.l = self.l;
        }
        if self.series_out.is_some() {
            params.series_out = self.series_out.clone();
        }
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct HeatkernelArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    /// Jump-count horizon of the myopic walk.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-attempts")]
    max_attempts: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Endpoint histogram CSV.
    #[arg(long = "hist-out")]
    hist_out: Option<PathBuf>,
}

impl HeatkernelArgs {
    pub fn resolved(&self) -> Result<HeatkernelParams> {
        let mut params: HeatkernelParams = match &self.config {
            Some(path) => load_config(path)?,
            None => HeatkernelParams::default(),
        };
        override_field!(params, self => p, d, boundary, t, trials, seed, max_attempts, out);
        if self.l.is_some() {
            params.l = self.l;
        }
        if self.hist_out.is_some() {
            params.hist_out = self.hist_out.clone();
        }
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shared environment from a bond file (otherwise one per trial).
    #[arg(long)]
    bonds: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    /// Myopic jump budget per trial.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-attempts")]
    max_attempts: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl AlphaArgs {
    pub fn resolved(&self) -> Result<AlphaParams> {
        let mut params: AlphaParams = match &self.config {
            Some(path) => load_config(path)?,
            None => AlphaParams::default(),
        };
        override_field!(params, self => p, d, l, boundary, steps, trials, seed, max_attempts, out);
        if self.bonds.is_some() {
            params.bonds = self.bonds.clone();
        }
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Measure the origin's cluster of this bond file.
    #[arg(long)]
    bonds: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    /// Conditioned clusters to sample (ignored with --bonds).
    #[arg(long)]
    clusters: Option<usize>,
    /// Inclusive radius range, e.g. 10..60.
    #[arg(long, value_parser = parse_range)]
    radii: Option<(u32, u32)>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-attempts")]
    max_attempts: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report with the pooled log-log fit.
    #[arg(long = "fit-out")]
    fit_out: Option<PathBuf>,
}

impl VolumeArgs {
    pub fn resolved(&self) -> Result<VolumeParams> {
        let mut params: VolumeParams = match &self.config {
            Some(path) => load_config(path)?,
            None => VolumeParams::default(),
        };
        override_field!(params, self => p, d, l, boundary, clusters, seed, max_attempts, out);
        if let Some((lo, hi)) = self.radii {
            params.radii_min = lo;
            params.radii_max = hi;
        }
        if self.bonds.is_some() {
            params.bonds = self.bonds.clone();
        }
        if self.fit_out.is_some() {
            params.fit_out = self.fit_out.clone();
        }
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    /// Horizon in the chosen walk's clock.
    #[arg(long)]
    n: Option<f64>,
    /// Comma list or lo..hi:step, e.g. 0.2..2.0:0.2.
    #[arg(long, value_parser = parse_gammas)]
    gammas: Option<GammaGrid>,
    #[arg(long, value_parser = parse_walk)]
    walk: Option<WalkKind>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    envs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-attempts")]
    max_attempts: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "curve-out")]
    curve_out: Option<PathBuf>,
}

impl TailArgs {
    pub fn resolved(&self) -> Result<TailParams> {
        let mut params: TailParams = match &self.config {
            Some(path) => load_config(path)?,
            None => TailParams::default(),
        };
        override_field!(params, self => p, d, boundary, n, walk, trials, envs, seed, max_attempts, out);
        if let Some(grid) = &self.gammas {
            params.gammas = grid.0.clone();
        }
        if self.l.is_some() {
            params.l = self.l;
        }
        if self.curve_out.is_some() {
            params.curve_out = self.curve_out.clone();
        }
        Ok(params)
    }
}

/// Run a parsed command; returns the one-line summary for stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    let pool = runner::thread_pool(cli.threads)?;
    pool.install(|| match &cli.command {
        Command::Generate(args) => {
            let params = args.resolved()?;
            let report = runner::run_generate(&params)?;
            Ok(format!(
                "wrote {} ({} of {} edges open, fraction {:.4})",
                params.out.display(),
                report.open_edges,
                report.potential_edges,
                report.open_fraction
            ))
        }
        Command::Walk(args) => {
            let params = args.resolved()?;
            let report = runner::run_walk(&params)?;
            Ok(format!(
                "wrote {} ({} trials, {} rows, {} censored)",
                params.out.display(),
                report.trials,
                report.rows,
                report.censored_trials
            ))
        }
        Command::Lil(args) => {
            let params = args.resolved()?;
            let report = runner::run_lil(&params)?;
            Ok(format!(
                "wrote {} (c_hat {:.4}, band [{:.4}, {:.4}], censoring {:.4})",
                params.out.display(),
                report.estimate.point,
                report.estimate.band_low,
                report.estimate.band_high,
                report.censoring_rate
            ))
        }
        Command::Heatkernel(args) => {
            let params = args.resolved()?;
            let report = runner::run_heatkernel(&params)?;
            Ok(format!(
                "wrote {} (slope {:.4}, R^2 {:.4}, {} bins)",
                params.out.display(),
                report.fit.slope,
                report.fit.r_squared,
                report.fit.bins
            ))
        }
        Command::Alpha(args) => {
            let params = args.resolved()?;
            let report = runner::run_alpha(&params)?;
            Ok(format!(
                "wrote {} (alpha_direct {:.4}, alpha_from_ik {:.4})",
                params.out.display(),
                report.alpha_direct,
                report.alpha_from_ik
            ))
        }
        Command::Volume(args) => {
            let params = args.resolved()?;
            let report = runner::run_volume(&params)?;
            match report.fit {
                Some(fit) => Ok(format!(
                    "wrote {} (slope {:.4}, R^2 {:.4})",
                    params.out.display(),
                    fit.slope,
                    fit.r_squared
                )),
                None => Ok(format!("wrote {}", params.out.display())),
            }
        }
        Command::Tail(args) => {
            let params = args.resolved()?;
            let report = runner::run_tail(&params)?;
            Ok(format!(
                "wrote {} ({} gammas, {} trials used, censoring {:.4})",
                params.out.display(),
                report.curve.len(),
                report.trials_used,
                report.censoring_rate
            ))
        }
    })
}
