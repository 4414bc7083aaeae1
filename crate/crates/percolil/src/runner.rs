//! Experiment configuration, the parallel trial runner, and artifact output.
//!
//! Every experiment resolves to a parameter struct (defaults, then config
//! file, then CLI flags), derives all randomness from one master seed
//! (environment `e` from `child(Env, e)`, trial `i` from `child(Trial, i)`),
//! runs trials in a rayon pool, and aggregates in trial order. Results are
//! therefore byte-identical across thread budgets; the thread budget is an
//! execution knob and is deliberately not part of the echoed config. No
//! timestamps are emitted anywhere.
//!
//! Summaries are JSON (with the resolved config and crate version embedded),
//! per-checkpoint and per-site series are CSV, and bond configurations use
//! the binary layout documented in [`crate::percolation`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    displacement_tail, estimate_lil_constant, gaussian_fit, ring_sizes, track_checkpoints,
    volume_growth_fit, CheckpointSeries, DisplacementHistogram, GaussianFit, LilEstimate,
    TailPoint, VolumeFit, MIN_LIL_TRIALS, MIN_VOLUME_RADIUS,
};
use crate::cluster::{component_view, sample_conditioned, ClusterView};
use crate::environment::{
    alpha_direct, alpha_from_ik, environment_stats_from_coupled, EnvironmentStats,
};
use crate::geometry::DistanceField;
use crate::lattice::{Boundary, LatticeSpec};
use crate::percolation::BondConfiguration;
use crate::rng::{Domain, Stream};
use crate::walks::{max_chemical_displacement, run_coupled, WalkKind};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default box half-width for a displacement horizon: generous enough that
/// censoring stays under about a percent.
pub fn default_half_width(horizon: f64) -> u32 {
    (4.0 * horizon.sqrt()).ceil() as u32
}

fn validate_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("p", format!("must be in (0, 1], got {p}")))
    }
}

fn warn_if_subcritical(p: f64, d: usize) {
    // Reference thresholds: exact 1/2 in d = 2, literature value in d = 3.
    let p_c = match d {
        2 => Some(0.5),
        3 => Some(0.2488),
        _ => None,
    };
    if let Some(p_c) = p_c {
        if p <= p_c {
            eprintln!("warning: p = {p} is at or below the critical point ~{p_c} for d = {d}; conditioning may fail");
        }
    }
}

/// Resolve the rayon pool: explicit flag, then `PERCOLIL_THREADS`, then the
/// hardware default.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = threads.or_else(|| {
        std::env::var("PERCOLIL_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))
}

/// Run `trials` independent closures, tolerating at most 10% failures.
/// Results come back in trial order with failures as `None`.
fn collect_trials<T: Send>(
    trials: usize,
    run: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<(Vec<Option<T>>, usize)> {
    let raw: Vec<Result<T>> = (0..trials).into_par_iter().map(run).collect();
    let failed = raw.iter().filter(|r| r.is_err()).count();
    if failed * 10 > trials {
        let first = raw
            .iter()
            .find_map(|r| r.as_ref().err().map(|e| e.to_string()))
            .unwrap_or_default();
        return Err(Error::ExcessiveFailures {
            failed,
            total: trials,
            first,
        });
    }
    Ok((raw.into_iter().map(|r| r.ok()).collect(), failed))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::invalid("json", e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn to_json_string(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

fn conditioned_views(
    spec: LatticeSpec,
    p: f64,
    master: &Stream,
    envs: usize,
    max_attempts: u32,
) -> Result<Vec<ClusterView>> {
    (0..envs)
        .map(|e| {
            let seed = master.child(Domain::Env, e as u64).key();
            Ok(sample_conditioned(spec, p, seed, max_attempts)?.view)
        })
        .collect()
}

fn view_from_bond_file(path: &Path) -> Result<ClusterView> {
    let bonds = BondConfiguration::read_from_path(path)?;
    let origin = bonds.spec().origin();
    let view = component_view(bonds, origin);
    if view.open_degree(origin) == 0 {
        return Err(Error::IsolatedStart);
    }
    Ok(view)
}

// ---------------------------------------------------------------------------
// generate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateParams {
    pub d: usize,
    pub l: u32,
    pub p: f64,
    pub seed: u64,
    pub boundary: Boundary,
    pub out: PathBuf,
}

impl Default for GenerateParams {
    fn default() -> Self {
        GenerateParams {
            d: 2,
            l: 64,
            p: 0.5,
            seed: 1,
            boundary: Boundary::Torus,
            out: "bonds.perc".into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GenerateReport {
    pub version: String,
    pub config: GenerateParams,
    pub open_edges: u64,
    pub potential_edges: u64,
    pub open_fraction: f64,
}

pub fn run_generate(params: &GenerateParams) -> Result<GenerateReport> {
    validate_p(params.p)?;
    warn_if_subcritical(params.p, params.d);
    let spec = LatticeSpec::new(params.d, params.l, params.boundary)?;
    let bonds = BondConfiguration::generate(spec, params.p, params.seed)?;
    bonds.write_to_path(&params.out)?;
    let open_edges = bonds.open_edge_count();
    let potential_edges = bonds.potential_edge_count();
    Ok(GenerateReport {
        version: VERSION.into(),
        config: params.clone(),
        open_edges,
        potential_edges,
        open_fraction: open_edges as f64 / potential_edges as f64,
    })
}

// ---------------------------------------------------------------------------
// walk

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkParams {
    pub bonds: PathBuf,
    pub mode: WalkKind,
    /// Discrete horizon (myopic jumps or blind attempts).
    pub steps: Option<u64>,
    /// Real-time horizon for the continuous-time walk.
    pub tmax: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// When set, also track checkpoint series at this geometric ratio.
    pub checkpoint_q: Option<f64>,
    pub t0: f64,
    pub out: PathBuf,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            bonds: "bonds.perc".into(),
            mode: WalkKind::Myopic,
            steps: None,
            tmax: None,
            trials: 1,
            seed: 1,
            checkpoint_q: None,
            t0: 16.0,
            out: "walk.csv".into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WalkReport {
    pub version: String,
    pub config: WalkParams,
    pub trials: usize,
    pub censored_trials: usize,
    pub rows: u64,
}

/// Jump budget that covers real time `tmax` except with negligible
/// probability (six standard deviations of the Poisson count).
fn ctsrw_budget(tmax: f64) -> usize {
    (tmax + 6.0 * tmax.sqrt() + 16.0).ceil() as usize
}

pub fn run_walk(params: &WalkParams) -> Result<WalkReport> {
    if params.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let budget = match params.mode {
        WalkKind::Ctsrw => {
            let tmax = params
                .tmax
                .ok_or_else(|| Error::invalid("tmax", "required for mode ctsrw"))?;
            if tmax <= 0.0 {
                return Err(Error::invalid("tmax", "must be > 0"));
            }
            ctsrw_budget(tmax)
        }
        WalkKind::Myopic | WalkKind::Blind => {
            let steps = params
                .steps
                .ok_or_else(|| Error::invalid("steps", "required for modes myopic and blind"))?;
            if steps == 0 {
                return Err(Error::invalid("steps", "must be >= 1"));
            }
            steps as usize
        }
    };
    if budget.saturating_mul(params.trials) > 50_000_000 {
        return Err(Error::invalid(
            "steps",
            "trajectory output would exceed 5e7 rows",
        ));
    }
    let view = view_from_bond_file(&params.bonds)?;
    let master = Stream::new(params.seed);
    let origin = view.origin();
    let (trajectories, _failed) = collect_trials(params.trials, |trial| {
        let mut stream = master.child(Domain::Trial, trial as u64);
        run_coupled(&view, origin, budget, &mut stream)
    })?;

    let d = view.spec().dim();
    let mut csv = String::new();
    csv.push_str("trial,p");
    for axis in 1..=d {
        let _ = write!(csv, ",x{axis}");
    }
    csv.push_str(",t_cum,u_cum\n");
    let mut rows = 0u64;
    let mut censored_trials = 0usize;
    let mut series_csv = params
        .checkpoint_q
        .map(|_| String::from("trial,k,t,l1,phi,ratio,runmax\n"));
    for (trial, traj) in trajectories.iter().enumerate() {
        let Some(traj) = traj else { continue };
        if traj.boundary_hit().is_some() {
            censored_trials += 1;
        }
        for p in 0..=traj.jumps() {
            let _ = write!(csv, "{trial},{p}");
            for &c in traj.position_at(p).iter() {
                let _ = write!(csv, ",{c}");
            }
            let _ = writeln!(csv, ",{},{}", traj.t_cum()[p], traj.u_cum()[p]);
            rows += 1;
        }
        if let (Some(buf), Some(q)) = (series_csv.as_mut(), params.checkpoint_q) {
            let horizon = match params.mode {
                WalkKind::Ctsrw => params.tmax.unwrap(),
                _ => params.steps.unwrap() as f64,
            };
            let series = track_checkpoints(traj, params.mode, q, params.t0, horizon)?;
            append_series_csv(buf, trial, &series);
        }
    }
    std::fs::write(&params.out, csv)?;
    if let Some(buf) = series_csv {
        std::fs::write(params.out.with_extension("checkpoints.csv"), buf)?;
    }
    Ok(WalkReport {
        version: VERSION.into(),
        config: params.clone(),
        trials: params.trials,
        censored_trials,
        rows,
    })
}

fn append_series_csv(buf: &mut String, trial: usize, series: &CheckpointSeries) {
    for c in &series.checkpoints {
        let _ = writeln!(
            buf,
            "{trial},{},{},{},{},{},{}",
            c.k, c.time, c.l1, c.phi, c.ratio, c.running_max
        );
    }
}

// ---------------------------------------------------------------------------
// lil

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LilParams {
    pub p: f64,
    pub d: usize,
    /// Box half-width; defaults to `4 sqrt(horizon)`.
    pub l: Option<u32>,
    pub boundary: Boundary,
    pub q: f64,
    pub t0: f64,
    pub horizon: f64,
    pub trials: usize,
    /// Conditioned environments shared by the trials (round-robin).
    pub envs: usize,
    pub walk: WalkKind,
    pub seed: u64,
    pub max_attempts: u32,
    pub out: PathBuf,
    /// Optional per-checkpoint CSV of the requested walk.
    pub series_out: Option<PathBuf>,
}

impl Default for LilParams {
    fn default() -> Self {
        LilParams {
            p: 0.7,
            d: 2,
            l: None,
            boundary: Boundary::Torus,
            q: 2.0,
            t0: 16.0,
            horizon: 1.0e6,
            trials: 50,
            envs: 1,
            walk: WalkKind::Ctsrw,
            seed: 1,
            max_attempts: 64,
            out: "lil.json".into(),
            series_out: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct LilReport {
    pub version: String,
    pub config: LilParams,
    /// Resolved half-width actually used.
    pub l_used: u32,
    /// Estimate for the requested walk at the full horizon.
    pub estimate: LilEstimate,
    /// Same statistic at a quarter of the horizon; the spread between the two
    /// is the stabilization diagnostic.
    pub estimate_quarter: Option<LilEstimate>,
    pub estimate_ctsrw: LilEstimate,
    pub estimate_blind: LilEstimate,
    pub alpha_direct_mean: f64,
    /// `(c_X / c_Y) * sqrt(alpha) - 1`; near zero when the coupled relation
    /// between the continuous and blind clocks holds at estimator level.
    pub coupling_residual: f64,
    pub censoring_rate: f64,
    pub failed_trials: usize,
}

struct LilTrial {
    ctsrw: CheckpointSeries,
    blind: CheckpointSeries,
    requested: CheckpointSeries,
    alpha: f64,
}

pub fn run_lil(params: &LilParams) -> Result<LilReport> {
    validate_p(params.p)?;
    warn_if_subcritical(params.p, params.d);
    if params.trials < MIN_LIL_TRIALS {
        return Err(Error::invalid(
            "trials",
            format!("need at least {MIN_LIL_TRIALS}"),
        ));
    }
    if params.envs == 0 {
        return Err(Error::invalid("envs", "must be >= 1"));
    }
    if params.q.is_nan() || params.q <= 1.0 {
        return Err(Error::invalid("q", "must be > 1"));
    }
    if params.t0 <= std::f64::consts::E {
        return Err(Error::invalid("t0", "must be > e"));
    }
    if params.horizon < params.t0 {
        return Err(Error::invalid("horizon", "must be >= t0"));
    }
    let l = params
        .l
        .unwrap_or_else(|| default_half_width(params.horizon));
    let spec = LatticeSpec::new(params.d, l, params.boundary)?;
    let master = Stream::new(params.seed);
    let views = conditioned_views(spec, params.p, &master, params.envs, params.max_attempts)?;
    let budget = ctsrw_budget(params.horizon);

    let (trials, failed_trials) = collect_trials(params.trials, |trial| {
        let view = &views[trial % views.len()];
        let mut stream = master.child(Domain::Trial, trial as u64);
        let traj = run_coupled(view, view.origin(), budget, &mut stream)?;
        let ctsrw = track_checkpoints(&traj, WalkKind::Ctsrw, params.q, params.t0, params.horizon)?;
        let blind = track_checkpoints(&traj, WalkKind::Blind, params.q, params.t0, params.horizon)?;
        let requested = match params.walk {
            WalkKind::Ctsrw => ctsrw.clone(),
            WalkKind::Blind => blind.clone(),
            WalkKind::Myopic => {
                track_checkpoints(&traj, WalkKind::Myopic, params.q, params.t0, params.horizon)?
            }
        };
        let alpha = alpha_direct(&traj)?;
        Ok(LilTrial {
            ctsrw,
            blind,
            requested,
            alpha,
        })
    })?;
    let trials: Vec<LilTrial> = trials.into_iter().flatten().collect();

    let requested: Vec<CheckpointSeries> = trials.iter().map(|t| t.requested.clone()).collect();
    let ctsrw: Vec<CheckpointSeries> = trials.iter().map(|t| t.ctsrw.clone()).collect();
    let blind: Vec<CheckpointSeries> = trials.iter().map(|t| t.blind.clone()).collect();
    let estimate = estimate_lil_constant(&requested, params.horizon)?;
    let estimate_quarter = if params.horizon / 4.0 >= params.t0 {
        Some(estimate_lil_constant(&requested, params.horizon / 4.0)?)
    } else {
        None
    };
    let estimate_ctsrw = estimate_lil_constant(&ctsrw, params.horizon)?;
    let estimate_blind = estimate_lil_constant(&blind, params.horizon)?;
    let alpha_direct_mean = trials.iter().map(|t| t.alpha).sum::<f64>() / trials.len() as f64;
    let coupling_residual =
        estimate_ctsrw.point / estimate_blind.point * alpha_direct_mean.sqrt() - 1.0;
    let censoring_rate = estimate.censored as f64 / (estimate.censored + estimate.trials) as f64;

    if let Some(path) = &params.series_out {
        let mut csv = String::from("trial,k,t,l1,phi,ratio,runmax\n");
        for (trial, t) in trials.iter().enumerate() {
            append_series_csv(&mut csv, trial, &t.requested);
        }
        std::fs::write(path, csv)?;
    }
    let report = LilReport {
        version: VERSION.into(),
        config: params.clone(),
        l_used: l,
        estimate,
        estimate_quarter,
        estimate_ctsrw,
        estimate_blind,
        alpha_direct_mean,
        coupling_residual,
        censoring_rate,
        failed_trials,
    };
    write_json(&params.out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// heatkernel

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatkernelParams {
    pub p: f64,
    pub d: usize,
    /// Box half-width; defaults to `4 sqrt(t)`.
    pub l: Option<u32>,
    pub boundary: Boundary,
    /// Jump-count horizon of the myopic walk.
    pub t: u64,
    pub trials: usize,
    pub seed: u64,
    pub max_attempts: u32,
    pub out: PathBuf,
    pub hist_out: Option<PathBuf>,
}

impl Default for HeatkernelParams {
    fn default() -> Self {
        HeatkernelParams {
            p: 0.7,
            d: 2,
            l: None,
            boundary: Boundary::Torus,
            t: 2000,
            trials: 200_000,
            seed: 1,
            max_attempts: 64,
            out: "heatkernel.json".into(),
            hist_out: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct HeatkernelReport {
    pub version: String,
    pub config: HeatkernelParams,
    pub l_used: u32,
    pub fit: GaussianFit,
    pub trials_recorded: u64,
    pub censoring_rate: f64,
    pub failed_trials: usize,
}

pub fn run_heatkernel(params: &HeatkernelParams) -> Result<HeatkernelReport> {
    validate_p(params.p)?;
    warn_if_subcritical(params.p, params.d);
    if params.t == 0 {
        return Err(Error::invalid("t", "must be >= 1"));
    }
    if params.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let l = params
        .l
        .unwrap_or_else(|| default_half_width(params.t as f64));
    let spec = LatticeSpec::new(params.d, l, params.boundary)?;
    let master = Stream::new(params.seed);
    let view = conditioned_views(spec, params.p, &master, 1, params.max_attempts)?.remove(0);
    let jumps = params.t as usize;

    let (endpoints, failed_trials) = collect_trials(params.trials, |trial| {
        let mut stream = master.child(Domain::Trial, trial as u64);
        let traj = run_coupled(&view, view.origin(), jumps, &mut stream)?;
        if traj
            .censor_time(WalkKind::Myopic)
            .is_some_and(|c| c <= jumps as f64)
        {
            return Ok(None);
        }
        Ok(Some(traj.displacement_at(jumps).to_vec()))
    })?;

    let site_radius = (3.0 * (params.t as f64).sqrt()).ceil() as u32;
    let mut hist = DisplacementHistogram::new(params.d, site_radius);
    let mut censored = 0u64;
    for endpoint in endpoints.iter().flatten() {
        match endpoint {
            Some(disp) => hist.record(disp),
            None => censored += 1,
        }
    }
    let rings = ring_sizes(&view, view.origin(), hist.max_radius());
    let fit = gaussian_fit(&hist, params.t as f64, &rings)?;
    if let Some(path) = &params.hist_out {
        let mut csv = String::from("kind");
        for axis in 1..=params.d {
            let _ = write!(csv, ",x{axis}");
        }
        csv.push_str(",radius,count\n");
        for (disp, count) in hist.site_counts() {
            csv.push_str("site");
            for c in disp {
                let _ = write!(csv, ",{c}");
            }
            let radius: u32 = disp.iter().map(|c| c.unsigned_abs()).sum();
            let _ = writeln!(csv, ",{radius},{count}");
        }
        for (radius, &count) in hist.shell_totals().iter().enumerate() {
            let in_sites = radius as u32 <= hist.site_radius();
            if count > 0 && !in_sites {
                csv.push_str("shell");
                for _ in 0..params.d {
                    csv.push(',');
                }
                let _ = writeln!(csv, ",{radius},{count}");
            }
        }
        std::fs::write(path, csv)?;
    }
    let recorded = hist.trials();
    let report = HeatkernelReport {
        version: VERSION.into(),
        config: params.clone(),
        l_used: l,
        fit,
        trials_recorded: recorded,
        censoring_rate: censored as f64 / (censored + recorded) as f64,
        failed_trials,
    };
    write_json(&params.out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// alpha

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphaParams {
    /// When set, all trials share the environment from this bond file;
    /// otherwise each trial samples its own conditioned environment.
    pub bonds: Option<PathBuf>,
    pub p: f64,
    pub d: usize,
    pub l: u32,
    pub boundary: Boundary,
    /// Myopic jump budget per trial.
    pub steps: u64,
    pub trials: usize,
    pub seed: u64,
    pub max_attempts: u32,
    pub out: PathBuf,
}

impl Default for AlphaParams {
    fn default() -> Self {
        AlphaParams {
            bonds: None,
            p: 0.7,
            d: 2,
            l: 256,
            boundary: Boundary::Torus,
            steps: 1_000_000,
            trials: 20,
            seed: 1,
            max_attempts: 64,
            out: "alpha.json".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaTrial {
    pub trial: usize,
    pub alpha_direct: f64,
    pub alpha_from_ik: f64,
    pub censored: bool,
}

#[derive(Debug, Serialize)]
pub struct AlphaReport {
    pub version: String,
    pub config: AlphaParams,
    /// Mean of the per-trial direct estimators.
    pub alpha_direct: f64,
    /// Histogram estimator on the pooled degree counts.
    pub alpha_from_ik: f64,
    /// Pooled degree frequencies, indices `0..=2d`.
    pub i_hat: Vec<f64>,
    /// Fraction of trials whose unwrapped displacement reached the box
    /// scale. Degree statistics remain exact on the torus, so censored
    /// trials still contribute; the rate is reported for the record.
    pub censoring_rate: f64,
    pub per_trial: Vec<AlphaTrial>,
    pub failed_trials: usize,
}

pub fn run_alpha(params: &AlphaParams) -> Result<AlphaReport> {
    validate_p(params.p)?;
    if params.bonds.is_none() {
        warn_if_subcritical(params.p, params.d);
    }
    if params.steps < 1_000 {
        return Err(Error::invalid(
            "steps",
            "need at least 1000 jumps per trial",
        ));
    }
    if params.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let master = Stream::new(params.seed);
    let shared = match &params.bonds {
        Some(path) => Some(view_from_bond_file(path)?),
        None => None,
    };
    let spec = LatticeSpec::new(params.d, params.l, params.boundary)?;
    let jumps = params.steps as usize;

    struct TrialOut {
        alpha_direct: f64,
        alpha_from_ik: f64,
        stats: EnvironmentStats,
        censored: bool,
        d: usize,
    }
    let (outs, failed_trials) = collect_trials(params.trials, |trial| {
        let owned;
        let view = match &shared {
            Some(v) => v,
            None => {
                let seed = master.child(Domain::Env, trial as u64).key();
                owned = sample_conditioned(spec, params.p, seed, params.max_attempts)?.view;
                &owned
            }
        };
        let mut stream = master.child(Domain::Trial, trial as u64);
        let traj = run_coupled(view, view.origin(), jumps, &mut stream)?;
        let stats = environment_stats_from_coupled(view, &traj, traj.jumps())?;
        Ok(TrialOut {
            alpha_direct: alpha_direct(&traj)?,
            alpha_from_ik: alpha_from_ik(&stats, view.spec().dim())?,
            censored: traj.boundary_hit().is_some(),
            d: view.spec().dim(),
            stats,
        })
    })?;
    let outs: Vec<TrialOut> = outs.into_iter().flatten().collect();
    if outs.is_empty() {
        return Err(Error::TooFew {
            what: "successful trials",
            need: 1,
            got: 0,
        });
    }
    let d = outs[0].d;
    let mut pooled = EnvironmentStats::new(d);
    let mut per_trial = Vec::with_capacity(outs.len());
    let mut censored = 0usize;
    for (trial, out) in outs.iter().enumerate() {
        pooled.merge(&out.stats);
        censored += out.censored as usize;
        per_trial.push(AlphaTrial {
            trial,
            alpha_direct: out.alpha_direct,
            alpha_from_ik: out.alpha_from_ik,
            censored: out.censored,
        });
    }
    let report = AlphaReport {
        version: VERSION.into(),
        config: params.clone(),
        alpha_direct: outs.iter().map(|o| o.alpha_direct).sum::<f64>() / outs.len() as f64,
        alpha_from_ik: alpha_from_ik(&pooled, d)?,
        i_hat: pooled.i_hat_all(),
        censoring_rate: censored as f64 / outs.len() as f64,
        per_trial,
        failed_trials,
    };
    write_json(&params.out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// volume

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VolumeParams {
    /// When set, measures the origin's cluster in this file (single cluster);
    /// otherwise samples `clusters` conditioned environments.
    pub bonds: Option<PathBuf>,
    pub p: f64,
    pub d: usize,
    pub l: u32,
    pub boundary: Boundary,
    pub clusters: usize,
    pub radii_min: u32,
    pub radii_max: u32,
    pub seed: u64,
    pub max_attempts: u32,
    pub out: PathBuf,
    pub fit_out: Option<PathBuf>,
}

impl Default for VolumeParams {
    fn default() -> Self {
        VolumeParams {
            bonds: None,
            p: 0.7,
            d: 2,
            l: 96,
            boundary: Boundary::Torus,
            clusters: 1,
            radii_min: 1,
            radii_max: 60,
            seed: 1,
            max_attempts: 64,
            out: "volume.csv".into(),
            fit_out: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VolumeReport {
    pub version: String,
    pub config: VolumeParams,
    /// Pooled log-log fit over radii admitted by the minimum-radius rule.
    pub fit: Option<VolumeFit>,
    pub clusters_measured: usize,
    pub failed_clusters: usize,
}

pub fn run_volume(params: &VolumeParams) -> Result<VolumeReport> {
    validate_p(params.p)?;
    if params.radii_min == 0 || params.radii_min > params.radii_max {
        return Err(Error::invalid("radii", "need 1 <= radii_min <= radii_max"));
    }
    if params.clusters == 0 {
        return Err(Error::invalid("clusters", "must be >= 1"));
    }
    let shared = match &params.bonds {
        Some(path) => Some(view_from_bond_file(path)?),
        None => {
            warn_if_subcritical(params.p, params.d);
            None
        }
    };
    if let Some(view) = &shared {
        if params.radii_max as i64 >= view.spec().half_width() as i64 {
            return Err(Error::invalid(
                "radii",
                "radii_max must stay below the box half-width",
            ));
        }
    } else {
        let spec = LatticeSpec::new(params.d, params.l, params.boundary)?;
        if params.radii_max >= spec.half_width() {
            return Err(Error::invalid(
                "radii",
                "radii_max must stay below the box half-width",
            ));
        }
    }
    let clusters = if shared.is_some() { 1 } else { params.clusters };
    let spec = LatticeSpec::new(params.d, params.l, params.boundary)?;
    let master = Stream::new(params.seed);

    let (measured, failed_clusters) = collect_trials(clusters, |c| {
        let owned;
        let view = match &shared {
            Some(v) => v,
            None => {
                let seed = master.child(Domain::Env, c as u64).key();
                owned = sample_conditioned(spec, params.p, seed, params.max_attempts)?.view;
                &owned
            }
        };
        let field = DistanceField::compute(view.bonds(), view.origin(), params.radii_max)?;
        if field.truncated() {
            return Err(Error::CapExceeded(params.radii_max));
        }
        let vols: Vec<(u32, u64)> = (params.radii_min..=params.radii_max)
            .map(|n| (n, field.ball_volume(n)))
            .collect();
        Ok(vols)
    })?;

    // Single-cluster runs emit plain (n, vol); sampled batches prefix the
    // cluster index.
    let mut csv = String::from(if clusters == 1 {
        "n,vol\n"
    } else {
        "cluster,n,vol\n"
    });
    let mut pooled: Vec<(u32, u64)> = Vec::new();
    let mut clusters_measured = 0usize;
    for (c, vols) in measured.iter().enumerate() {
        let Some(vols) = vols else { continue };
        clusters_measured += 1;
        for &(n, vol) in vols {
            if clusters == 1 {
                let _ = writeln!(csv, "{n},{vol}");
            } else {
                let _ = writeln!(csv, "{c},{n},{vol}");
            }
            if n >= MIN_VOLUME_RADIUS {
                pooled.push((n, vol));
            }
        }
    }
    std::fs::write(&params.out, csv)?;
    let fit = if pooled
        .iter()
        .map(|&(n, _)| n)
        .collect::<std::collections::BTreeSet<_>>()
        .len()
        >= 2
    {
        Some(volume_growth_fit(&pooled)?)
    } else {
        None
    };
    let report = VolumeReport {
        version: VERSION.into(),
        config: params.clone(),
        fit,
        clusters_measured,
        failed_clusters,
    };
    if let Some(path) = &params.fit_out {
        write_json(path, &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// tail

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailParams {
    pub p: f64,
    pub d: usize,
    /// Box half-width; defaults to `4 sqrt(n)`.
    pub l: Option<u32>,
    pub boundary: Boundary,
    /// Horizon in the chosen walk's clock.
    pub n: f64,
    pub gammas: Vec<f64>,
    pub walk: WalkKind,
    pub trials: usize,
    pub envs: usize,
    pub seed: u64,
    pub max_attempts: u32,
    pub out: PathBuf,
    pub curve_out: Option<PathBuf>,
}

impl Default for TailParams {
    fn default() -> Self {
        TailParams {
            p: 0.7,
            d: 2,
            l: None,
            boundary: Boundary::Torus,
            n: 10_000.0,
            gammas: (1..=10).map(|i| i as f64 * 0.2).collect(),
            walk: WalkKind::Ctsrw,
            trials: 1_000,
            envs: 1,
            seed: 1,
            max_attempts: 64,
            out: "tail.json".into(),
            curve_out: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TailReport {
    pub version: String,
    pub config: TailParams,
    pub l_used: u32,
    pub curve: Vec<TailPoint>,
    pub trials_used: usize,
    pub censoring_rate: f64,
    pub failed_trials: usize,
}

pub fn run_tail(params: &TailParams) -> Result<TailReport> {
    validate_p(params.p)?;
    warn_if_subcritical(params.p, params.d);
    if params.n <= std::f64::consts::E {
        return Err(Error::invalid("n", "horizon must exceed e"));
    }
    if params.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    if params.envs == 0 {
        return Err(Error::invalid("envs", "must be >= 1"));
    }
    let l = params.l.unwrap_or_else(|| default_half_width(params.n));
    let spec = LatticeSpec::new(params.d, l, params.boundary)?;
    let master = Stream::new(params.seed);
    let views = conditioned_views(spec, params.p, &master, params.envs, params.max_attempts)?;
    let budget = match params.walk {
        WalkKind::Ctsrw => ctsrw_budget(params.n),
        WalkKind::Myopic | WalkKind::Blind => params.n.ceil() as usize,
    };
    // A visited site's chemical distance never exceeds the jump count, so
    // this cap always suffices.
    let fields: Vec<DistanceField> = views
        .iter()
        .map(|v| DistanceField::compute(v.bonds(), v.origin(), budget as u32 + 1))
        .collect::<Result<_>>()?;

    let (maxima, failed_trials) = collect_trials(params.trials, |trial| {
        let view = &views[trial % views.len()];
        let field = &fields[trial % views.len()];
        let mut stream = master.child(Domain::Trial, trial as u64);
        let traj = run_coupled(view, view.origin(), budget, &mut stream)?;
        if traj.censor_time(params.walk).is_some_and(|c| c <= params.n) {
            return Ok(None);
        }
        let horizon_jump = match params.walk {
            WalkKind::Ctsrw => traj.jump_index_at_time(params.n)?,
            WalkKind::Blind => traj.jump_index_at_blind(params.n as u64)?,
            WalkKind::Myopic => params.n as usize,
        };
        Ok(Some(max_chemical_displacement(&traj, field, horizon_jump)?))
    })?;

    let mut kept: Vec<u32> = Vec::new();
    let mut censored = 0usize;
    for m in maxima.iter().flatten() {
        match m {
            Some(v) => kept.push(*v),
            None => censored += 1,
        }
    }
    let curve = displacement_tail(&kept, params.n, &params.gammas)?;
    if let Some(path) = &params.curve_out {
        let mut csv = String::from("gamma,threshold,survival\n");
        for pt in &curve {
            let _ = writeln!(csv, "{},{},{}", pt.gamma, pt.threshold, pt.survival);
        }
        std::fs::write(path, csv)?;
    }
    let report = TailReport {
        version: VERSION.into(),
        config: params.clone(),
        l_used: l,
        curve,
        trials_used: kept.len(),
        censoring_rate: censored as f64 / (censored + kept.len()) as f64,
        failed_trials,
    };
    write_json(&params.out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// config files

/// Load a partial params struct from a JSON config file; unknown keys are
/// rejected by serde with the offending key named.
pub fn load_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::invalid("config", e.to_string()))
}
