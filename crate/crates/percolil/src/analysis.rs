//! Scaling analysis: the normalization `phi(t) = sqrt(t log log t)`,
//! checkpointed running maxima of `|walk|_1 / phi`, increment and annulus
//! diagnostics on geometric time grids, heat-kernel shape fits, volume-growth
//! regressions, and maximal-displacement tail curves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterView;
use crate::walks::{CoupledTrajectory, WalkKind};
use crate::{Error, Result};

/// `sqrt(t log log t)`, defined for `t > e` (strict).
pub fn phi(t: f64) -> Result<f64> {
    if t <= std::f64::consts::E {
        return Err(Error::invalid("t", format!("phi needs t > e, got {t}")));
    }
    Ok((t * t.ln().ln()).sqrt())
}

/// One evaluation point of a checkpoint series.
#[derive(Debug, Clone, Serialize)]
pub struct Checkpoint {
    pub k: u32,
    /// Time in the walk's own clock (real time, blind attempts, or jumps).
    pub time: f64,
    /// Unwrapped position.
    pub position: Vec<i64>,
    pub l1: u64,
    pub phi: f64,
    pub ratio: f64,
    pub running_max: f64,
}

/// `|walk|_1 / phi` sampled on the geometric grid `t_k = t0 * q^k`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckpointSeries {
    pub kind: WalkKind,
    pub q: f64,
    pub t0: f64,
    pub checkpoints: Vec<Checkpoint>,
    /// Clock time at which the trajectory touched the box scale, if it did.
    pub censored_at: Option<f64>,
}

impl CheckpointSeries {
    /// Running max over checkpoints at times `<= horizon`, provided the
    /// series actually reaches that horizon uncensored.
    pub fn running_max_up_to(&self, horizon: f64) -> Option<f64> {
        if !self.covers(horizon) {
            return None;
        }
        self.checkpoints
            .iter()
            .filter(|c| c.time <= horizon)
            .map(|c| c.ratio)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    pub fn covers(&self, horizon: f64) -> bool {
        self.censored_at.is_none_or(|c| c > horizon)
    }

    pub fn final_running_max(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.running_max)
    }
}

/// Evaluate the chosen walk of a coupled trajectory at the checkpoint grid
/// `t0 * q^k` up to `horizon` (in that walk's clock). A censored trajectory
/// yields a series truncated strictly before the contact time, flagged via
/// `censored_at`.
pub fn track_checkpoints(
    traj: &CoupledTrajectory,
    kind: WalkKind,
    q: f64,
    t0: f64,
    horizon: f64,
) -> Result<CheckpointSeries> {
    if q.is_nan() || q <= 1.0 {
        return Err(Error::invalid(
            "q",
            format!("checkpoint ratio must be > 1, got {q}"),
        ));
    }
    if t0 <= std::f64::consts::E {
        return Err(Error::invalid(
            "t0",
            format!("first checkpoint must be > e, got {t0}"),
        ));
    }
    if horizon < t0 {
        return Err(Error::invalid(
            "horizon",
            format!("horizon {horizon} is below t0 {t0}"),
        ));
    }
    let clock_end = match kind {
        WalkKind::Ctsrw => traj.t_final(),
        WalkKind::Blind => traj.u_final() as f64,
        WalkKind::Myopic => traj.jumps() as f64,
    };
    let censored_at = traj.censor_time(kind);
    if censored_at.is_none() && clock_end < horizon {
        return Err(Error::BeyondHorizon {
            query: horizon,
            horizon: clock_end,
        });
    }
    let mut checkpoints = Vec::new();
    let mut running_max = 0.0f64;
    let mut last_time = f64::NEG_INFINITY;
    let mut k = 0u32;
    let mut censored = false;
    loop {
        let t_k = t0 * q.powi(k as i32);
        if t_k > horizon {
            break;
        }
        // Discrete walks are evaluated at integer times.
        let time = match kind {
            WalkKind::Ctsrw => t_k,
            WalkKind::Blind | WalkKind::Myopic => t_k.floor(),
        };
        if let Some(c) = censored_at {
            if time >= c {
                censored = true;
                break;
            }
        }
        if time <= std::f64::consts::E || time <= last_time || time > clock_end {
            k += 1;
            continue;
        }
        last_time = time;
        let p = match kind {
            WalkKind::Ctsrw => traj.jump_index_at_time(time)?,
            WalkKind::Blind => traj.jump_index_at_blind(time as u64)?,
            WalkKind::Myopic => time as usize,
        };
        let position = traj.position_at(p);
        let l1 = traj.l1_at(p);
        let phi_t = phi(time)?;
        let ratio = l1 as f64 / phi_t;
        running_max = running_max.max(ratio);
        checkpoints.push(Checkpoint {
            k,
            time,
            position,
            l1,
            phi: phi_t,
            ratio,
            running_max,
        });
        k += 1;
    }
    Ok(CheckpointSeries {
        kind,
        q,
        t0,
        checkpoints,
        censored_at: censored.then(|| censored_at.unwrap()),
    })
}

/// Aggregate of per-trial final running maxima.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LilEstimate {
    /// Median of the per-trial running maxima (the point estimate; any
    /// finite-horizon functional underestimates a limsup).
    pub point: f64,
    pub mean: f64,
    /// Central 90% band of the per-trial maxima.
    pub band_low: f64,
    pub band_high: f64,
    pub trials: usize,
    pub censored: usize,
    pub horizon: f64,
}

fn percentile(sorted: &[f64], level: f64) -> f64 {
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Minimum uncensored series required for an estimate.
pub const MIN_LIL_TRIALS: usize = 30;

/// Pool the running maxima of many series at one horizon. Censored-early
/// series are excluded and counted.
pub fn estimate_lil_constant(series: &[CheckpointSeries], horizon: f64) -> Result<LilEstimate> {
    let mut maxima: Vec<f64> = Vec::with_capacity(series.len());
    let mut censored = 0usize;
    for s in series {
        match s.running_max_up_to(horizon) {
            Some(m) => maxima.push(m),
            None => censored += 1,
        }
    }
    if maxima.len() < MIN_LIL_TRIALS {
        return Err(Error::TooFew {
            what: "uncensored series",
            need: MIN_LIL_TRIALS,
            got: maxima.len(),
        });
    }
    maxima.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = maxima.iter().sum::<f64>() / maxima.len() as f64;
    Ok(LilEstimate {
        point: percentile(&maxima, 0.5),
        mean,
        band_low: percentile(&maxima, 0.05),
        band_high: percentile(&maxima, 0.95),
        trials: maxima.len(),
        censored,
        horizon,
    })
}

/// Per-checkpoint increment and annulus indicators.
#[derive(Debug, Clone, Serialize)]
pub struct IncrementDiag {
    pub k: u32,
    pub time: f64,
    /// `|X_{t_k} - X_{t_{k-1}}|_1`.
    pub increment_l1: u64,
    /// Increment exceeded `gamma * phi(t_k)`.
    pub large_increment: bool,
    /// Position lies strictly inside the `(gamma phi, kappa gamma phi)`
    /// annulus.
    pub in_annulus: bool,
}

/// Evaluate the large-increment events and annulus occupancy along a series.
pub fn increment_diagnostics(
    series: &CheckpointSeries,
    gamma: f64,
    kappa: f64,
) -> Result<Vec<IncrementDiag>> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::invalid("gamma", "must be > 0"));
    }
    if kappa.is_nan() || kappa <= 1.0 {
        return Err(Error::invalid("kappa", "must be > 1"));
    }
    Ok(series
        .checkpoints
        .windows(2)
        .map(|w| {
            let (prev, here) = (&w[0], &w[1]);
            let increment_l1: u64 = here
                .position
                .iter()
                .zip(&prev.position)
                .map(|(a, b)| (a - b).unsigned_abs())
                .sum();
            let threshold = gamma * here.phi;
            IncrementDiag {
                k: here.k,
                time: here.time,
                increment_l1,
                large_increment: increment_l1 as f64 > threshold,
                in_annulus: (here.l1 as f64) > threshold && (here.l1 as f64) < kappa * threshold,
            }
        })
        .collect())
}

/// Endpoint displacement histogram: exact per-site counts within
/// `site_radius`, radial L1 shells beyond.
#[derive(Debug, Clone)]
pub struct DisplacementHistogram {
    d: usize,
    site_radius: u32,
    trials: u64,
    sites: BTreeMap<Vec<i32>, u64>,
    shells: BTreeMap<u32, u64>,
}

impl DisplacementHistogram {
    pub fn new(d: usize, site_radius: u32) -> Self {
        DisplacementHistogram {
            d,
            site_radius,
            trials: 0,
            sites: BTreeMap::new(),
            shells: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, displacement: &[i32]) {
        debug_assert_eq!(displacement.len(), self.d);
        self.trials += 1;
        let radius: u32 = displacement.iter().map(|c| c.unsigned_abs()).sum();
        if radius <= self.site_radius {
            *self.sites.entry(displacement.to_vec()).or_insert(0) += 1;
        } else {
            *self.shells.entry(radius).or_insert(0) += 1;
        }
    }

    /// Order-independent merge for parallel accumulation.
    pub fn merge(mut self, other: DisplacementHistogram) -> Self {
        assert_eq!(self.d, other.d);
        assert_eq!(self.site_radius, other.site_radius);
        self.trials += other.trials;
        for (k, v) in other.sites {
            *self.sites.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.shells {
            *self.shells.entry(k).or_insert(0) += v;
        }
        self
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn site_radius(&self) -> u32 {
        self.site_radius
    }

    /// Exact per-site counts (within the site radius), sorted by key.
    pub fn site_counts(&self) -> impl Iterator<Item = (&[i32], u64)> {
        self.sites.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Normalized endpoint probability of one displacement.
    pub fn site_probability(&self, displacement: &[i32]) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.sites.get(displacement).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn max_radius(&self) -> u32 {
        let site_max = self
            .sites
            .keys()
            .map(|k| k.iter().map(|c| c.unsigned_abs()).sum::<u32>())
            .max()
            .unwrap_or(0);
        let shell_max = self.shells.keys().next_back().copied().unwrap_or(0);
        site_max.max(shell_max)
    }

    /// Total hits per L1 radius, combining exact sites and shell buckets.
    pub fn shell_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.max_radius() as usize + 1];
        for (key, &count) in &self.sites {
            let r: u32 = key.iter().map(|c| c.unsigned_abs()).sum();
            totals[r as usize] += count;
        }
        for (&r, &count) in &self.shells {
            totals[r as usize] += count;
        }
        totals
    }
}

/// Number of cluster sites whose displacement from `start` has L1 norm
/// exactly `k`, for `k = 0..=max_radius`. Displacements are enumerated in
/// Z^d and wrapped onto the box, so the counts are unambiguous for
/// `max_radius < L`.
pub fn ring_sizes(view: &ClusterView, start: usize, max_radius: u32) -> Vec<u64> {
    // Recursive enumeration of signed vectors with |v|_1 = k.
    struct Scan<'a> {
        view: &'a ClusterView,
        start: Vec<i64>,
        coords: Vec<i64>,
    }
    impl Scan<'_> {
        fn visit(&mut self, axis: usize, remaining: i64, out: &mut u64) {
            let spec = *self.view.spec();
            let d = self.coords.len();
            if axis == d - 1 {
                let side = spec.side() as i64;
                let half = spec.half_width() as i64;
                for last in [remaining, -remaining] {
                    self.coords[d - 1] = last;
                    let wrapped: Vec<i64> = self
                        .coords
                        .iter()
                        .zip(&self.start)
                        .map(|(&v, &s)| (s + v + half).rem_euclid(side) - half)
                        .collect();
                    if let Ok(site) = spec.index_of(&wrapped) {
                        if self.view.contains(site) {
                            *out += 1;
                        }
                    }
                    if remaining == 0 {
                        break;
                    }
                }
                return;
            }
            for a in -remaining..=remaining {
                self.coords[axis] = a;
                self.visit(axis + 1, remaining - a.abs(), out);
            }
        }
    }
    let d = view.spec().dim();
    let mut scan = Scan {
        view,
        start: view.spec().coords_of(start),
        coords: vec![0i64; d],
    };
    let mut counts = vec![0u64; max_radius as usize + 1];
    for (k, slot) in counts.iter_mut().enumerate() {
        scan.visit(0, k as i64, slot);
    }
    counts
}

/// Least-squares line, with R^2 defined as 1 when the residuals vanish.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Result of the log-density vs `|y|^2/t` regression.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussianFit {
    /// Empirical decay rate of the log density in `|y|^2/t`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub bins: usize,
}

/// Minimum hits a bin needs before its log density enters the fit.
pub const MIN_BIN_HITS: u64 = 50;
/// Minimum admissible bins for a meaningful fit.
pub const MIN_BINS: usize = 5;

/// Fit `log p_hat` against `|y|_1^2 / t` over L1 shells with at least
/// [`MIN_BIN_HITS`] hits. `rings[k]` must hold the number of cluster sites
/// at radius `k` (see [`ring_sizes`]); the per-shell density is
/// `count / (trials * rings[k])`.
pub fn gaussian_fit(hist: &DisplacementHistogram, t: f64, rings: &[u64]) -> Result<GaussianFit> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::invalid("t", "need t > 0"));
    }
    if hist.trials() == 0 {
        return Err(Error::TooFew {
            what: "trials",
            need: 1,
            got: 0,
        });
    }
    let totals = hist.shell_totals();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, &count) in totals.iter().enumerate() {
        if count < MIN_BIN_HITS || k >= rings.len() || rings[k] == 0 {
            continue;
        }
        let density = count as f64 / (hist.trials() as f64 * rings[k] as f64);
        xs.push((k as f64).powi(2) / t);
        ys.push(density.ln());
    }
    if xs.len() < MIN_BINS {
        return Err(Error::TooFew {
            what: "admissible bins",
            need: MIN_BINS,
            got: xs.len(),
        });
    }
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(GaussianFit {
        slope,
        intercept,
        r_squared,
        bins: xs.len(),
    })
}

/// Result of the `log Vol` vs `log n` regression.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VolumeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Smallest radius admitted to the volume regression; below it lattice
/// effects dominate.
pub const MIN_VOLUME_RADIUS: u32 = 10;

/// Regress `log Vol` on `log n` over pooled `(radius, volume)` points.
pub fn volume_growth_fit(points: &[(u32, u64)]) -> Result<VolumeFit> {
    if let Some(&(n, _)) = points.iter().find(|&&(n, _)| n < MIN_VOLUME_RADIUS) {
        return Err(Error::invalid(
            "radii",
            format!("radius {n} below the minimum {MIN_VOLUME_RADIUS}"),
        ));
    }
    let distinct: std::collections::BTreeSet<u32> = points.iter().map(|&(n, _)| n).collect();
    if distinct.len() < 2 {
        return Err(Error::TooFew {
            what: "distinct radii",
            need: 2,
            got: distinct.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| (v as f64).ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(VolumeFit {
        slope,
        intercept,
        r_squared,
        points: points.len(),
    })
}

/// One point of the empirical maximal-displacement tail curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailPoint {
    pub gamma: f64,
    /// `gamma * phi(n)`.
    pub threshold: f64,
    /// Fraction of trials whose maximal chemical displacement exceeded the
    /// threshold.
    pub survival: f64,
}

/// Empirical survival curve of per-trial maximal chemical displacements
/// against thresholds `gamma * phi(n)`.
pub fn displacement_tail(maxima: &[u32], n: f64, gammas: &[f64]) -> Result<Vec<TailPoint>> {
    if maxima.is_empty() {
        return Err(Error::TooFew {
            what: "trials",
            need: 1,
            got: 0,
        });
    }
    if gammas.is_empty() || gammas.windows(2).any(|w| w[0] >= w[1]) || gammas[0] < 0.0 {
        return Err(Error::invalid(
            "gammas",
            "need a nonnegative strictly increasing grid",
        ));
    }
    let phi_n = phi(n)?;
    Ok(gammas
        .iter()
        .map(|&gamma| {
            let threshold = gamma * phi_n;
            let hits = maxima.iter().filter(|&&m| m as f64 > threshold).count();
            TailPoint {
                gamma,
                threshold,
                survival: hits as f64 / maxima.len() as f64,
            }
        })
        .collect())
}
