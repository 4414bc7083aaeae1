//! The myopic jump chain and the two walks reconstructed from it.
//!
//! One simulation produces three coupled processes. The jump chain `Z` moves
//! along a uniformly chosen open incident edge at every step. Cumulative
//! exponential clocks `T_p` (mean one) turn it into the continuous-time walk
//! `X_t = Z_{n(t)}`, `n(t) = sup{p : T_p <= t}`; cumulative geometric clocks
//! `U_p` (success probability `deg/2d` at the departing site) turn it into
//! the blind walk `Y_n = Z_{m(n)}`, `m(n) = sup{p : U_p <= n}`.
//!
//! Displacements are tracked unwrapped in Z^d even over torus bond data;
//! trajectories flag the first moment the walk touches the box scale
//! (`|coordinate| = L` on a free box, unwrapped `|displacement_j| >= L` on a
//! torus) so displacement statistics can censor there.
//!
//! Per jump the stream is consumed in a fixed order (direction, exponential
//! increment, geometric increment) so runs are reproducible draw for draw.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterView;
use crate::geometry::DistanceField;
use crate::lattice::{Boundary, LatticeSpec, MAX_DIMENSION};
use crate::rng::Stream;
use crate::{Error, Result};

/// Which of the three coupled processes a measurement refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    /// Continuous-time walk, real-time clock.
    Ctsrw,
    /// Blind walk, integer attempt clock.
    Blind,
    /// Jump chain, jump-count clock.
    Myopic,
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkKind::Ctsrw => write!(f, "ctsrw"),
            WalkKind::Blind => write!(f, "blind"),
            WalkKind::Myopic => write!(f, "myopic"),
        }
    }
}

impl FromStr for WalkKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ctsrw" => Ok(WalkKind::Ctsrw),
            "blind" => Ok(WalkKind::Blind),
            "myopic" => Ok(WalkKind::Myopic),
            other => Err(Error::invalid(
                "walk",
                format!("expected ctsrw|blind|myopic, got {other:?}"),
            )),
        }
    }
}

/// Incremental walker state: wrapped site plus unwrapped displacement.
struct Stepper<'a> {
    view: &'a ClusterView,
    spec: LatticeSpec,
    site: usize,
    coords: [i64; MAX_DIMENSION],
    disp: [i64; MAX_DIMENSION],
    hit: bool,
}

impl<'a> Stepper<'a> {
    fn new(view: &'a ClusterView, start: usize) -> Self {
        let spec = *view.spec();
        let mut coords = [0i64; MAX_DIMENSION];
        for (axis, c) in spec.coords_of(start).into_iter().enumerate() {
            coords[axis] = c;
        }
        let mut s = Stepper {
            view,
            spec,
            site: start,
            coords,
            disp: [0; MAX_DIMENSION],
            hit: false,
        };
        s.check_contact();
        s
    }

    #[inline]
    fn check_contact(&mut self) {
        let half = self.spec.half_width() as i64;
        let touched = match self.spec.boundary() {
            Boundary::Free => (0..self.spec.dim()).any(|j| self.coords[j].abs() == half),
            Boundary::Torus => (0..self.spec.dim()).any(|j| self.disp[j].abs() >= half),
        };
        self.hit = self.hit || touched;
    }

    /// Open directions out of the current site, in canonical order
    /// (axis-major, forward before backward). Returns the count.
    #[inline]
    fn open_dirs(&self, out: &mut [(usize, u8); 2 * MAX_DIMENSION]) -> usize {
        let bonds = self.view.bonds();
        let mut count = 0;
        for axis in 0..self.spec.dim() {
            if bonds.open_toward(self.site, axis, true) {
                out[count] = (
                    self.spec.neighbor(self.site, axis, true).unwrap(),
                    (2 * axis) as u8,
                );
                count += 1;
            }
            if bonds.open_toward(self.site, axis, false) {
                out[count] = (
                    self.spec.neighbor(self.site, axis, false).unwrap(),
                    (2 * axis + 1) as u8,
                );
                count += 1;
            }
        }
        count
    }

    #[inline]
    fn move_to(&mut self, neighbor: usize, dir: u8) {
        let axis = (dir / 2) as usize;
        let step = if dir.is_multiple_of(2) { 1 } else { -1 };
        self.site = neighbor;
        self.disp[axis] += step;
        let half = self.spec.half_width() as i64;
        let side = self.spec.side() as i64;
        self.coords[axis] += step;
        if self.coords[axis] > half {
            self.coords[axis] -= side;
        } else if self.coords[axis] < -half {
            self.coords[axis] += side;
        }
        self.check_contact();
    }
}

/// One myopic step: uniform choice among the open incident edges.
pub fn step_myopic(view: &ClusterView, pos: usize, stream: &mut Stream) -> Result<usize> {
    let stepper = Stepper::new(view, pos);
    let mut dirs = [(0usize, 0u8); 2 * MAX_DIMENSION];
    let count = stepper.open_dirs(&mut dirs);
    if count == 0 {
        return Err(Error::IsolatedStart);
    }
    Ok(dirs[stream.next_below(count as u64) as usize].0)
}

/// One blind step: uniform among all 2d directions, move only if that edge
/// is open.
pub fn step_blind(view: &ClusterView, pos: usize, stream: &mut Stream) -> usize {
    let spec = view.spec();
    let dir = stream.next_below(2 * spec.dim() as u64);
    let (axis, forward) = ((dir / 2) as usize, dir.is_multiple_of(2));
    if view.bonds().open_toward(pos, axis, forward) {
        spec.neighbor(pos, axis, forward).unwrap()
    } else {
        pos
    }
}

/// Direct blind-walk simulation, independent of the coupling. Returns the
/// visited sites, `n_steps + 1` entries including the start.
pub fn run_blind_direct(
    view: &ClusterView,
    start: usize,
    n_steps: usize,
    stream: &mut Stream,
) -> Vec<usize> {
    let mut path = Vec::with_capacity(n_steps + 1);
    let mut here = start;
    path.push(here);
    for _ in 0..n_steps {
        here = step_blind(view, here, stream);
        path.push(here);
    }
    path
}

/// The jump chain together with both clock sums.
#[derive(Debug, Clone)]
pub struct CoupledTrajectory {
    spec: LatticeSpec,
    start: usize,
    start_coords: Vec<i64>,
    /// Cumulative unwrapped displacement, flattened, `(jumps + 1) * d`.
    disp: Vec<i32>,
    /// `T_0 = 0 < T_1 < ...`, real time of each jump.
    t_cum: Vec<f64>,
    /// `U_0 = 0 < U_1 < ...`, blind time of each jump.
    u_cum: Vec<u64>,
    /// First jump count at which the walk touched the box scale.
    boundary_hit: Option<usize>,
}

/// Simulate `jumps` myopic jumps from `start` with coupled exponential and
/// geometric clocks.
pub fn run_coupled(
    view: &ClusterView,
    start: usize,
    jumps: usize,
    stream: &mut Stream,
) -> Result<CoupledTrajectory> {
    if !view.contains(start) {
        return Err(Error::OutsideCluster);
    }
    if view.open_degree(start) == 0 {
        return Err(Error::IsolatedStart);
    }
    let spec = *view.spec();
    let d = spec.dim();
    let two_d = 2.0 * d as f64;
    let mut stepper = Stepper::new(view, start);
    let mut disp = Vec::with_capacity((jumps + 1) * d);
    let mut t_cum = Vec::with_capacity(jumps + 1);
    let mut u_cum = Vec::with_capacity(jumps + 1);
    disp.extend(std::iter::repeat_n(0i32, d));
    t_cum.push(0.0);
    u_cum.push(0u64);
    let mut boundary_hit = if stepper.hit { Some(0) } else { None };
    let mut t = 0.0f64;
    let mut u = 0u64;
    let mut dirs = [(0usize, 0u8); 2 * MAX_DIMENSION];
    for p in 1..=jumps {
        let count = stepper.open_dirs(&mut dirs);
        debug_assert!(count > 0, "the walk cannot reach an isolated site");
        let (neighbor, dir) = dirs[stream.next_below(count as u64) as usize];
        t += stream.next_exp();
        u += stream.next_geometric(count as f64 / two_d);
        stepper.move_to(neighbor, dir);
        for axis in 0..d {
            disp.push(stepper.disp[axis] as i32);
        }
        t_cum.push(t);
        u_cum.push(u);
        if boundary_hit.is_none() && stepper.hit {
            boundary_hit = Some(p);
        }
    }
    Ok(CoupledTrajectory {
        spec,
        start,
        start_coords: spec.coords_of(start),
        disp,
        t_cum,
        u_cum,
        boundary_hit,
    })
}

impl CoupledTrajectory {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Number of simulated jumps `P`.
    pub fn jumps(&self) -> usize {
        self.t_cum.len() - 1
    }

    pub fn t_cum(&self) -> &[f64] {
        &self.t_cum
    }

    pub fn u_cum(&self) -> &[u64] {
        &self.u_cum
    }

    pub fn t_final(&self) -> f64 {
        *self.t_cum.last().unwrap()
    }

    pub fn u_final(&self) -> u64 {
        *self.u_cum.last().unwrap()
    }

    /// Jump count of the first box-scale contact, if any.
    pub fn boundary_hit(&self) -> Option<usize> {
        self.boundary_hit
    }

    /// Unwrapped displacement after `p` jumps.
    #[inline]
    pub fn displacement_at(&self, p: usize) -> &[i32] {
        let d = self.spec.dim();
        &self.disp[p * d..(p + 1) * d]
    }

    /// Unwrapped position after `p` jumps (start coordinates plus
    /// displacement).
    pub fn position_at(&self, p: usize) -> Vec<i64> {
        self.displacement_at(p)
            .iter()
            .zip(&self.start_coords)
            .map(|(&dlt, &s)| s + dlt as i64)
            .collect()
    }

    /// L1 norm of the displacement after `p` jumps.
    #[inline]
    pub fn l1_at(&self, p: usize) -> u64 {
        self.displacement_at(p)
            .iter()
            .map(|&c| c.unsigned_abs() as u64)
            .sum()
    }

    /// Wrapped site index after `p` jumps.
    pub fn site_at(&self, p: usize) -> usize {
        let half = self.spec.half_width() as i64;
        let side = self.spec.side() as i64;
        let coords: Vec<i64> = self
            .displacement_at(p)
            .iter()
            .zip(&self.start_coords)
            .map(|(&dlt, &s)| (s + dlt as i64 + half).rem_euclid(side) - half)
            .collect();
        self.spec
            .index_of(&coords)
            .expect("wrapped coordinates are in the box")
    }

    /// `n(t) = sup{p : T_p <= t}`.
    pub fn jump_index_at_time(&self, t: f64) -> Result<usize> {
        if t < 0.0 {
            return Err(Error::invalid("t", "query time must be >= 0"));
        }
        if t > self.t_final() {
            return Err(Error::BeyondHorizon {
                query: t,
                horizon: self.t_final(),
            });
        }
        Ok(self.t_cum.partition_point(|&tp| tp <= t) - 1)
    }

    /// `m(n) = sup{p : U_p <= n}`.
    pub fn jump_index_at_blind(&self, n: u64) -> Result<usize> {
        if n > self.u_final() {
            return Err(Error::BeyondHorizon {
                query: n as f64,
                horizon: self.u_final() as f64,
            });
        }
        Ok(self.u_cum.partition_point(|&up| up <= n) - 1)
    }

    /// Unwrapped position of the continuous-time walk at real time `t`.
    pub fn x_at(&self, t: f64) -> Result<Vec<i64>> {
        Ok(self.position_at(self.jump_index_at_time(t)?))
    }

    /// Unwrapped position of the blind walk at blind time `n`.
    pub fn y_at(&self, n: u64) -> Result<Vec<i64>> {
        Ok(self.position_at(self.jump_index_at_blind(n)?))
    }

    /// Censoring time of this trajectory in the given walk's clock, if it
    /// touched the box scale.
    pub fn censor_time(&self, kind: WalkKind) -> Option<f64> {
        self.boundary_hit.map(|p| match kind {
            WalkKind::Ctsrw => self.t_cum[p],
            WalkKind::Blind => self.u_cum[p] as f64,
            WalkKind::Myopic => p as f64,
        })
    }
}

/// Largest chemical displacement from the start over jump epochs
/// `0..=max_jump`, read off a precomputed distance field.
pub fn max_chemical_displacement(
    traj: &CoupledTrajectory,
    field: &DistanceField,
    max_jump: usize,
) -> Result<u32> {
    if max_jump > traj.jumps() {
        return Err(Error::BeyondHorizon {
            query: max_jump as f64,
            horizon: traj.jumps() as f64,
        });
    }
    let mut best = 0u32;
    for p in 0..=max_jump {
        let d = field
            .distance(traj.site_at(p))
            .ok_or(Error::CapExceeded(field.cap()))?;
        best = best.max(d);
    }
    Ok(best)
}
