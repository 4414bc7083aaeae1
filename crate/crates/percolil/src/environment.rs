//! The environment seen from the walker, summarized by the open degree at
//! the walker's site, and exact finite-cluster chain oracles.
//!
//! `i_hat(k)` is the frequency of degree `k` over the walker's move epochs:
//! the blind walk's n-th waiting time is geometric with success probability
//! `deg/2d` at the site it departs from, so the tally runs over jump-chain
//! epochs and its stationary law on a finite cluster is the degree-biased
//! measure `pi(x) = deg(x) / sum deg`. With that tally the histogram
//! estimator `alpha = 1 / sum_k i_hat(k) * (2d/k)` (the geometric clock at
//! degree k has mean `2d/k`) matches the direct clock-ratio estimator
//! `P / U_P` up to geometric fluctuations, since `E[U_P | degrees]` is
//! exactly `P * sum_k i_hat(k) * (2d/k)`.
//!
//! [`FiniteChainOracle`] holds dense one-step matrices for clusters small
//! enough to enumerate and evaluates the continuous-time transition kernel
//! by uniformization; these are the exact references the Monte Carlo paths
//! are tested against.

use ndarray::Array2;

use crate::cluster::ClusterView;
use crate::walks::CoupledTrajectory;
use crate::{Error, Result};

/// Histogram of open degrees seen along the blind-walk environment chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvironmentStats {
    /// Visit counts by degree, indices `0..=2d`.
    counts: Vec<u64>,
    total: u64,
}

impl EnvironmentStats {
    pub fn new(d: usize) -> Self {
        EnvironmentStats {
            counts: vec![0; 2 * d + 1],
            total: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        EnvironmentStats { counts, total }
    }

    pub fn degree_counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_steps(&self) -> u64 {
        self.total
    }

    /// Empirical frequency of degree `k`.
    pub fn i_hat(&self, k: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[k] as f64 / self.total as f64
        }
    }

    pub fn i_hat_all(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|k| self.i_hat(k)).collect()
    }

    /// Component-wise merge; commutative and associative, so batch results
    /// do not depend on aggregation order.
    pub fn merge(&mut self, other: &EnvironmentStats) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }
}

/// Tally the degree of the departing site of each of the first `n_jumps`
/// jumps, which are the parameters of the geometric waiting times
/// `U_{p+1} - U_p`.
pub fn environment_stats_from_coupled(
    view: &ClusterView,
    traj: &CoupledTrajectory,
    n_jumps: usize,
) -> Result<EnvironmentStats> {
    if n_jumps > traj.jumps() {
        return Err(Error::BeyondHorizon {
            query: n_jumps as f64,
            horizon: traj.jumps() as f64,
        });
    }
    let d = view.spec().dim();
    let mut stats = EnvironmentStats::new(d);
    for p in 0..n_jumps {
        stats.counts[view.open_degree(traj.site_at(p)) as usize] += 1;
        stats.total += 1;
    }
    Ok(stats)
}

/// The same tally along a directly simulated blind path (`path[j]` is the
/// walker's site after `j` attempts): each completed move contributes the
/// degree of the site it departed from.
pub fn environment_stats_from_path(
    view: &ClusterView,
    path: &[usize],
    n_steps: usize,
) -> Result<EnvironmentStats> {
    if n_steps + 1 > path.len() {
        return Err(Error::BeyondHorizon {
            query: n_steps as f64,
            horizon: (path.len() - 1) as f64,
        });
    }
    let d = view.spec().dim();
    let mut stats = EnvironmentStats::new(d);
    for j in 1..=n_steps {
        if path[j] != path[j - 1] {
            stats.counts[view.open_degree(path[j - 1]) as usize] += 1;
            stats.total += 1;
        }
    }
    Ok(stats)
}

/// Time-scale constant from the degree histogram:
/// `alpha = 1 / sum_{k>=1} i_hat(k) * (2d/k)`.
pub fn alpha_from_ik(stats: &EnvironmentStats, d: usize) -> Result<f64> {
    if stats.degree_counts().len() != 2 * d + 1 {
        return Err(Error::invalid(
            "degree_histogram",
            format!(
                "histogram has {} bins, dimension {d} needs {}",
                stats.degree_counts().len(),
                2 * d + 1
            ),
        ));
    }
    if stats.total_steps() == 0 {
        return Err(Error::TooFew {
            what: "environment steps",
            need: 1,
            got: 0,
        });
    }
    if stats.degree_counts()[0] > 0 {
        return Err(Error::invalid(
            "degree_histogram",
            "the walker visited a degree-0 site; connected non-singleton clusters cannot do that",
        ));
    }
    let two_d = 2.0 * d as f64;
    let inv: f64 = (1..=2 * d).map(|k| stats.i_hat(k) * two_d / k as f64).sum();
    Ok(1.0 / inv)
}

/// Time-scale constant read directly off the coupled clocks: `P / U_P`.
pub fn alpha_direct(traj: &CoupledTrajectory) -> Result<f64> {
    const MIN_JUMPS: usize = 1_000;
    if traj.jumps() < MIN_JUMPS {
        return Err(Error::TooFew {
            what: "jumps",
            need: MIN_JUMPS,
            got: traj.jumps(),
        });
    }
    Ok(traj.jumps() as f64 / traj.u_final() as f64)
}

/// Default cap on oracle cluster size; dense matrix work stays trivial below
/// this.
pub const DEFAULT_ORACLE_CAP: usize = 400;

/// Dense exact chains on an enumerated cluster.
#[derive(Debug, Clone)]
pub struct FiniteChainOracle {
    sites: Vec<usize>,
    dim: usize,
    p_blind: Array2<f64>,
}

impl FiniteChainOracle {
    pub fn build(view: &ClusterView, cap: usize) -> Result<Self> {
        let n = view.site_count() as usize;
        if n > cap {
            return Err(Error::OracleCapExceeded { got: n, cap });
        }
        let sites: Vec<usize> = view.sites().collect();
        let dim = view.spec().dim();
        let two_d = 2.0 * dim as f64;
        let mut p_blind = Array2::zeros((n, n));
        for (row, &site) in sites.iter().enumerate() {
            let mut deg = 0usize;
            for axis in 0..dim {
                for forward in [true, false] {
                    if view.bonds().open_toward(site, axis, forward) {
                        let nb = view.spec().neighbor(site, axis, forward).unwrap();
                        let col = sites
                            .binary_search(&nb)
                            .expect("open neighbor is in the cluster");
                        p_blind[(row, col)] += 1.0 / two_d;
                        deg += 1;
                    }
                }
            }
            p_blind[(row, row)] = 1.0 - deg as f64 / two_d;
        }
        Ok(FiniteChainOracle {
            sites,
            dim,
            p_blind,
        })
    }

    /// Enumerated cluster sites, in increasing index order (= matrix rows).
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn row_of(&self, site: usize) -> Option<usize> {
        self.sites.binary_search(&site).ok()
    }

    /// Blind one-step matrix: `1/(2d)` per open edge, lazy remainder on the
    /// diagonal. Symmetric, hence doubly stochastic.
    pub fn blind_matrix(&self) -> &Array2<f64> {
        &self.p_blind
    }

    /// `n`-step blind transition matrix.
    pub fn blind_power(&self, n: u32) -> Array2<f64> {
        let mut acc = Array2::eye(self.len());
        for _ in 0..n {
            acc = acc.dot(&self.p_blind);
        }
        acc
    }

    /// Open degree of the site behind `row`.
    fn degree(&self, row: usize) -> f64 {
        let two_d = 2.0 * self.dim as f64;
        (1.0 - self.p_blind[(row, row)]) * two_d
    }

    /// Myopic one-step matrix: `1/deg` per open edge, zero diagonal.
    /// Fails on a singleton cluster, where the jump chain is undefined.
    pub fn myopic_matrix(&self) -> Result<Array2<f64>> {
        let n = self.len();
        let two_d = 2.0 * self.dim as f64;
        let mut m = Array2::zeros((n, n));
        for row in 0..n {
            let deg = self.degree(row);
            if deg.round() < 1.0 {
                return Err(Error::IsolatedStart);
            }
            for col in 0..n {
                if col != row && self.p_blind[(row, col)] > 0.0 {
                    m[(row, col)] = self.p_blind[(row, col)] * two_d / deg.round();
                }
            }
        }
        Ok(m)
    }

    /// Generator of the continuous-time walk: mean-one exponential holding,
    /// uniform jump along open edges (`Q = M - I`).
    pub fn generator(&self) -> Result<Array2<f64>> {
        let mut q = self.myopic_matrix()?;
        for row in 0..self.len() {
            q[(row, row)] -= 1.0;
        }
        Ok(q)
    }

    /// Transition kernel `exp(tQ)` by uniformization: the Poisson-weighted
    /// series of powers of the myopic matrix, truncated once the cumulative
    /// weight is within `1e-12` of one.
    pub fn heat_kernel(&self, t: f64) -> Result<Array2<f64>> {
        const TAIL_TOLERANCE: f64 = 1e-12;
        if t < 0.0 {
            return Err(Error::invalid("t", "time must be >= 0"));
        }
        let n = self.len();
        if t == 0.0 {
            return Ok(Array2::eye(n));
        }
        let m = self.myopic_matrix()?;
        let mut weight = (-t).exp();
        if weight == 0.0 {
            return Err(Error::invalid(
                "t",
                format!("uniformization underflows at t = {t}"),
            ));
        }
        let mut cumulative = weight;
        let mut power = Array2::eye(n);
        let mut kernel = &power * weight;
        let mut term = 0u64;
        while 1.0 - cumulative > TAIL_TOLERANCE {
            term += 1;
            power = power.dot(&m);
            weight *= t / term as f64;
            kernel += &(&power * weight);
            cumulative += weight;
        }
        Ok(kernel)
    }
}

/// Result of checking that the uniform measure is stationary for the blind
/// chain.
#[derive(Debug, Clone, Copy)]
pub struct StationarityReport {
    /// Largest deviation of a column sum from one.
    pub max_column_deviation: f64,
    /// Largest entry of `|uniform * P - uniform|`.
    pub max_uniform_deviation: f64,
    /// Largest entrywise asymmetry `|P[x][y] - P[y][x]|`.
    pub max_asymmetry: f64,
}

/// Column sums and the uniform fixed point of the blind matrix.
pub fn stationarity_check(oracle: &FiniteChainOracle) -> StationarityReport {
    let p = oracle.blind_matrix();
    column_stationarity(p)
}

/// The same check for an arbitrary one-step matrix (used for the myopic
/// negative control, whose columns do not sum to one on irregular clusters).
pub fn column_stationarity(p: &Array2<f64>) -> StationarityReport {
    let n = p.nrows();
    let mut max_column_deviation = 0.0f64;
    for col in 0..n {
        let sum: f64 = (0..n).map(|row| p[(row, col)]).sum();
        max_column_deviation = max_column_deviation.max((sum - 1.0).abs());
    }
    let uniform = 1.0 / n as f64;
    let mut max_uniform_deviation = 0.0f64;
    for col in 0..n {
        let pushed: f64 = (0..n).map(|row| uniform * p[(row, col)]).sum();
        max_uniform_deviation = max_uniform_deviation.max((pushed - uniform).abs());
    }
    let mut max_asymmetry = 0.0f64;
    for row in 0..n {
        for col in 0..row {
            max_asymmetry = max_asymmetry.max((p[(row, col)] - p[(col, row)]).abs());
        }
    }
    StationarityReport {
        max_column_deviation,
        max_uniform_deviation,
        max_asymmetry,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{label_clusters, sample_conditioned, ClusterView};
    use crate::lattice::{Boundary, LatticeSpec};
    use crate::percolation::BondConfiguration;
    use crate::rng::Stream;
    use crate::walks::{run_blind_direct, run_coupled};

    fn spec(l: u32, boundary: Boundary) -> LatticeSpec {
        LatticeSpec::new(2, l, boundary).unwrap()
    }

    /// Two-site cluster joined by one edge, d = 2.
    fn two_site_view() -> ClusterView {
        let s = spec(2, Boundary::Free);
        let bonds = BondConfiguration::from_open_edges(s, &[(&[0, 0], 0)]).unwrap();
        let labeling = label_clusters(&bonds);
        ClusterView::from_labeling(bonds, &labeling, s.origin())
    }

    #[test]
    fn degree_histogram_simplex_and_p_one() {
        let view = sample_conditioned(spec(8, Boundary::Torus), 1.0, 2, 4)
            .unwrap()
            .view;
        let mut stream = Stream::new(1);
        let traj = run_coupled(&view, view.origin(), 5_000, &mut stream).unwrap();
        let stats = environment_stats_from_coupled(&view, &traj, 5_000).unwrap();
        assert_eq!(stats.total_steps(), 5_000);
        assert_eq!(stats.degree_counts().iter().sum::<u64>(), 5_000);
        assert_eq!(stats.i_hat(4), 1.0);
        assert_eq!(alpha_from_ik(&stats, 2).unwrap(), 1.0);
    }

    #[test]
    fn two_site_cluster_sees_only_degree_one() {
        let view = two_site_view();
        let mut stream = Stream::new(2);
        let traj = run_coupled(&view, view.origin(), 2_000, &mut stream).unwrap();
        let stats = environment_stats_from_coupled(&view, &traj, 1_500).unwrap();
        assert_eq!(stats.i_hat(1), 1.0);
        assert_eq!(alpha_from_ik(&stats, 2).unwrap(), 0.25);
    }

    #[test]
    fn path_tally_counts_moves_only() {
        let view = sample_conditioned(spec(6, Boundary::Torus), 0.7, 5, 64)
            .unwrap()
            .view;
        let mut stream = Stream::new(3);
        let path = run_blind_direct(&view, view.origin(), 4_000, &mut stream);
        let stats = environment_stats_from_path(&view, &path, 4_000).unwrap();
        let moves = path.windows(2).filter(|w| w[0] != w[1]).count() as u64;
        assert_eq!(stats.total_steps(), moves);
        assert!(moves > 0 && moves < 4_000);
        assert!(stats.degree_counts()[0] == 0);
        assert!(environment_stats_from_path(&view, &path, 4_001).is_err());
    }

    #[test]
    fn alpha_from_ik_closed_forms() {
        // i_hat(2d) = 1 -> alpha = 1; i_hat(1) = 1, d = 2 -> 1/4;
        // half degree 1, half degree 2 -> 1/3.
        assert_eq!(
            alpha_from_ik(&EnvironmentStats::from_counts(vec![0, 0, 0, 0, 9]), 2).unwrap(),
            1.0
        );
        assert_eq!(
            alpha_from_ik(&EnvironmentStats::from_counts(vec![0, 7, 0, 0, 0]), 2).unwrap(),
            0.25
        );
        let mixed = EnvironmentStats::from_counts(vec![0, 5, 5, 0, 0]);
        let alpha = alpha_from_ik(&mixed, 2).unwrap();
        assert!((alpha - 1.0 / 3.0).abs() < 1e-15);
        // Degree-0 visits are a bug signal, and so is a mis-sized histogram.
        assert!(alpha_from_ik(&EnvironmentStats::from_counts(vec![1, 5, 0, 0, 0]), 2).is_err());
        assert!(alpha_from_ik(&EnvironmentStats::from_counts(vec![0, 5, 0]), 2).is_err());
    }

    #[test]
    fn alpha_from_ik_stays_in_unit_interval() {
        // f(k) = 2d/k >= 1, so alpha <= 1, with equality only when all mass
        // sits at full degree.
        let mut stream = Stream::new(99);
        for _ in 0..200 {
            let counts: Vec<u64> = std::iter::once(0)
                .chain((1..=4).map(|_| stream.next_below(50)))
                .collect();
            if counts.iter().sum::<u64>() == 0 {
                continue;
            }
            let stats = EnvironmentStats::from_counts(counts.clone());
            let alpha = alpha_from_ik(&stats, 2).unwrap();
            assert!(alpha > 0.0 && alpha <= 1.0, "alpha {alpha} from {counts:?}");
            let concentrated = counts[4] > 0 && counts[1..4].iter().all(|&c| c == 0);
            assert_eq!(alpha == 1.0, concentrated, "{counts:?}");
        }
    }

    #[test]
    fn alpha_direct_cases() {
        let view = sample_conditioned(spec(8, Boundary::Torus), 1.0, 7, 4)
            .unwrap()
            .view;
        let mut stream = Stream::new(4);
        let traj = run_coupled(&view, view.origin(), 2_000, &mut stream).unwrap();
        assert_eq!(alpha_direct(&traj).unwrap(), 1.0);
        let short = run_coupled(&view, view.origin(), 100, &mut stream).unwrap();
        assert!(alpha_direct(&short).is_err());

        // Two-site cluster: every increment is Geometric(1/4), so P/U_P is
        // near 1/4.
        let two = two_site_view();
        let traj = run_coupled(&two, two.origin(), 40_000, &mut stream).unwrap();
        let alpha = alpha_direct(&traj).unwrap();
        // sd of the increment is sqrt(12); delta method on P/U_P.
        let tol = 4.0 * 12f64.sqrt() * 0.25 * 0.25 / (40_000f64).sqrt();
        assert!((alpha - 0.25).abs() < tol, "alpha {alpha}");
    }

    #[test]
    fn estimators_cross_validate_on_one_run() {
        let view = sample_conditioned(spec(48, Boundary::Torus), 0.7, 11, 64)
            .unwrap()
            .view;
        let mut stream = Stream::new(5);
        let traj = run_coupled(&view, view.origin(), 200_000, &mut stream).unwrap();
        let direct = alpha_direct(&traj).unwrap();
        let stats = environment_stats_from_coupled(&view, &traj, traj.jumps()).unwrap();
        let from_ik = alpha_from_ik(&stats, 2).unwrap();
        assert!(direct > 0.0 && direct < 1.0);
        assert!(from_ik > 0.0 && from_ik < 1.0);
        assert!(
            (direct - from_ik).abs() / direct < 0.02,
            "direct {direct} vs from_ik {from_ik}"
        );
    }

    #[test]
    fn stationary_degree_distribution_matches_enumeration() {
        // Long run on a small fixed cluster: i_hat approaches the exact
        // stationary degree histogram of the jump chain, computed by
        // enumeration (the degree-biased measure pi(x) = deg(x)/sum deg).
        let view = sample_conditioned(spec(5, Boundary::Torus), 0.7, 13, 64)
            .unwrap()
            .view;
        let d = view.spec().dim();
        let mut exact = vec![0u64; 2 * d + 1];
        let mut total_degree = 0u64;
        for site in view.sites() {
            let deg = view.open_degree(site) as usize;
            exact[deg] += deg as u64;
            total_degree += deg as u64;
        }
        let jumps = 500_000usize;
        let mut stream = Stream::new(6);
        let traj = run_coupled(&view, view.origin(), jumps, &mut stream).unwrap();
        let stats = environment_stats_from_coupled(&view, &traj, jumps).unwrap();
        for (k, &count) in exact.iter().enumerate() {
            let expect = count as f64 / total_degree as f64;
            let sigma = (expect * (1.0 - expect) / jumps as f64).sqrt();
            // Correlated samples: allow 3 binomial sigma times a mixing slack.
            let tol = 3.0 * sigma.max(1e-4) * 3.0;
            assert!(
                (stats.i_hat(k) - expect).abs() < tol,
                "k={k}: i_hat {} vs exact {expect}",
                stats.i_hat(k)
            );
        }
    }

    #[test]
    fn ergodic_averages_stabilize_between_halves() {
        let view = sample_conditioned(spec(6, Boundary::Torus), 0.7, 17, 64)
            .unwrap()
            .view;
        let n = 400_000usize;
        let mut stream = Stream::new(7);
        let path = run_blind_direct(&view, view.origin(), n, &mut stream);
        let d = view.spec().dim();
        let first = environment_stats_from_path(&view, &path[..=n / 2], n / 2).unwrap();
        let second = environment_stats_from_path(&view, &path[n / 2..], n - n / 2).unwrap();
        for k in 0..=2 * d {
            let p = (first.i_hat(k) + second.i_hat(k)) / 2.0;
            let samples = first.total_steps().min(second.total_steps()) as f64;
            let sigma = (p * (1.0 - p) / samples).sqrt();
            let tol = 3.0 * sigma.max(1e-4) * 3.0;
            assert!(
                (first.i_hat(k) - second.i_hat(k)).abs() < tol,
                "degree {k} drifted"
            );
        }
    }

    #[test]
    fn oracle_two_site_matrices() {
        let view = two_site_view();
        let oracle = FiniteChainOracle::build(&view, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(oracle.len(), 2);
        let p = oracle.blind_matrix();
        assert_eq!(p[(0, 0)], 0.75);
        assert_eq!(p[(0, 1)], 0.25);
        assert_eq!(p[(1, 0)], 0.25);
        assert_eq!(p[(1, 1)], 0.75);
        let report = stationarity_check(&oracle);
        assert_eq!(report.max_column_deviation, 0.0);
        assert_eq!(report.max_uniform_deviation, 0.0);
        assert_eq!(report.max_asymmetry, 0.0);
    }

    #[test]
    fn oracle_rows_sum_to_one_and_blind_is_symmetric() {
        let view = sample_conditioned(spec(7, Boundary::Torus), 0.65, 19, 64)
            .unwrap()
            .view;
        let oracle = FiniteChainOracle::build(&view, DEFAULT_ORACLE_CAP).unwrap();
        let p = oracle.blind_matrix();
        for row in 0..oracle.len() {
            let sum: f64 = (0..oracle.len()).map(|c| p[(row, c)]).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        let report = stationarity_check(&oracle);
        assert!(report.max_asymmetry == 0.0);
        assert!(report.max_column_deviation < 1e-12);
        assert!(report.max_uniform_deviation < 1e-12);
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let view = sample_conditioned(spec(8, Boundary::Torus), 0.9, 23, 8)
            .unwrap()
            .view;
        assert!(FiniteChainOracle::build(&view, 10).is_err());
    }

    #[test]
    fn myopic_generator_on_path_cluster() {
        // 3-site path: middle row of Q is (1/2, -1, 1/2).
        let s = spec(2, Boundary::Free);
        let bonds = BondConfiguration::from_open_edges(s, &[(&[-1, 0], 0), (&[0, 0], 0)]).unwrap();
        let labeling = label_clusters(&bonds);
        let view = ClusterView::from_labeling(bonds, &labeling, s.origin());
        let oracle = FiniteChainOracle::build(&view, 10).unwrap();
        let mid = oracle.row_of(s.origin()).unwrap();
        let q = oracle.generator().unwrap();
        assert_eq!(q[(mid, mid)], -1.0);
        let neighbors: Vec<usize> = (0..3).filter(|&c| c != mid).collect();
        for &c in &neighbors {
            assert_eq!(q[(mid, c)], 0.5);
        }
        for row in 0..3 {
            let sum: f64 = (0..3).map(|c| q[(row, c)]).sum();
            assert!(sum.abs() < 1e-15);
        }
    }

    #[test]
    fn myopic_columns_fail_stationarity_on_irregular_clusters() {
        let view = sample_conditioned(spec(8, Boundary::Torus), 0.7, 29, 64)
            .unwrap()
            .view;
        let oracle = FiniteChainOracle::build(&view, DEFAULT_ORACLE_CAP).unwrap();
        let myopic = oracle.myopic_matrix().unwrap();
        let report = column_stationarity(&myopic);
        assert!(
            report.max_column_deviation >= 1e-3,
            "expected an irregular cluster, got column deviation {}",
            report.max_column_deviation
        );
    }

    #[test]
    fn heat_kernel_identity_closed_form_and_conservation() {
        let view = two_site_view();
        let oracle = FiniteChainOracle::build(&view, 10).unwrap();
        let id = oracle.heat_kernel(0.0).unwrap();
        assert_eq!(id[(0, 0)], 1.0);
        assert_eq!(id[(0, 1)], 0.0);
        for t in [0.3, 1.0, 2.5] {
            let k = oracle.heat_kernel(t).unwrap();
            let expect = 0.5 * (1.0 + (-2.0 * t).exp());
            assert!((k[(0, 0)] - expect).abs() < 1e-12, "t={t}");
            assert!((k[(0, 0)] + k[(0, 1)] - 1.0).abs() < 1e-12);
        }
        assert!(oracle.heat_kernel(-1.0).is_err());

        let bigger = sample_conditioned(spec(6, Boundary::Torus), 0.7, 31, 64)
            .unwrap()
            .view;
        let oracle = FiniteChainOracle::build(&bigger, DEFAULT_ORACLE_CAP).unwrap();
        for t in [0.5, 5.0] {
            let k = oracle.heat_kernel(t).unwrap();
            for row in 0..oracle.len() {
                let sum: f64 = (0..oracle.len()).map(|c| k[(row, c)]).sum();
                assert!((sum - 1.0).abs() < 1e-9, "t={t} row={row} sum={sum}");
            }
        }
    }

    #[test]
    fn heat_kernel_satisfies_chapman_kolmogorov() {
        let view = sample_conditioned(spec(5, Boundary::Torus), 0.7, 37, 64)
            .unwrap()
            .view;
        let oracle = FiniteChainOracle::build(&view, DEFAULT_ORACLE_CAP).unwrap();
        let (s, t) = (0.3, 1.1);
        let combined = oracle.heat_kernel(s + t).unwrap();
        let composed = oracle
            .heat_kernel(s)
            .unwrap()
            .dot(&oracle.heat_kernel(t).unwrap());
        let max_dev = combined
            .iter()
            .zip(composed.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 1e-8, "max deviation {max_dev}");
    }

    #[test]
    fn blind_endpoint_law_matches_matrix_power() {
        // Direct blind simulation at n = 6 against the 6-step matrix row.
        let view = sample_conditioned(spec(3, Boundary::Torus), 0.7, 41, 64)
            .unwrap()
            .view;
        let oracle = FiniteChainOracle::build(&view, DEFAULT_ORACLE_CAP).unwrap();
        let start_row = oracle.row_of(view.origin()).unwrap();
        let six = oracle.blind_power(6);
        let trials = 200_000u64;
        let mut stream = Stream::new(8);
        let mut counts = vec![0u64; oracle.len()];
        for _ in 0..trials {
            let path = run_blind_direct(&view, view.origin(), 6, &mut stream);
            counts[oracle.row_of(path[6]).unwrap()] += 1;
        }
        let tv: f64 = counts
            .iter()
            .enumerate()
            .map(|(c, &n)| (n as f64 / trials as f64 - six[(start_row, c)]).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "total variation {tv}");
    }
}
