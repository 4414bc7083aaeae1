//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (visible with `--nocapture`). Criteria 8 and 9 share
//! one batch of coupled runs.
//!
//! Run with:
//!
//! ```bash
//! cargo test --test acceptance -- --nocapture
//! ```

use percolil::analysis::phi;
use percolil::cluster::sample_conditioned;
use percolil::environment::{
    alpha_direct, alpha_from_ik, column_stationarity, environment_stats_from_coupled,
    stationarity_check, FiniteChainOracle,
};
use percolil::geometry::{l1_norm, DistanceField};
use percolil::lattice::{Boundary, LatticeSpec};
use percolil::rng::{Domain, Stream};
use percolil::runner::{
    run_alpha, run_heatkernel, run_lil, run_tail, run_volume, thread_pool, to_json_string,
    AlphaParams, HeatkernelParams, LilParams, TailParams, VolumeParams,
};
use percolil::walks::{run_coupled, WalkKind};

fn spec(d: usize, l: u32, boundary: Boundary) -> LatticeSpec {
    LatticeSpec::new(d, l, boundary).unwrap()
}

/// Criterion 1: p = 1 degeneracy (d = 2, L = 64). Both alpha estimators are
/// 1 within 0.01 at 1e6 steps, the blind and myopic walks coincide pathwise
/// under the coupling, and i_hat(4) = 1 exactly.
#[test]
fn criterion_01_p_one_degeneracy() {
    let view = sample_conditioned(spec(2, 64, Boundary::Torus), 1.0, 101, 4)
        .unwrap()
        .view;
    let jumps = 1_000_000usize;
    let mut stream = Stream::new(1);
    let traj = run_coupled(&view, view.origin(), jumps, &mut stream).unwrap();

    let direct = alpha_direct(&traj).unwrap();
    let stats = environment_stats_from_coupled(&view, &traj, jumps).unwrap();
    let from_ik = alpha_from_ik(&stats, 2).unwrap();
    assert!((direct - 1.0).abs() <= 0.01, "alpha_direct {direct}");
    assert!((from_ik - 1.0).abs() <= 0.01, "alpha_from_ik {from_ik}");
    assert_eq!(stats.i_hat(4), 1.0, "i_hat(4) must be exactly 1");

    // Pathwise: U_p = p, so y_at(n) is the jump chain itself.
    for p in 0..=jumps {
        assert_eq!(traj.u_cum()[p], p as u64);
    }
    for n in (0..jumps as u64).step_by(9973) {
        assert_eq!(traj.y_at(n).unwrap(), traj.position_at(n as usize));
    }
    println!(
        "criterion 1 PASS: alpha_direct {direct}, alpha_from_ik {from_ik}, i_hat(4) = 1, blind = myopic pathwise"
    );
}

/// Criterion 2: stationarity oracle (p = 0.7, d = 2, torus L = 8). The blind
/// matrix is symmetric entrywise exactly, column sums are 1 within 1e-12,
/// and the myopic negative control has a column sum off by at least 1e-3.
#[test]
fn criterion_02_stationarity_oracle() {
    let view = sample_conditioned(spec(2, 8, Boundary::Torus), 0.7, 202, 64)
        .unwrap()
        .view;
    assert!(
        view.site_count() <= 300,
        "cluster has {} sites",
        view.site_count()
    );
    let oracle = FiniteChainOracle::build(&view, 300).unwrap();
    let blind = stationarity_check(&oracle);
    assert_eq!(
        blind.max_asymmetry, 0.0,
        "blind matrix must be exactly symmetric"
    );
    assert!(
        blind.max_column_deviation <= 1e-12,
        "column deviation {}",
        blind.max_column_deviation
    );
    assert!(blind.max_uniform_deviation <= 1e-12);

    let myopic = column_stationarity(&oracle.myopic_matrix().unwrap());
    assert!(
        myopic.max_column_deviation >= 1e-3,
        "myopic control deviation {}",
        myopic.max_column_deviation
    );
    println!(
        "criterion 2 PASS: {} sites, blind column dev {:.2e}, asymmetry {:.1}, myopic control dev {:.3}",
        view.site_count(),
        blind.max_column_deviation,
        blind.max_asymmetry,
        myopic.max_column_deviation
    );
}

/// Criterion 3: alpha cross-consistency (p = 0.7, d = 2, L = 256, 1e6 steps,
/// 20 trials). Per trial the two estimators agree within 2% and both lie in
/// (0, 1).
#[test]
fn criterion_03_alpha_cross_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_alpha(&AlphaParams {
        p: 0.7,
        d: 2,
        l: 256,
        steps: 1_000_000,
        trials: 20,
        seed: 303,
        out: dir.path().join("alpha.json"),
        ..AlphaParams::default()
    })
    .unwrap();
    assert_eq!(report.per_trial.len(), 20);
    let mut worst = 0.0f64;
    for t in &report.per_trial {
        assert!(t.alpha_direct > 0.0 && t.alpha_direct < 1.0);
        assert!(t.alpha_from_ik > 0.0 && t.alpha_from_ik < 1.0);
        let rel = (t.alpha_direct - t.alpha_from_ik).abs() / t.alpha_direct;
        worst = worst.max(rel);
        assert!(
            rel <= 0.02,
            "trial {}: direct {} vs ik {}",
            t.trial,
            t.alpha_direct,
            t.alpha_from_ik
        );
    }
    println!(
        "criterion 3 PASS: alpha_direct {:.4}, alpha_from_ik {:.4}, worst per-trial gap {:.4}%",
        report.alpha_direct,
        report.alpha_from_ik,
        100.0 * worst
    );
}

/// Criterion 4: coupling distributional identity on a fixed small cluster
/// with 1e6 samples. The endpoint law of y_at(6) matches the 6-step blind
/// matrix and the law of x_at(5.0) matches the uniformized heat kernel,
/// each within total variation 0.02.
#[test]
fn criterion_04_coupling_distributional_identity() {
    let view = sample_conditioned(spec(2, 2, Boundary::Torus), 0.7, 404, 64)
        .unwrap()
        .view;
    let sites = view.site_count() as usize;
    assert!(sites <= 30, "cluster has {sites} sites");
    let oracle = FiniteChainOracle::build(&view, 30).unwrap();
    let row = oracle.row_of(view.origin()).unwrap();
    let blind6 = oracle.blind_power(6);
    let kernel5 = oracle.heat_kernel(5.0).unwrap();

    let samples = 1_000_000u64;
    let budget = 48usize;
    let master = Stream::new(4);
    let mut counts_y = vec![0u64; sites];
    let mut counts_x = vec![0u64; sites];
    for i in 0..samples {
        let mut stream = master.child(Domain::Trial, i);
        let traj = run_coupled(&view, view.origin(), budget, &mut stream).unwrap();
        assert!(traj.t_final() >= 5.0 && traj.u_final() >= 6);
        let y = traj.site_at(traj.jump_index_at_blind(6).unwrap());
        let x = traj.site_at(traj.jump_index_at_time(5.0).unwrap());
        counts_y[oracle.row_of(y).unwrap()] += 1;
        counts_x[oracle.row_of(x).unwrap()] += 1;
    }
    let tv = |counts: &[u64], exact: &dyn Fn(usize) -> f64| -> f64 {
        counts
            .iter()
            .enumerate()
            .map(|(c, &n)| (n as f64 / samples as f64 - exact(c)).abs())
            .sum::<f64>()
            / 2.0
    };
    let tv_y = tv(&counts_y, &|c| blind6[(row, c)]);
    let tv_x = tv(&counts_x, &|c| kernel5[(row, c)]);
    assert!(tv_y <= 0.02, "blind endpoint TV {tv_y}");
    assert!(tv_x <= 0.02, "continuous endpoint TV {tv_x}");
    println!(
        "criterion 4 PASS: {sites}-site cluster, TV(y_at(6)) {tv_y:.5}, TV(x_at(5.0)) {tv_x:.5}"
    );
}

/// Criterion 5: volume growth (p = 0.7, d = 2, 20 conditioned clusters,
/// radii 15..60): pooled log-log slope in [1.8, 2.2].
#[test]
fn criterion_05_volume_growth() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_volume(&VolumeParams {
        p: 0.7,
        d: 2,
        l: 96,
        boundary: Boundary::Torus,
        clusters: 20,
        radii_min: 15,
        radii_max: 60,
        seed: 505,
        out: dir.path().join("volume.csv"),
        ..VolumeParams::default()
    })
    .unwrap();
    assert_eq!(report.clusters_measured, 20);
    let fit = report.fit.unwrap();
    assert!(fit.slope >= 1.8 && fit.slope <= 2.2, "slope {}", fit.slope);
    println!(
        "criterion 5 PASS: pooled slope {:.4} (R^2 {:.4}) over {} clusters",
        fit.slope, fit.r_squared, report.clusters_measured
    );
}

/// Criterion 6: Gaussian shape (p = 0.7, d = 2, myopic, t = 2000 jumps,
/// 2e5 trials): fit R^2 >= 0.9 with strictly negative slope.
#[test]
fn criterion_06_gaussian_shape() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_heatkernel(&HeatkernelParams {
        p: 0.7,
        d: 2,
        t: 2000,
        trials: 200_000,
        seed: 606,
        out: dir.path().join("heatkernel.json"),
        ..HeatkernelParams::default()
    })
    .unwrap();
    assert!(report.fit.slope < 0.0, "slope {}", report.fit.slope);
    assert!(report.fit.r_squared >= 0.9, "R^2 {}", report.fit.r_squared);
    println!(
        "criterion 6 PASS: slope {:.4}, R^2 {:.4}, {} bins, censoring {:.4}",
        report.fit.slope, report.fit.r_squared, report.fit.bins, report.censoring_rate
    );
}

/// Criterion 7: displacement tail (p = 0.7, d = 2, n = 1e4, gamma grid
/// 0.2..2.0): survival nonincreasing at every grid point, log-survival
/// strictly decreasing across the interior of the curve.
#[test]
fn criterion_07_displacement_tail() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_tail(&TailParams {
        p: 0.7,
        d: 2,
        n: 10_000.0,
        gammas: (1..=10).map(|i| i as f64 * 0.2).collect(),
        walk: WalkKind::Ctsrw,
        trials: 2_000,
        seed: 707,
        out: dir.path().join("tail.json"),
        ..TailParams::default()
    })
    .unwrap();
    let curve = &report.curve;
    for w in curve.windows(2) {
        assert!(
            w[1].survival <= w[0].survival,
            "survival must be nonincreasing"
        );
    }
    // Shape of the Gaussian bound: log-survival decreasing in gamma^2 on the
    // interior (0 < survival < 1) part of the curve.
    let interior: Vec<_> = curve
        .iter()
        .filter(|p| p.survival > 0.0 && p.survival < 1.0)
        .collect();
    assert!(
        interior.len() >= 3,
        "need at least 3 interior points, got {}",
        interior.len()
    );
    for w in interior.windows(2) {
        assert!(
            w[1].survival.ln() < w[0].survival.ln(),
            "log-survival must fall with gamma^2: {} -> {}",
            w[0].survival,
            w[1].survival
        );
    }
    println!(
        "criterion 7 PASS: {} grid points, {} interior, survival {:.3} -> {:.3}, censoring {:.4}",
        curve.len(),
        interior.len(),
        curve.first().unwrap().survival,
        curve.last().unwrap().survival,
        report.censoring_rate
    );
}

/// Criteria 8 and 9, one batch of coupled runs (p = 0.7, d = 2, CTSRW,
/// 50 trials, horizon 4e6).
///
/// 8: the estimate at horizons 1e6 and 4e6 differ by at most 15%, with a
/// positive finite value and a nonzero lower band edge.
/// 9: the cross-walk relation: c_X / c_Y = 1 / sqrt(alpha) within 10%.
#[test]
fn criterion_08_09_lil_stabilization_and_coupled_relation() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_lil(&LilParams {
        p: 0.7,
        d: 2,
        horizon: 4.0e6,
        trials: 50,
        envs: 3,
        walk: WalkKind::Ctsrw,
        seed: 808,
        out: dir.path().join("lil.json"),
        ..LilParams::default()
    })
    .unwrap();

    let at_full = report.estimate.point;
    let at_quarter = report
        .estimate_quarter
        .as_ref()
        .expect("quarter horizon present")
        .point;
    assert!(at_full.is_finite() && at_full > 0.0, "c_hat {at_full}");
    assert!(
        report.estimate.band_low > 0.0,
        "lower band edge {}",
        report.estimate.band_low
    );
    let drift = (at_full - at_quarter).abs() / at_quarter;
    assert!(
        drift <= 0.15,
        "c_hat(4e6) {at_full} vs c_hat(1e6) {at_quarter}: drift {drift}"
    );
    println!(
        "criterion 8 PASS: c_hat(1e6) {:.4}, c_hat(4e6) {:.4}, drift {:.2}%, band [{:.4}, {:.4}], censoring {:.4}",
        at_quarter,
        at_full,
        100.0 * drift,
        report.estimate.band_low,
        report.estimate.band_high,
        report.censoring_rate
    );

    let relation = report.coupling_residual.abs();
    assert!(
        relation <= 0.10,
        "c_X/c_Y * sqrt(alpha) = {} (want within 10% of 1)",
        1.0 + report.coupling_residual
    );
    println!(
        "criterion 9 PASS: c_X {:.4}, c_Y {:.4}, alpha {:.4}, (c_X/c_Y)*sqrt(alpha) = {:.4}",
        report.estimate_ctsrw.point,
        report.estimate_blind.point,
        report.alpha_direct_mean,
        1.0 + report.coupling_residual
    );
}

/// Criterion 10: reproducibility. The criterion-3 run repeated with thread
/// budgets 1 and 8 yields byte-identical JSON.
#[test]
fn criterion_10_thread_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let params = AlphaParams {
        p: 0.7,
        d: 2,
        l: 256,
        steps: 1_000_000,
        trials: 20,
        seed: 303,
        out: dir.path().join("alpha.json"),
        ..AlphaParams::default()
    };
    let single = thread_pool(Some(1))
        .unwrap()
        .install(|| run_alpha(&params))
        .unwrap();
    let eight = thread_pool(Some(8))
        .unwrap()
        .install(|| run_alpha(&params))
        .unwrap();
    let a = to_json_string(&single);
    let b = to_json_string(&eight);
    assert_eq!(a, b, "thread budgets 1 and 8 must produce identical JSON");
    println!(
        "criterion 10 PASS: {} JSON bytes identical across thread budgets 1 and 8",
        a.len()
    );
}

/// Criterion 11: geometry inequality. Over 1e4 sampled cluster sites the L1
/// norm never exceeds the chemical distance, with equality everywhere at
/// p = 1.
#[test]
fn criterion_11_geometry_inequality() {
    let view = sample_conditioned(spec(2, 96, Boundary::Torus), 0.7, 1111, 64)
        .unwrap()
        .view;
    let field = DistanceField::compute(view.bonds(), view.origin(), 1_000_000).unwrap();
    let sites: Vec<usize> = view.sites().collect();
    let origin = view.spec().coords_of(view.origin());
    let mut stream = Stream::new(11);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let site = sites[stream.next_below(sites.len() as u64) as usize];
        let l1 = l1_norm(view.spec(), &origin, &view.spec().coords_of(site));
        let chem = field.distance(site).expect("cluster site is reachable") as u64;
        if l1 > chem {
            violations += 1;
        }
    }
    assert_eq!(
        violations, 0,
        "{violations} violations of l1 <= chemical distance"
    );

    // p = 1: chemical distance equals the L1 norm at every site.
    let full = sample_conditioned(spec(2, 48, Boundary::Torus), 1.0, 2, 2)
        .unwrap()
        .view;
    let field = DistanceField::compute(full.bonds(), full.origin(), 1_000_000).unwrap();
    let origin = full.spec().coords_of(full.origin());
    for site in full.sites() {
        let l1 = l1_norm(full.spec(), &origin, &full.spec().coords_of(site));
        assert_eq!(l1, field.distance(site).unwrap() as u64);
    }
    println!(
        "criterion 11 PASS: 0 violations over 10000 sampled sites; equality at p = 1 on {} sites",
        full.site_count()
    );
}

/// Sanity for the suite itself: phi is only used above its domain edge.
#[test]
fn phi_domain_guard_holds() {
    assert!(phi(10_000.0).is_ok());
    assert!(phi(2.0).is_err());
}
