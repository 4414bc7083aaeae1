//! One jump chain, three walks: reconstruct the continuous-time walk and the
//! blind walk from the same trajectory and estimate the time-scale constant
//! linking their clocks both ways.
//!
//! Run with: cargo run --release --example coupled_clocks

use percolil::cluster::sample_conditioned;
use percolil::environment::{alpha_direct, alpha_from_ik, environment_stats_from_coupled};
use percolil::lattice::{Boundary, LatticeSpec};
use percolil::rng::Stream;
use percolil::walks::run_coupled;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = LatticeSpec::new(2, 256, Boundary::Torus)?;
    let view = sample_conditioned(spec, 0.7, 3, 200)?.view;
    let mut stream = Stream::new(7);
    let jumps = 1_000_000;
    let traj = run_coupled(&view, view.origin(), jumps, &mut stream)?;

    println!(
        "jump chain with {jumps} jumps on a {}-site cluster",
        view.site_count()
    );
    println!("  real time spanned   T_P = {:.1}", traj.t_final());
    println!("  blind time spanned  U_P = {}", traj.u_final());
    println!();

    // The three processes read off the same path at their own clocks.
    println!(
        "{:>10} {:>16} {:>16} {:>16}",
        "clock", "Z at jump", "X at T_p", "Y at U_p"
    );
    for p in [10usize, 1_000, 100_000, 1_000_000] {
        let z = traj.position_at(p);
        let x = traj.x_at(traj.t_cum()[p])?;
        let y = traj.y_at(traj.u_cum()[p])?;
        assert_eq!(z, x);
        assert_eq!(z, y);
        println!(
            "{p:>10} {:>16} {:>16} {:>16}",
            format!("{z:?}"),
            format!("{x:?}"),
            format!("{y:?}")
        );
    }
    println!();

    // Two estimators of the same constant: the clock ratio P / U_P, and the
    // degree histogram collected at the walker's move epochs.
    let direct = alpha_direct(&traj)?;
    let stats = environment_stats_from_coupled(&view, &traj, traj.jumps())?;
    let histogram = alpha_from_ik(&stats, spec.dim())?;
    println!("alpha from clock ratio      P / U_P = {direct:.5}");
    println!("alpha from degree histogram         = {histogram:.5}");
    println!(
        "relative gap                         {:.3}%",
        100.0 * (direct - histogram).abs() / direct
    );
    println!();
    println!("move-epoch degree frequencies i_hat(k):");
    for (k, f) in stats.i_hat_all().iter().enumerate() {
        if *f > 0.0 {
            println!("  k = {k}: {f:.4}");
        }
    }
    Ok(())
}
