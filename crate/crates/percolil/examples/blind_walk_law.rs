//! The blind walk two ways: direct simulation versus reconstruction from the
//! coupled jump chain, both compared against the exact matrix-power law on a
//! small cluster.
//!
//! Run with: cargo run --release --example blind_walk_law

use percolil::cluster::sample_conditioned;
use percolil::environment::FiniteChainOracle;
use percolil::lattice::{Boundary, LatticeSpec};
use percolil::rng::{Domain, Stream};
use percolil::walks::{run_blind_direct, run_coupled};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = LatticeSpec::new(2, 2, Boundary::Torus)?;
    let view = sample_conditioned(spec, 0.7, 5, 200)?.view;
    let oracle = FiniteChainOracle::build(&view, 30)?;
    let n = 6u32;
    let exact = oracle.blind_power(n);
    let row = oracle.row_of(view.origin()).unwrap();
    println!(
        "cluster with {} sites; endpoint law of the blind walk at n = {n}",
        oracle.len()
    );
    println!();

    let samples = 400_000u64;
    let master = Stream::new(31);
    let mut direct = vec![0u64; oracle.len()];
    let mut coupled = vec![0u64; oracle.len()];
    for i in 0..samples {
        let mut stream = master.child(Domain::Trial, i);
        let path = run_blind_direct(&view, view.origin(), n as usize, &mut stream);
        direct[oracle.row_of(path[n as usize]).unwrap()] += 1;

        let mut stream = master.child(Domain::Aux, i);
        let traj = run_coupled(&view, view.origin(), 32, &mut stream)?;
        let site = traj.site_at(traj.jump_index_at_blind(n as u64)?);
        coupled[oracle.row_of(site).unwrap()] += 1;
    }

    let mut tv_direct = 0.0;
    let mut tv_coupled = 0.0;
    println!(
        "{:>12} {:>10} {:>10} {:>10}",
        "site", "exact", "direct", "coupled"
    );
    for (c, &site) in oracle.sites().iter().enumerate() {
        let e = exact[(row, c)];
        let d = direct[c] as f64 / samples as f64;
        let k = coupled[c] as f64 / samples as f64;
        tv_direct += (d - e).abs() / 2.0;
        tv_coupled += (k - e).abs() / 2.0;
        if e > 0.01 {
            println!(
                "{:>12} {:>10.4} {:>10.4} {:>10.4}",
                format!("{:?}", spec.coords_of(site)),
                e,
                d,
                k
            );
        }
    }
    println!();
    println!("total variation vs exact law: direct {tv_direct:.5}, coupled {tv_coupled:.5}");
    Ok(())
}
