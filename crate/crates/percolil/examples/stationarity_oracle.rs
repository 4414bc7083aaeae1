//! Exact finite-cluster chains: the blind walk's one-step matrix preserves
//! the uniform measure (doubly stochastic, symmetric), the myopic walk does
//! not, and the uniformized heat kernel is conservative.
//!
//! Run with: cargo run --release --example stationarity_oracle

use percolil::cluster::sample_conditioned;
use percolil::environment::{column_stationarity, stationarity_check, FiniteChainOracle};
use percolil::lattice::{Boundary, LatticeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = LatticeSpec::new(2, 8, Boundary::Torus)?;
    let view = sample_conditioned(spec, 0.7, 21, 200)?.view;
    let oracle = FiniteChainOracle::build(&view, 400)?;
    println!(
        "cluster with {} sites enumerated as a dense chain",
        oracle.len()
    );
    println!();

    let blind = stationarity_check(&oracle);
    println!("blind one-step matrix:");
    println!(
        "  max |column sum - 1|   = {:.3e}",
        blind.max_column_deviation
    );
    println!(
        "  max |uniform P - uniform| = {:.3e}",
        blind.max_uniform_deviation
    );
    println!(
        "  max |P[x][y] - P[y][x]|   = {:.3e}  (exactly symmetric)",
        blind.max_asymmetry
    );
    println!();

    let myopic = column_stationarity(&oracle.myopic_matrix()?);
    println!("myopic one-step matrix (negative control):");
    println!(
        "  max |column sum - 1|   = {:.3}  (uniform is NOT stationary)",
        myopic.max_column_deviation
    );
    println!();

    for t in [0.5, 2.0, 5.0] {
        let kernel = oracle.heat_kernel(t)?;
        let mut worst = 0.0f64;
        for row in 0..oracle.len() {
            let sum: f64 = (0..oracle.len()).map(|c| kernel[(row, c)]).sum();
            worst = worst.max((sum - 1.0).abs());
        }
        let origin_row = oracle.row_of(view.origin()).unwrap();
        println!(
            "heat kernel at t = {t}: max row-sum error {worst:.2e}, return probability {:.4}",
            kernel[(origin_row, origin_row)]
        );
    }
    Ok(())
}
