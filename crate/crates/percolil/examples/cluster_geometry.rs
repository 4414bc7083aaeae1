//! Chemical distance versus L1 distance, ball volumes, and annuli on a
//! conditioned cluster.
//!
//! Run with: cargo run --release --example cluster_geometry

use percolil::analysis::volume_growth_fit;
use percolil::cluster::sample_conditioned;
use percolil::geometry::{annulus_sites, l1_norm, DistanceField};
use percolil::lattice::{Boundary, LatticeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = LatticeSpec::new(2, 96, Boundary::Torus)?;
    let view = sample_conditioned(spec, 0.7, 11, 200)?.view;
    println!(
        "conditioned cluster at p = 0.7: {} sites",
        view.site_count()
    );

    let field = DistanceField::compute(view.bonds(), view.origin(), 90)?;
    let origin = spec.coords_of(view.origin());

    // The chemical distance dominates the L1 norm; look at the stretch.
    let mut worst: (f64, usize) = (1.0, view.origin());
    let mut stretched = 0u64;
    let mut total = 0u64;
    for site in view.sites() {
        if let Some(chem) = field.distance(site) {
            let l1 = l1_norm(&spec, &origin, &spec.coords_of(site));
            assert!(l1 <= chem as u64);
            if l1 > 0 {
                total += 1;
                stretched += (chem as u64 > l1) as u64;
                let ratio = chem as f64 / l1 as f64;
                if ratio > worst.0 {
                    worst = (ratio, site);
                }
            }
        }
    }
    println!(
        "within radius 90: {:.1}% of sites need a detour; worst stretch {:.2} at {:?}",
        100.0 * stretched as f64 / total as f64,
        worst.0,
        spec.coords_of(worst.1)
    );
    println!();

    println!("{:>6} {:>10} {:>12}", "n", "vol", "vol / n^2");
    let mut points = Vec::new();
    for n in [10, 15, 20, 30, 40, 60, 80] {
        let vol = field.ball_volume(n);
        println!("{n:>6} {vol:>10} {:>12.4}", vol as f64 / (n as f64).powi(2));
        if (15..=60).contains(&n) {
            points.push((n, vol));
        }
    }
    let fit = volume_growth_fit(&points)?;
    println!(
        "log-log growth exponent over n in [15, 60]: {:.3} (R^2 {:.4})",
        fit.slope, fit.r_squared
    );
    println!();

    let (r_in, r_out) = (20.0, 40.0);
    let annulus = annulus_sites(&view, r_in, r_out)?;
    println!(
        "annulus {r_in} < |z| < {r_out}: {} cluster sites",
        annulus.len()
    );
    Ok(())
}
