//! Chemical (graph) distance, balls, and annuli on a cluster.
//!
//! All distances are breadth-first hop counts over open edges, with an
//! explicit radius cap so that fields stay bounded when only a small ball is
//! needed. The chemical distance dominates the L1 distance site for site;
//! that inequality is asserted by the test suite and the acceptance run.

use std::collections::VecDeque;

use crate::cluster::ClusterView;
use crate::lattice::{Boundary, LatticeSpec};
use crate::percolation::BondConfiguration;
use crate::{Error, Result};

/// L1 norm of a displacement vector.
pub fn l1_of(delta: &[i64]) -> u64 {
    delta.iter().map(|c| c.unsigned_abs()).sum()
}

/// L1 distance between two sites; on a torus each coordinate takes the
/// minimal wrap representative. Accepts arbitrary integer coordinates.
pub fn l1_norm(spec: &LatticeSpec, a: &[i64], b: &[i64]) -> u64 {
    l1_of(&spec.displacement(a, b))
}

/// Hop-count distances from one source site, up to a cap.
#[derive(Debug, Clone)]
pub struct DistanceField {
    source: usize,
    cap: u32,
    dist: Vec<u32>,
    max_distance: u32,
    truncated: bool,
}

pub const UNREACHED: u32 = u32::MAX;

impl DistanceField {
    /// BFS over open edges from `source`, stopping at hop count `cap`.
    pub fn compute(bonds: &BondConfiguration, source: usize, cap: u32) -> Result<Self> {
        if cap == 0 {
            return Err(Error::invalid("cap", "distance cap must be >= 1"));
        }
        let spec = *bonds.spec();
        let n = spec.site_count();
        let half = spec.half_width() as i64;
        let mut dist = vec![UNREACHED; n];
        dist[source] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source as u32);
        let mut max_distance = 0u32;
        let mut truncated = false;
        while let Some(site) = queue.pop_front() {
            let site = site as usize;
            let d_here = dist[site];
            match spec.boundary() {
                // A face site reached below the cap means missing edges could
                // have extended the ball: the field only bounds the true one.
                Boundary::Free => {
                    if d_here < cap
                        && (0..spec.dim()).any(|ax| spec.coord_of(site, ax).abs() == half)
                    {
                        truncated = true;
                    }
                }
                // Past half the box, hop counts may ride wrapped shortcuts.
                Boundary::Torus => {
                    if d_here as i64 >= half {
                        truncated = true;
                    }
                }
            }
            if d_here == cap {
                continue;
            }
            for axis in 0..spec.dim() {
                for forward in [true, false] {
                    if bonds.open_toward(site, axis, forward) {
                        let nb = spec
                            .neighbor(site, axis, forward)
                            .expect("open edge endpoint");
                        if dist[nb] == UNREACHED {
                            dist[nb] = d_here + 1;
                            max_distance = max_distance.max(d_here + 1);
                            queue.push_back(nb as u32);
                        }
                    }
                }
            }
        }
        Ok(DistanceField {
            source,
            cap,
            dist,
            max_distance,
            truncated,
        })
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Hop count to `site`, or `None` if unreachable within the cap.
    #[inline]
    pub fn distance(&self, site: usize) -> Option<u32> {
        match self.dist[site] {
            UNREACHED => None,
            d => Some(d),
        }
    }

    pub fn max_distance(&self) -> u32 {
        self.max_distance
    }

    /// Whether box geometry may have clipped the field (free face touched
    /// below the cap, or torus distances at wrap scale).
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Number of sites within hop distance `r` of the source.
    pub fn ball_volume(&self, r: u32) -> u64 {
        let r = r.min(self.cap);
        self.dist
            .iter()
            .filter(|&&d| d != UNREACHED && d <= r)
            .count() as u64
    }
}

/// Chemical distance between two sites of the box: BFS hop count over open
/// edges, or `None` if `y` is not reached within `cap` hops.
pub fn chemical_distance(
    view: &ClusterView,
    x: &[i64],
    y: &[i64],
    cap: u32,
) -> Result<Option<u32>> {
    let spec = *view.spec();
    let from = spec.index_of(x)?;
    let to = spec.index_of(y)?;
    let field = DistanceField::compute(view.bonds(), from, cap)?;
    Ok(field.distance(to))
}

/// Number of cluster sites within chemical distance `n` of `center`.
pub fn ball_volume(view: &ClusterView, center: &[i64], n: u32) -> Result<u64> {
    let spec = *view.spec();
    let site = spec.index_of(center)?;
    if !view.contains(site) {
        return Err(Error::OutsideCluster);
    }
    if n == 0 {
        return Ok(1);
    }
    Ok(DistanceField::compute(view.bonds(), site, n)?.ball_volume(n))
}

/// Cluster sites `z` with `r_in < |z|_1 < r_out` (strict on both sides),
/// measured from the cluster's distinguished origin.
pub fn annulus_sites(view: &ClusterView, r_in: f64, r_out: f64) -> Result<Vec<usize>> {
    if !(r_in >= 0.0 && r_in < r_out) {
        return Err(Error::invalid(
            "annulus",
            format!("need 0 <= r_in < r_out, got ({r_in}, {r_out})"),
        ));
    }
    let spec = *view.spec();
    let origin = spec.coords_of(view.origin());
    Ok(view
        .sites()
        .filter(|&site| {
            let r = l1_norm(&spec, &origin, &spec.coords_of(site)) as f64;
            r_in < r && r < r_out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{label_clusters, sample_conditioned, ClusterView};
    use crate::lattice::Boundary;

    fn spec(d: usize, l: u32, boundary: Boundary) -> LatticeSpec {
        LatticeSpec::new(d, l, boundary).unwrap()
    }

    fn full_view(l: u32) -> ClusterView {
        sample_conditioned(spec(2, l, Boundary::Free), 1.0, 1, 1)
            .unwrap()
            .view
    }

    #[test]
    fn l1_examples() {
        let free = spec(2, 4, Boundary::Free);
        assert_eq!(l1_norm(&free, &[0, 0], &[0, 0]), 0);
        assert_eq!(l1_norm(&free, &[0, 0], &[1, -2]), 3);
        let torus = spec(2, 2, Boundary::Torus);
        // 5 sites per axis: 4 = -1 mod 5.
        assert_eq!(l1_norm(&torus, &[0, 0], &[4, 0]), 1);
    }

    #[test]
    fn chemical_distance_basics() {
        let view = full_view(3);
        assert_eq!(
            chemical_distance(&view, &[0, 0], &[0, 0], 5).unwrap(),
            Some(0)
        );
        // Full lattice: geodesics realize the L1 distance.
        for target in [[1i64, 2], [-3, 0], [2, -2]] {
            let expect = l1_norm(view.spec(), &[0, 0], &target);
            assert_eq!(
                chemical_distance(&view, &[0, 0], &target, 10).unwrap(),
                Some(expect as u32)
            );
        }
        // Cap shorter than the distance: unreachable.
        assert_eq!(chemical_distance(&view, &[0, 0], &[3, 3], 3).unwrap(), None);
        assert!(chemical_distance(&view, &[0, 0], &[1, 1], 0).is_err());
    }

    /// All simple open paths between two sites, up to a length bound.
    fn shortest_simple_path(
        bonds: &BondConfiguration,
        from: usize,
        to: usize,
        max_len: u32,
    ) -> Option<u32> {
        fn explore(
            bonds: &BondConfiguration,
            here: usize,
            to: usize,
            seen: &mut Vec<usize>,
            max_len: u32,
            best: &mut Option<u32>,
        ) {
            if here == to {
                let len = seen.len() as u32 - 1;
                *best = Some(best.map_or(len, |b: u32| b.min(len)));
                return;
            }
            if seen.len() as u32 > max_len {
                return;
            }
            let spec = *bonds.spec();
            for axis in 0..spec.dim() {
                for forward in [true, false] {
                    if bonds.open_toward(here, axis, forward) {
                        let nb = spec.neighbor(here, axis, forward).unwrap();
                        if !seen.contains(&nb) {
                            seen.push(nb);
                            explore(bonds, nb, to, seen, max_len, best);
                            seen.pop();
                        }
                    }
                }
            }
        }
        let mut best = None;
        explore(bonds, from, to, &mut vec![from], max_len, &mut best);
        best
    }

    #[test]
    fn forced_detour_matches_path_enumeration() {
        // 5x5 box; the straight route (0,0) -> (0,2) is closed, the open path
        // goes around through x1 = 1.
        let s = spec(2, 2, Boundary::Free);
        let bonds = BondConfiguration::from_open_edges(
            s,
            &[(&[0, 0], 0), (&[1, 0], 1), (&[1, 1], 1), (&[0, 2], 0)],
        )
        .unwrap();
        let labeling = label_clusters(&bonds);
        let origin = s.origin();
        let view = ClusterView::from_labeling(bonds, &labeling, origin);
        let oracle = shortest_simple_path(view.bonds(), origin, s.index_of(&[0, 2]).unwrap(), 10);
        assert_eq!(oracle, Some(4));
        assert_eq!(
            chemical_distance(&view, &[0, 0], &[0, 2], 10).unwrap(),
            Some(4)
        );
        assert!(l1_norm(&s, &[0, 0], &[0, 2]) < 4);
    }

    #[test]
    fn ball_volumes_on_full_lattice() {
        let view = full_view(8);
        assert_eq!(ball_volume(&view, &[0, 0], 0).unwrap(), 1);
        assert_eq!(ball_volume(&view, &[0, 0], 1).unwrap(), 5);
        assert_eq!(ball_volume(&view, &[0, 0], 2).unwrap(), 13);
        // Interior balls follow 2n^2 + 2n + 1 exactly, and grow monotonically.
        let mut prev = 0;
        for n in 0..=6u32 {
            let vol = ball_volume(&view, &[0, 0], n).unwrap();
            assert_eq!(vol, (2 * n * n + 2 * n + 1) as u64);
            assert!(vol > prev);
            prev = vol;
        }
        assert!(ball_volume(&view, &[20, 0], 1).is_err());
    }

    #[test]
    fn annulus_examples_and_partition() {
        let view = full_view(6);
        assert!(annulus_sites(&view, 0.0, 0.5).unwrap().is_empty());
        let unit = annulus_sites(&view, 0.5, 1.5).unwrap();
        assert_eq!(unit.len(), 4);
        assert!(annulus_sites(&view, 1.0, 1.0).is_err());

        // Against a plain enumeration filter, and as a partition.
        let s = spec(2, 8, Boundary::Torus);
        let sample = sample_conditioned(s, 0.65, 11, 64).unwrap();
        let (r_in, r_out) = (2.5, 4.5);
        let got = annulus_sites(&sample.view, r_in, r_out).unwrap();
        let origin = s.coords_of(sample.view.origin());
        let expect: Vec<usize> = sample
            .view
            .sites()
            .filter(|&z| {
                let r = l1_norm(&s, &origin, &s.coords_of(z)) as f64;
                r > r_in && r < r_out
            })
            .collect();
        assert_eq!(got, expect);
        let inside = got.len() as u64;
        let outside = sample
            .view
            .sites()
            .filter(|&z| {
                let r = l1_norm(&s, &origin, &s.coords_of(z)) as f64;
                r <= r_in || r >= r_out
            })
            .count() as u64;
        assert_eq!(inside + outside, sample.view.site_count());
    }

    #[test]
    fn l1_lower_bounds_chemical_distance() {
        let s = spec(2, 12, Boundary::Torus);
        let sample = sample_conditioned(s, 0.6, 5, 64).unwrap();
        let field = DistanceField::compute(sample.view.bonds(), sample.view.origin(), 200).unwrap();
        let origin = s.coords_of(sample.view.origin());
        for site in sample.view.sites() {
            let d = field.distance(site).expect("cluster is connected");
            assert!(l1_norm(&s, &origin, &s.coords_of(site)) <= d as u64);
        }
    }

    #[test]
    fn triangle_inequality_on_sampled_triples() {
        let s = spec(2, 6, Boundary::Torus);
        let sample = sample_conditioned(s, 0.7, 3, 64).unwrap();
        let sites: Vec<usize> = sample.view.sites().collect();
        let cap = 500;
        for step in 1..6 {
            let (a, b, c) = (
                sites[0],
                sites[step * 7 % sites.len()],
                sites[step * 13 % sites.len()],
            );
            let fa = DistanceField::compute(sample.view.bonds(), a, cap).unwrap();
            let fb = DistanceField::compute(sample.view.bonds(), b, cap).unwrap();
            let ab = fa.distance(b).unwrap() as u64;
            let ac = fa.distance(c).unwrap() as u64;
            let bc = fb.distance(c).unwrap() as u64;
            assert!(ac <= ab + bc);
        }
    }

    #[test]
    fn truncation_is_flagged_near_the_face() {
        let s = spec(2, 3, Boundary::Free);
        let view = sample_conditioned(s, 1.0, 1, 1).unwrap().view;
        let near_face = DistanceField::compute(view.bonds(), s.origin(), 6).unwrap();
        assert!(near_face.truncated());
        let small = DistanceField::compute(view.bonds(), s.origin(), 2).unwrap();
        assert!(!small.truncated());
    }
}
