//! Cluster identification and conditioned environment sampling.
//!
//! Labeling is a single breadth-first sweep in site-index order, which makes
//! labels canonical for free: each component is discovered at its smallest
//! row-major site index, and that index is the label.
//!
//! [`sample_conditioned`] regenerates configurations from derived seeds until
//! the origin's cluster is the largest one in the box, the finite-box
//! stand-in for conditioning on the infinite cluster. It never materializes a full
//! label array: the origin component is grown first, acceptance is decided by
//! growing the remaining components with an early abort as soon as any of them
//! gets bigger, so the whole check is one linear pass over the box.

use std::collections::VecDeque;

use crate::lattice::LatticeSpec;
use crate::percolation::BondConfiguration;
use crate::rng::{Domain, Stream};
use crate::{Error, Result};

/// Full component labeling of a configuration.
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    labels: Vec<u32>,
    /// (label, size), sorted by label.
    sizes: Vec<(u32, u64)>,
}

impl ClusterLabeling {
    pub fn label_of(&self, site: usize) -> u32 {
        self.labels[site]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn size_of(&self, label: u32) -> Option<u64> {
        self.sizes
            .binary_search_by_key(&label, |&(l, _)| l)
            .ok()
            .map(|i| self.sizes[i].1)
    }

    /// Largest cluster; ties resolve to the smaller label.
    pub fn largest(&self) -> (u32, u64) {
        self.sizes
            .iter()
            .copied()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("boxes are nonempty")
    }
}

/// Push all open neighbors of `site` that are still unvisited.
#[inline]
fn expand(
    bonds: &BondConfiguration,
    spec: &LatticeSpec,
    site: usize,
    visited: &mut [u64],
    queue: &mut VecDeque<u32>,
) {
    for axis in 0..spec.dim() {
        for forward in [true, false] {
            if bonds.open_toward(site, axis, forward) {
                // Open edges never leave the box, so the neighbor exists.
                let nb = spec
                    .neighbor(site, axis, forward)
                    .expect("open edge has an endpoint");
                if visited[nb >> 6] >> (nb & 63) & 1 == 0 {
                    visited[nb >> 6] |= 1 << (nb & 63);
                    queue.push_back(nb as u32);
                }
            }
        }
    }
}

/// Label every cluster of the configuration. Two sites share a label iff they
/// are connected by open edges; the label is the smallest site index of the
/// component.
pub fn label_clusters(bonds: &BondConfiguration) -> ClusterLabeling {
    let spec = *bonds.spec();
    let n = spec.site_count();
    let mut labels = vec![u32::MAX; n];
    let mut visited = vec![0u64; n.div_ceil(64)];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if visited[seed >> 6] >> (seed & 63) & 1 != 0 {
            continue;
        }
        visited[seed >> 6] |= 1 << (seed & 63);
        queue.push_back(seed as u32);
        let mut size = 0u64;
        while let Some(site) = queue.pop_front() {
            let site = site as usize;
            labels[site] = seed as u32;
            size += 1;
            expand(bonds, &spec, site, &mut visited, &mut queue);
        }
        sizes.push((seed as u32, size));
    }
    ClusterLabeling { labels, sizes }
}

/// One connected open cluster with a distinguished origin.
#[derive(Debug, Clone)]
pub struct ClusterView {
    bonds: BondConfiguration,
    membership: Vec<u64>,
    label: u32,
    origin: usize,
    site_count: u64,
}

impl ClusterView {
    /// View of the cluster containing `origin`, built from a full labeling.
    pub fn from_labeling(
        bonds: BondConfiguration,
        labeling: &ClusterLabeling,
        origin: usize,
    ) -> Self {
        let n = bonds.spec().site_count();
        let label = labeling.label_of(origin);
        let mut membership = vec![0u64; n.div_ceil(64)];
        let mut site_count = 0;
        for (site, &l) in labeling.labels().iter().enumerate() {
            if l == label {
                membership[site >> 6] |= 1 << (site & 63);
                site_count += 1;
            }
        }
        ClusterView {
            bonds,
            membership,
            label,
            origin,
            site_count,
        }
    }

    pub fn bonds(&self) -> &BondConfiguration {
        &self.bonds
    }

    pub fn spec(&self) -> &LatticeSpec {
        self.bonds.spec()
    }

    /// Canonical cluster id (smallest member site index).
    pub fn label(&self) -> u32 {
        self.label
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn site_count(&self) -> u64 {
        self.site_count
    }

    #[inline]
    pub fn contains(&self, site: usize) -> bool {
        self.membership[site >> 6] >> (site & 63) & 1 != 0
    }

    #[inline]
    pub fn open_degree(&self, site: usize) -> u8 {
        self.bonds.open_degree(site)
    }

    /// Member sites in increasing index order.
    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.membership.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }
}

/// A conditioned sample: the accepted environment plus how many attempts the
/// rejection loop used.
#[derive(Debug, Clone)]
pub struct Conditioned {
    pub view: ClusterView,
    pub attempts: u32,
}

/// View of the component containing `origin`, grown directly without a full
/// labeling pass.
pub fn component_view(bonds: BondConfiguration, origin: usize) -> ClusterView {
    let n = bonds.spec().site_count();
    let mut membership = vec![0u64; n.div_ceil(64)];
    let mut queue = VecDeque::new();
    let (site_count, min_site) = grow_component(&bonds, origin, &mut membership, &mut queue);
    ClusterView {
        bonds,
        membership,
        label: min_site as u32,
        origin,
        site_count,
    }
}

/// Grow the component of `origin` into `membership`, returning
/// (size, smallest site index).
fn grow_component(
    bonds: &BondConfiguration,
    origin: usize,
    membership: &mut [u64],
    queue: &mut VecDeque<u32>,
) -> (u64, usize) {
    let spec = *bonds.spec();
    membership[origin >> 6] |= 1 << (origin & 63);
    queue.push_back(origin as u32);
    let mut size = 0u64;
    let mut min_site = origin;
    while let Some(site) = queue.pop_front() {
        let site = site as usize;
        size += 1;
        min_site = min_site.min(site);
        expand(bonds, &spec, site, membership, queue);
    }
    (size, min_site)
}

/// Does any component other than the (already grown) origin one exceed
/// `origin_size`? Aborts as soon as one does.
fn rival_exceeds(
    bonds: &BondConfiguration,
    origin_size: u64,
    origin_membership: &[u64],
    visited: &mut Vec<u64>,
    queue: &mut VecDeque<u32>,
) -> bool {
    let spec = *bonds.spec();
    let n = spec.site_count();
    visited.clear();
    visited.extend_from_slice(origin_membership);
    for seed in 0..n {
        if visited[seed >> 6] >> (seed & 63) & 1 != 0 {
            continue;
        }
        visited[seed >> 6] |= 1 << (seed & 63);
        queue.push_back(seed as u32);
        let mut size = 0u64;
        while let Some(site) = queue.pop_front() {
            size += 1;
            if size > origin_size {
                queue.clear();
                return true;
            }
            expand(bonds, &spec, site as usize, visited, queue);
        }
    }
    false
}

/// Regenerate with seeds derived from `master_seed` until the origin lies in
/// the largest cluster of the box (ties accepted), or give up after
/// `max_attempts`.
pub fn sample_conditioned(
    spec: LatticeSpec,
    p: f64,
    master_seed: u64,
    max_attempts: u32,
) -> Result<Conditioned> {
    if max_attempts == 0 {
        return Err(Error::invalid("max_attempts", "must be >= 1"));
    }
    let master = Stream::new(master_seed);
    let n = spec.site_count();
    let origin = spec.origin();
    let words = n.div_ceil(64);
    let mut membership = vec![0u64; words];
    let mut visited: Vec<u64> = Vec::with_capacity(words);
    let mut queue = VecDeque::new();
    for attempt in 0..max_attempts {
        let seed = master.child(Domain::EnvAttempt, attempt as u64).key();
        let bonds = BondConfiguration::generate(spec, p, seed)?;
        membership.iter_mut().for_each(|w| *w = 0);
        let (size, min_site) = grow_component(&bonds, origin, &mut membership, &mut queue);
        // A strict majority is automatically the largest; otherwise compare
        // against every rival component.
        let accepted = size as usize * 2 > n
            || !rival_exceeds(&bonds, size, &membership, &mut visited, &mut queue);
        if accepted {
            return Ok(Conditioned {
                view: ClusterView {
                    bonds,
                    membership: std::mem::take(&mut membership),
                    label: min_site as u32,
                    origin,
                    site_count: size,
                },
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::ConditioningExhausted {
        attempts: max_attempts,
        acceptance: 0.0,
    })
}
