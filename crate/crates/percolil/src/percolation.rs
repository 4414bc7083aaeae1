//! Bernoulli bond configurations on a finite box.
//!
//! Each of the d directions has one bit plane over the sites: bit `s` of
//! plane `j` says whether the edge `(s, s + e_j)` is open. The uniform that
//! decides edge `(s, j)` is `indexed_unit(edge_key, j * N + s)`, a pure
//! function of the seed and the edge index, so regeneration is bit-identical
//! regardless of scheduling, and configurations generated from the same seed
//! at p < p' are coupled monotonically (open at p implies open at p').

use std::io::{Read, Write};
use std::path::Path;

use crate::lattice::{Boundary, LatticeSpec};
use crate::rng::{indexed_unit, Domain, Stream};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"PERC";
const FORMAT_VERSION: u8 = 1;

/// An immutable bond configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BondConfiguration {
    spec: LatticeSpec,
    p: f64,
    seed: u64,
    planes: Vec<Vec<u64>>,
}

#[inline]
fn get_bit(words: &[u64], bit: usize) -> bool {
    words[bit >> 6] >> (bit & 63) & 1 != 0
}

#[inline]
fn set_bit(words: &mut [u64], bit: usize) {
    words[bit >> 6] |= 1u64 << (bit & 63);
}

impl BondConfiguration {
    /// Draw every nearest-neighbor edge of the box independently with
    /// probability `p`.
    pub fn generate(spec: LatticeSpec, p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(
                "p",
                format!("open probability must be in (0, 1], got {p}"),
            ));
        }
        let n = spec.site_count();
        let words = n.div_ceil(64);
        let edge_key = Stream::new(seed).child(Domain::Edges, 0).key();
        let mut planes = vec![vec![0u64; words]; spec.dim()];
        for (axis, plane) in planes.iter_mut().enumerate() {
            let base = (axis * n) as u64;
            for site in 0..n {
                if spec.has_forward_edge(site, axis)
                    && indexed_unit(edge_key, base + site as u64) < p
                {
                    set_bit(plane, site);
                }
            }
        }
        Ok(BondConfiguration {
            spec,
            p,
            seed,
            planes,
        })
    }

    /// Assemble a configuration from an explicit list of open edges, each
    /// given as (site coords, axis) for the edge toward `+e_axis`.
    ///
    /// Meant for hand-built environments and tests; the recorded `(p, seed)`
    /// provenance is `(1.0, 0)` and does not regenerate the bits.
    pub fn from_open_edges(spec: LatticeSpec, edges: &[(&[i64], usize)]) -> Result<Self> {
        let n = spec.site_count();
        let mut planes = vec![vec![0u64; n.div_ceil(64)]; spec.dim()];
        for &(coords, axis) in edges {
            if axis >= spec.dim() {
                return Err(Error::invalid(
                    "axis",
                    format!("axis {axis} out of range for d={}", spec.dim()),
                ));
            }
            let site = spec.index_of(coords)?;
            if !spec.has_forward_edge(site, axis) {
                return Err(Error::invalid(
                    "edge",
                    format!("edge ({coords:?}, +e_{axis}) leaves the free box"),
                ));
            }
            set_bit(&mut planes[axis], site);
        }
        Ok(BondConfiguration {
            spec,
            p: 1.0,
            seed: 0,
            planes,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Is the edge `(site, site + e_axis)` open?
    #[inline]
    pub fn open_forward(&self, site: usize, axis: usize) -> bool {
        get_bit(&self.planes[axis], site)
    }

    /// Is the incident edge of `site` in direction (`axis`, `forward`) open?
    #[inline]
    pub fn open_toward(&self, site: usize, axis: usize, forward: bool) -> bool {
        if forward {
            self.open_forward(site, axis)
        } else {
            match self.spec.neighbor(site, axis, false) {
                Some(prev) => self.open_forward(prev, axis),
                None => false,
            }
        }
    }

    /// Number of open edges incident to `site`, in `[0, 2d]`.
    #[inline]
    pub fn open_degree(&self, site: usize) -> u8 {
        let mut deg = 0;
        for axis in 0..self.spec.dim() {
            deg += self.open_toward(site, axis, true) as u8;
            deg += self.open_toward(site, axis, false) as u8;
        }
        deg
    }

    /// Degree lookup by coordinates, rejecting sites outside the box.
    pub fn open_degree_at(&self, coords: &[i64]) -> Result<u8> {
        Ok(self.open_degree(self.spec.index_of(coords)?))
    }

    /// Count of open edges in the whole configuration.
    pub fn open_edge_count(&self) -> u64 {
        self.planes
            .iter()
            .flatten()
            .map(|w| w.count_ones() as u64)
            .sum()
    }

    /// Count of edges the box can host (boundary-dependent).
    pub fn potential_edge_count(&self) -> u64 {
        let n = self.spec.site_count() as u64;
        match self.spec.boundary() {
            Boundary::Torus => self.spec.dim() as u64 * n,
            Boundary::Free => {
                let side = self.spec.side() as u64;
                self.spec.dim() as u64 * (n / side) * (side - 1)
            }
        }
    }

    /// The environment seen from `offset`: edge `(y, y+e_j)` of the result is
    /// open iff edge `(y+offset, y+offset+e_j)` is open here. Torus only; on
    /// a free boundary any nonzero shift moves the box out of range.
    pub fn shift(&self, offset: &[i64]) -> Result<Self> {
        if offset.len() != self.spec.dim() {
            return Err(Error::invalid(
                "offset",
                format!("expected {} coordinates", self.spec.dim()),
            ));
        }
        if self.spec.boundary() == Boundary::Free && offset.iter().any(|&c| c != 0) {
            return Err(Error::ShiftOutOfRange(offset.to_vec()));
        }
        let spec = self.spec;
        let side = spec.side() as i64;
        let l = spec.half_width() as i64;
        let n = spec.site_count();
        let mut planes = vec![vec![0u64; n.div_ceil(64)]; spec.dim()];
        let mut shifted = vec![0i64; spec.dim()];
        for site in 0..n {
            let coords = spec.coords_of(site);
            for (j, s) in shifted.iter_mut().enumerate() {
                *s = (coords[j] + offset[j] + l).rem_euclid(side) - l;
            }
            let source = spec.index_of(&shifted)?;
            for (axis, plane) in planes.iter_mut().enumerate() {
                if self.open_forward(source, axis) {
                    set_bit(plane, site);
                }
            }
        }
        Ok(BondConfiguration {
            spec,
            p: self.p,
            seed: self.seed,
            planes,
        })
    }

    /// Serialize in the bond-file layout: `PERC`, version byte, then
    /// little-endian `u8 d`, `u32 L`, `f64 p`, `u64 seed`, `u8 boundary`
    /// (0 free / 1 torus), then the d bit planes in direction order,
    /// row-major site order, each padded to a byte boundary (LSB-first
    /// within bytes).
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[FORMAT_VERSION, self.spec.dim() as u8])?;
        w.write_all(&self.spec.half_width().to_le_bytes())?;
        w.write_all(&self.p.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&[match self.spec.boundary() {
            Boundary::Free => 0u8,
            Boundary::Torus => 1u8,
        }])?;
        let bytes = self.spec.site_count().div_ceil(8);
        for plane in &self.planes {
            let mut buf = Vec::with_capacity(plane.len() * 8);
            for word in plane {
                buf.extend_from_slice(&word.to_le_bytes());
            }
            buf.truncate(bytes);
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 6];
        r.read_exact(&mut head)
            .map_err(|e| Error::BondFile(format!("short header: {e}")))?;
        if &head[..4] != MAGIC {
            return Err(Error::BondFile("bad magic, not a bond file".into()));
        }
        if head[4] != FORMAT_VERSION {
            return Err(Error::BondFile(format!("unsupported version {}", head[4])));
        }
        let d = head[5] as usize;
        let mut buf4 = [0u8; 4];
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf4)?;
        let half_width = u32::from_le_bytes(buf4);
        r.read_exact(&mut buf8)?;
        let p = f64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let seed = u64::from_le_bytes(buf8);
        let mut bflag = [0u8; 1];
        r.read_exact(&mut bflag)?;
        let boundary = match bflag[0] {
            0 => Boundary::Free,
            1 => Boundary::Torus,
            other => return Err(Error::BondFile(format!("bad boundary flag {other}"))),
        };
        let spec = LatticeSpec::new(d, half_width, boundary)
            .map_err(|e| Error::BondFile(e.to_string()))?;
        let n = spec.site_count();
        let bytes = n.div_ceil(8);
        let mut planes = Vec::with_capacity(d);
        for _ in 0..d {
            let mut raw = vec![0u8; bytes];
            r.read_exact(&mut raw)
                .map_err(|e| Error::BondFile(format!("short plane: {e}")))?;
            let mut words = vec![0u64; n.div_ceil(64)];
            for (i, chunk) in raw.chunks(8).enumerate() {
                let mut w = [0u8; 8];
                w[..chunk.len()].copy_from_slice(chunk);
                words[i] = u64::from_le_bytes(w);
            }
            planes.push(words);
        }
        Ok(BondConfiguration {
            spec,
            p,
            seed,
            planes,
        })
    }

    pub fn write_to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, l: u32, boundary: Boundary) -> LatticeSpec {
        LatticeSpec::new(d, l, boundary).unwrap()
    }

    #[test]
    fn rejects_bad_probability() {
        let s = spec(2, 4, Boundary::Free);
        assert!(BondConfiguration::generate(s, 0.0, 1).is_err());
        assert!(BondConfiguration::generate(s, 1.5, 1).is_err());
        assert!(BondConfiguration::generate(s, -0.1, 1).is_err());
    }

    #[test]
    fn p_one_opens_every_edge() {
        let bonds = BondConfiguration::generate(spec(2, 2, Boundary::Free), 1.0, 31).unwrap();
        // 2 directions x 5 rows x 4 edges per row.
        assert_eq!(bonds.potential_edge_count(), 40);
        assert_eq!(bonds.open_edge_count(), 40);
        let torus = BondConfiguration::generate(spec(2, 2, Boundary::Torus), 1.0, 31).unwrap();
        assert_eq!(torus.open_edge_count(), 2 * 25);
    }

    #[test]
    fn open_fraction_within_binomial_bounds() {
        let bonds = BondConfiguration::generate(spec(2, 64, Boundary::Free), 0.5, 7).unwrap();
        let m = bonds.potential_edge_count() as f64;
        let frac = bonds.open_edge_count() as f64 / m;
        let sigma = (0.5 * 0.5 / m).sqrt();
        assert!((frac - 0.5).abs() < 4.0 * sigma, "fraction {frac}");
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let s = spec(2, 8, Boundary::Torus);
        let a = BondConfiguration::generate(s, 0.7, 42).unwrap();
        let b = BondConfiguration::generate(s, 0.7, 42).unwrap();
        assert_eq!(a, b);
        let c = BondConfiguration::generate(s, 0.7, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn monotone_coupling_in_p() {
        let s = spec(2, 16, Boundary::Torus);
        let lo = BondConfiguration::generate(s, 0.3, 99).unwrap();
        let hi = BondConfiguration::generate(s, 0.8, 99).unwrap();
        for axis in 0..2 {
            for site in 0..s.site_count() {
                if lo.open_forward(site, axis) {
                    assert!(hi.open_forward(site, axis));
                }
            }
        }
    }

    #[test]
    fn degrees_match_manual_enumeration() {
        // 3x3 free box, edges: (0,0)-(1,0), (0,0)-(0,1), (-1,0)-(0,0).
        let s = spec(2, 1, Boundary::Free);
        let bonds =
            BondConfiguration::from_open_edges(s, &[(&[0, 0], 0), (&[0, 0], 1), (&[-1, 0], 0)])
                .unwrap();
        assert_eq!(bonds.open_degree_at(&[0, 0]).unwrap(), 3);
        assert_eq!(bonds.open_degree_at(&[1, 0]).unwrap(), 1);
        assert_eq!(bonds.open_degree_at(&[0, 1]).unwrap(), 1);
        assert_eq!(bonds.open_degree_at(&[-1, 0]).unwrap(), 1);
        assert_eq!(bonds.open_degree_at(&[1, 1]).unwrap(), 0);
        assert!(bonds.open_degree_at(&[2, 0]).is_err());
    }

    #[test]
    fn interior_degree_at_p_one() {
        let bonds = BondConfiguration::generate(spec(2, 2, Boundary::Free), 1.0, 5).unwrap();
        assert_eq!(bonds.open_degree_at(&[0, 0]).unwrap(), 4);
        assert_eq!(bonds.open_degree_at(&[2, 2]).unwrap(), 2);
    }

    #[test]
    fn shift_identity_and_inverse() {
        let s = spec(2, 3, Boundary::Torus);
        let bonds = BondConfiguration::generate(s, 0.6, 12).unwrap();
        assert_eq!(bonds.shift(&[0, 0]).unwrap(), bonds);
        let there = bonds.shift(&[2, -1]).unwrap();
        assert_eq!(there.shift(&[-2, 1]).unwrap(), bonds);
    }

    #[test]
    fn shift_relocates_single_edge() {
        let s = spec(2, 1, Boundary::Torus);
        let bonds = BondConfiguration::from_open_edges(s, &[(&[0, 0], 0)]).unwrap();
        let shifted = bonds.shift(&[1, 0]).unwrap();
        // Output edge (y, 0) open iff input edge (y + (1,0), 0) open, so the
        // open bit lands at y = (-1, 0).
        let expect = s.index_of(&[-1, 0]).unwrap();
        for site in 0..s.site_count() {
            assert_eq!(shifted.open_forward(site, 0), site == expect);
            assert!(!shifted.open_forward(site, 1));
        }
    }

    #[test]
    fn free_boundary_shift_rejected() {
        let bonds = BondConfiguration::generate(spec(2, 2, Boundary::Free), 0.5, 3).unwrap();
        assert!(bonds.shift(&[0, 0]).is_ok());
        assert!(matches!(
            bonds.shift(&[1, 0]),
            Err(Error::ShiftOutOfRange(_))
        ));
    }

    #[test]
    fn file_roundtrip_and_layout() {
        let s = spec(2, 1, Boundary::Torus);
        let bonds = BondConfiguration::from_open_edges(s, &[(&[-1, -1], 0), (&[0, 1], 1)]).unwrap();
        let mut buf = Vec::new();
        bonds.write_to(&mut buf).unwrap();
        // Header: PERC, version, d, L, p, seed, boundary = 4+1+1+4+8+8+1.
        assert_eq!(&buf[..4], b"PERC");
        assert_eq!(buf[4], 1);
        assert_eq!(buf[5], 2);
        assert_eq!(u32::from_le_bytes(buf[6..10].try_into().unwrap()), 1);
        assert_eq!(buf[26], 1);
        // 9 sites -> 2 bytes per plane; site (-1,-1) is bit 0 of plane 0 and
        // site (0,1) is bit 5 of plane 1.
        assert_eq!(buf.len(), 27 + 2 * 2);
        assert_eq!(buf[27], 0b0000_0001);
        assert_eq!(buf[29], 0b0010_0000);
        let back = BondConfiguration::read_from(&buf[..]).unwrap();
        assert_eq!(back, bonds);
    }

    #[test]
    fn read_rejects_garbage() {
        assert!(BondConfiguration::read_from(&b"nope"[..]).is_err());
        let mut buf = Vec::new();
        BondConfiguration::generate(spec(2, 2, Boundary::Free), 0.5, 1)
            .unwrap()
            .write_to(&mut buf)
            .unwrap();
        buf[4] = 9;
        assert!(BondConfiguration::read_from(&buf[..]).is_err());
    }
}
