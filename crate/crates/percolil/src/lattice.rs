//! Finite boxes of Z^d: site indexing, neighbors, and boundary handling.
//!
//! Sites of the box `[-L, L]^d` are addressed by a dense row-major index with
//! the first coordinate most significant (index = sum over axes of
//! `(x_j + L) * side^(d-1-j)` with `side = 2L + 1`). All bond planes, cluster
//! labelings, and file formats use this order.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::Error;

/// Boundary condition of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Edges leaving the box do not exist.
    Free,
    /// Opposite faces are identified; every site has 2d incident edges.
    Torus,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Free => write!(f, "free"),
            Boundary::Torus => write!(f, "torus"),
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "free" => Ok(Boundary::Free),
            "torus" => Ok(Boundary::Torus),
            other => Err(Error::invalid(
                "boundary",
                format!("expected free|torus, got {other:?}"),
            )),
        }
    }
}

/// Shape of a finite box of Z^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    d: usize,
    half_width: u32,
    boundary: Boundary,
}

/// Dimensions 2 and 3 are the tested range; higher d is allowed but only
/// exercised at toy sizes.
pub const MAX_DIMENSION: usize = 6;

impl LatticeSpec {
    pub fn new(d: usize, half_width: u32, boundary: Boundary) -> Result<Self, Error> {
        if !(2..=MAX_DIMENSION).contains(&d) {
            return Err(Error::invalid(
                "d",
                format!("dimension must be in 2..={MAX_DIMENSION}, got {d}"),
            ));
        }
        if half_width == 0 {
            return Err(Error::invalid("l", "half-width must be >= 1"));
        }
        let side = 2 * half_width as u128 + 1;
        let count = side.checked_pow(d as u32).unwrap_or(u128::MAX);
        if count > u32::MAX as u128 {
            return Err(Error::invalid(
                "l",
                format!(
                    "box has {count} sites; the limit is {} (u32 site indices)",
                    u32::MAX
                ),
            ));
        }
        Ok(LatticeSpec {
            d,
            half_width,
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Sites per axis, `2L + 1`.
    pub fn side(&self) -> usize {
        2 * self.half_width as usize + 1
    }

    pub fn site_count(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    /// Number of potential edges per direction plane (= site count; on a free
    /// boundary the bits of the last slab are permanently zero).
    pub fn plane_len(&self) -> usize {
        self.site_count()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.side().pow((self.d - 1 - axis) as u32)
    }

    pub fn origin(&self) -> usize {
        // All coordinates zero: offset L on every axis.
        let side = self.side();
        let mut idx = 0;
        for _ in 0..self.d {
            idx = idx * side + self.half_width as usize;
        }
        idx
    }

    pub fn index_of(&self, coords: &[i64]) -> Result<usize, Error> {
        if coords.len() != self.d {
            return Err(Error::OutsideBox(coords.to_vec()));
        }
        let l = self.half_width as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &c in coords {
            if c < -l || c > l {
                return Err(Error::OutsideBox(coords.to_vec()));
            }
            idx = idx * side + (c + l) as usize;
        }
        Ok(idx)
    }

    pub fn coords_of(&self, index: usize) -> Vec<i64> {
        let side = self.side();
        let l = self.half_width as i64;
        let mut rest = index;
        let mut coords = vec![0i64; self.d];
        for axis in (0..self.d).rev() {
            coords[axis] = (rest % side) as i64 - l;
            rest /= side;
        }
        coords
    }

    #[inline]
    pub fn coord_of(&self, index: usize, axis: usize) -> i64 {
        ((index / self.stride(axis)) % self.side()) as i64 - self.half_width as i64
    }

    /// Neighbor of `index` one step along `axis` (`forward` = +e_axis).
    /// `None` when the step leaves a free-boundary box.
    #[inline]
    pub fn neighbor(&self, index: usize, axis: usize, forward: bool) -> Option<usize> {
        let stride = self.stride(axis);
        let side = self.side();
        let pos = (index / stride) % side;
        if forward {
            if pos + 1 < side {
                Some(index + stride)
            } else {
                match self.boundary {
                    Boundary::Torus => Some(index - (side - 1) * stride),
                    Boundary::Free => None,
                }
            }
        } else if pos > 0 {
            Some(index - stride)
        } else {
            match self.boundary {
                Boundary::Torus => Some(index + (side - 1) * stride),
                Boundary::Free => None,
            }
        }
    }

    /// Whether the +e_axis edge out of `index` exists at all.
    #[inline]
    pub fn has_forward_edge(&self, index: usize, axis: usize) -> bool {
        match self.boundary {
            Boundary::Torus => true,
            Boundary::Free => (index / self.stride(axis)) % self.side() + 1 < self.side(),
        }
    }

    /// Coordinate-wise displacement `b - a`, reduced to the minimal wrap
    /// representative on the torus.
    pub fn displacement(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let side = self.side() as i64;
        (0..self.d)
            .map(|j| {
                let mut delta = b[j] - a[j];
                if self.boundary == Boundary::Torus {
                    delta = delta.rem_euclid(side);
                    if delta > side / 2 {
                        delta -= side;
                    }
                }
                delta
            })
            .collect()
    }
}
