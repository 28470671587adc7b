//! Lattice geometry: vertices of `Z^d`, canonical edge identities and
//! axis-aligned bounding boxes.
//!
//! Coordinates are stored in a fixed-width array so vertices stay `Copy` and
//! hashable; the active dimension `d` (2 ..= MAX_DIM) travels with the
//! configuration, and coordinates beyond it are pinned to zero.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Highest supported lattice dimension. Dense storage over a bounding box is
/// what actually bounds experiments, so going beyond 4 would never be usable.
pub const MAX_DIM: usize = 4;

/// A lattice vertex. Unused trailing coordinates must stay zero so equality
/// and hashing are dimension-independent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Vertex(pub [i32; MAX_DIM]);

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{:?}", self.0)
    }
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex([0; MAX_DIM]);

    pub fn new2(x: i32, y: i32) -> Vertex {
        Vertex([x, y, 0, 0])
    }

    pub fn new3(x: i32, y: i32, z: i32) -> Vertex {
        Vertex([x, y, z, 0])
    }

    /// Build from the first `d` coordinates of a slice.
    pub fn from_slice(c: &[i32]) -> Vertex {
        let mut v = [0i32; MAX_DIM];
        v[..c.len()].copy_from_slice(c);
        Vertex(v)
    }

    /// Neighbor one step along `axis`; `dir` is +1 or -1.
    #[inline]
    pub fn step(&self, axis: usize, dir: i32) -> Vertex {
        let mut c = self.0;
        c[axis] += dir;
        Vertex(c)
    }

    #[inline]
    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64).abs()).sum()
    }

    #[inline]
    pub fn linf_norm(&self) -> i32 {
        self.0.iter().map(|&c| c.abs()).max().unwrap()
    }

    pub fn euclid_dist(&self, other: &Vertex) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&a, &b)| {
                let d = (a - b) as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Nearest lattice vertex to a real point (first `d` entries used).
    /// Component-wise rounding with the fixed tie rule "away from zero" keeps
    /// the mapping deterministic.
    pub fn nearest(x: &[f64]) -> Vertex {
        let mut c = [0i32; MAX_DIM];
        for (i, &xi) in x.iter().enumerate().take(MAX_DIM) {
            c[i] = xi.round() as i32;
        }
        Vertex(c)
    }

    /// Iterate the 2d lattice neighbors together with the canonical edge
    /// leading to each.
    pub fn neighbors(&self, d: usize) -> impl Iterator<Item = (Vertex, Edge)> + '_ {
        let v = *self;
        (0..d).flat_map(move |axis| {
            [(1, Edge { base: v, axis: axis as u8 }), (-1, Edge { base: v.step(axis, -1), axis: axis as u8 })]
                .into_iter()
                .map(move |(dir, e)| (v.step(axis, dir), e))
        })
    }
}

/// Canonical identity of a lattice edge `{base, base + e_axis}`: the base is
/// always the lexicographically smaller endpoint, so each undirected edge has
/// exactly one `Edge` value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Edge {
    pub base: Vertex,
    pub axis: u8,
}

impl Edge {
    /// Canonical edge between two adjacent vertices. Panics if they are not
    /// lattice neighbors.
    pub fn between(u: Vertex, v: Vertex) -> Edge {
        for axis in 0..MAX_DIM {
            let diff = v.0[axis] - u.0[axis];
            if diff != 0 {
                debug_assert!(diff.abs() == 1, "vertices are not adjacent");
                debug_assert!((0..MAX_DIM).filter(|&a| v.0[a] != u.0[a]).count() == 1);
                let base = if diff > 0 { u } else { v };
                return Edge { base, axis: axis as u8 };
            }
        }
        panic!("Edge::between called with identical vertices");
    }

    #[inline]
    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.base, self.base.step(self.axis as usize, 1))
    }
}

/// Inclusive axis-aligned box of lattice vertices.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Vertex,
    pub hi: Vertex,
}

impl Aabb {
    pub fn new(lo: Vertex, hi: Vertex) -> Aabb {
        Aabb { lo, hi }
    }

    /// Centered box `[-r, r]^d` (trailing axes collapse to {0}).
    pub fn centered(d: usize, r: i32) -> Aabb {
        let mut lo = [0i32; MAX_DIM];
        let mut hi = [0i32; MAX_DIM];
        for a in 0..d {
            lo[a] = -r;
            hi[a] = r;
        }
        Aabb { lo: Vertex(lo), hi: Vertex(hi) }
    }

    #[inline]
    pub fn contains(&self, v: &Vertex) -> bool {
        (0..MAX_DIM).all(|a| self.lo.0[a] <= v.0[a] && v.0[a] <= self.hi.0[a])
    }

    /// True if `v` lies on the hull of the box along one of the first `d`
    /// axes, i.e. it has lattice neighbors outside the box.
    #[inline]
    pub fn on_hull(&self, v: &Vertex, d: usize) -> bool {
        (0..d).any(|a| v.0[a] == self.lo.0[a] || v.0[a] == self.hi.0[a])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    /// Number of lattice vertices inside, None on overflow.
    pub fn volume(&self) -> Option<usize> {
        let mut vol: usize = 1;
        for a in 0..MAX_DIM {
            let side = (self.hi.0[a] as i64) - (self.lo.0[a] as i64) + 1;
            if side <= 0 {
                return Some(0);
            }
            vol = vol.checked_mul(side as usize)?;
        }
        Some(vol)
    }

    pub fn validate(&self, d: usize) -> crate::Result<()> {
        for a in 0..MAX_DIM {
            if self.lo.0[a] > self.hi.0[a] {
                return Err(crate::Error::InvalidConfig(format!(
                    "bounding box lo > hi on axis {a}"
                )));
            }
            if a >= d && (self.lo.0[a] != 0 || self.hi.0[a] != 0) {
                return Err(crate::Error::InvalidConfig(format!(
                    "bounding box extends along unused axis {a}"
                )));
            }
            let extent = self.lo.0[a].checked_abs().map(|l| l.max(self.hi.0[a].abs()));
            match extent {
                Some(e) if e <= (1 << 30) => {}
                _ => {
                    return Err(crate::Error::InvalidConfig(
                        "bounding box coordinates exceed +-2^30".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_edge_is_orientation_free() {
        let u = Vertex::new2(3, -2);
        let v = u.step(1, 1);
        assert_eq!(Edge::between(u, v), Edge::between(v, u));
        assert_eq!(Edge::between(u, v).base, u);
        let w = u.step(0, -1);
        assert_eq!(Edge::between(u, w).base, w);
    }

    #[test]
    fn neighbors_enumerate_2d_cross() {
        let v = Vertex::new2(1, 1);
        let ns: Vec<Vertex> = v.neighbors(2).map(|(n, _)| n).collect();
        assert_eq!(ns.len(), 4);
        assert!(ns.contains(&Vertex::new2(2, 1)));
        assert!(ns.contains(&Vertex::new2(0, 1)));
        assert!(ns.contains(&Vertex::new2(1, 2)));
        assert!(ns.contains(&Vertex::new2(1, 0)));
    }

    #[test]
    fn hull_detection_ignores_unused_axes() {
        let b = Aabb::centered(2, 5);
        assert!(b.on_hull(&Vertex::new2(5, 0), 2));
        assert!(b.on_hull(&Vertex::new2(0, -5), 2));
        assert!(!b.on_hull(&Vertex::new2(4, 4), 2));
        // axis 2 is collapsed to {0}; every vertex sits on it
        assert!(!b.on_hull(&Vertex::new2(0, 0), 2));
    }

    proptest! {
        #[test]
        fn edge_between_commutes(x in -50i32..50, y in -50i32..50, axis in 0usize..2, dir in prop::sample::select(vec![-1i32, 1])) {
            let u = Vertex::new2(x, y);
            let v = u.step(axis, dir);
            prop_assert_eq!(Edge::between(u, v), Edge::between(v, u));
            let (a, b) = Edge::between(u, v).endpoints();
            prop_assert!(a < b);
            prop_assert!((a == u && b == v) || (a == v && b == u));
        }
    }
}
