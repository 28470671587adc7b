//! Flat storage for per-vertex values over a bounding box.
//!
//! Small boxes get a dense array (cache locality dominates growth runtime);
//! boxes whose dense footprint would be unreasonable fall back to a hash map.

use crate::lattice::{Aabb, Vertex, MAX_DIM};
use rustc_hash::FxHashMap;

/// Dense footprint cap in bytes before falling back to hashing.
const DENSE_BYTES_LIMIT: usize = 512 << 20;

pub struct VertexTable<T: Copy + PartialEq> {
    fill: T,
    repr: Repr<T>,
}

enum Repr<T: Copy> {
    Dense {
        aabb: Aabb,
        strides: [usize; MAX_DIM],
        data: Vec<T>,
    },
    Sparse(FxHashMap<Vertex, T>),
}

impl<T: Copy + PartialEq> VertexTable<T> {
    /// Table over `aabb` where every vertex initially maps to `fill`.
    pub fn new(aabb: Aabb, fill: T) -> VertexTable<T> {
        let dense_ok = aabb
            .volume()
            .and_then(|v| v.checked_mul(std::mem::size_of::<T>()))
            .map(|bytes| bytes <= DENSE_BYTES_LIMIT)
            .unwrap_or(false);
        let repr = if dense_ok {
            let mut strides = [0usize; MAX_DIM];
            let mut stride = 1usize;
            for a in 0..MAX_DIM {
                strides[a] = stride;
                stride *= (aabb.hi.0[a] - aabb.lo.0[a] + 1) as usize;
            }
            Repr::Dense { aabb, strides, data: vec![fill; stride] }
        } else {
            Repr::Sparse(FxHashMap::default())
        };
        VertexTable { fill, repr }
    }

    #[inline]
    fn index(aabb: &Aabb, strides: &[usize; MAX_DIM], v: &Vertex) -> usize {
        let mut idx = 0usize;
        for a in 0..MAX_DIM {
            idx += (v.0[a] - aabb.lo.0[a]) as usize * strides[a];
        }
        idx
    }

    /// Value at `v`; vertices never written (or outside the box) read as fill.
    #[inline]
    pub fn get(&self, v: &Vertex) -> T {
        match &self.repr {
            Repr::Dense { aabb, strides, data } => {
                if aabb.contains(v) {
                    data[Self::index(aabb, strides, v)]
                } else {
                    self.fill
                }
            }
            Repr::Sparse(map) => map.get(v).copied().unwrap_or(self.fill),
        }
    }

    #[inline]
    pub fn set(&mut self, v: &Vertex, value: T) {
        match &mut self.repr {
            Repr::Dense { aabb, strides, data } => {
                debug_assert!(aabb.contains(v), "write outside table box: {v:?}");
                let idx = Self::index(aabb, strides, v);
                data[idx] = value;
            }
            Repr::Sparse(map) => {
                map.insert(*v, value);
            }
        }
    }

    pub fn fill_value(&self) -> T {
        self.fill
    }

    /// Visit every vertex holding a non-fill value, in unspecified order.
    /// Callers that need determinism sort the collected pairs.
    pub fn for_each_set(&self, mut f: impl FnMut(Vertex, T)) {
        match &self.repr {
            Repr::Dense { aabb, strides: _, data } => {
                let mut v = aabb.lo;
                for value in data.iter().copied() {
                    if value != self.fill {
                        f(v, value);
                    }
                    // odometer increment, axis 0 fastest (matches stride order)
                    for a in 0..MAX_DIM {
                        if v.0[a] < aabb.hi.0[a] {
                            v.0[a] += 1;
                            break;
                        }
                        v.0[a] = aabb.lo.0[a];
                    }
                }
            }
            Repr::Sparse(map) => {
                for (v, value) in map {
                    if *value != self.fill {
                        f(*v, *value);
                    }
                }
            }
        }
    }

    pub fn collect_sorted(&self) -> Vec<(Vertex, T)> {
        let mut out = Vec::new();
        self.for_each_set(|v, t| out.push((v, t)));
        out.sort_by_key(|(v, _)| *v);
        out
    }
}
