//! Deterministic target regions: a continuum set, its lattice trace, and the
//! trace's vertex boundary.

use crate::error::{Error, Result};
use crate::lattice::{Aabb, Vertex, MAX_DIM};
use crate::shape::ShapeEstimate;
use crate::table::VertexTable;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionKind {
    /// `lambda * B` for an estimated asymptotic shape `B`.
    ScaledShape { lambda: f64 },
    /// Axis-aligned cube `[-halfwidth, halfwidth]^d`.
    AxisBox { halfwidth: i32 },
    /// L1 ball of the given radius.
    Diamond { radius: i32 },
    /// Explicit vertex set.
    Explicit,
    /// Box region whose routing target is a single vertex, not the boundary.
    TwoPoint { target: Vertex },
}

/// A target set: lattice trace, boundary, and membership test.
pub struct Region {
    pub d: usize,
    pub kind: RegionKind,
    pub bbox: Aabb,
    member: VertexTable<bool>,
    trace: Vec<Vertex>,
    boundary: Vec<Vertex>,
    /// Routing targets; boundary unless the kind overrides it.
    targets_override: Option<Vec<Vertex>>,
}

impl Region {
    #[inline]
    pub fn contains(&self, v: &Vertex) -> bool {
        self.member.get(v)
    }

    /// The lattice trace, sorted.
    pub fn trace(&self) -> &[Vertex] {
        &self.trace
    }

    /// Vertices of the trace adjacent to its complement, sorted.
    pub fn boundary(&self) -> &[Vertex] {
        &self.boundary
    }

    /// Where restricted passage times are measured to.
    pub fn targets(&self) -> &[Vertex] {
        self.targets_override.as_deref().unwrap_or(&self.boundary)
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }

    fn from_membership(
        d: usize,
        kind: RegionKind,
        bbox: Aabb,
        member: VertexTable<bool>,
        trace: Vec<Vertex>,
    ) -> Result<Region> {
        if !member.get(&Vertex::ORIGIN) {
            return Err(Error::InvalidRegion("region must contain the origin".into()));
        }
        let mut boundary: Vec<Vertex> = trace
            .iter()
            .copied()
            .filter(|v| v.neighbors(d).any(|(n, _)| !member.get(&n)))
            .collect();
        boundary.sort();
        Ok(Region { d, kind, bbox, member, trace, boundary, targets_override: None })
    }

    /// L1 ball of radius `r`.
    pub fn diamond(d: usize, r: i32) -> Result<Region> {
        if r < 0 {
            return Err(Error::InvalidRegion("diamond radius must be >= 0".into()));
        }
        let bbox = Aabb::centered(d, r);
        let mut member = VertexTable::new(bbox, false);
        let mut trace = Vec::new();
        scan_box(&bbox, |v| {
            if v.l1_norm() <= r as i64 {
                member.set(&v, true);
                trace.push(v);
            }
        });
        trace.sort();
        Region::from_membership(d, RegionKind::Diamond { radius: r }, bbox, member, trace)
    }

    /// Axis cube `[-h, h]^d`.
    pub fn axis_box(d: usize, h: i32) -> Result<Region> {
        if h < 0 {
            return Err(Error::InvalidRegion("box halfwidth must be >= 0".into()));
        }
        let bbox = Aabb::centered(d, h);
        let mut member = VertexTable::new(bbox, false);
        let mut trace = Vec::new();
        scan_box(&bbox, |v| {
            member.set(&v, true);
            trace.push(v);
        });
        trace.sort();
        Region::from_membership(d, RegionKind::AxisBox { halfwidth: h }, bbox, member, trace)
    }

    /// Lattice trace of `lambda * B` for an estimated shape `B`, enumerated by
    /// flood fill from the origin (the polytope is convex, so the trace is
    /// connected).
    pub fn scaled_shape(shape: &ShapeEstimate, lambda: f64) -> Result<Region> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidRegion("shape scale must be positive".into()));
        }
        let d = shape.d;
        let r = (lambda * shape.max_radius()).ceil() as i32 + 1;
        let bbox = Aabb::centered(d, r);
        let mut member = VertexTable::new(bbox, false);
        let mut trace = Vec::new();
        if !shape.contains_point(&to_real(&Vertex::ORIGIN), lambda) {
            return Err(Error::InvalidRegion("scaled shape does not contain the origin".into()));
        }
        let mut queue = VecDeque::new();
        member.set(&Vertex::ORIGIN, true);
        queue.push_back(Vertex::ORIGIN);
        trace.push(Vertex::ORIGIN);
        while let Some(v) = queue.pop_front() {
            for (n, _) in v.neighbors(d) {
                if bbox.contains(&n)
                    && !member.get(&n)
                    && shape.contains_point(&to_real(&n), lambda)
                {
                    member.set(&n, true);
                    trace.push(n);
                    queue.push_back(n);
                }
            }
        }
        trace.sort();
        Region::from_membership(d, RegionKind::ScaledShape { lambda }, bbox, member, trace)
    }

    /// Explicit vertex set; must contain the origin and be lattice-connected.
    pub fn explicit(d: usize, vertices: Vec<Vertex>) -> Result<Region> {
        if vertices.is_empty() {
            return Err(Error::InvalidRegion("explicit region is empty".into()));
        }
        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for v in &vertices {
            for a in 0..MAX_DIM {
                lo.0[a] = lo.0[a].min(v.0[a]);
                hi.0[a] = hi.0[a].max(v.0[a]);
            }
        }
        let bbox = Aabb::new(lo, hi);
        let mut member = VertexTable::new(bbox, false);
        let mut trace = vertices;
        for v in &trace {
            member.set(v, true);
        }
        trace.sort();
        trace.dedup();

        // connectivity from the origin
        if !member.get(&Vertex::ORIGIN) {
            return Err(Error::InvalidRegion("region must contain the origin".into()));
        }
        let mut seen = VertexTable::new(bbox, false);
        let mut queue = VecDeque::new();
        seen.set(&Vertex::ORIGIN, true);
        queue.push_back(Vertex::ORIGIN);
        let mut count = 1usize;
        while let Some(v) = queue.pop_front() {
            for (n, _) in v.neighbors(d) {
                if member.get(&n) && !seen.get(&n) {
                    seen.set(&n, true);
                    count += 1;
                    queue.push_back(n);
                }
            }
        }
        if count != trace.len() {
            return Err(Error::InvalidRegion(format!(
                "explicit region is not connected: {count} of {} vertices reachable",
                trace.len()
            )));
        }
        Region::from_membership(d, RegionKind::Explicit, bbox, member, trace)
    }

    /// Box region around the origin and `target`, routed to `target` alone.
    /// Thin convenience for point-to-point route unions.
    pub fn two_point(d: usize, target: Vertex, margin: i32) -> Result<Region> {
        let mut lo = Vertex::ORIGIN;
        let mut hi = Vertex::ORIGIN;
        for a in 0..d {
            lo.0[a] = 0.min(target.0[a]) - margin;
            hi.0[a] = 0.max(target.0[a]) + margin;
        }
        let bbox = Aabb::new(lo, hi);
        let mut member = VertexTable::new(bbox, false);
        let mut trace = Vec::new();
        scan_box(&bbox, |v| {
            member.set(&v, true);
            trace.push(v);
        });
        trace.sort();
        let mut region = Region::from_membership(
            d,
            RegionKind::TwoPoint { target },
            bbox,
            member,
            trace,
        )?;
        region.targets_override = Some(vec![target]);
        Ok(region)
    }

    /// Regularity at scale `t`: `(t/2) B` inside the region and the region
    /// inside `2t B`, checked at lattice resolution against the estimated
    /// shape's hull points and this region's extreme points.
    pub fn is_regular(&self, shape: &ShapeEstimate, t: f64) -> bool {
        // (t/2) B inside the region: every hull point of (t/2) B must be in
        let inner_ok = shape.hull_points().iter().all(|q| {
            let p: Vec<f64> = q.iter().map(|c| c * t / 2.0).collect();
            self.contains_real(&p)
        });
        if !inner_ok {
            return false;
        }
        // region inside 2t B: check the region's extreme points
        let outer_ok = match self.kind {
            RegionKind::Diamond { radius } => (0..self.d).all(|a| {
                [-1.0, 1.0].iter().all(|s| {
                    let mut p = [0.0; MAX_DIM];
                    p[a] = s * radius as f64;
                    shape.contains_point(&p[..self.d], 2.0 * t)
                })
            }),
            RegionKind::AxisBox { halfwidth } => {
                corners(self.d, halfwidth as f64).iter().all(|p| shape.contains_point(p, 2.0 * t))
            }
            RegionKind::ScaledShape { lambda } => lambda <= 2.0 * t,
            _ => self
                .boundary
                .iter()
                .all(|v| shape.contains_point(&to_real(v)[..self.d], 2.0 * t)),
        };
        outer_ok
    }

    fn contains_real(&self, p: &[f64]) -> bool {
        self.contains(&Vertex::nearest(p))
    }
}

fn to_real(v: &Vertex) -> [f64; MAX_DIM] {
    let mut out = [0.0; MAX_DIM];
    for a in 0..MAX_DIM {
        out[a] = v.0[a] as f64;
    }
    out
}

fn corners(d: usize, h: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for mask in 0..(1u32 << d) {
        let mut p = vec![0.0; d];
        for (a, item) in p.iter_mut().enumerate() {
            *item = if mask >> a & 1 == 1 { h } else { -h };
        }
        out.push(p);
    }
    out
}

fn scan_box(bbox: &Aabb, mut f: impl FnMut(Vertex)) {
    let mut v = bbox.lo;
    loop {
        f(v);
        let mut a = 0;
        loop {
            if a == MAX_DIM {
                return;
            }
            if v.0[a] < bbox.hi.0[a] {
                v.0[a] += 1;
                break;
            }
            v.0[a] = bbox.lo.0[a];
            a += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    #[test]
    fn diamond_trace_and_boundary() {
        let r = Region::diamond(2, 5).unwrap();
        assert_eq!(r.len() as u64, oracle::diamond_vertex_count(2, 5));
        assert!(r.contains(&Vertex::new2(2, -3)));
        assert!(!r.contains(&Vertex::new2(3, 3)));
        for v in r.boundary() {
            assert_eq!(v.l1_norm(), 5);
        }
        assert_eq!(r.boundary().len(), 20);
        assert_eq!(r.targets().len(), 20);
    }

    #[test]
    fn box_region() {
        let r = Region::axis_box(2, 3).unwrap();
        assert_eq!(r.len(), 49);
        assert_eq!(r.boundary().len(), 24);
    }

    #[test]
    fn explicit_region_rejects_disconnected_or_origin_free_sets() {
        let ok = Region::explicit(
            2,
            vec![Vertex::new2(0, 0), Vertex::new2(1, 0), Vertex::new2(1, 1)],
        )
        .unwrap();
        assert_eq!(ok.len(), 3);
        assert_eq!(ok.boundary().len(), 3);

        assert!(Region::explicit(2, vec![Vertex::new2(1, 0)]).is_err());
        assert!(Region::explicit(
            2,
            vec![Vertex::new2(0, 0), Vertex::new2(2, 2)],
        )
        .is_err());
    }

    #[test]
    fn two_point_region_targets_the_far_vertex() {
        let r = Region::two_point(2, Vertex::new2(6, 2), 3).unwrap();
        assert!(r.contains(&Vertex::ORIGIN));
        assert!(r.contains(&Vertex::new2(6, 2)));
        assert_eq!(r.targets(), &[Vertex::new2(6, 2)]);
    }
}
