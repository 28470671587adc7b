//! Shape fluctuation of a grown ball against a deterministic region.
//!
//! `l_out` is how far the ball pokes out of the region, `l_in` how deep the
//! driest region vertex sits below the region boundary; the fluctuation is
//! their maximum, with Euclidean point-to-set distances measured at lattice
//! resolution against the region's boundary vertices.
//!
//! Distances come from an exact squared Euclidean distance transform
//! (lower-envelope method, one pass per axis), so one field per region serves
//! any number of replicate balls.

use crate::ball::Ball;
use crate::error::Result;
use crate::lattice::{Aabb, Vertex, MAX_DIM};
use crate::region::Region;
use crate::table::VertexTable;
use serde::{Deserialize, Serialize};

/// Exact Euclidean distance to a seed set, for every vertex of a box.
pub struct DistanceField {
    bbox: Aabb,
    dims: [usize; MAX_DIM],
    /// squared distances, axis 0 fastest
    sq: Vec<f64>,
}

impl DistanceField {
    /// Distance to the region's boundary vertex set, over `bbox`.
    pub fn to_region_boundary(region: &Region, bbox: Aabb) -> DistanceField {
        DistanceField::from_seeds(bbox, region.boundary().iter().copied())
    }

    pub fn from_seeds(bbox: Aabb, seeds: impl Iterator<Item = Vertex>) -> DistanceField {
        let mut dims = [0usize; MAX_DIM];
        let mut volume = 1usize;
        for a in 0..MAX_DIM {
            dims[a] = (bbox.hi.0[a] - bbox.lo.0[a] + 1) as usize;
            volume *= dims[a];
        }
        let mut sq = vec![f64::INFINITY; volume];
        let index = |v: &Vertex| -> usize {
            let mut idx = 0usize;
            let mut stride = 1usize;
            for a in 0..MAX_DIM {
                idx += (v.0[a] - bbox.lo.0[a]) as usize * stride;
                stride *= dims[a];
            }
            idx
        };
        let mut any = false;
        for s in seeds {
            if bbox.contains(&s) {
                sq[index(&s)] = 0.0;
                any = true;
            }
        }
        let mut field = DistanceField { bbox, dims, sq };
        if any {
            for a in 0..MAX_DIM {
                if field.dims[a] > 1 {
                    field.transform_axis(a);
                }
            }
        }
        field
    }

    /// 1D squared-distance lower envelope along `axis`, applied to every line.
    fn transform_axis(&mut self, axis: usize) {
        let n = self.dims[axis];
        let stride: usize = self.dims[..axis].iter().product();
        let lines: usize = self.sq.len() / n;
        let mut f = vec![0.0f64; n];
        let mut out = vec![0.0f64; n];
        let mut v = vec![0usize; n];
        let mut z = vec![0.0f64; n + 1];
        for line in 0..lines {
            // base index of this line: decompose `line` over the other axes
            let mut rem = line;
            let mut base = 0usize;
            let mut s = 1usize;
            for a in 0..MAX_DIM {
                if a == axis {
                    s *= n;
                    continue;
                }
                let len = self.dims[a];
                base += (rem % len) * s;
                rem /= len;
                s *= len;
            }
            for (i, item) in f.iter_mut().enumerate() {
                *item = self.sq[base + i * stride];
            }
            // Felzenszwalb-Huttenlocher lower envelope of parabolas
            let mut k = 0usize;
            v[0] = 0;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            for q in 1..n {
                if f[q].is_infinite() {
                    continue;
                }
                loop {
                    let p = v[k];
                    if f[p].is_infinite() {
                        // empty envelope so far
                        v[k] = q;
                        z[k] = f64::NEG_INFINITY;
                        z[k + 1] = f64::INFINITY;
                        break;
                    }
                    let s_pt = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                        / (2.0 * q as f64 - 2.0 * p as f64);
                    if s_pt <= z[k] {
                        if k == 0 {
                            v[0] = q;
                            z[0] = f64::NEG_INFINITY;
                            z[1] = f64::INFINITY;
                            break;
                        }
                        k -= 1;
                        continue;
                    }
                    k += 1;
                    v[k] = q;
                    z[k] = s_pt;
                    z[k + 1] = f64::INFINITY;
                    break;
                }
            }
            let mut k2 = 0usize;
            for (q, item) in out.iter_mut().enumerate() {
                while z[k2 + 1] < q as f64 {
                    k2 += 1;
                }
                let p = v[k2];
                *item = if f[p].is_infinite() {
                    f64::INFINITY
                } else {
                    let dq = q as f64 - p as f64;
                    dq * dq + f[p]
                };
            }
            for (i, item) in out.iter().enumerate() {
                self.sq[base + i * stride] = *item;
            }
        }
    }

    pub fn get(&self, v: &Vertex) -> f64 {
        if !self.bbox.contains(v) {
            return f64::INFINITY;
        }
        let mut idx = 0usize;
        let mut stride = 1usize;
        for a in 0..MAX_DIM {
            idx += (v.0[a] - self.bbox.lo.0[a]) as usize * stride;
            stride *= self.dims[a];
        }
        self.sq[idx].sqrt()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub t: u32,
    pub gamma_kind: String,
    /// Largest distance of a ball vertex outside the region to the region.
    pub l_out: f64,
    /// Largest depth of a dry region vertex below the region boundary.
    pub l_in: f64,
    /// max(l_out, l_in)
    pub f: f64,
}

/// Fluctuation of `ball` against a region sharing its origin, using a
/// precomputed distance field to the region boundary.
pub fn fluctuation_with_field(
    ball: &Ball,
    region: &Region,
    field: &DistanceField,
) -> FluctuationReport {
    let mut l_out = 0.0f64;
    ball.for_each_vertex(|v, _| {
        if !region.contains(&v) {
            l_out = l_out.max(field.get(&v));
        }
    });
    let mut l_in = 0.0f64;
    for v in region.trace() {
        if !ball.contains(v) {
            l_in = l_in.max(field.get(v));
        }
    }
    FluctuationReport {
        t: ball.t,
        gamma_kind: format!("{:?}", region.kind),
        l_out,
        l_in,
        f: l_out.max(l_in),
    }
}

/// One-off fluctuation; builds the distance field over the ball's box.
pub fn fluctuation(ball: &Ball, region: &Region) -> Result<FluctuationReport> {
    let field = DistanceField::to_region_boundary(region, ball.bbox);
    Ok(fluctuation_with_field(ball, region, &field))
}

/// Direct set check that `l` sandwiches the ball: the ball within the
/// `l`-dilation of the region, and the `l`-erosion of the region within the
/// ball. Used to confirm minimality of a reported fluctuation.
pub fn sandwich_holds(ball: &Ball, region: &Region, field: &DistanceField, l: f64) -> bool {
    let mut ok = true;
    ball.for_each_vertex(|v, _| {
        if !region.contains(&v) && field.get(&v) > l {
            ok = false;
        }
    });
    if !ok {
        return false;
    }
    region
        .trace()
        .iter()
        .all(|v| ball.contains(v) || field.get(v) < l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::grow_ball;
    use crate::config::Configuration;

    #[test]
    fn distance_field_matches_brute_force() {
        let bbox = Aabb::centered(2, 12);
        let seeds = vec![Vertex::new2(0, 0), Vertex::new2(5, -3), Vertex::new2(-7, 7)];
        let field = DistanceField::from_seeds(bbox, seeds.iter().copied());
        for x in -12..=12 {
            for y in -12..=12 {
                let v = Vertex::new2(x, y);
                let want = seeds
                    .iter()
                    .map(|s| s.euclid_dist(&v))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    (field.get(&v) - want).abs() < 1e-9,
                    "at {v:?}: got {}, want {want}",
                    field.get(&v)
                );
            }
        }
    }

    #[test]
    fn distance_field_3d_spot_checks() {
        let bbox = Aabb::centered(3, 6);
        let field = DistanceField::from_seeds(bbox, std::iter::once(Vertex::new3(1, -2, 3)));
        assert!((field.get(&Vertex::new3(1, -2, 3)) - 0.0).abs() < 1e-12);
        assert!((field.get(&Vertex::new3(4, 2, 3)) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn fluctuation_against_own_vertex_set_is_zero() {
        let cfg = Configuration::centered(2, 0.25, 4, 200).unwrap();
        let ball = grow_ball(&cfg, 15).unwrap();
        let mut vs = Vec::new();
        ball.for_each_vertex(|v, _| vs.push(v));
        let region = Region::explicit(2, vs).unwrap();
        let report = fluctuation(&ball, &region).unwrap();
        assert_eq!(report.f, 0.0);
    }

    #[test]
    fn all_ones_ball_matches_diamond_exactly() {
        let cfg = Configuration::centered(2, 0.0, 4, 64).unwrap();
        let ball = grow_ball(&cfg, 20).unwrap();
        let region = Region::diamond(2, 20).unwrap();
        let report = fluctuation(&ball, &region).unwrap();
        assert_eq!(report.f, 0.0);
    }

    /// Diamond ball with a spike of length 5 glued to the +x tip.
    #[test]
    fn spike_fixture_reports_its_length() {
        let t = 10u32;
        let bbox = Aabb::centered(2, 40);
        let mut g = crate::config::GridWeights::new(2, bbox, 1);
        for i in 0..5 {
            g.set(
                Vertex::new2(t as i32 + i, 0),
                Vertex::new2(t as i32 + i + 1, 0),
                0,
            );
        }
        let ball = grow_ball(&g, t).unwrap();
        assert_eq!(
            ball.n_vertices as i64,
            2 * (t as i64) * (t as i64) + 2 * t as i64 + 1 + 5
        );
        let region = Region::diamond(2, t as i32).unwrap();
        let report = fluctuation(&ball, &region).unwrap();
        assert_eq!(report.l_out, 5.0);
        assert_eq!(report.f, 5.0);
        assert_eq!(report.l_in, 0.0);

        // the reported fluctuation sandwiches the ball and is minimal
        let field = DistanceField::to_region_boundary(&region, ball.bbox);
        assert!(sandwich_holds(&ball, &region, &field, report.f + 1e-9));
        assert!(!sandwich_holds(&ball, &region, &field, report.f - 1e-9));
    }

    /// Scaling the region by (1 +- eps) moves F by at most eps * diam / 2 + 1.
    #[test]
    fn fluctuation_is_lipschitz_under_dilation() {
        let cfg = Configuration::centered(2, 0.25, 9, 300).unwrap();
        let t = 30u32;
        let ball = grow_ball(&cfg, t).unwrap();
        let r0 = 50i32;
        let base = fluctuation(&ball, &Region::diamond(2, r0).unwrap()).unwrap();
        for eps in [0.04f64, 0.1] {
            let r1 = ((r0 as f64) * (1.0 + eps)).round() as i32;
            let scaled = fluctuation(&ball, &Region::diamond(2, r1).unwrap()).unwrap();
            let bound = eps * (2.0 * r1 as f64) / 2.0 + 1.0;
            assert!(
                (scaled.f - base.f).abs() <= bound,
                "eps {eps}: {} vs {} bound {bound}",
                scaled.f,
                base.f
            );
        }
    }
}
