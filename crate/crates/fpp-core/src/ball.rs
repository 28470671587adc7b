//! Wet-ball growth by deque-based 0-1 shortest-path search.
//!
//! Weights are {0, 1}, so a double-ended queue replaces the heap: zero edges
//! extend the current frontier from the front, unit edges enqueue at the
//! back, and vertices pop in nondecreasing passage time. Growth to threshold
//! `t` therefore costs O(vertices + edges) of the explored set.
//!
//! Growth certifies itself against the infinite lattice: if any vertex with
//! passage time <= t lies on the hull of the bounding box, a path could
//! escape the box and re-enter, so the grown set cannot be trusted and
//! `BoxExhausted` is returned. If no such vertex exists, no escaping path
//! can beat the in-box times and the result equals the infinite-lattice ball,
//! including the outer shell at time t + 1.

use crate::config::EdgeWeights;
use crate::error::{Error, Result};
use crate::lattice::{Aabb, Vertex};
use crate::table::VertexTable;
use std::collections::VecDeque;

pub const UNREACHED: u32 = u32::MAX;

/// The lattice ball `B'(t)`: all vertices with passage time at most `t`,
/// plus its inner boundary (ball vertices adjacent to the complement) and
/// outer boundary (complement vertices adjacent to the ball, all at t + 1).
pub struct Ball {
    pub d: usize,
    pub t: u32,
    pub bbox: Aabb,
    /// Passage times for the ball and its outer shell; everything else
    /// reads as `UNREACHED`.
    pub times: VertexTable<u32>,
    pub n_vertices: usize,
    pub inner_boundary: Vec<Vertex>,
    pub outer_boundary: Vec<Vertex>,
}

impl Ball {
    #[inline]
    pub fn contains(&self, v: &Vertex) -> bool {
        self.times.get(v) <= self.t
    }

    /// Stored passage time, if the vertex is in the ball or its outer shell.
    pub fn time(&self, v: &Vertex) -> Option<u32> {
        match self.times.get(v) {
            UNREACHED => None,
            x => Some(x),
        }
    }

    /// Visit every ball vertex with its passage time.
    pub fn for_each_vertex(&self, mut f: impl FnMut(Vertex, u32)) {
        let t = self.t;
        self.times.for_each_set(|v, time| {
            if time <= t {
                f(v, time);
            }
        });
    }

    pub fn vertices_sorted(&self) -> Vec<(Vertex, u32)> {
        let mut out = Vec::with_capacity(self.n_vertices);
        self.for_each_vertex(|v, time| out.push((v, time)));
        out.sort_by_key(|(v, _)| *v);
        out
    }

    /// Assemble a ball from raw parts (synthetic fixtures in tests).
    pub fn from_parts(
        d: usize,
        t: u32,
        bbox: Aabb,
        times: VertexTable<u32>,
        inner_boundary: Vec<Vertex>,
        outer_boundary: Vec<Vertex>,
    ) -> Ball {
        let mut n = 0usize;
        times.for_each_set(|_, time| {
            if time <= t {
                n += 1;
            }
        });
        Ball { d, t, bbox, times, n_vertices: n, inner_boundary, outer_boundary }
    }
}

/// Grow `B'(t)` from the origin.
pub fn grow_ball<W: EdgeWeights>(w: &W, t: u32) -> Result<Ball> {
    let d = w.dim();
    let bbox = *w.bbox();
    if !bbox.contains(&Vertex::ORIGIN) {
        return Err(Error::InvalidConfig("bounding box must contain the origin".into()));
    }
    let mut times = VertexTable::new(bbox, UNREACHED);
    let mut deque: VecDeque<(Vertex, u32)> = VecDeque::new();
    times.set(&Vertex::ORIGIN, 0);
    deque.push_back((Vertex::ORIGIN, 0));

    #[cfg(debug_assertions)]
    let (mut expanded, mut relaxed) = (0u64, 0u64);

    while let Some((v, dv)) = deque.pop_front() {
        if dv > times.get(&v) {
            continue; // stale entry
        }
        if bbox.on_hull(&v, d) {
            return Err(Error::BoxExhausted {
                at: v,
                detail: format!("ball frontier reached the bounding box at time {dv} <= t = {t}"),
            });
        }
        #[cfg(debug_assertions)]
        {
            expanded += 1;
        }
        for (n, e) in v.neighbors(d) {
            #[cfg(debug_assertions)]
            {
                relaxed += 1;
            }
            let we = w.weight(&e);
            let nd = dv + we as u32;
            if nd <= t + 1 && nd < times.get(&n) {
                times.set(&n, nd);
                if nd <= t {
                    if we == 0 {
                        deque.push_front((n, nd));
                    } else {
                        deque.push_back((n, nd));
                    }
                }
            }
        }
    }

    // each ball vertex is expanded exactly once, touching each incident edge
    #[cfg(debug_assertions)]
    debug_assert_eq!(relaxed, expanded * 2 * d as u64);

    let mut n_vertices = 0usize;
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    times.for_each_set(|v, time| {
        if time <= t {
            n_vertices += 1;
            if v.neighbors(d).any(|(n, _)| times.get(&n) > t) {
                inner.push(v);
            }
        } else {
            outer.push(v);
        }
    });
    inner.sort();
    outer.sort();

    Ok(Ball { d, t, bbox, times, n_vertices, inner_boundary: inner, outer_boundary: outer })
}

/// Exact passage time between two vertices, over paths inside the bounding
/// box. The box is the finite world here: choose it generously so confinement
/// does not bind (ball growth is the certified-against-`Z^d` operation).
pub fn passage_time<W: EdgeWeights>(w: &W, from: Vertex, to: Vertex) -> Result<u32> {
    let d = w.dim();
    let bbox = *w.bbox();
    for v in [&from, &to] {
        if !bbox.contains(v) {
            return Err(Error::BoxExhausted {
                at: *v,
                detail: "endpoint outside the bounding box".into(),
            });
        }
    }
    let mut dist = VertexTable::new(bbox, UNREACHED);
    let mut deque: VecDeque<(Vertex, u32)> = VecDeque::new();
    dist.set(&from, 0);
    deque.push_back((from, 0));
    while let Some((v, dv)) = deque.pop_front() {
        if dv > dist.get(&v) {
            continue;
        }
        if v == to {
            return Ok(dv);
        }
        for (n, e) in v.neighbors(d) {
            if !bbox.contains(&n) {
                continue;
            }
            let we = w.weight(&e);
            let nd = dv + we as u32;
            if nd < dist.get(&n) {
                dist.set(&n, nd);
                if we == 0 {
                    deque.push_front((n, nd));
                } else {
                    deque.push_back((n, nd));
                }
            }
        }
    }
    unreachable!("the box lattice is connected");
}

/// Outcome of an exact invariant check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub pass: bool,
    /// Vertices violating the invariant, with a short reason each.
    pub violations: Vec<(Vertex, String)>,
}

impl CheckReport {
    fn from_violations(violations: Vec<(Vertex, String)>) -> CheckReport {
        CheckReport { pass: violations.is_empty(), violations }
    }
}

/// Boundary passage times: every inner-boundary vertex must sit at exactly
/// `t` and every outer-boundary vertex at exactly `t + 1`; boundary
/// membership itself is re-derived from the stored times.
pub fn verify_boundary_times(ball: &Ball) -> CheckReport {
    let mut bad = Vec::new();
    let t = ball.t;
    for v in &ball.inner_boundary {
        let time = ball.times.get(v);
        if time != t {
            bad.push((*v, format!("inner boundary vertex has time {time}, want {t}")));
        }
    }
    for v in &ball.outer_boundary {
        let time = ball.times.get(v);
        if time != t + 1 {
            bad.push((*v, format!("outer boundary vertex has time {time}, want {}", t + 1)));
        }
    }
    // re-derive boundary membership
    let mut derived_inner = Vec::new();
    let mut derived_outer = Vec::new();
    ball.times.for_each_set(|v, time| {
        if time <= t {
            if v.neighbors(ball.d).any(|(n, _)| ball.times.get(&n) > t) {
                derived_inner.push(v);
            }
        } else {
            derived_outer.push(v);
        }
    });
    derived_inner.sort();
    derived_outer.sort();
    if derived_inner != ball.inner_boundary {
        bad.push((Vertex::ORIGIN, "stored inner boundary differs from derived".into()));
    }
    if derived_outer != ball.outer_boundary {
        bad.push((Vertex::ORIGIN, "stored outer boundary differs from derived".into()));
    }
    CheckReport::from_violations(bad)
}

/// Connectivity of the ball as a lattice subgraph containing the origin.
pub fn verify_connected(ball: &Ball) -> CheckReport {
    if ball.times.get(&Vertex::ORIGIN) != 0 {
        return CheckReport::from_violations(vec![(
            Vertex::ORIGIN,
            "origin missing or at nonzero time".into(),
        )]);
    }
    let mut seen = VertexTable::new(ball.bbox, false);
    let mut queue = VecDeque::new();
    seen.set(&Vertex::ORIGIN, true);
    queue.push_back(Vertex::ORIGIN);
    let mut count = 1usize;
    while let Some(v) = queue.pop_front() {
        for (n, _) in v.neighbors(ball.d) {
            if ball.contains(&n) && !seen.get(&n) {
                seen.set(&n, true);
                count += 1;
                queue.push_back(n);
            }
        }
    }
    if count == ball.n_vertices {
        CheckReport::from_violations(vec![])
    } else {
        let mut stranded = Vec::new();
        ball.for_each_vertex(|v, _| {
            if !seen.get(&v) && stranded.len() < 8 {
                stranded.push((v, "not connected to the origin".into()));
            }
        });
        CheckReport::from_violations(stranded)
    }
}

/// Locality of the grown ball: re-randomize every edge that does not have
/// both endpoints inside the ball or its outer shell, regrow, and demand the
/// identical ball. The event "this exact set grew" may only depend on edges
/// inside that set and its outer boundary.
pub fn verify_locality(
    cfg: &crate::config::Configuration,
    t: u32,
    resample_seed: u64,
) -> Result<CheckReport> {
    let base = grow_ball(cfg, t)?;
    let mut protected = VertexTable::new(base.bbox, false);
    base.times.for_each_set(|v, _| protected.set(&v, true));
    let resampled = crate::config::ResampledOutside {
        base: cfg,
        protected: |v: &Vertex| protected.get(v),
        resample_seed,
    };
    let regrown = grow_ball(&crate::config::Thresholded { uniforms: &resampled, p: cfg.p }, t)?;

    let mut bad = Vec::new();
    if regrown.n_vertices != base.n_vertices {
        bad.push((
            Vertex::ORIGIN,
            format!("ball size changed: {} -> {}", base.n_vertices, regrown.n_vertices),
        ));
    }
    base.for_each_vertex(|v, time| {
        let got = regrown.times.get(&v);
        if got != time && bad.len() < 8 {
            bad.push((v, format!("time changed {time} -> {got}")));
        }
    });
    Ok(CheckReport::from_violations(bad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Configuration, GridWeights};
    use crate::lattice::Edge;
    use crate::oracle;

    #[test]
    fn all_ones_ball_is_the_l1_diamond() {
        let cfg = Configuration::centered(2, 0.0, 3, 64).unwrap();
        for t in [0u32, 1, 5, 20] {
            let ball = grow_ball(&cfg, t).unwrap();
            assert_eq!(ball.n_vertices as u64, oracle::diamond_vertex_count(2, t as i32));
            assert_eq!(ball.n_vertices as i64, 2 * (t as i64) * (t as i64) + 2 * t as i64 + 1);
            ball.for_each_vertex(|v, time| assert_eq!(time as i64, v.l1_norm()));
            // boundary shells
            for v in &ball.inner_boundary {
                assert_eq!(v.l1_norm(), t as i64);
            }
            for v in &ball.outer_boundary {
                assert_eq!(v.l1_norm(), t as i64 + 1);
            }
        }
        let cfg3 = Configuration::centered(3, 0.0, 3, 16).unwrap();
        let ball3 = grow_ball(&cfg3, 3).unwrap();
        assert_eq!(ball3.n_vertices as u64, oracle::diamond_vertex_count(3, 3));
    }

    #[test]
    fn zero_threshold_ball_is_the_zero_cluster() {
        let cfg = Configuration::centered(2, 0.4, 11, 256).unwrap();
        let ball = grow_ball(&cfg, 0).unwrap();
        ball.for_each_vertex(|_, time| assert_eq!(time, 0));
        assert!(verify_connected(&ball).pass);
        assert!(verify_boundary_times(&ball).pass);
    }

    /// 7x7 fixed-weight grid; expectations were computed with the heap
    /// Dijkstra oracle and frozen.
    #[test]
    fn explicit_grid_matches_dijkstra_oracle() {
        let bbox = Aabb::centered(2, 3);
        let mut g = GridWeights::new(2, bbox, 1);
        // a zero corridor bending from the origin up and right
        for (u, v) in [
            ((0, 0), (1, 0)),
            ((1, 0), (1, 1)),
            ((1, 1), (2, 1)),
            ((0, 0), (0, 1)),
            ((0, 1), (-1, 1)),
        ] {
            g.set(Vertex::new2(u.0, u.1), Vertex::new2(v.0, v.1), 0);
        }
        let oracle_dist = oracle::dijkstra(&g, Vertex::ORIGIN, None);
        let ball = grow_ball(&g, 2).unwrap();
        let mut checked = 0;
        ball.for_each_vertex(|v, time| {
            assert_eq!(time, oracle_dist.get(&v), "at {v:?}");
            checked += 1;
        });
        assert!(checked > 10);
        // frozen spot values
        assert_eq!(ball.time(&Vertex::new2(2, 1)), Some(0));
        assert_eq!(ball.time(&Vertex::new2(-1, 1)), Some(0));
        assert_eq!(ball.time(&Vertex::new2(2, 2)), Some(1));
        assert_eq!(ball.time(&Vertex::new2(-2, -2)), None);
        assert!(verify_boundary_times(&ball).pass);
    }

    #[test]
    fn passage_time_agrees_with_oracle_on_random_instances() {
        for seed in 0..40u64 {
            let cfg = Configuration::centered(2, 0.1 + 0.01 * (seed % 30) as f64, seed, 10).unwrap();
            let u = Vertex::new2((seed % 7) as i32 - 3, (seed % 5) as i32 - 2);
            let v = Vertex::new2(-(seed as i32 % 4), (seed % 9) as i32 - 4);
            assert_eq!(
                passage_time(&cfg, u, v).unwrap(),
                oracle::dijkstra_between(&cfg, u, v),
                "seed {seed}"
            );
            assert_eq!(passage_time(&cfg, v, v).unwrap(), 0);
        }
    }

    #[test]
    fn growth_errors_when_ball_reaches_the_box() {
        let cfg = Configuration::centered(2, 0.0, 5, 4).unwrap();
        match grow_ball(&cfg, 10) {
            Err(Error::BoxExhausted { .. }) => {}
            other => panic!("expected BoxExhausted, got {other:?}"),
        }
    }

    #[test]
    fn boundary_check_flags_corrupted_time() {
        let cfg = Configuration::centered(2, 0.25, 8, 128).unwrap();
        let mut ball = grow_ball(&cfg, 12).unwrap();
        assert!(verify_boundary_times(&ball).pass);
        let victim = ball.inner_boundary[0];
        ball.times.set(&victim, 1);
        let report = verify_boundary_times(&ball);
        assert!(!report.pass);
        assert!(report.violations.iter().any(|(v, _)| *v == victim));
    }

    #[test]
    fn connectivity_check_flags_disjoint_fixture() {
        let bbox = Aabb::centered(2, 20);
        let mut times = VertexTable::new(bbox, UNREACHED);
        // two L1 diamonds far apart
        for r in [(0, 0), (15, 15)] {
            for dx in -2i32..=2 {
                for dy in -2i32..=2 {
                    if dx.abs() + dy.abs() <= 2 {
                        times.set(
                            &Vertex::new2(r.0 + dx, r.1 + dy),
                            (dx.abs() + dy.abs()) as u32,
                        );
                    }
                }
            }
        }
        let ball = Ball::from_parts(2, 2, bbox, times, vec![], vec![]);
        assert!(!verify_connected(&ball).pass);
    }

    #[test]
    fn grown_balls_are_connected_and_monotone() {
        for seed in 0..30u64 {
            let cfg = Configuration::centered(2, 0.3, seed, 160).unwrap();
            let small = grow_ball(&cfg, 10).unwrap();
            let large = grow_ball(&cfg, 14).unwrap();
            assert!(verify_connected(&small).pass);
            small.for_each_vertex(|v, time| {
                assert_eq!(large.times.get(&v), time, "nested ball changed a time");
            });
            assert!(small.n_vertices <= large.n_vertices);
        }
    }

    #[test]
    fn coupled_balls_nest_across_p() {
        for seed in 0..20u64 {
            let hi = Configuration::centered(2, 0.35, seed, 160).unwrap();
            let lo = hi.coupled(0.2); // fewer zeros
            let big = grow_ball(&hi, 12).unwrap();
            let small = grow_ball(&lo, 12).unwrap();
            small.for_each_vertex(|v, _| {
                assert!(big.contains(&v), "ball at smaller p must be contained");
            });
        }
    }

    #[test]
    fn locality_holds_and_interior_flips_are_detected() {
        let cfg = Configuration::centered(2, 0.25, 77, 200).unwrap();
        // no-op resample: same seed
        assert!(verify_locality(&cfg, 20, cfg.seed).unwrap().pass);
        for trial in 0..20u64 {
            assert!(verify_locality(&cfg, 20, 1000 + trial).unwrap().pass, "trial {trial}");
        }

        // negative control: re-randomizing an edge inside the ball can change
        // it; over 50 trials at least one change must be seen
        let base = grow_ball(&cfg, 20).unwrap();
        let mut changed = 0;
        for trial in 0..50u64 {
            let interior = base.inner_boundary[trial as usize % base.inner_boundary.len()];
            let nbr = interior
                .neighbors(2)
                .map(|(n, _)| n)
                .find(|n| base.contains(n))
                .unwrap();
            let mut overrides = rustc_hash::FxHashMap::default();
            overrides.insert(
                Edge::between(interior, nbr),
                crate::config::edge_uniform_raw(900 + trial, &Edge::between(interior, nbr)),
            );
            let tweaked = crate::config::UniformOverrides { base: &cfg, overrides };
            let regrown =
                grow_ball(&crate::config::Thresholded { uniforms: &tweaked, p: cfg.p }, 20)
                    .unwrap();
            let mut same = regrown.n_vertices == base.n_vertices;
            if same {
                base.for_each_vertex(|v, time| {
                    if regrown.times.get(&v) != time {
                        same = false;
                    }
                });
            }
            if !same {
                changed += 1;
            }
        }
        assert!(changed >= 1, "no interior flip changed the ball in 50 trials");
    }
}
