//! Time-constant and asymptotic-shape estimation, and the empirical mean
//! ball (the set of vertices whose sample-mean passage time is below the
//! threshold).

use crate::ball::grow_ball;
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::lattice::{Aabb, Vertex, MAX_DIM};
use crate::stats::MeanVar;
use crate::table::VertexTable;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderPoint {
    pub n: u32,
    pub mean: f64,
    pub stderr: f64,
    pub reps: u32,
}

/// Per-direction estimate of the time constant, with the convergence ladder
/// that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionEstimate {
    pub direction: Vec<f64>,
    pub mu_hat: f64,
    pub stderr: f64,
    pub ladder: Vec<LadderPoint>,
}

/// Polytope approximation of the asymptotic shape: boundary point estimates
/// `direction / mu_hat` over a symmetry-expanded direction set, consumed
/// through the support function of their convex hull.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeEstimate {
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub n_used: Vec<u32>,
    pub entries: Vec<DirectionEstimate>,
    /// Support heights of the hull along each entry's direction.
    pub support: Vec<f64>,
}

impl ShapeEstimate {
    /// Boundary point estimates (hull vertices), one per direction.
    pub fn hull_points(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| e.direction.iter().map(|c| c / e.mu_hat).collect())
            .collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.entries.iter().map(|e| 1.0 / e.mu_hat).fold(0.0, f64::max)
    }

    /// Membership of a real point in `scale * B`.
    pub fn contains_point(&self, x: &[f64], scale: f64) -> bool {
        self.entries.iter().zip(self.support.iter()).all(|(e, h)| {
            let dot: f64 = e.direction.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            dot <= h * scale + 1e-12
        })
    }

    fn finalize(mut self) -> ShapeEstimate {
        let pts = self.hull_points();
        self.support = self
            .entries
            .iter()
            .map(|e| {
                pts.iter()
                    .map(|q| q.iter().zip(e.direction.iter()).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::MIN, f64::max)
            })
            .collect();
        self
    }
}

fn ladder_lengths(n_max: u32) -> Vec<u32> {
    let mut ns = vec![n_max];
    let mut n = n_max;
    while n / 2 >= 8 && ns.len() < 4 {
        n /= 2;
        ns.push(n);
    }
    ns.reverse();
    ns
}

/// Estimate `mu(x)` along one unit direction: sample `T(0, round(n x)) / n`
/// over a geometric ladder of distances and take the largest-`n` mean. The
/// smaller rungs are kept as convergence diagnostics.
pub fn estimate_time_constant(
    d: usize,
    p: f64,
    direction: &[f64],
    n_max: u32,
    reps: u32,
    seed_base: u64,
) -> Result<DirectionEstimate> {
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be >= 1".into()));
    }
    let norm: f64 = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidConfig("direction must be nonzero".into()));
    }
    let unit: Vec<f64> = direction.iter().map(|c| c / norm).collect();
    let mut ladder = Vec::new();
    for &n in ladder_lengths(n_max).iter() {
        let scaled: Vec<f64> = unit.iter().map(|c| c * n as f64).collect();
        let target = Vertex::nearest(&scaled);
        // geodesics live inside a passage-time ball around the endpoints;
        // radius 3n covers that with ample margin for subcritical p
        let r = 3 * n as i32 + 4;
        let per_rep: Result<Vec<f64>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let cfg = Configuration::centered(d, p, seed_base.wrapping_add(rep as u64), r)?;
                let t = crate::ball::passage_time(&cfg, Vertex::ORIGIN, target)?;
                Ok(t as f64 / n as f64)
            })
            .collect();
        let acc = crate::stats::mean_var(&per_rep?);
        ladder.push(LadderPoint { n, mean: acc.mean(), stderr: acc.stderr(), reps });
    }
    let last = ladder.last().unwrap();
    Ok(DirectionEstimate {
        direction: unit,
        mu_hat: last.mean,
        stderr: last.stderr,
        ladder,
    })
}

/// Fundamental-domain directions for the lattice symmetry group.
/// `count` rungs interpolate the wedge; d = 2 uses angles in [0, 45 deg],
/// higher dimensions use the canonical corner representatives.
pub fn fundamental_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        2 => {
            let k = count.max(2);
            (0..k)
                .map(|i| {
                    let theta = std::f64::consts::FRAC_PI_4 * i as f64 / (k - 1) as f64;
                    vec![theta.cos(), theta.sin()]
                })
                .collect()
        }
        _ => {
            let mut reps: Vec<Vec<f64>> = Vec::new();
            for ones in 1..=d {
                let mut v = vec![0.0; d];
                for item in v.iter_mut().take(ones) {
                    *item = 1.0 / (ones as f64).sqrt();
                }
                reps.push(v);
            }
            if count > d && d == 3 {
                reps.push(vec![2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt(), 0.0]);
                reps.push(vec![2.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt()]);
            }
            reps
        }
    }
}

/// Orbit of a direction under coordinate permutations and sign flips.
pub fn symmetry_orbit(d: usize, direction: &[f64]) -> Vec<Vec<f64>> {
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    permutations(&mut idx, 0, &mut perms);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for perm in &perms {
        for mask in 0..(1u32 << d) {
            let mut v = vec![0.0; d];
            for (a, &src) in perm.iter().enumerate() {
                let sign = if mask >> a & 1 == 1 { -1.0 } else { 1.0 };
                v[a] = sign * direction[src];
            }
            let key: Vec<i64> = v.iter().map(|c| (c * 1e9).round() as i64).collect();
            if !out
                .iter()
                .any(|u| u.iter().map(|c| (c * 1e9).round() as i64).collect::<Vec<_>>() == key)
            {
                out.push(v);
            }
        }
    }
    out
}

fn permutations(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == idx.len() {
        out.push(idx.clone());
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permutations(idx, k + 1, out);
        idx.swap(k, i);
    }
}

/// Estimate the asymptotic shape over a fundamental direction set, then
/// expand by lattice symmetry so the polytope is symmetric by construction.
pub fn estimate_shape(
    d: usize,
    p: f64,
    fundamental_count: usize,
    n_max: u32,
    reps: u32,
    seed: u64,
) -> Result<ShapeEstimate> {
    let dirs = fundamental_directions(d, fundamental_count);
    let mut entries = Vec::new();
    let mut n_used = Vec::new();
    for (i, dir) in dirs.iter().enumerate() {
        let est = estimate_time_constant(d, p, dir, n_max, reps, seed.wrapping_add(i as u64 * 0x10_0000))?;
        if est.mu_hat <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "estimated time constant is not positive along {dir:?}; p supercritical?"
            )));
        }
        n_used = est.ladder.iter().map(|l| l.n).collect();
        for image in symmetry_orbit(d, dir) {
            entries.push(DirectionEstimate {
                direction: image,
                mu_hat: est.mu_hat,
                stderr: est.stderr,
                ladder: est.ladder.clone(),
            });
        }
    }
    let shape = ShapeEstimate { d, p, seed, n_used, entries, support: Vec::new() };
    Ok(shape.finalize())
}

/// The empirical mean ball: sample means of `T(0, v)` over independent
/// configurations, thresholded at `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeanBall {
    pub d: usize,
    pub t: u32,
    pub reps: u32,
    /// Vertices with sample-mean time <= t, sorted, with their means.
    pub trace: Vec<(Vertex, f64)>,
    /// Empirical connectivity of the thresholded set.
    pub connected: bool,
}

/// Grow `reps` balls to threshold `3t` and average pointwise. Vertices some
/// replicate failed to reach get that replicate's time counted as `3t + 1`,
/// a lower bound that can only push them further above the threshold.
pub fn empirical_mean_ball(
    d: usize,
    p: f64,
    t: u32,
    reps: u32,
    seed_base: u64,
    box_radius: i32,
) -> Result<MeanBall> {
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be >= 1".into()));
    }
    let grow_to = 3 * t;
    let bbox = Aabb::centered(d, box_radius);
    let worker_count = rayon::current_num_threads().max(1);
    let chunk = reps.div_ceil(worker_count as u32);
    let partials: Result<Vec<(VertexTable<u32>, VertexTable<u32>)>> = (0..reps)
        .collect::<Vec<u32>>()
        .par_chunks(chunk.max(1) as usize)
        .map(|reps_chunk| {
            let mut sums = VertexTable::new(bbox, 0u32);
            let mut counts = VertexTable::new(bbox, 0u32);
            for &rep in reps_chunk {
                let cfg =
                    Configuration::new(d, p, seed_base.wrapping_add(rep as u64), bbox)?;
                let ball = grow_ball(&cfg, grow_to)?;
                ball.for_each_vertex(|v, time| {
                    sums.set(&v, sums.get(&v) + time);
                    counts.set(&v, counts.get(&v) + 1);
                });
            }
            Ok((sums, counts))
        })
        .collect();

    let mut sums = VertexTable::new(bbox, 0u64);
    let mut counts = VertexTable::new(bbox, 0u32);
    for (s, c) in partials? {
        c.for_each_set(|v, n| counts.set(&v, counts.get(&v) + n));
        s.for_each_set(|v, x| sums.set(&v, sums.get(&v) + x as u64));
    }

    let mut trace: Vec<(Vertex, f64)> = Vec::new();
    counts.for_each_set(|v, n| {
        let missing = (reps - n) as u64;
        let sum_lb = sums.get(&v) + missing * (grow_to as u64 + 1);
        let mean = sum_lb as f64 / reps as f64;
        if mean <= t as f64 {
            trace.push((v, mean));
        }
    });
    trace.sort_by_key(|(v, _)| *v);

    // empirical connectivity check of the thresholded set
    let mut member = VertexTable::new(bbox, false);
    for (v, _) in &trace {
        member.set(v, true);
    }
    let connected = if member.get(&Vertex::ORIGIN) {
        let mut seen = VertexTable::new(bbox, false);
        let mut queue = std::collections::VecDeque::new();
        seen.set(&Vertex::ORIGIN, true);
        queue.push_back(Vertex::ORIGIN);
        let mut n = 1usize;
        while let Some(v) = queue.pop_front() {
            for (nb, _) in v.neighbors(d) {
                if member.get(&nb) && !seen.get(&nb) {
                    seen.set(&nb, true);
                    n += 1;
                    queue.push_back(nb);
                }
            }
        }
        n == trace.len()
    } else {
        false
    };

    Ok(MeanBall { d, t, reps, trace, connected })
}

impl MeanBall {
    /// The thresholded set as a region (its origin-component if the empirical
    /// set happens to be disconnected).
    pub fn to_region(&self) -> Result<crate::region::Region> {
        let vertices: Vec<Vertex> = self.trace.iter().map(|(v, _)| *v).collect();
        if self.connected {
            crate::region::Region::explicit(self.d, vertices)
        } else {
            // keep the component of the origin
            let set: rustc_hash::FxHashSet<Vertex> = vertices.iter().copied().collect();
            if !set.contains(&Vertex::ORIGIN) {
                return Err(Error::InvalidRegion("mean ball does not contain the origin".into()));
            }
            let mut keep = Vec::new();
            let mut seen = rustc_hash::FxHashSet::default();
            let mut queue = std::collections::VecDeque::new();
            seen.insert(Vertex::ORIGIN);
            queue.push_back(Vertex::ORIGIN);
            while let Some(v) = queue.pop_front() {
                keep.push(v);
                for (n, _) in v.neighbors(self.d) {
                    if set.contains(&n) && !seen.contains(&n) {
                        seen.insert(n);
                        queue.push_back(n);
                    }
                }
            }
            crate::region::Region::explicit(self.d, keep)
        }
    }
}

/// Estimate of the symmetry invariant: two directions in the same orbit must
/// agree within combined error. Used by tests; exposed for diagnostics.
pub fn symmetry_gap(a: &DirectionEstimate, b: &DirectionEstimate) -> f64 {
    (a.mu_hat - b.mu_hat).abs() / (a.stderr.hypot(b.stderr)).max(1e-12)
}
