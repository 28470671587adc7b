//! Derivative identity between the restricted passage time and the pivotal
//! count, checked by coupled finite differences.
//!
//! The finite difference uses common random numbers: both probabilities
//! threshold the same per-edge uniforms, so lowering the zero-density from
//! `p` to `p - h` can only turn zero edges into unit edges. Every replicate
//! difference is then nonnegative by construction and the variance of the
//! estimator collapses by orders of magnitude compared to independent runs.
//! The difference is one-sided at `p - h`, which is exactly the coupling the
//! monotone construction supports.

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::geodesic::{pivotal_count, restricted_passage_time};
use crate::region::Region;
use crate::stats::mean_var;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Passage-time difference under shared uniforms: `T` at `p - h` minus `T`
/// at `p`. Nonnegative for every configuration.
pub fn coupled_delta(cfg: &Configuration, region: &Region, h: f64) -> Result<u32> {
    if !(h > 0.0 && h < cfg.p) {
        return Err(Error::InvalidConfig(format!(
            "step h must satisfy 0 < h < p, got h = {h}, p = {}",
            cfg.p
        )));
    }
    let at_p = restricted_passage_time(cfg, region)?;
    let at_p_minus_h = restricted_passage_time(&cfg.coupled(cfg.p - h), region)?;
    debug_assert!(at_p_minus_h >= at_p, "monotone coupling violated");
    Ok(at_p_minus_h - at_p)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub p: f64,
    pub h: f64,
    pub reps: u32,
    pub mean_delta: f64,
    pub stderr_delta: f64,
    pub mean_pivotal: f64,
    pub stderr_pivotal: f64,
    /// mean_delta / h - mean_pivotal
    pub gap: f64,
    /// Standard error of the per-replicate difference delta/h - K; the
    /// coupling-correct denominator for the z gate.
    pub stderr_gap: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Aggregate the coupled difference and the pivotal count over independent
/// seeds, and gate the derivative identity at |z| < 3.
pub fn derivative_report(
    cfg_template: &Configuration,
    region: &Region,
    h: f64,
    reps: u32,
) -> Result<DerivativeReport> {
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be >= 1".into()));
    }
    let rows: Result<Vec<(u32, usize)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let cfg = Configuration {
                seed: cfg_template.seed.wrapping_add(rep as u64),
                ..cfg_template.clone()
            };
            let delta = coupled_delta(&cfg, region, h)?;
            let k = pivotal_count(&cfg, region)?;
            Ok((delta, k))
        })
        .collect();
    let rows = rows?;

    let deltas: Vec<f64> = rows.iter().map(|(d, _)| *d as f64).collect();
    let ks: Vec<f64> = rows.iter().map(|(_, k)| *k as f64).collect();
    let diffs: Vec<f64> = rows.iter().map(|(d, k)| *d as f64 / h - *k as f64).collect();
    let acc_d = mean_var(&deltas);
    let acc_k = mean_var(&ks);
    let acc_g = mean_var(&diffs);
    let gap = acc_g.mean();
    let stderr_gap = acc_g.stderr();
    let z = if stderr_gap > 0.0 { gap / stderr_gap } else { f64::NAN };
    Ok(DerivativeReport {
        p: cfg_template.p,
        h,
        reps,
        mean_delta: acc_d.mean(),
        stderr_delta: acc_d.stderr(),
        mean_pivotal: acc_k.mean(),
        stderr_pivotal: acc_k.stderr(),
        gap,
        stderr_gap,
        z_score: z,
        pass: reps >= 2 && z.is_finite() && z.abs() < 3.0,
    })
}

/// Per-replicate upper bound on the coupled difference: the number of route
/// edges (at `p`) whose uniform falls in the flip window `[p - h, p)`.
pub fn flip_window_bound(cfg: &Configuration, region: &Region, h: f64) -> Result<usize> {
    use crate::config::UniformField;
    let field = crate::geodesic::geodesic_field(cfg, region)?;
    Ok(field
        .route_edges
        .iter()
        .filter(|re| {
            let u = cfg.uniform(&re.edge);
            u >= cfg.p - h && u < cfg.p
        })
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Thresholded, UniformOverrides};
    use crate::lattice::{Edge, Vertex};

    fn diamond_cfg(p: f64, seed: u64, r: i32) -> (Configuration, Region) {
        let cfg = Configuration::centered(2, p, seed, r + 1).unwrap();
        (cfg, Region::diamond(2, r).unwrap())
    }

    #[test]
    fn delta_is_nonnegative_and_vanishes_for_tiny_h() {
        let (cfg, region) = diamond_cfg(0.3, 42, 24);
        for h in [0.05, 0.02] {
            assert!(coupled_delta(&cfg, &region, h).is_ok());
        }
        // below the smallest uniform gap on route edges nothing can flip
        assert_eq!(coupled_delta(&cfg, &region, 1e-12).unwrap(), 0);
    }

    #[test]
    fn per_replicate_delta_bounded_by_flip_window_count() {
        for seed in 0..60u64 {
            let (cfg, region) = diamond_cfg(0.3, seed, 20);
            let h = 0.05;
            let delta = coupled_delta(&cfg, &region, h).unwrap();
            let bound = flip_window_bound(&cfg, &region, h).unwrap();
            assert!(
                delta as usize <= bound,
                "seed {seed}: delta {delta} > window bound {bound}"
            );
        }
    }

    /// Planted fixture: a strictly best route with exactly one of its unit
    /// edges... flipped: one route edge's uniform sits inside [p - h, p), so
    /// the coupled difference is exactly one.
    #[test]
    fn planted_uniform_gives_delta_one() {
        let p = 0.5;
        let h = 0.1;
        let cfg = Configuration::centered(2, p, 7, 6).unwrap();
        let region = Region::diamond(2, 4).unwrap();
        let mut overrides = rustc_hash::FxHashMap::default();
        // a unique zero corridor along +x, except one edge in the flip window
        for x in 0..4 {
            let e = Edge { base: Vertex::new2(x, 0), axis: 0 };
            overrides.insert(e, if x == 2 { p - h / 2.0 } else { 0.01 });
        }
        // make everything else expensive
        let r = Region::diamond(2, 4).unwrap();
        for u in r.trace() {
            for axis in 0..2u8 {
                let e = Edge { base: *u, axis };
                overrides.entry(e).or_insert(0.99);
            }
        }
        let planted = UniformOverrides { base: &cfg, overrides };
        let t_at_p = crate::geodesic::restricted_passage_time(
            &Thresholded { uniforms: &planted, p },
            &region,
        )
        .unwrap();
        let t_at_ph = crate::geodesic::restricted_passage_time(
            &Thresholded { uniforms: &planted, p: p - h },
            &region,
        )
        .unwrap();
        assert_eq!(t_at_p, 0);
        assert_eq!(t_at_ph - t_at_p, 1);
    }

    #[test]
    fn degenerate_all_zero_config_reports_zero_everything() {
        let (cfg, region) = diamond_cfg(1.0, 3, 12);
        // h small keeps p - h deep in the percolating regime, so the coupled
        // passage time stays zero as well
        let report = derivative_report(&cfg, &region, 0.05, 8).unwrap();
        assert_eq!(report.mean_delta, 0.0);
        assert_eq!(report.mean_pivotal, 0.0);
        // gap is exactly zero with zero spread; the z gate is NaN-safe
        assert!(!report.pass);
        assert_eq!(report.gap, 0.0);
    }

    #[test]
    fn single_replicate_report_is_flagged() {
        let (cfg, region) = diamond_cfg(0.3, 5, 16);
        let report = derivative_report(&cfg, &region, 0.05, 1).unwrap();
        assert!(report.stderr_delta.is_nan());
        assert!(!report.pass);
    }

    /// Identity check at unit-test scale; the acceptance suite runs the full
    /// 2000-replicate version.
    #[test]
    fn derivative_matches_pivotal_count_at_small_scale() {
        let (cfg, region) = diamond_cfg(0.3, 11, 30);
        let report = derivative_report(&cfg, &region, 0.02, 400).unwrap();
        assert!(
            report.pass,
            "z = {}, delta/h = {}, K = {}",
            report.z_score,
            report.mean_delta / report.h,
            report.mean_pivotal
        );
    }

    /// Richardson-style sweep: the first-order bias shrinks with h.
    #[test]
    fn h_sweep_converges_toward_the_pivotal_mean() {
        let (cfg, region) = diamond_cfg(0.3, 23, 24);
        let mut gaps = Vec::new();
        for h in [0.08, 0.04, 0.02] {
            let report = derivative_report(&cfg, &region, h, 600).unwrap();
            gaps.push(report.gap.abs());
        }
        // within error bands the gap cannot grow as h shrinks; allow slack
        // of one combined stderr per step
        let report = derivative_report(&cfg, &region, 0.02, 600).unwrap();
        let slack = 3.0 * report.stderr_gap.max(0.05);
        assert!(
            gaps[2] <= gaps[0] + slack,
            "gaps did not shrink: {gaps:?} (slack {slack})"
        );
    }
}
