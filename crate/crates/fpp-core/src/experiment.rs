//! Reproducible sweep harness: a JSON experiment spec drives ball growth,
//! geodesic statistics and fluctuation measurements over a ladder of
//! thresholds, with raw per-replicate CSV output and aggregate JSON.
//!
//! All randomness flows from `seed_base`: sweep replicate `i` uses
//! `seed_base + i`, mean-ball replicate `i` uses `seed_base + 2^40 + i`, so
//! the two ladders never collide at any realistic replicate count. Outputs
//! are byte-identical across reruns and worker counts.

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::fluct::DistanceField;
use crate::region::Region;
use crate::shape::{empirical_mean_ball, ShapeEstimate};
use crate::stats::mean_var;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SPEC_VERSION: u32 = 1;
const MEANBALL_SEED_OFFSET: u64 = 1 << 40;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c_override: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub t_values: Vec<u32>,
    pub reps: u32,
    pub seed_base: u64,
}

/// Region family the geodesic statistics run on; sizes scale with t.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    /// L1 ball of radius round(radius_factor * t).
    Diamond { radius_factor: f64 },
    /// Axis cube of halfwidth round(halfwidth_factor * t).
    Box { halfwidth_factor: f64 },
    /// Scaled estimated shape, lambda = lambda_factor * t.
    Shape { lambda_factor: f64 },
    /// The empirical mean ball at threshold t.
    MeanBall,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FluctSpec {
    /// Frozen shape estimate produced by a prior shape run.
    pub shape_path: PathBuf,
    /// Replicates for the per-t empirical mean ball.
    pub meanball_reps: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub spec_version: u32,
    pub model: ModelSpec,
    pub sweep: SweepSpec,
    pub target: TargetSpec,
    pub fluct: FluctSpec,
    pub output: OutputSpec,
}

impl ExperimentSpec {
    pub fn from_file(path: &Path) -> Result<ExperimentSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", path.display())))?;
        let spec: ExperimentSpec =
            serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::InvalidSpec(format!(
                "spec_version {} unsupported (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        if self.sweep.t_values.is_empty() {
            return Err(Error::InvalidSpec("t_values must be nonempty".into()));
        }
        if !self.sweep.t_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpec("t_values must be strictly increasing".into()));
        }
        if self.sweep.reps == 0 {
            return Err(Error::InvalidSpec("reps must be >= 1".into()));
        }
        if self.fluct.meanball_reps == 0 {
            return Err(Error::InvalidSpec("meanball_reps must be >= 1".into()));
        }
        let factor = match self.target {
            TargetSpec::Diamond { radius_factor } => radius_factor,
            TargetSpec::Box { halfwidth_factor } => halfwidth_factor,
            TargetSpec::Shape { lambda_factor } => lambda_factor,
            TargetSpec::MeanBall => 1.0,
        };
        if !(factor > 0.0) {
            return Err(Error::InvalidSpec("target size factor must be positive".into()));
        }
        // shape/fluctuation claims need the subcritical regime
        let probe = Configuration::new(
            self.model.d,
            self.model.p,
            0,
            crate::lattice::Aabb::centered(self.model.d, 1),
        )
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        probe
            .require_subcritical(self.model.p_c_override)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Ok(())
    }

    fn load_shape(&self) -> Result<ShapeEstimate> {
        let text = std::fs::read_to_string(&self.fluct.shape_path).map_err(|e| {
            Error::InvalidSpec(format!(
                "cannot read shape file {}: {e}",
                self.fluct.shape_path.display()
            ))
        })?;
        let shape: ShapeEstimate =
            serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        if shape.d != self.model.d {
            return Err(Error::InvalidSpec(format!(
                "shape dimension {} does not match model dimension {}",
                shape.d, self.model.d
            )));
        }
        if (shape.p - self.model.p).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "shape was estimated at p = {}, sweep runs at p = {}",
                shape.p, self.model.p
            )));
        }
        Ok(shape)
    }
}

/// Raw per-replicate route statistics.
#[derive(Clone, Debug, Serialize)]
pub struct RouteRow {
    pub t: u32,
    pub seed: u64,
    pub total: u32,
    pub route_size: usize,
    pub pivotal_count: usize,
    pub n_min: u32,
    pub n_max: u32,
    pub n_max_exact: bool,
}

/// Raw per-replicate fluctuation measurements; l_in/l_out refer to the
/// frozen-shape comparison.
#[derive(Clone, Debug, Serialize)]
pub struct FluctRow {
    pub t: u32,
    pub seed: u64,
    pub f_vs_shape: f64,
    pub f_vs_meanball: f64,
    pub l_in: f64,
    pub l_out: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesAgg {
    pub t: u32,
    pub mean: f64,
    pub stderr: f64,
    pub n: u32,
    pub raw: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Aggregates {
    pub spec: ExperimentSpec,
    /// Per-series aggregate rows, keyed by series name; raw per-replicate
    /// values ride along so alternative estimators can be recomputed.
    pub series: BTreeMap<String, Vec<SeriesAgg>>,
}

pub struct SweepOutput {
    pub dir: PathBuf,
    pub routes_csv: PathBuf,
    pub fluct_csv: PathBuf,
    pub aggregates_json: PathBuf,
    pub aggregates: Aggregates,
}

fn annotate(e: Error, t: u32, seed: u64) -> Error {
    match e {
        Error::BoxExhausted { at, detail } => Error::BoxExhausted {
            at,
            detail: format!("t = {t}, seed = {seed}: {detail}"),
        },
        other => other,
    }
}

fn build_region(
    spec: &ExperimentSpec,
    shape: &ShapeEstimate,
    t: u32,
    mb_region: &Option<Region>,
) -> Result<Region> {
    match spec.target {
        TargetSpec::Diamond { radius_factor } => {
            Region::diamond(spec.model.d, (radius_factor * t as f64).round() as i32)
        }
        TargetSpec::Box { halfwidth_factor } => {
            Region::axis_box(spec.model.d, (halfwidth_factor * t as f64).round() as i32)
        }
        TargetSpec::Shape { lambda_factor } => {
            Region::scaled_shape(shape, lambda_factor * t as f64)
        }
        TargetSpec::MeanBall => mb_region
            .as_ref()
            .map(|r| {
                Region::explicit(spec.model.d, r.trace().to_vec())
            })
            .transpose()?
            .ok_or_else(|| Error::InvalidSpec("mean-ball target needs meanball_reps".into())),
    }
}

/// Run the sweep described by `spec`. Fully deterministic given the spec.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let shape = spec.load_shape()?;
    let d = spec.model.d;
    let p = spec.model.p;
    let rmax = shape.max_radius();

    let mut route_rows: Vec<RouteRow> = Vec::new();
    let mut fluct_rows: Vec<FluctRow> = Vec::new();

    for &t in &spec.sweep.t_values {
        let ball_radius = (t as f64 * rmax * 1.3).ceil() as i32 + 8;
        let mb_radius = (3.0 * t as f64 * rmax * 1.25).ceil() as i32 + 8;

        let mb = empirical_mean_ball(
            d,
            p,
            t,
            spec.fluct.meanball_reps,
            spec.sweep.seed_base.wrapping_add(MEANBALL_SEED_OFFSET),
            mb_radius,
        )?;
        let mb_region = Some(mb.to_region()?);

        let region = build_region(spec, &shape, t, &mb_region)?;
        let shape_region = Region::scaled_shape(&shape, t as f64)?;
        let ball_bbox = crate::lattice::Aabb::centered(d, ball_radius);
        let field_shape = DistanceField::to_region_boundary(&shape_region, ball_bbox);
        let field_mb =
            DistanceField::to_region_boundary(mb_region.as_ref().unwrap(), ball_bbox);

        let per_rep: Result<Vec<(RouteRow, FluctRow)>> = (0..spec.sweep.reps)
            .into_par_iter()
            .map(|rep| {
                let seed = spec.sweep.seed_base.wrapping_add(rep as u64);
                let cfg = Configuration::new(d, p, seed, ball_bbox)
                    .map_err(|e| annotate(e, t, seed))?;
                let ball =
                    crate::ball::grow_ball(&cfg, t).map_err(|e| annotate(e, t, seed))?;
                let gf = crate::geodesic::geodesic_field(&cfg, &region)
                    .map_err(|e| annotate(e, t, seed))?;
                let fl_shape =
                    crate::fluct::fluctuation_with_field(&ball, &shape_region, &field_shape);
                let fl_mb = crate::fluct::fluctuation_with_field(
                    &ball,
                    mb_region.as_ref().unwrap(),
                    &field_mb,
                );
                Ok((
                    RouteRow {
                        t,
                        seed,
                        total: gf.total,
                        route_size: gf.route_vertices.len(),
                        pivotal_count: gf.pivotal_count,
                        n_min: gf.n_min,
                        n_max: gf.n_max,
                        n_max_exact: gf.n_max_exact,
                    },
                    FluctRow {
                        t,
                        seed,
                        f_vs_shape: fl_shape.f,
                        f_vs_meanball: fl_mb.f,
                        l_in: fl_shape.l_in,
                        l_out: fl_shape.l_out,
                    },
                ))
            })
            .collect();
        for (r, f) in per_rep? {
            route_rows.push(r);
            fluct_rows.push(f);
        }
    }

    route_rows.sort_by_key(|r| (r.t, r.seed));
    fluct_rows.sort_by_key(|r| (r.t, r.seed));

    // aggregates
    let mut series: BTreeMap<String, Vec<SeriesAgg>> = BTreeMap::new();
    {
        let mut push = |name: &str, t: u32, raw: Vec<f64>| {
            let acc = mean_var(&raw);
            series.entry(name.to_string()).or_default().push(SeriesAgg {
                t,
                mean: acc.mean(),
                stderr: acc.stderr(),
                n: raw.len() as u32,
                raw,
            });
        };
        for &t in &spec.sweep.t_values {
            let rr: Vec<&RouteRow> = route_rows.iter().filter(|r| r.t == t).collect();
            let fr: Vec<&FluctRow> = fluct_rows.iter().filter(|r| r.t == t).collect();
            push("total", t, rr.iter().map(|r| r.total as f64).collect());
            push("route_size", t, rr.iter().map(|r| r.route_size as f64).collect());
            push("pivotal_count", t, rr.iter().map(|r| r.pivotal_count as f64).collect());
            push("n_min", t, rr.iter().map(|r| r.n_min as f64).collect());
            push("n_max", t, rr.iter().map(|r| r.n_max as f64).collect());
            push("f_vs_shape", t, fr.iter().map(|r| r.f_vs_shape).collect());
            push("f_vs_meanball", t, fr.iter().map(|r| r.f_vs_meanball).collect());
            push("l_in", t, fr.iter().map(|r| r.l_in).collect());
            push("l_out", t, fr.iter().map(|r| r.l_out).collect());
        }
    }

    // raw CSVs
    let dir = spec.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    let routes_csv = dir.join("raw_routes.csv");
    let fluct_csv = dir.join("raw_fluct.csv");
    {
        let mut s = String::from("t,seed,total,route_size,pivotal_count,n_min,n_max,n_max_exact\n");
        for r in &route_rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.t,
                r.seed,
                r.total,
                r.route_size,
                r.pivotal_count,
                r.n_min,
                r.n_max,
                r.n_max_exact as u8
            );
        }
        std::fs::write(&routes_csv, s)?;
    }
    {
        let mut s = String::from("t,seed,f_vs_shape,f_vs_meanball,l_in,l_out\n");
        for r in &fluct_rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.t, r.seed, r.f_vs_shape, r.f_vs_meanball, r.l_in, r.l_out
            );
        }
        std::fs::write(&fluct_csv, s)?;
    }

    let aggregates = Aggregates { spec: spec.clone(), series };
    let aggregates_json = dir.join("aggregates.json");
    crate::export::write_json(&aggregates_json, &aggregates)?;

    Ok(SweepOutput { dir, routes_csv, fluct_csv, aggregates_json, aggregates })
}

impl Aggregates {
    pub fn from_file(path: &Path) -> Result<Aggregates> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text).map_err(Error::Json)?)
    }

    pub fn series_points(&self, name: &str) -> Result<Vec<crate::fit::SeriesPoint>> {
        let rows = self
            .series
            .get(name)
            .ok_or_else(|| Error::InvalidSpec(format!("no series named {name:?}")))?;
        Ok(rows
            .iter()
            .map(|r| crate::fit::SeriesPoint { t: r.t as f64, mean: r.mean, stderr: r.stderr })
            .collect())
    }
}
