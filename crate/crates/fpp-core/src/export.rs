//! File emission: CSV (optionally gzipped) for raw per-vertex and per-edge
//! data, JSON for summaries. Every result file embeds the configuration that
//! produced it.

use crate::ball::Ball;
use crate::config::Configuration;
use crate::error::Result;
use crate::geodesic::GeodesicField;
use crate::shape::MeanBall;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

fn coord_header(prefix: &str, d: usize) -> String {
    (0..d).map(|a| format!("{prefix}{a}")).collect::<Vec<_>>().join(",")
}

fn write_bytes(path: &Path, bytes: &[u8], gzip: bool) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let file = File::create(path)?;
    if gzip {
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::default());
        enc.write_all(bytes)?;
        enc.finish()?.flush()?;
    } else {
        let mut w = BufWriter::new(file);
        w.write_all(bytes)?;
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BallSidecar<'a> {
    t: u32,
    config: &'a Configuration,
    n_vertices: usize,
    n_inner_boundary: usize,
    n_outer_boundary: usize,
}

/// Ball export: gzipped CSV of (vertex, time) rows plus a JSON sidecar with
/// the configuration and set sizes. The sidecar lands next to the CSV with
/// the data extensions replaced by `.json`.
pub fn write_ball(path: &Path, ball: &Ball, cfg: &Configuration) -> Result<()> {
    let d = ball.d;
    let mut csv = String::new();
    let _ = writeln!(csv, "{},time", coord_header("c", d));
    for (v, time) in ball.vertices_sorted() {
        for a in 0..d {
            let _ = write!(csv, "{},", v.0[a]);
        }
        let _ = writeln!(csv, "{time}");
    }
    let gzip = path.extension().map(|e| e == "gz").unwrap_or(false);
    write_bytes(path, csv.as_bytes(), gzip)?;

    let sidecar = BallSidecar {
        t: ball.t,
        config: cfg,
        n_vertices: ball.n_vertices,
        n_inner_boundary: ball.inner_boundary.len(),
        n_outer_boundary: ball.outer_boundary.len(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

pub fn sidecar_path(data_path: &Path) -> std::path::PathBuf {
    let name = data_path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let stem = name.trim_end_matches(".gz").trim_end_matches(".csv");
    data_path.with_file_name(format!("{stem}.json"))
}

#[derive(Serialize)]
pub struct RouteSummary<'a> {
    pub config: &'a Configuration,
    pub region: String,
    pub total: u32,
    pub pivotal_count: usize,
    pub n_min: u32,
    pub n_max: u32,
    pub n_max_exact: bool,
    pub route_size: usize,
    /// bad-cube diagnostic counts keyed by cube side
    pub d_by_k: BTreeMap<i32, usize>,
}

/// Route export: one CSV row per route edge plus a JSON summary.
pub fn write_routes(
    path: &Path,
    field: &GeodesicField,
    d: usize,
    summary: &RouteSummary,
) -> Result<()> {
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "{},{},weight,on_min_route",
        coord_header("u", d),
        coord_header("v", d)
    );
    for re in &field.route_edges {
        let (u, v) = re.edge.endpoints();
        for a in 0..d {
            let _ = write!(csv, "{},", u.0[a]);
        }
        for a in 0..d {
            let _ = write!(csv, "{},", v.0[a]);
        }
        let _ = writeln!(csv, "{},{}", re.weight, re.on_min_route as u8);
    }
    let gzip = path.extension().map(|e| e == "gz").unwrap_or(false);
    write_bytes(path, csv.as_bytes(), gzip)?;
    write_json(&sidecar_path(path), summary)
}

/// Mean-ball export: CSV of (vertex, mean time) over the thresholded set.
pub fn write_mean_ball(path: &Path, mb: &MeanBall, cfg: &Configuration) -> Result<()> {
    let mut csv = String::new();
    let _ = writeln!(csv, "{},mean_time", coord_header("c", mb.d));
    for (v, mean) in &mb.trace {
        for a in 0..mb.d {
            let _ = write!(csv, "{},", v.0[a]);
        }
        let _ = writeln!(csv, "{mean}");
    }
    let gzip = path.extension().map(|e| e == "gz").unwrap_or(false);
    write_bytes(path, csv.as_bytes(), gzip)?;

    #[derive(Serialize)]
    struct MeanBallSidecar<'a> {
        t: u32,
        reps: u32,
        config: &'a Configuration,
        n_vertices: usize,
        connected: bool,
    }
    write_json(
        &sidecar_path(path),
        &MeanBallSidecar {
            t: mb.t,
            reps: mb.reps,
            config: cfg,
            n_vertices: mb.trace.len(),
            connected: mb.connected,
        },
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::grow_ball;

    #[test]
    fn ball_roundtrip_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = Configuration::centered(2, 0.25, 77, 64).unwrap();
        let ball = grow_ball(&cfg, 8).unwrap();
        let path = dir.path().join("ball.csv.gz");
        write_ball(&path, &ball, &cfg).unwrap();
        assert!(path.exists());
        let sidecar = sidecar_path(&path);
        assert_eq!(sidecar.file_name().unwrap(), "ball.json");
        let meta: serde_json::Value =
            serde_json::from_reader(File::open(sidecar).unwrap()).unwrap();
        assert_eq!(meta["n_vertices"].as_u64().unwrap() as usize, ball.n_vertices);
        assert_eq!(meta["config"]["p"].as_f64().unwrap(), 0.25);
        // gzipped payload decodes back to the CSV
        let mut decoded = String::new();
        let mut r = flate2::read::GzDecoder::new(File::open(&path).unwrap());
        std::io::Read::read_to_string(&mut r, &mut decoded).unwrap();
        assert!(decoded.starts_with("c0,c1,time\n"));
        assert_eq!(decoded.lines().count(), ball.n_vertices + 1);
    }
}
