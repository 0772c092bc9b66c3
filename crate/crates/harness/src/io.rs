//! CSV formats: grid fields, level-set polygons, check tables and plot
//! tables.
//!
//! A grid field file starts with four header records
//!
//! ```text
//! lcgeom-grid,1
//! origin,<x_1>,…,<x_n>
//! spacing,<h_1>,…,<h_n>
//! counts,<N_1>,…,<N_n>
//! ```
//!
//! followed by the values in row-major order: one record per lattice row in
//! 2D (N_2 values each), one value per record in 1D.

use std::io::Write;
use std::path::Path;

use lcgeom::convex::Lattice;
use lcgeom::tv::{level_set_grid, GridField};

use crate::report::Report;

pub const GRID_MAGIC: &str = "lcgeom-grid";

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_grid_field<W: Write>(field: &GridField, out: W) -> Result<(), String> {
    let lat = field.lattice();
    let mut w = csv::WriterBuilder::new().flexible(true).has_headers(false).from_writer(out);
    let e = |e: csv::Error| e.to_string();
    w.write_record([GRID_MAGIC, "1"]).map_err(e)?;
    for (key, vals) in [
        ("origin", lat.origin.iter().map(|v| fmt(*v)).collect::<Vec<_>>()),
        ("spacing", lat.spacing.iter().map(|v| fmt(*v)).collect()),
        ("counts", lat.counts.iter().map(|v| v.to_string()).collect()),
    ] {
        let mut rec = vec![key.to_string()];
        rec.extend(vals);
        w.write_record(&rec).map_err(e)?;
    }
    let row = if field.dim() == 1 { 1 } else { lat.counts[1] };
    for chunk in field.values().chunks(row) {
        w.write_record(chunk.iter().map(|v| fmt(*v))).map_err(e)?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn read_grid_field(path: &Path) -> Result<GridField, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_grid_field(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_grid_field(text: &str) -> Result<GridField, String> {
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(text.as_bytes());
    let mut records = r.records();
    let mut header = |key: &str| -> Result<Vec<String>, String> {
        let rec = records.next().ok_or(format!("missing {key} record"))?.map_err(|e| e.to_string())?;
        if rec.get(0) != Some(key) {
            return Err(format!("expected a {key} record, found {:?}", rec.get(0)));
        }
        Ok(rec.iter().skip(1).map(|s| s.trim().to_string()).collect())
    };
    let magic = header(GRID_MAGIC)?;
    if magic.first().map(String::as_str) != Some("1") {
        return Err(format!("unsupported grid format version {magic:?}"));
    }
    let floats = |v: Vec<String>| -> Result<Vec<f64>, String> {
        v.iter().map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))).collect()
    };
    let origin = floats(header("origin")?)?;
    let spacing = floats(header("spacing")?)?;
    let counts = header("counts")?
        .iter()
        .map(|s| s.parse::<usize>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut values = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| e.to_string())?;
        for s in rec.iter() {
            values.push(s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?);
        }
    }
    let lattice = Lattice::new(origin, spacing, counts).map_err(|e| e.to_string())?;
    GridField::new(lattice, values).map_err(|e| e.to_string())
}

/// Vertices of the interpolated level sets {field ≥ s}: records
/// (s, vertex index, x_1, …, x_n).
pub fn write_level_sets<W: Write>(field: &GridField, levels: &[f64], out: W) -> Result<(), String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut head = vec!["s".to_string(), "vertex".to_string()];
    head.extend((1..=field.dim()).map(|k| format!("x{k}")));
    w.write_record(&head).map_err(|e| e.to_string())?;
    for &s in levels {
        let body = level_set_grid(field, s).map_err(|e| e.to_string())?;
        let verts = match body.as_polytope() {
            Some(p) => p.vertices().to_vec(),
            None => {
                let (lo, hi) = body.bounding_box();
                vec![lo, hi]
            }
        };
        for (i, v) in verts.iter().enumerate() {
            let mut rec = vec![fmt(s), i.to_string()];
            rec.extend(v.iter().map(|x| fmt(*x)));
            w.write_record(&rec).map_err(|e| e.to_string())?;
        }
    }
    w.flush().map_err(|e| e.to_string())
}

/// One row per check.
pub fn write_check_table<W: Write>(reports: &[Report], out: W) -> Result<(), String> {
    let mut w = csv::Writer::from_writer(out);
    let e = |e: csv::Error| e.to_string();
    w.write_record(["scenario", "check", "lhs", "rhs", "residual", "tolerance", "pass", "error"]).map_err(e)?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.scenario.id.clone(),
                c.name.clone(),
                opt(c.lhs),
                opt(c.rhs),
                opt(c.residual),
                fmt(c.tolerance),
                c.pass.to_string(),
                c.error.clone().unwrap_or_default(),
            ])
            .map_err(e)?;
        }
    }
    w.flush().map_err(|e| e.to_string())
}

/// Long-format curve table (scenario, check, series, x, y): quotient curves
/// (t_k, q_k), coarea curves (s, Per_L(F_s)) and truncation sequences.
pub fn write_plot_table<W: Write>(reports: &[Report], out: W) -> Result<(), String> {
    let mut w = csv::Writer::from_writer(out);
    let e = |e: csv::Error| e.to_string();
    w.write_record(["scenario", "check", "series", "x", "y"]).map_err(e)?;
    for r in reports {
        for c in &r.checks {
            for curve in &c.curves {
                for (x, y) in curve.x.iter().zip(&curve.y) {
                    w.write_record([r.scenario.id.clone(), c.name.clone(), curve.series.clone(), fmt(*x), fmt(*y)])
                        .map_err(e)?;
                }
            }
        }
    }
    w.flush().map_err(|e| e.to_string())
}

/// Reports as a JSON array.
pub fn write_json<W: Write>(reports: &[Report], mut out: W) -> Result<(), String> {
    let text = serde_json::to_string_pretty(reports).map_err(|e| e.to_string())?;
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    out.write_all(b"\n").map_err(|e| e.to_string())
}
