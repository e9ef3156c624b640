//! Plot-data export: CSV files written atomically (temp file + rename).
//!
//! Column layouts:
//! - orbits: `t,x,y`
//! - contours and cycles: `id,vertex,x,y`
//! - cells (zero, suspect, dependency): `ix,iy,x,y` (cell center)

use crate::cycles::Cycle;
use crate::flow::Trajectory;
use crate::geom::Curve;
use crate::zeros::GridInfo;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp_path, contents)?;
    std::fs::rename(&tmp_path, path)
}

pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> io::Result<()> {
    let mut out = String::from("t,x,y\n");
    for &(t, p) in &trajectory.samples {
        let _ = writeln!(out, "{},{},{}", t, p.x, p.y);
    }
    write_atomic(path, &out)
}

pub fn write_contours_csv(path: &Path, contours: &[Curve]) -> io::Result<()> {
    let mut out = String::from("id,vertex,x,y\n");
    for (id, c) in contours.iter().enumerate() {
        for (i, p) in c.vertices.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", id, i, p.x, p.y);
        }
    }
    write_atomic(path, &out)
}

pub fn write_cycles_csv(path: &Path, cycles: &[Cycle]) -> io::Result<()> {
    let mut out = String::from("id,vertex,x,y\n");
    for (id, c) in cycles.iter().enumerate() {
        for (i, p) in c.points.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", id, i, p.x, p.y);
        }
    }
    write_atomic(path, &out)
}

pub fn write_cells_csv(path: &Path, grid: &GridInfo, cells: &[(i64, i64)]) -> io::Result<()> {
    let mut out = String::from("ix,iy,x,y\n");
    for &(ix, iy) in cells {
        let c = grid.cell_center(ix, iy);
        let _ = writeln!(out, "{},{},{},{}", ix, iy, c.x, c.y);
    }
    write_atomic(path, &out)
}

/// Extracts plot-ready CSV files from a report's check payloads into the
/// output directory. Returns the files written.
pub fn export_report_sections(
    report: &crate::scenario::Report,
    out_dir: &Path,
) -> io::Result<Vec<std::path::PathBuf>> {
    use serde_json::Value;
    let mut written = Vec::new();
    let mut emit = |name: String, contents: String| -> io::Result<()> {
        let path = out_dir.join(name);
        write_atomic(&path, &contents)?;
        written.push(path);
        Ok(())
    };

    for check in &report.checks {
        let prefix = check.kind.name();
        match check.kind {
            crate::scenario::CheckKind::Blocks | crate::scenario::CheckKind::Indices => {
                if let Some(blocks) = check.payload["blocks"].as_array() {
                    let mut contours = String::from("id,vertex,x,y\n");
                    let mut cells = String::from("ix,iy,x,y\n");
                    let mut contour_id = 0usize;
                    for block in blocks {
                        if let Some(cs) = block["contours"].as_array() {
                            for c in cs {
                                if let Some(pts) = c["points"].as_array() {
                                    for (i, p) in pts.iter().enumerate() {
                                        let _ = writeln!(
                                            contours,
                                            "{},{},{},{}",
                                            contour_id,
                                            i,
                                            p[0].as_f64().unwrap_or(f64::NAN),
                                            p[1].as_f64().unwrap_or(f64::NAN)
                                        );
                                    }
                                    contour_id += 1;
                                }
                            }
                        }
                        if let Some(cellrows) = block["cells"].as_array() {
                            for row in cellrows {
                                if let Some(r) = row.as_array() {
                                    let _ = writeln!(
                                        cells,
                                        "{},{},{},{}",
                                        r[0],
                                        r[1],
                                        r[2].as_f64().unwrap_or(f64::NAN),
                                        r[3].as_f64().unwrap_or(f64::NAN)
                                    );
                                }
                            }
                        }
                    }
                    emit(format!("{prefix}_contours.csv"), contours)?;
                    emit(format!("{prefix}_cells.csv"), cells)?;
                }
            }
            crate::scenario::CheckKind::Dependency => {
                if let Some(cellrows) = check.payload["cells"].as_array() {
                    let mut cells = String::from("ix,iy,x,y\n");
                    for row in cellrows {
                        if let Some(r) = row.as_array() {
                            let _ = writeln!(
                                cells,
                                "{},{},{},{}",
                                r[0],
                                r[1],
                                r[2].as_f64().unwrap_or(f64::NAN),
                                r[3].as_f64().unwrap_or(f64::NAN)
                            );
                        }
                    }
                    emit(format!("{prefix}_cells.csv"), cells)?;
                }
            }
            crate::scenario::CheckKind::Cycles | crate::scenario::CheckKind::Theorem15b => {
                let cycles = &check.payload["cycles"];
                let list = match cycles {
                    Value::Array(a) => Some(a),
                    Value::Object(_) => cycles["cycles"].as_array(),
                    _ => None,
                };
                if let Some(list) = list {
                    let mut out = String::from("id,vertex,x,y\n");
                    for (id, c) in list.iter().enumerate() {
                        if let Some(pts) = c["points"].as_array() {
                            for (i, p) in pts.iter().enumerate() {
                                let _ = writeln!(
                                    out,
                                    "{},{},{},{}",
                                    id,
                                    i,
                                    p[0].as_f64().unwrap_or(f64::NAN),
                                    p[1].as_f64().unwrap_or(f64::NAN)
                                );
                            }
                        }
                    }
                    emit(format!("{prefix}_cycles.csv"), out)?;
                }
            }
            _ => {}
        }
    }
    Ok(written)
}
