//! Browser bindings for the interactive demo page.
//!
//! Three operations, all returning JSON strings so the page needs no
//! generated TypeScript glue:
//!
//! - [`analyze`]: zero scan + block decomposition with indices, plus a
//!   coarse arrow field and the surface boundary, ready to draw;
//! - [`orbit`]: a single trajectory from a clicked point;
//! - [`circle_index`]: the winding number of the field on a probe circle,
//!   with the direction sweep along it.
//!
//! Errors come back as `{"error": "..."}` objects instead of exceptions.

use fieldindex_core::flow::{flow, FlowConfig};
use fieldindex_core::index::{field_winding, IndexConfig};
use fieldindex_core::scenario::{BuiltField, FieldSpec};
use fieldindex_core::{decompose_blocks, find_zeros, Curve, Surface, SurfaceSpec, Vec2};
use wasm_bindgen::prelude::*;

fn build_field(src: &str) -> Result<BuiltField, String> {
    let trimmed = src.trim();
    let spec = if trimmed.starts_with('(') {
        FieldSpec::Expr(trimmed.to_string())
    } else {
        FieldSpec::Builtin {
            builtin: trimmed.to_string(),
            steepness: 1.0,
        }
    };
    spec.build("field").map_err(|e| e.to_string())
}

fn build_surface(spec_json: &str) -> Result<Surface, String> {
    let spec: SurfaceSpec = serde_json::from_str(spec_json).map_err(|e| e.to_string())?;
    spec.build().map_err(|e| e.to_string())
}

fn err_json(message: String) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn points_json(points: impl IntoIterator<Item = Vec2>) -> serde_json::Value {
    serde_json::Value::Array(
        points
            .into_iter()
            .map(|p| serde_json::json!([p.x, p.y]))
            .collect(),
    )
}

fn curve_json(c: &Curve) -> serde_json::Value {
    points_json(c.vertices.iter().copied())
}

/// Scans the field on the surface: zeros, suspect cells, blocks with
/// indices and isolating contours, an arrow grid, and the boundary.
#[wasm_bindgen]
pub fn analyze(field_src: &str, surface_json: &str, resolution: usize) -> String {
    match analyze_inner(field_src, surface_json, resolution) {
        Ok(s) => s,
        Err(e) => err_json(e),
    }
}

fn analyze_inner(field_src: &str, surface_json: &str, resolution: usize) -> Result<String, String> {
    let field = build_field(field_src)?;
    let surface = build_surface(surface_json)?;
    let resolution = resolution.clamp(32, 384);
    let scan = find_zeros(&field, &surface, resolution).map_err(|e| e.to_string())?;

    let blocks = decompose_blocks(
        &field,
        &surface,
        resolution,
        &FlowConfig::default(),
        &IndexConfig::default(),
    );
    let (blocks_json, block_note) = match blocks {
        Ok(bs) => (
            bs.iter()
                .map(|b| {
                    serde_json::json!({
                        "index": b.index.value,
                        "touches_boundary": b.touches_boundary,
                        "contours": b.region.contours.iter().map(curve_json).collect::<Vec<_>>(),
                        "zeros": points_json(b.zeros.iter().map(|z| z.point)),
                    })
                })
                .collect::<Vec<_>>(),
            serde_json::Value::Null,
        ),
        Err(e) => (Vec::new(), serde_json::json!(e.to_string())),
    };

    // coarse arrow field for the phase portrait
    let b = surface.bounding_box().expand(0.0);
    let n = 24usize;
    let mut arrows = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let p = Vec2::new(
                b.min.x + (i as f64 + 0.5) / n as f64 * b.width(),
                b.min.y + (j as f64 + 0.5) / n as f64 * b.height(),
            );
            if !surface.contains(p) {
                continue;
            }
            if let Ok(v) = fieldindex_core::VectorField::eval(&field, p) {
                arrows.push(serde_json::json!([p.x, p.y, v.x, v.y]));
            }
        }
    }

    let out = serde_json::json!({
        "bounds": {
            "min": [b.min.x, b.min.y],
            "max": [b.max.x, b.max.y],
        },
        "boundary": surface.boundary().iter().map(curve_json).collect::<Vec<_>>(),
        "zeros": points_json(scan.zeros.iter().map(|z| z.point)),
        "suspect_cells": points_json(
            scan.suspect_cells.iter().map(|&(ix, iy)| scan.grid.cell_center(ix, iy))
        ),
        "cell_size": scan.grid.cell,
        "blocks": blocks_json,
        "block_error": block_note,
        "arrows": arrows,
    });
    Ok(out.to_string())
}

/// Integrates one orbit of the field from `(x, y)` for time `t`.
#[wasm_bindgen]
pub fn orbit(field_src: &str, surface_json: &str, x: f64, y: f64, t: f64) -> String {
    match orbit_inner(field_src, surface_json, x, y, t) {
        Ok(s) => s,
        Err(e) => err_json(e),
    }
}

fn orbit_inner(
    field_src: &str,
    surface_json: &str,
    x: f64,
    y: f64,
    t: f64,
) -> Result<String, String> {
    let field = build_field(field_src)?;
    let surface = build_surface(surface_json)?;
    let start = surface
        .retract(Vec2::new(x, y))
        .map_err(|e| e.to_string())?;
    let mut cfg = FlowConfig::default();
    cfg.max_step = (t / 400.0).max(1e-4);
    let traj =
        flow(&field, &surface, start, t.clamp(0.0, 500.0), &cfg).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "points": points_json(traj.samples.iter().map(|&(_, p)| p)),
        "reason": format!("{:?}", traj.reason),
        "end_time": traj.end_time(),
    })
    .to_string())
}

/// Winding number of the field along the circle of radius `r` around
/// `(cx, cy)`, with the unit directions at evenly spread sample points.
#[wasm_bindgen]
pub fn circle_index(field_src: &str, cx: f64, cy: f64, r: f64) -> String {
    match circle_index_inner(field_src, cx, cy, r) {
        Ok(s) => s,
        Err(e) => err_json(e),
    }
}

fn circle_index_inner(field_src: &str, cx: f64, cy: f64, r: f64) -> Result<String, String> {
    if !(r > 0.0) {
        return Err("radius must be positive".into());
    }
    let field = build_field(field_src)?;
    let contour = Curve::circle(Vec2::new(cx, cy), r, 64);
    let result = field_winding(&field, &contour, &IndexConfig::default());
    match result {
        Ok(idx) => {
            let mut sweep = Vec::new();
            for i in 0..48 {
                let a = 2.0 * std::f64::consts::PI * i as f64 / 48.0;
                let p = Vec2::new(cx + r * a.cos(), cy + r * a.sin());
                if let Ok(v) = fieldindex_core::VectorField::eval(&field, p) {
                    if let Some(u) = v.normalized() {
                        sweep.push(serde_json::json!([p.x, p.y, u.x, u.y]));
                    }
                }
            }
            Ok(serde_json::json!({
                "index": idx.value,
                "min_modulus": idx.min_modulus,
                "sweep": sweep,
            })
            .to_string())
        }
        Err(e) => Err(e.to_string()),
    }
}
