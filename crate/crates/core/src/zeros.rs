//! Zero-set scanning: grid search plus Newton refinement.
//!
//! Cells of a square grid over the surface are flagged as candidates when
//! the field is small relative to the local slope or when both components
//! change sign across the cell. Candidates are polished by Newton's
//! method: nondegenerate roots become polished zero points, while cells
//! whose zeros cannot be polished (curve-like zero sets have singular
//! Jacobians there) are reported as suspect cells.

use crate::error::BlockError;
use crate::field::VectorField;
use crate::geom::{Bounds, Vec2};
use crate::surface::Surface;
use serde::{Deserialize, Serialize};

/// Square-cell grid covering the surface bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub origin: [f64; 2],
    pub cell: f64,
    pub nx: i64,
    pub ny: i64,
}

impl GridInfo {
    pub fn for_surface(surface: &Surface, resolution: usize) -> GridInfo {
        let b: Bounds = surface.bounding_box();
        let cell = b.width().max(b.height()) / resolution as f64;
        GridInfo {
            origin: [b.min.x, b.min.y],
            cell,
            nx: (b.width() / cell).ceil() as i64,
            ny: (b.height() / cell).ceil() as i64,
        }
    }

    pub fn cell_center(&self, ix: i64, iy: i64) -> Vec2 {
        Vec2::new(
            self.origin[0] + (ix as f64 + 0.5) * self.cell,
            self.origin[1] + (iy as f64 + 0.5) * self.cell,
        )
    }

    pub fn node(&self, ix: i64, iy: i64) -> Vec2 {
        Vec2::new(
            self.origin[0] + ix as f64 * self.cell,
            self.origin[1] + iy as f64 * self.cell,
        )
    }

    pub fn cell_of(&self, p: Vec2) -> (i64, i64) {
        (
            ((p.x - self.origin[0]) / self.cell).floor() as i64,
            ((p.y - self.origin[1]) / self.cell).floor() as i64,
        )
    }
}

/// An isolated zero refined to roundoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolishedZero {
    pub point: Vec2,
    pub residual: f64,
    pub cell: (i64, i64),
}

/// Result of a zero scan: refined points plus cells whose zeros resisted
/// polishing (typically one-dimensional pieces of the zero set).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroScan {
    pub zeros: Vec<PolishedZero>,
    pub suspect_cells: Vec<(i64, i64)>,
    pub grid: GridInfo,
}

impl ZeroScan {
    /// Cells meeting the zero set: suspect cells plus the cells holding
    /// polished zeros.
    pub fn zero_cells(&self) -> Vec<(i64, i64)> {
        let mut cells: Vec<(i64, i64)> = self
            .zeros
            .iter()
            .map(|z| z.cell)
            .chain(self.suspect_cells.iter().copied())
            .collect();
        cells.sort_unstable();
        cells.dedup();
        cells
    }
}

/// Absolute residual below which a Newton iterate counts as a zero.
pub const POLISH_RESIDUAL: f64 = 1e-12;

/// Newton refinement of a root of the field from `start`. Returns the
/// refined point and its residual, or `None` when the iteration leaves the
/// basin, fails to converge, or lands on a degenerate zero: points of
/// curve-like zero sets pass the residual test too, but their Jacobians
/// collapse, so a relative determinant check tells isolated zeros apart.
pub fn newton_polish(field: &dyn VectorField, start: Vec2, max_dist: f64) -> Option<(Vec2, f64)> {
    let mut q = start;
    let mut converged = false;
    for _ in 0..60 {
        let v = field.eval(q).ok()?;
        if v.norm() < POLISH_RESIDUAL {
            converged = true;
            break;
        }
        let j = field.jacobian(q).ok()?;
        let dq = j.solve(-v)?;
        if !dq.is_finite() || dq.norm() > max_dist {
            return None;
        }
        q = q + dq;
        if q.dist(start) > max_dist {
            return None;
        }
        if dq.norm() < 1e-16 * (1.0 + q.norm()) {
            break;
        }
    }
    let v = field.eval(q).ok()?;
    if !converged && v.norm() >= POLISH_RESIDUAL {
        return None;
    }
    // isolation test: |det J| relative to |J|^2 stays bounded away from
    // zero for isolated zeros (even degenerate ones like z -> z^2, where
    // both scale together), but vanishes on one-dimensional zero sets
    let j = field.jacobian(q).ok()?;
    let frob_sq = j.a * j.a + j.b * j.b + j.c * j.c + j.d * j.d;
    if j.det().abs() <= 1e-6 * frob_sq {
        return None;
    }
    Some((q, v.norm()))
}

/// Scans the surface for zeros of the field at the given grid resolution.
pub fn find_zeros(
    field: &dyn VectorField,
    surface: &Surface,
    resolution: usize,
) -> Result<ZeroScan, BlockError> {
    if resolution < 16 {
        return Err(BlockError::ResolutionTooCoarse(resolution));
    }
    let grid = GridInfo::for_surface(surface, resolution);
    let h = grid.cell;

    // node values; evaluation failures leave holes that disqualify cells
    let nx = grid.nx as usize;
    let ny = grid.ny as usize;
    let mut nodes: Vec<Option<Vec2>> = Vec::with_capacity((nx + 1) * (ny + 1));
    for iy in 0..=ny {
        for ix in 0..=nx {
            nodes.push(field.eval(grid.node(ix as i64, iy as i64)).ok());
        }
    }
    let node = |ix: usize, iy: usize| nodes[iy * (nx + 1) + ix];

    let mut zeros: Vec<PolishedZero> = Vec::new();
    let mut failed_cells: Vec<(i64, i64)> = Vec::new();

    for iy in 0..ny {
        for ix in 0..nx {
            let corners = [
                node(ix, iy),
                node(ix + 1, iy),
                node(ix + 1, iy + 1),
                node(ix, iy + 1),
            ];
            let Some(values) = corners.into_iter().collect::<Option<Vec<Vec2>>>() else {
                continue;
            };
            let center = grid.cell_center(ix as i64, iy as i64);
            let corner_pts = [
                grid.node(ix as i64, iy as i64),
                grid.node(ix as i64 + 1, iy as i64),
                grid.node(ix as i64 + 1, iy as i64 + 1),
                grid.node(ix as i64, iy as i64 + 1),
            ];
            let touches_surface =
                surface.contains(center) || corner_pts.iter().any(|&p| surface.contains(p));
            if !touches_surface {
                continue;
            }

            let center_value = field.eval(center).ok();
            let min_mod = values
                .iter()
                .copied()
                .chain(center_value)
                .map(|v| v.norm())
                .fold(f64::INFINITY, f64::min);
            let sign_change = |pick: fn(&Vec2) -> f64| {
                let mut has_nonneg = false;
                let mut has_nonpos = false;
                for v in &values {
                    let c = pick(v);
                    if c >= 0.0 {
                        has_nonneg = true;
                    }
                    if c <= 0.0 {
                        has_nonpos = true;
                    }
                }
                has_nonneg && has_nonpos
            };
            let both_change = sign_change(|v| v.x) && sign_change(|v| v.y);

            let slope = local_slope(field, center, &values, h);
            let candidate = both_change || min_mod <= 2.0 * h * slope + 1e-12;
            if !candidate {
                continue;
            }

            // degenerate zeros converge linearly and pull candidates from
            // several cells away, so allow a generous walk
            match newton_polish(field, center, 12.0 * h) {
                Some((z, residual)) if surface.contains_with_tol(z, 1e-9) => {
                    let already = zeros
                        .iter()
                        .any(|pz| pz.point.dist(z) < 1e-7 * (1.0 + z.norm()));
                    if !already {
                        zeros.push(PolishedZero {
                            point: z,
                            residual,
                            cell: grid.cell_of(z),
                        });
                    }
                }
                Some(_) => {} // polished to a point outside the surface
                None => failed_cells.push((ix as i64, iy as i64)),
            }
        }
    }

    // a failed cell adjacent to a polished zero is that zero's halo, not a
    // separate suspect
    let suspect_cells: Vec<(i64, i64)> = failed_cells
        .into_iter()
        .filter(|&(ix, iy)| {
            let c = grid.cell_center(ix, iy);
            !zeros.iter().any(|z| z.point.dist(c) <= 1.6 * h)
        })
        .collect();

    zeros.sort_by(|a, b| {
        (a.point.x, a.point.y)
            .partial_cmp(&(b.point.x, b.point.y))
            .unwrap()
    });

    Ok(ZeroScan {
        zeros,
        suspect_cells,
        grid,
    })
}

/// Local magnitude-of-derivative estimate used for the candidate
/// threshold; falls back to corner differences when the Jacobian cannot be
/// evaluated (fields not differentiable there).
fn local_slope(field: &dyn VectorField, center: Vec2, corners: &[Vec2], h: f64) -> f64 {
    if let Ok(j) = field.jacobian(center) {
        let frob = (j.a * j.a + j.b * j.b + j.c * j.c + j.d * j.d).sqrt();
        if frob.is_finite() {
            return frob.max(1e-12);
        }
    }
    let mut worst = 0.0f64;
    for i in 0..corners.len() {
        let d = (corners[i] - corners[(i + 1) % corners.len()]).norm() / h;
        worst = worst.max(d);
    }
    worst.max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_field;

    #[test]
    fn rotation_field_has_single_zero_at_origin() {
        let f = parse_field("(-y, x)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 1.0).unwrap();
        let scan = find_zeros(&f, &s, 64).unwrap();
        assert_eq!(scan.zeros.len(), 1, "zeros: {:?}", scan.zeros);
        assert!(scan.zeros[0].point.norm() < 1e-12);
        assert!(scan.zeros[0].residual < 1e-12);
        assert!(scan.suspect_cells.is_empty());
    }

    #[test]
    fn two_hyperbolic_zeros_found() {
        let f = parse_field("(x^2 - 1, y)").unwrap();
        let s = Surface::halfplane_window(-2.0, 2.0, 2.0).unwrap();
        // note: zeros sit on the boundary edge y = 0 of the window
        let scan = find_zeros(&f, &s, 64).unwrap();
        assert_eq!(scan.zeros.len(), 2, "zeros: {:?}", scan.zeros);
        let mut pts: Vec<Vec2> = scan.zeros.iter().map(|z| z.point).collect();
        pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        assert!(pts[0].dist(Vec2::new(-1.0, 0.0)) < 1e-10);
        assert!(pts[1].dist(Vec2::new(1.0, 0.0)) < 1e-10);
    }

    #[test]
    fn circle_zero_set_yields_suspect_cells() {
        let f = parse_field("((1 - x^2 - y^2)*1, 0)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 2.0).unwrap();
        let scan = find_zeros(&f, &s, 96).unwrap();
        assert!(scan.zeros.is_empty(), "no isolated zeros: {:?}", scan.zeros);
        assert!(
            scan.suspect_cells.len() > 40,
            "expected a ring of suspect cells, got {}",
            scan.suspect_cells.len()
        );
        // all suspect cells hug the unit circle
        for &(ix, iy) in &scan.suspect_cells {
            let c = scan.grid.cell_center(ix, iy);
            assert!(
                (c.norm() - 1.0).abs() < 3.0 * scan.grid.cell,
                "stray suspect cell at {:?}",
                c
            );
        }
        // and the circle is fully traced: every angle sector is hit
        let mut sectors = [false; 16];
        for &(ix, iy) in &scan.suspect_cells {
            let c = scan.grid.cell_center(ix, iy);
            let a = c.y.atan2(c.x).rem_euclid(2.0 * std::f64::consts::PI);
            sectors[(a / (2.0 * std::f64::consts::PI) * 16.0) as usize % 16] = true;
        }
        assert!(sectors.iter().all(|&s| s), "sectors missed: {:?}", sectors);
    }

    #[test]
    fn zero_free_field_finds_nothing() {
        let f = parse_field("(1, x)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 1.0).unwrap();
        let scan = find_zeros(&f, &s, 32).unwrap();
        assert!(scan.zeros.is_empty());
        assert!(scan.suspect_cells.is_empty());
    }

    #[test]
    fn resolution_floor_enforced() {
        let f = parse_field("(x, y)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 1.0).unwrap();
        assert!(matches!(
            find_zeros(&f, &s, 8),
            Err(BlockError::ResolutionTooCoarse(8))
        ));
    }

    #[test]
    fn newton_polish_isolation_filter() {
        // z -> z^2 in complex notation: a degree-2 isolated zero whose
        // determinant and squared Jacobian norm scale together, so the
        // isolation filter keeps it (position accuracy ~ sqrt(residual))
        let f = parse_field("(x^2 - y^2, 2*x*y)").unwrap();
        let (z, r) = newton_polish(&f, Vec2::new(0.3, 0.2), 10.0).unwrap();
        assert!(z.norm() < 1e-5, "{:?}", z);
        assert!(r < POLISH_RESIDUAL);
        // (x^2 - y, y): isolated zero with a rank-degenerate Jacobian at
        // the origin; indistinguishable at roundoff from a curve point, so
        // the filter rejects it and the cell pipeline handles it instead
        let f = parse_field("(x^2 - y, y)").unwrap();
        assert!(newton_polish(&f, Vec2::new(0.3, 0.2), 10.0).is_none());
        // plain hyperbolic zero stays polished
        let f = parse_field("(x + y, y - x)").unwrap();
        let (z, _) = newton_polish(&f, Vec2::new(0.4, -0.3), 10.0).unwrap();
        assert!(z.norm() < 1e-12);
    }
}
