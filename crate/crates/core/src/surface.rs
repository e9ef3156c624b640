//! Compact planar surfaces with boundary.
//!
//! Four kinds cover every scenario in the library: disks, half-plane
//! windows (a rectangle sitting on the line `y = 0`), annuli, and polygons
//! with polygonal holes. Corners are allowed; the inwardness test at a
//! corner intersects the two adjacent half-plane conditions.
//!
//! Every surface carries a retraction from a margin neighborhood onto
//! itself (nearest-point projection). The index machinery leans on this:
//! maps composed with the retraction have the same fixed points, which is
//! what makes blocks touching the boundary computable.

use crate::error::SurfaceError;
use crate::geom::{segment_nearest, Bounds, Curve, Vec2};
use serde::{Deserialize, Serialize};

/// Proximity tolerance for "is this point on the boundary" questions.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Vertices used to discretize circular boundary curves.
const CIRCLE_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Disk {
        center: Vec2,
        radius: f64,
    },
    /// The rectangle `[x_min, x_max] x [0, height]`, a compact window into
    /// the closed half plane `y >= 0`.
    HalfplaneWindow {
        x_min: f64,
        x_max: f64,
        height: f64,
    },
    Annulus {
        center: Vec2,
        r_inner: f64,
        r_outer: f64,
    },
    PolygonWithHoles {
        outer: Curve,
        holes: Vec<Curve>,
    },
}

/// A compact planar surface with boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    kind: SurfaceKind,
    boundary: Vec<Curve>,
    euler_char: i64,
    retraction_margin: f64,
}

/// Local boundary geometry at a point: the inner normals of the touching
/// boundary pieces (one if smooth, two at a corner).
#[derive(Debug, Clone, Copy)]
pub struct BoundaryGeometry {
    pub inner_normals: [Vec2; 2],
    pub corner: bool,
}

impl Surface {
    pub fn disk(center: Vec2, radius: f64) -> Result<Surface, SurfaceError> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(SurfaceError::InvalidParameters(format!(
                "disk radius must be positive and finite, got {radius}"
            )));
        }
        let boundary = vec![Curve::circle(center, radius, CIRCLE_SAMPLES)];
        Ok(Surface {
            kind: SurfaceKind::Disk { center, radius },
            boundary,
            euler_char: 1,
            retraction_margin: 0.1 * radius,
        })
    }

    pub fn halfplane_window(x_min: f64, x_max: f64, height: f64) -> Result<Surface, SurfaceError> {
        if !(x_min < x_max) || !(height > 0.0) {
            return Err(SurfaceError::InvalidParameters(format!(
                "window [{x_min}, {x_max}] x [0, {height}] is degenerate"
            )));
        }
        let boundary = vec![Curve::closed(vec![
            Vec2::new(x_min, 0.0),
            Vec2::new(x_max, 0.0),
            Vec2::new(x_max, height),
            Vec2::new(x_min, height),
        ])];
        let margin = 0.1 * (x_max - x_min).min(height);
        Ok(Surface {
            kind: SurfaceKind::HalfplaneWindow {
                x_min,
                x_max,
                height,
            },
            boundary,
            euler_char: 1,
            retraction_margin: margin,
        })
    }

    pub fn annulus(center: Vec2, r_inner: f64, r_outer: f64) -> Result<Surface, SurfaceError> {
        if !(0.0 < r_inner && r_inner < r_outer) {
            return Err(SurfaceError::InvalidParameters(format!(
                "annulus radii must satisfy 0 < {r_inner} < {r_outer}"
            )));
        }
        let boundary = vec![
            Curve::circle(center, r_outer, CIRCLE_SAMPLES),
            Curve::circle_cw(center, r_inner, CIRCLE_SAMPLES),
        ];
        let margin = (0.1 * r_outer)
            .min(0.5 * r_inner)
            .min(0.45 * (r_outer - r_inner));
        Ok(Surface {
            kind: SurfaceKind::Annulus {
                center,
                r_inner,
                r_outer,
            },
            boundary,
            euler_char: 0,
            retraction_margin: margin,
        })
    }

    pub fn polygon_with_holes(outer: Curve, holes: Vec<Curve>) -> Result<Surface, SurfaceError> {
        let mut outer = outer;
        validate_polygon_curve(&outer)?;
        // normalize orientations: outer counterclockwise, holes clockwise
        if outer.signed_area() < 0.0 {
            outer.vertices.reverse();
        }
        let mut oriented_holes = Vec::with_capacity(holes.len());
        for mut h in holes {
            validate_polygon_curve(&h)?;
            if h.signed_area() > 0.0 {
                h.vertices.reverse();
            }
            for v in &h.vertices {
                if outer.winding_around(*v) == 0 {
                    return Err(SurfaceError::InvalidCurve(
                        "hole vertex lies outside the outer boundary".into(),
                    ));
                }
            }
            oriented_holes.push(h);
        }
        let euler_char = 1 - oriented_holes.len() as i64;
        let bounds = Bounds::of_points(&outer.vertices).unwrap();
        let margin = 0.05 * bounds.width().hypot(bounds.height());
        let mut boundary = vec![outer.clone()];
        boundary.extend(oriented_holes.iter().cloned());
        Ok(Surface {
            kind: SurfaceKind::PolygonWithHoles {
                outer,
                holes: oriented_holes,
            },
            boundary,
            euler_char,
            retraction_margin: margin,
        })
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    /// Oriented boundary curves: outer counterclockwise, holes clockwise.
    pub fn boundary(&self) -> &[Curve] {
        &self.boundary
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.euler_char
    }

    pub fn retraction_margin(&self) -> f64 {
        self.retraction_margin
    }

    pub fn with_retraction_margin(mut self, margin: f64) -> Surface {
        self.retraction_margin = margin;
        self
    }

    /// Closed-region membership, boundary included.
    pub fn contains(&self, p: Vec2) -> bool {
        match &self.kind {
            SurfaceKind::Disk { center, radius } => p.dist(*center) <= *radius,
            SurfaceKind::HalfplaneWindow {
                x_min,
                x_max,
                height,
            } => p.x >= *x_min && p.x <= *x_max && p.y >= 0.0 && p.y <= *height,
            SurfaceKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = p.dist(*center);
                r >= *r_inner && r <= *r_outer
            }
            SurfaceKind::PolygonWithHoles { outer, holes } => {
                if outer.winding_around(p) == 0 {
                    return outer.distance_to(p) <= BOUNDARY_TOL;
                }
                for h in holes {
                    // holes are clockwise, any nonzero winding means inside
                    if h.winding_around(p) != 0 {
                        return h.distance_to(p) <= BOUNDARY_TOL;
                    }
                }
                true
            }
        }
    }

    /// Membership with a slack band around the boundary.
    pub fn contains_with_tol(&self, p: Vec2, tol: f64) -> bool {
        self.contains(p) || self.distance_outside(p) <= tol
    }

    /// Distance from `p` to the surface; zero for points of the surface.
    pub fn distance_outside(&self, p: Vec2) -> f64 {
        if self.contains(p) {
            0.0
        } else {
            p.dist(self.nearest_point(p))
        }
    }

    /// Distance from `p` to the topological boundary (nearest boundary
    /// point), regardless of which side `p` is on.
    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        p.dist(self.nearest_boundary_point(p))
    }

    /// Nearest point of the (closed) surface.
    pub fn nearest_point(&self, p: Vec2) -> Vec2 {
        if self.contains(p) {
            return p;
        }
        match &self.kind {
            SurfaceKind::Disk { center, radius } => {
                let d = p - *center;
                match d.normalized() {
                    Some(u) => *center + u * *radius,
                    None => *center + Vec2::new(*radius, 0.0),
                }
            }
            SurfaceKind::HalfplaneWindow {
                x_min,
                x_max,
                height,
            } => Vec2::new(p.x.clamp(*x_min, *x_max), p.y.clamp(0.0, *height)),
            SurfaceKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let d = p - *center;
                let r = d.norm();
                if r == 0.0 {
                    return *center + Vec2::new(*r_inner, 0.0);
                }
                let u = d / r;
                *center + u * r.clamp(*r_inner, *r_outer)
            }
            SurfaceKind::PolygonWithHoles { .. } => self.nearest_boundary_point(p),
        }
    }

    /// Nearest point of the topological boundary.
    pub fn nearest_boundary_point(&self, p: Vec2) -> Vec2 {
        match &self.kind {
            SurfaceKind::Disk { center, radius } => {
                let d = p - *center;
                match d.normalized() {
                    Some(u) => *center + u * *radius,
                    None => *center + Vec2::new(*radius, 0.0),
                }
            }
            SurfaceKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let d = p - *center;
                let r = d.norm();
                if r == 0.0 {
                    return *center + Vec2::new(*r_inner, 0.0);
                }
                let u = d / r;
                if (r - r_inner).abs() <= (r - r_outer).abs() {
                    *center + u * *r_inner
                } else {
                    *center + u * *r_outer
                }
            }
            SurfaceKind::HalfplaneWindow { .. } | SurfaceKind::PolygonWithHoles { .. } => {
                let mut best = Vec2::ZERO;
                let mut best_d = f64::INFINITY;
                for curve in &self.boundary {
                    for (a, b) in curve.edges() {
                        let q = segment_nearest(p, a, b);
                        let d = q.dist(p);
                        if d < best_d {
                            best_d = d;
                            best = q;
                        }
                    }
                }
                best
            }
        }
    }

    /// The retraction realizing the surface as a neighborhood retract:
    /// identity on the surface, nearest-point projection on the margin
    /// band around it.
    pub fn retract(&self, p: Vec2) -> Result<Vec2, SurfaceError> {
        let d = self.distance_outside(p);
        if d > self.retraction_margin + BOUNDARY_TOL {
            return Err(SurfaceError::OutsideMargin {
                at: p,
                margin: self.retraction_margin,
            });
        }
        Ok(self.nearest_point(p))
    }

    /// Local boundary geometry at `p`, which must lie within
    /// [`BOUNDARY_TOL`] of the boundary.
    pub fn boundary_geometry(&self, p: Vec2) -> Result<BoundaryGeometry, SurfaceError> {
        let not_on_boundary = || SurfaceError::NotOnBoundary {
            at: p,
            tol: BOUNDARY_TOL,
        };
        match &self.kind {
            SurfaceKind::Disk { center, radius } => {
                let d = p - *center;
                let r = d.norm();
                if (r - radius).abs() > BOUNDARY_TOL {
                    return Err(not_on_boundary());
                }
                let n = -(d / r);
                Ok(BoundaryGeometry {
                    inner_normals: [n, n],
                    corner: false,
                })
            }
            SurfaceKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let d = p - *center;
                let r = d.norm();
                let u = d / r;
                if (r - r_outer).abs() <= BOUNDARY_TOL {
                    Ok(BoundaryGeometry {
                        inner_normals: [-u, -u],
                        corner: false,
                    })
                } else if (r - r_inner).abs() <= BOUNDARY_TOL {
                    Ok(BoundaryGeometry {
                        inner_normals: [u, u],
                        corner: false,
                    })
                } else {
                    Err(not_on_boundary())
                }
            }
            SurfaceKind::HalfplaneWindow {
                x_min,
                x_max,
                height,
            } => {
                let mut normals: Vec<Vec2> = Vec::new();
                if (p.y).abs() <= BOUNDARY_TOL {
                    normals.push(Vec2::new(0.0, 1.0));
                }
                if (p.y - height).abs() <= BOUNDARY_TOL {
                    normals.push(Vec2::new(0.0, -1.0));
                }
                if (p.x - x_min).abs() <= BOUNDARY_TOL {
                    normals.push(Vec2::new(1.0, 0.0));
                }
                if (p.x - x_max).abs() <= BOUNDARY_TOL {
                    normals.push(Vec2::new(-1.0, 0.0));
                }
                match normals.len() {
                    0 => Err(not_on_boundary()),
                    1 => Ok(BoundaryGeometry {
                        inner_normals: [normals[0], normals[0]],
                        corner: false,
                    }),
                    _ => Ok(BoundaryGeometry {
                        inner_normals: [normals[0], normals[1]],
                        corner: true,
                    }),
                }
            }
            SurfaceKind::PolygonWithHoles { .. } => {
                // nearest boundary entity: vertex within tolerance means a
                // corner, otherwise the containing edge
                let mut best_edge: Option<(Vec2, Vec2, f64)> = None;
                let mut corner: Option<(Vec2, Vec2)> = None;
                for curve in &self.boundary {
                    let n = curve.vertices.len();
                    for i in 0..n {
                        let a = curve.vertices[i];
                        let b = curve.vertices[(i + 1) % n];
                        let q = segment_nearest(p, a, b);
                        let d = q.dist(p);
                        if let Some((_, _, bd)) = best_edge {
                            if d < bd {
                                best_edge = Some((a, b, d));
                            }
                        } else {
                            best_edge = Some((a, b, d));
                        }
                        if p.dist(a) <= BOUNDARY_TOL {
                            let prev = curve.vertices[(i + n - 1) % n];
                            corner = Some((prev, b));
                        }
                    }
                }
                let (a, b, d) = best_edge.ok_or_else(not_on_boundary)?;
                if d > BOUNDARY_TOL {
                    return Err(not_on_boundary());
                }
                if let Some((prev, next)) = corner {
                    // the corner vertex is p itself (within tolerance)
                    let n1 = (p - prev).normalized().map(Vec2::perp);
                    let n2 = (next - p).normalized().map(Vec2::perp);
                    if let (Some(n1), Some(n2)) = (n1, n2) {
                        return Ok(BoundaryGeometry {
                            inner_normals: [n1, n2],
                            corner: true,
                        });
                    }
                }
                let n = (b - a)
                    .normalized()
                    .map(Vec2::perp)
                    .ok_or_else(not_on_boundary)?;
                Ok(BoundaryGeometry {
                    inner_normals: [n, n],
                    corner: false,
                })
            }
        }
    }

    /// Outward unit direction at the boundary point nearest to `p`.
    pub fn outward_normal_near(&self, p: Vec2) -> Vec2 {
        let b = self.nearest_boundary_point(p);
        match self.boundary_geometry(b) {
            Ok(geom) => {
                let sum = geom.inner_normals[0] + geom.inner_normals[1];
                match sum.normalized() {
                    Some(u) => -u,
                    None => -geom.inner_normals[0],
                }
            }
            Err(_) => Vec2::new(1.0, 0.0),
        }
    }

    /// A point at distance roughly `delta` outside the surface, past the
    /// boundary point nearest to `p`. Used to protrude index contours off
    /// boundary-touching blocks.
    pub fn push_outside(&self, p: Vec2, delta: f64) -> Vec2 {
        let b = self.nearest_boundary_point(p);
        b + self.outward_normal_near(p) * delta
    }

    /// True when `p + eps * v` can stay in the surface to first order:
    /// tangent vectors along the boundary count as inward, and at corners
    /// both adjacent half-plane conditions must hold.
    pub fn inward_cone_test(&self, p: Vec2, v: Vec2) -> Result<bool, SurfaceError> {
        let geom = self.boundary_geometry(p)?;
        let Some(u) = v.normalized() else {
            return Ok(true); // zero vector: the constant curve stays
        };
        Ok(u.dot(geom.inner_normals[0]) >= -BOUNDARY_TOL
            && u.dot(geom.inner_normals[1]) >= -BOUNDARY_TOL)
    }

    /// Axis-aligned bounding box of the surface.
    pub fn bounding_box(&self) -> Bounds {
        match &self.kind {
            SurfaceKind::Disk { center, radius } => Bounds::new(
                *center - Vec2::new(*radius, *radius),
                *center + Vec2::new(*radius, *radius),
            ),
            SurfaceKind::HalfplaneWindow {
                x_min,
                x_max,
                height,
            } => Bounds::new(Vec2::new(*x_min, 0.0), Vec2::new(*x_max, *height)),
            SurfaceKind::Annulus {
                center, r_outer, ..
            } => Bounds::new(
                *center - Vec2::new(*r_outer, *r_outer),
                *center + Vec2::new(*r_outer, *r_outer),
            ),
            SurfaceKind::PolygonWithHoles { outer, .. } => {
                Bounds::of_points(&outer.vertices).unwrap()
            }
        }
    }

    /// Centers of an `n` by `n` cell grid over the bounding box, filtered
    /// to points of the surface. Deterministic sampling for residual
    /// checks.
    pub fn grid_points(&self, n: usize) -> Vec<Vec2> {
        let b = self.bounding_box();
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let p = Vec2::new(
                    b.min.x + (i as f64 + 0.5) / n as f64 * b.width(),
                    b.min.y + (j as f64 + 0.5) / n as f64 * b.height(),
                );
                if self.contains(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Evenly spread points of the topological boundary (analytic for
    /// circular pieces).
    pub fn boundary_samples(&self, per_curve: usize) -> Vec<Vec2> {
        let mut out = Vec::new();
        match &self.kind {
            SurfaceKind::Disk { center, radius } => {
                push_circle_samples(&mut out, *center, *radius, per_curve);
            }
            SurfaceKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                push_circle_samples(&mut out, *center, *r_outer, per_curve);
                push_circle_samples(&mut out, *center, *r_inner, per_curve);
            }
            SurfaceKind::HalfplaneWindow { .. } | SurfaceKind::PolygonWithHoles { .. } => {
                for curve in &self.boundary {
                    let total = curve.arc_length();
                    if total == 0.0 {
                        continue;
                    }
                    let step = total / per_curve as f64;
                    let mut next_at = step / 2.0;
                    let mut walked = 0.0;
                    for (a, b) in curve.edges() {
                        let seg = a.dist(b);
                        while next_at <= walked + seg && out.len() < per_curve * self.boundary.len()
                        {
                            let t = (next_at - walked) / seg;
                            out.push(a + (b - a) * t);
                            next_at += step;
                        }
                        walked += seg;
                    }
                }
            }
        }
        out
    }
}

fn push_circle_samples(out: &mut Vec<Vec2>, center: Vec2, radius: f64, n: usize) {
    for i in 0..n {
        let t = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
        out.push(center + Vec2::new(radius * t.cos(), radius * t.sin()));
    }
}

fn validate_polygon_curve(c: &Curve) -> Result<(), SurfaceError> {
    if !c.closed {
        return Err(SurfaceError::InvalidCurve(
            "polygon boundary curves must be closed".into(),
        ));
    }
    if c.vertices.len() < 3 {
        return Err(SurfaceError::InvalidCurve(format!(
            "closed curve needs at least 3 vertices, got {}",
            c.vertices.len()
        )));
    }
    let n = c.vertices.len();
    for i in 0..n {
        if c.vertices[i] == c.vertices[(i + 1) % n] {
            return Err(SurfaceError::InvalidCurve(
                "consecutive vertices must be distinct".into(),
            ));
        }
    }
    if c.self_intersects() {
        return Err(SurfaceError::InvalidCurve(
            "boundary curve self-intersects".into(),
        ));
    }
    Ok(())
}

/// Serializable surface description used in scenario files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Disk {
        center: [f64; 2],
        radius: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        retraction_margin: Option<f64>,
    },
    HalfplaneWindow {
        x_min: f64,
        x_max: f64,
        height: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        retraction_margin: Option<f64>,
    },
    Annulus {
        center: [f64; 2],
        r_inner: f64,
        r_outer: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        retraction_margin: Option<f64>,
    },
    PolygonWithHoles {
        outer: Vec<[f64; 2]>,
        #[serde(default)]
        holes: Vec<Vec<[f64; 2]>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        retraction_margin: Option<f64>,
    },
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<Surface, SurfaceError> {
        let (surface, margin) = match self {
            SurfaceSpec::Disk {
                center,
                radius,
                retraction_margin,
            } => (
                Surface::disk(Vec2::from(*center), *radius)?,
                *retraction_margin,
            ),
            SurfaceSpec::HalfplaneWindow {
                x_min,
                x_max,
                height,
                retraction_margin,
            } => (
                Surface::halfplane_window(*x_min, *x_max, *height)?,
                *retraction_margin,
            ),
            SurfaceSpec::Annulus {
                center,
                r_inner,
                r_outer,
                retraction_margin,
            } => (
                Surface::annulus(Vec2::from(*center), *r_inner, *r_outer)?,
                *retraction_margin,
            ),
            SurfaceSpec::PolygonWithHoles {
                outer,
                holes,
                retraction_margin,
            } => {
                let outer = Curve::closed(outer.iter().map(|&p| Vec2::from(p)).collect());
                let holes = holes
                    .iter()
                    .map(|h| Curve::closed(h.iter().map(|&p| Vec2::from(p)).collect()))
                    .collect();
                (
                    Surface::polygon_with_holes(outer, holes)?,
                    *retraction_margin,
                )
            }
        };
        Ok(match margin {
            Some(m) if m > 0.0 => surface.with_retraction_margin(m),
            _ => surface,
        })
    }
}
