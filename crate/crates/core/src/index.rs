//! Winding numbers and the three index functions.
//!
//! Everything reduces to one primitive: the total angle swept by a
//! nonvanishing vector map along a closed contour, accumulated in
//! increments below `angle_step_max` with adaptive segment subdivision.
//! The result is accepted only when the sweep is within 1% of a whole
//! number of turns and survives one extra global refinement pass, so a
//! returned integer is an honest one.
//!
//! On top of the winding primitive:
//!
//! - the index of an isolated interior zero is the winding of the field on
//!   a small circle, cross-checked at half the radius;
//! - the fixed-point index of a map is the winding of the displacement
//!   `x - f(retract(x))` over the region's contours (the retraction makes
//!   fixed sets touching the surface boundary computable, since composing
//!   with a surjective-onto-S retraction does not change the fixed set of
//!   a map into S);
//! - the vector-field index of a block is the fixed-point index of the
//!   time-tau flow map, with tau chosen by halving until two consecutive
//!   values agree.

use crate::error::IndexError;
use crate::field::VectorField;
use crate::flow::{flow_endpoint, FlowConfig};
use crate::geom::{Curve, Vec2};
use crate::surface::Surface;
use crate::zeros::{find_zeros, newton_polish};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Vectors smaller than this on a contour abort the computation.
pub const VANISH_TOL: f64 = 1e-10;

/// Accepted deviation of the angle sum from a whole number of turns.
const TURN_SLACK: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    /// First time step tried for the flow map of the vector-field index.
    pub tau_initial: f64,
    /// Give up halving below this.
    pub tau_min: f64,
    /// Largest angle increment accepted along a contour segment.
    pub angle_step_max: f64,
    /// Maximum subdivision depth per contour segment.
    pub contour_refinement_limit: u32,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            tau_initial: 0.1,
            tau_min: 1e-4,
            angle_step_max: std::f64::consts::FRAC_PI_2,
            contour_refinement_limit: 26,
        }
    }
}

impl IndexConfig {
    pub fn validate(&self) -> Result<(), IndexError> {
        if !(0.0 < self.tau_min && self.tau_min < self.tau_initial) {
            return Err(IndexError::InvalidConfig(format!(
                "need 0 < tau_min < tau_initial, got {} and {}",
                self.tau_min, self.tau_initial
            )));
        }
        if !(self.angle_step_max > 0.0
            && self.angle_step_max <= std::f64::consts::FRAC_PI_2 + 1e-12)
        {
            return Err(IndexError::InvalidConfig(format!(
                "angle_step_max must lie in (0, pi/2], got {}",
                self.angle_step_max
            )));
        }
        Ok(())
    }
}

/// A computed integer index together with the evidence for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub value: i64,
    /// Contours the winding was computed on (outer counterclockwise,
    /// holes clockwise).
    pub contours: Vec<Curve>,
    /// Smallest vector magnitude met on the contours.
    pub min_modulus: f64,
    /// Flow time used, for flow-map indices.
    pub tau: Option<f64>,
    /// Deepest segment subdivision used.
    pub refinement_count: u32,
}

/// A region bounded by oriented contours: outer boundary counterclockwise,
/// holes clockwise. Contours may dip into the retraction margin outside
/// the surface; the displacement map retracts them back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub contours: Vec<Curve>,
}

impl Region {
    pub fn new(contours: Vec<Curve>) -> Self {
        Region { contours }
    }

    pub fn disk(center: Vec2, radius: f64, samples: usize) -> Self {
        Region {
            contours: vec![Curve::circle(center, radius, samples)],
        }
    }

    pub fn annulus(center: Vec2, r_inner: f64, r_outer: f64, samples: usize) -> Self {
        Region {
            contours: vec![
                Curve::circle(center, r_outer, samples),
                Curve::circle_cw(center, r_inner, samples),
            ],
        }
    }

    /// The whole surface as a region: its boundary curves, already
    /// oriented outer-positive and holes-negative.
    pub fn full_surface(surface: &Surface) -> Self {
        Region {
            contours: surface.boundary().to_vec(),
        }
    }

    /// True when `p` is enclosed (winding of the contour arrangement).
    pub fn encloses(&self, p: Vec2) -> bool {
        let total: i64 = self.contours.iter().map(|c| c.winding_around(p)).sum();
        total != 0
    }
}

struct AngleSum {
    turns: f64,
    min_modulus: f64,
    deepest: u32,
}

fn angle_sum<V>(eval: &mut V, curve: &Curve, cfg: &IndexConfig) -> Result<AngleSum, IndexError>
where
    V: FnMut(Vec2) -> Result<Vec2, IndexError>,
{
    let n = curve.vertices.len();
    if n < 3 || !curve.closed {
        return Err(IndexError::InvalidConfig(
            "winding requires a closed contour with at least 3 vertices".into(),
        ));
    }
    let mut min_modulus = f64::INFINITY;
    let mut check = |p: Vec2, v: Vec2| -> Result<Vec2, IndexError> {
        let m = v.norm();
        if m < min_modulus {
            min_modulus = m;
        }
        if m <= VANISH_TOL {
            return Err(IndexError::VanishingOnContour {
                min_modulus: m,
                at: p,
            });
        }
        Ok(v)
    };

    let mut values = Vec::with_capacity(n);
    for &p in &curve.vertices {
        let v = eval(p)?;
        values.push(check(p, v)?);
    }

    let mut total = 0.0;
    let mut deepest = 0u32;

    // explicit stack of (a, va, b, vb, depth) halves; order along the
    // curve does not matter for the sum. Fast aliasing through a near
    // half-turn is caught by the caller's full refinement pass.
    for i in 0..n {
        let mut stack = vec![(
            curve.vertices[i],
            values[i],
            curve.vertices[(i + 1) % n],
            values[(i + 1) % n],
            0u32,
        )];
        while let Some((a, va, b, vb, depth)) = stack.pop() {
            let dtheta = va.angle_to(vb);
            if dtheta.abs() <= cfg.angle_step_max || a.dist(b) <= 1e-15 {
                total += dtheta;
                continue;
            }
            if depth >= cfg.contour_refinement_limit {
                return Err(IndexError::RefinementLimitExceeded {
                    limit: cfg.contour_refinement_limit,
                });
            }
            let m = (a + b) * 0.5;
            let vm = check(m, eval(m)?)?;
            if depth + 1 > deepest {
                deepest = depth + 1;
            }
            stack.push((m, vm, b, vb, depth + 1));
            stack.push((a, va, m, vm, depth + 1));
        }
    }

    Ok(AngleSum {
        turns: total / (2.0 * std::f64::consts::PI),
        min_modulus,
        deepest,
    })
}

fn round_turns(turns: f64) -> Result<i64, IndexError> {
    let nearest = turns.round();
    let fraction = (turns - nearest).abs();
    if fraction > TURN_SLACK {
        return Err(IndexError::NonIntegerWinding { fraction });
    }
    Ok(nearest as i64)
}

/// Winding number of the vector map along one closed contour, with the
/// built-in stability check: the value must survive one global refinement
/// pass of the contour.
pub fn winding_number<V>(
    eval: &mut V,
    contour: &Curve,
    cfg: &IndexConfig,
) -> Result<IndexResult, IndexError>
where
    V: FnMut(Vec2) -> Result<Vec2, IndexError>,
{
    cfg.validate()?;
    let coarse = angle_sum(eval, contour, cfg)?;
    let coarse_value = round_turns(coarse.turns)?;
    let refined_curve = contour.refined();
    let fine = angle_sum(eval, &refined_curve, cfg)?;
    let fine_value = round_turns(fine.turns)?;
    if coarse_value != fine_value {
        return Err(IndexError::UnstableUnderRefinement {
            coarse: coarse_value,
            fine: fine_value,
        });
    }
    Ok(IndexResult {
        value: fine_value,
        contours: vec![contour.clone()],
        min_modulus: coarse.min_modulus.min(fine.min_modulus),
        tau: None,
        refinement_count: coarse.deepest.max(fine.deepest),
    })
}

/// Winding of a vector field itself along a contour.
pub fn field_winding(
    field: &dyn VectorField,
    contour: &Curve,
    cfg: &IndexConfig,
) -> Result<IndexResult, IndexError> {
    let mut eval = |p: Vec2| field.eval(p).map_err(IndexError::from);
    winding_number(&mut eval, contour, cfg)
}

/// Initial vertex count for probe circles.
const CIRCLE_START: usize = 64;

/// Poincare-Hopf index of the field at an isolated interior zero: the
/// winding on the circle of radius `r` around `p`. Verifies that the
/// punctured closed disk is zero-free (grid scan with Newton polish) and
/// that the answer is the same at radius `r/2`.
pub fn index_at_zero(
    field: &dyn VectorField,
    p: Vec2,
    r: f64,
    cfg: &IndexConfig,
) -> Result<IndexResult, IndexError> {
    cfg.validate()?;
    if !(r > 0.0) {
        return Err(IndexError::InvalidConfig(format!(
            "probe radius must be positive, got {r}"
        )));
    }
    // scan the closed probe disk for other zeros
    let probe = Surface::disk(p, r).map_err(|e| IndexError::InvalidConfig(e.to_string()))?;
    let scan =
        find_zeros(field, &probe, 48).map_err(|e| IndexError::InvalidConfig(e.to_string()))?;
    // degenerate zeros polish with positional accuracy ~ sqrt(residual),
    // so anything closer than that is the probed zero itself
    let threshold = (10.0 * crate::zeros::POLISH_RESIDUAL.sqrt()).max(1e-6 * r);
    for z in &scan.zeros {
        if z.point.dist(p) > threshold {
            return Err(IndexError::AnotherZeroInside { at: z.point });
        }
    }
    for &(ix, iy) in &scan.suspect_cells {
        let c = scan.grid.cell_center(ix, iy);
        if c.dist(p) > threshold.max(2.0 * scan.grid.cell) {
            return Err(IndexError::AnotherZeroInside { at: c });
        }
    }

    let outer = field_winding(field, &Curve::circle(p, r, CIRCLE_START), cfg)?;
    let inner = field_winding(field, &Curve::circle(p, r / 2.0, CIRCLE_START), cfg)?;
    if outer.value != inner.value {
        return Err(IndexError::RadiusDependent {
            at_r: outer.value,
            at_half_r: inner.value,
        });
    }
    Ok(outer)
}

/// Displacement evaluator `x - f(retract(x))` with memoized map values;
/// the winding stability pass re-visits the same contour vertices.
struct Displacement<'a, F>
where
    F: FnMut(Vec2) -> Result<Vec2, IndexError>,
{
    surface: &'a Surface,
    map: F,
    cache: HashMap<(u64, u64), Vec2>,
}

impl<'a, F> Displacement<'a, F>
where
    F: FnMut(Vec2) -> Result<Vec2, IndexError>,
{
    fn new(surface: &'a Surface, map: F) -> Self {
        Displacement {
            surface,
            map,
            cache: HashMap::new(),
        }
    }

    fn eval(&mut self, x: Vec2) -> Result<Vec2, IndexError> {
        let key = (x.x.to_bits(), x.y.to_bits());
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let base = self.surface.retract(x)?;
        let image = (self.map)(base)?;
        let d = x - image;
        self.cache.insert(key, d);
        Ok(d)
    }
}

/// Fixed-point index of the map over the region, computed as the winding
/// number of the displacement field `x - f(retract(x))` summed over the
/// oriented contours. The map must send the surface into itself and have
/// no fixed points on the contours.
pub fn fixed_point_index<F>(
    map: F,
    surface: &Surface,
    region: &Region,
    cfg: &IndexConfig,
) -> Result<IndexResult, IndexError>
where
    F: FnMut(Vec2) -> Result<Vec2, IndexError>,
{
    cfg.validate()?;
    if region.contours.is_empty() {
        return Err(IndexError::InvalidConfig("region has no contours".into()));
    }
    let mut displacement = Displacement::new(surface, map);
    let mut value = 0i64;
    let mut min_modulus = f64::INFINITY;
    let mut refinement = 0u32;
    for contour in &region.contours {
        let r = winding_number(&mut |p| displacement.eval(p), contour, cfg)?;
        value += r.value;
        min_modulus = min_modulus.min(r.min_modulus);
        refinement = refinement.max(r.refinement_count);
    }
    Ok(IndexResult {
        value,
        contours: region.contours.clone(),
        min_modulus,
        tau: None,
        refinement_count: refinement,
    })
}

/// Protrudes boundary-hugging contours to a fixed offset outside the
/// surface. Flow maps composed with the retraction have no fixed points
/// off the surface, so this never changes the index, and it moves contours
/// off boundary-touching fixed sets where the displacement would vanish.
///
/// Only contours that actually reach the boundary (a vertex outside the
/// surface or on it to within tolerance) are touched: pushing vertices of
/// an interior contour would drag them across the region.
fn protrude_region(surface: &Surface, region: &Region, delta: f64) -> Region {
    let contours = region
        .contours
        .iter()
        .map(|c| {
            let hugging = c.vertices.iter().any(|&v| {
                surface.distance_outside(v) > 0.0
                    || surface.distance_to_boundary(v) <= 10.0 * crate::surface::BOUNDARY_TOL
            });
            if !hugging {
                return c.clone();
            }
            let vertices = c
                .vertices
                .iter()
                .map(|&v| {
                    let outside = surface.distance_outside(v);
                    let near_boundary = surface.distance_to_boundary(v) < delta;
                    if outside > 0.0 || near_boundary {
                        surface.push_outside(v, delta)
                    } else {
                        v
                    }
                })
                .collect();
            Curve {
                vertices,
                closed: c.closed,
            }
        })
        .collect();
    Region { contours }
}

/// Vector-field index of the zeros of `field` enclosed by `region`
/// (equivalently, of the block they form when the region is isolating):
/// the fixed-point index of the time-tau flow map, with tau found by
/// halving from `tau_initial` until two consecutive values agree.
pub fn vector_field_index(
    field: &dyn VectorField,
    surface: &Surface,
    region: &Region,
    flow_cfg: &FlowConfig,
    cfg: &IndexConfig,
) -> Result<IndexResult, IndexError> {
    cfg.validate()?;
    let delta = 0.5 * surface.retraction_margin();
    let computational = protrude_region(surface, region, delta);

    // isolating check: the field must be nonzero along the contour parts
    // that run through the interior of the surface
    for contour in &computational.contours {
        for &v in &contour.vertices {
            if surface.contains(v) && surface.distance_to_boundary(v) > 2.0 * delta {
                let m = field.eval(v)?.norm();
                if m <= VANISH_TOL {
                    return Err(IndexError::NotIsolating { at: v, modulus: m });
                }
            }
        }
    }

    let mut tau = cfg.tau_initial;
    let mut last_err: Option<IndexError> = None;
    while tau >= cfg.tau_min {
        let at = |t: f64, cfg2: &IndexConfig| -> Result<IndexResult, IndexError> {
            let map = |p: Vec2| -> Result<Vec2, IndexError> {
                flow_endpoint(field, surface, p, t, flow_cfg).map_err(IndexError::from)
            };
            fixed_point_index(map, surface, &computational, cfg2)
        };
        match (at(tau, cfg), at(tau / 2.0, cfg)) {
            (Ok(full), Ok(half)) if full.value == half.value => {
                return Ok(IndexResult {
                    tau: Some(tau),
                    ..full
                });
            }
            (Ok(full), Ok(half)) => {
                last_err = Some(IndexError::UnstableUnderRefinement {
                    coarse: full.value,
                    fine: half.value,
                });
            }
            (Err(e), _) | (_, Err(e)) => {
                // fixed points of the flow map near the contour (periodic
                // orbits of period ~ tau) go away at smaller tau
                last_err = Some(e);
            }
        }
        tau /= 2.0;
    }
    Err(last_err.unwrap_or(IndexError::TauExhausted {
        tau_min: cfg.tau_min,
    }))
}

/// A block is essential when its vector-field index is nonzero.
pub fn is_essential(
    field: &dyn VectorField,
    surface: &Surface,
    region: &Region,
    flow_cfg: &FlowConfig,
    cfg: &IndexConfig,
) -> Result<bool, IndexError> {
    Ok(vector_field_index(field, surface, region, flow_cfg, cfg)?.value != 0)
}

/// How two nonvanishing fields along a curve relate up to nonsingular
/// homotopy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomotopyVerdict {
    /// Unit fields agree everywhere on the curve.
    IdenticalDirection,
    /// Unit fields are opposite everywhere; still nonsingularly homotopic,
    /// by rotating half a turn.
    Antipodal,
    /// The straight-line path `(1-t)X + tY` never vanishes on the curve.
    StraightlineNonsingular,
    Inconclusive,
}

/// Angular agreement tolerance for the identical/antipodal verdicts.
const DIRECTION_TOL: f64 = 1e-6;
/// Minimum modulus along the straight-line homotopy.
const LINE_TOL: f64 = 1e-8;
/// Homotopy parameter grid size.
const LINE_STEPS: usize = 101;

/// Classifies the homotopy relation of two fields along a curve.
pub fn nonsingular_homotopy_check(
    x: &dyn VectorField,
    y: &dyn VectorField,
    curve: &Curve,
) -> Result<HomotopyVerdict, IndexError> {
    // probe vertices and edge midpoints
    let dense = curve.refined();
    let mut xs = Vec::with_capacity(dense.vertices.len());
    let mut ys = Vec::with_capacity(dense.vertices.len());
    for &p in &dense.vertices {
        let xv = x.eval(p)?;
        let yv = y.eval(p)?;
        for v in [xv, yv] {
            if v.norm() <= VANISH_TOL {
                return Err(IndexError::VanishingOnContour {
                    min_modulus: v.norm(),
                    at: p,
                });
            }
        }
        xs.push(xv);
        ys.push(yv);
    }

    let max_gap = xs
        .iter()
        .zip(&ys)
        .map(|(a, b)| a.angle_to(*b).abs())
        .fold(0.0f64, f64::max);
    if max_gap < DIRECTION_TOL {
        return Ok(HomotopyVerdict::IdenticalDirection);
    }
    let max_gap_flipped = xs
        .iter()
        .zip(&ys)
        .map(|(a, b)| a.angle_to(-*b).abs())
        .fold(0.0f64, f64::max);
    if max_gap_flipped < DIRECTION_TOL {
        return Ok(HomotopyVerdict::Antipodal);
    }

    let mut min_modulus = f64::INFINITY;
    for (a, b) in xs.iter().zip(&ys) {
        for k in 0..LINE_STEPS {
            let t = k as f64 / (LINE_STEPS - 1) as f64;
            let v = *a * (1.0 - t) + *b * t;
            min_modulus = min_modulus.min(v.norm());
        }
    }
    if min_modulus > LINE_TOL {
        Ok(HomotopyVerdict::StraightlineNonsingular)
    } else {
        Ok(HomotopyVerdict::Inconclusive)
    }
}

/// Newton-polishes a candidate zero; exposed for callers that need to
/// confirm an interior zero before probing its index.
pub fn polish_zero(field: &dyn VectorField, near: Vec2, max_dist: f64) -> Option<(Vec2, f64)> {
    newton_polish(field, near, max_dist)
}
