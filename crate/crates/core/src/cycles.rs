//! Poincare return maps on transversal segments and cycle detection.
//!
//! The return map follows orbits until they re-cross the segment's line in
//! the same direction they originally crossed it, then refines the hit by
//! bisection. Cycle detection seeds orbits, looks for near-recurrence, and
//! polishes candidates into genuine closed orbits through a return-map
//! fixed point; only cycles closing to within `CLOSURE_GAP` are reported.

use crate::error::CycleError;
use crate::field::VectorField;
use crate::flow::{flow, flow_endpoint, FlowConfig, Termination};
use crate::geom::Vec2;
use crate::surface::Surface;
use serde::{Deserialize, Serialize};

/// Required closing accuracy for a reported cycle.
pub const CLOSURE_GAP: f64 = 1e-6;

/// Minimum normalized wedge between the field and the segment direction.
const TRANSVERSALITY_TOL: f64 = 1e-6;

/// One sample of a return map, in arc-length coordinates along the
/// segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub s_in: f64,
    /// Arc-length coordinate of the first return; `None` when the orbit
    /// never came back within the time budget.
    pub s_out: Option<f64>,
    pub return_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnMap {
    pub segment: (Vec2, Vec2),
    pub samples: Vec<ReturnSample>,
}

impl ReturnMap {
    pub fn returned(&self) -> usize {
        self.samples.iter().filter(|s| s.s_out.is_some()).count()
    }

    /// Largest |return(s) - s| over returning samples.
    pub fn max_displacement(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| s.s_out.map(|out| (out - s.s_in).abs()))
            .fold(0.0, f64::max)
    }
}

/// A closed orbit that is not a fixed point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cycle {
    pub points: Vec<Vec2>,
    pub period: f64,
    pub transversal: (Vec2, Vec2),
    pub closure_gap: f64,
}

impl Cycle {
    /// Distance from a point to the cycle polyline.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        let n = self.points.len();
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            best = best.min(crate::geom::segment_distance(p, a, b));
        }
        best
    }

    /// Winding of the cycle polyline around a point; nonzero when the
    /// cycle encloses it.
    pub fn encloses(&self, p: Vec2) -> bool {
        crate::geom::Curve::closed(self.points.clone()).winding_around(p) != 0
    }
}

/// First crossing of the oriented line through `base` with direction
/// `dir`, in the same crossing sense as `wanted_sign` (sign of the normal
/// velocity). Returns the crossing point and time.
fn first_line_crossing(
    field: &dyn VectorField,
    surface: &Surface,
    from: Vec2,
    base: Vec2,
    dir_unit: Vec2,
    wanted_sign: f64,
    t_budget: f64,
    cfg: &FlowConfig,
    segment_len: f64,
    restrict_to_segment: bool,
) -> Result<Option<(Vec2, f64)>, CycleError> {
    let normal = dir_unit.perp();
    let side = |p: Vec2| normal.dot(p - base);
    let traj = flow(field, surface, from, t_budget, cfg)?;
    if traj.reason != Termination::TimeReached && traj.samples.len() < 2 {
        return Ok(None);
    }

    // skip the initial departure: wait until the orbit is clearly off the
    // line before watching for the return crossing
    let mut armed = false;
    let arm_eps = 1e-7 * (1.0 + from.norm());
    for w in traj.samples.windows(2) {
        let (t0, p0) = w[0];
        let (t1, p1) = w[1];
        let s0 = side(p0);
        let s1 = side(p1);
        if !armed {
            if s0.abs() > arm_eps && s0 * wanted_sign < 0.0 {
                // on the approach side now; next crossing is a return
                armed = true;
            }
            if armed {
                // fall through and test this window too
            } else {
                continue;
            }
        }
        let crossing = s0 * wanted_sign < 0.0 && s1 * wanted_sign >= 0.0;
        if !crossing {
            continue;
        }
        // bisection on the crossing time within [t0, t1]
        let mut lo = 0.0f64;
        let mut hi = t1 - t0;
        let mut q = p1;
        for _ in 0..60 {
            let mid = (lo + hi) / 2.0;
            q = flow_endpoint(field, surface, p0, mid, cfg)?;
            if side(q) * wanted_sign >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t_hit = t0 + hi;
        let s_along = dir_unit.dot(q - base);
        if !restrict_to_segment || (-1e-9..=segment_len + 1e-9).contains(&s_along) {
            return Ok(Some((q, t_hit)));
        }
        // crossed the line outside the segment: keep flying
    }
    Ok(None)
}

/// Samples the first-return map of the field on the open transversal
/// segment from `a` to `b`. Fails when the field is not transverse to the
/// segment at a sample point.
pub fn poincare_return_map(
    field: &dyn VectorField,
    surface: &Surface,
    a: Vec2,
    b: Vec2,
    n_samples: usize,
    t_budget: f64,
    cfg: &FlowConfig,
) -> Result<ReturnMap, CycleError> {
    let dir = b - a;
    let len = dir.norm();
    let dir_unit = dir / len;
    let normal = dir_unit.perp();

    // event detection wants densely sampled orbits
    let mut cfg = *cfg;
    if cfg.max_step <= 0.0 {
        cfg.max_step = 0.02;
    }

    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let s_in = (i as f64 + 0.5) / n_samples as f64 * len;
        let p = a + dir_unit * s_in;
        if !surface.contains_with_tol(p, 1e-9) {
            continue;
        }
        let v = field.eval(p).map_err(crate::error::FlowError::from)?;
        let residual = v.cross(dir_unit).abs() / v.norm().max(1e-300);
        if residual < TRANSVERSALITY_TOL {
            return Err(CycleError::TransversalityFailure { s: s_in, residual });
        }
        let wanted_sign = normal.dot(v).signum();
        let hit = first_line_crossing(
            field,
            surface,
            p,
            a,
            dir_unit,
            wanted_sign,
            t_budget,
            &cfg,
            len,
            true,
        )?;
        samples.push(match hit {
            Some((q, t)) => ReturnSample {
                s_in,
                s_out: Some(dir_unit.dot(q - a)),
                return_time: Some(t),
            },
            None => ReturnSample {
                s_in,
                s_out: None,
                return_time: None,
            },
        });
    }
    if samples.iter().all(|s| s.s_out.is_none()) && !samples.is_empty() {
        return Err(CycleError::NoReturns);
    }
    Ok(ReturnMap {
        segment: (a, b),
        samples,
    })
}

/// Like [`poincare_return_map`] but keeps going when nothing returns;
/// used by scenario checks that must report no-return outcomes instead of
/// failing.
pub fn poincare_return_map_lenient(
    field: &dyn VectorField,
    surface: &Surface,
    a: Vec2,
    b: Vec2,
    n_samples: usize,
    t_budget: f64,
    cfg: &FlowConfig,
) -> Result<ReturnMap, CycleError> {
    match poincare_return_map(field, surface, a, b, n_samples, t_budget, cfg) {
        Err(CycleError::NoReturns) => Ok(ReturnMap {
            segment: (a, b),
            samples: Vec::new(),
        }),
        other => other,
    }
}

/// Flows each seed, watches for near-recurrence, and polishes candidates
/// into closed orbits via a return-map fixed point. Integration failures
/// on individual seeds are skipped; an empty result is a valid outcome.
pub fn detect_cycles(
    field: &dyn VectorField,
    surface: &Surface,
    seeds: &[Vec2],
    t_budget: f64,
    cfg: &FlowConfig,
) -> Vec<Cycle> {
    let mut dense_cfg = *cfg;
    if dense_cfg.max_step <= 0.0 {
        dense_cfg.max_step = 0.01;
    }
    let mut cycles: Vec<Cycle> = Vec::new();
    for &seed in seeds {
        if let Some(c) = cycle_from_seed(field, surface, seed, t_budget, &dense_cfg) {
            let duplicate = cycles
                .iter()
                .any(|known| known.distance_to(c.points[0]) < 1e-3);
            if !duplicate {
                cycles.push(c);
            }
        }
    }
    cycles
}

fn cycle_from_seed(
    field: &dyn VectorField,
    surface: &Surface,
    seed: Vec2,
    t_budget: f64,
    cfg: &FlowConfig,
) -> Option<Cycle> {
    let traj = flow(field, surface, seed, t_budget, cfg).ok()?;
    let pts = &traj.samples;
    if pts.len() < 10 {
        return None;
    }
    // typical spatial step, for the recurrence threshold
    let mut spatial = 0.0f64;
    for w in pts.windows(2) {
        spatial = spatial.max((w[1].1 - w[0].1).norm());
    }
    let near = (1.5 * spatial).max(1e-4);
    let min_period = 0.2;

    // spatial hash over earlier samples
    let cell = near.max(1e-12);
    let key = |p: Vec2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();

    for (i, &(ti, pi)) in pts.iter().enumerate() {
        let (kx, ky) = key(pi);
        let mut candidate: Option<usize> = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(idxs) = buckets.get(&(kx + dx, ky + dy)) {
                    for &j in idxs {
                        let (tj, pj) = pts[j];
                        if ti - tj < min_period || pi.dist(pj) > near {
                            continue;
                        }
                        let (Ok(vi), Ok(vj)) = (field.eval(pi), field.eval(pj)) else {
                            continue;
                        };
                        if vi.norm() < 1e-9 || vj.norm() < 1e-9 {
                            continue; // settling into a fixed point
                        }
                        if vi.dot(vj) / (vi.norm() * vj.norm()) < 0.9 {
                            continue;
                        }
                        // genuine excursion, not a slow crawl
                        let wandered = pts[j..=i]
                            .iter()
                            .map(|&(_, q)| q.dist(pj))
                            .fold(0.0f64, f64::max);
                        if wandered < 10.0 * near {
                            continue;
                        }
                        candidate = Some(j);
                        break 'search;
                    }
                }
            }
        }
        if let Some(j) = candidate {
            if let Some(c) = polish_cycle(field, surface, pts[j].1, cfg) {
                return Some(c);
            }
        }
        buckets.entry((kx, ky)).or_default().push(i);
    }
    None
}

/// Polishes a recurrence candidate into a closed orbit: fixed point of the
/// return map on a transversal through `near_point`.
fn polish_cycle(
    field: &dyn VectorField,
    surface: &Surface,
    near_point: Vec2,
    cfg: &FlowConfig,
) -> Option<Cycle> {
    let v = field.eval(near_point).ok()?;
    let v_unit = v.normalized()?;
    let n_unit = v_unit.perp();
    let half = 0.05f64.max(1e-3);
    let a = near_point - n_unit * half;
    let b = near_point + n_unit * half;
    let dir_unit = n_unit;
    let len = 2.0 * half;

    let point_at = |s: f64| a + dir_unit * s;
    let wanted_sign = dir_unit.perp().dot(v).signum();
    let ret = |s: f64| -> Option<(f64, f64)> {
        let p = point_at(s);
        if !surface.contains_with_tol(p, 1e-9) {
            return None;
        }
        let hit = first_line_crossing(
            field,
            surface,
            p,
            a,
            dir_unit,
            wanted_sign,
            50.0,
            cfg,
            len,
            false,
        )
        .ok()??;
        Some((dir_unit.dot(hit.0 - a), hit.1))
    };

    // secant iteration on g(s) = return(s) - s
    let mut s0 = half;
    let (mut r0, mut t0) = ret(s0)?;
    let mut g0 = r0 - s0;
    // continua of cycles (every s fixed) are accepted on the spot
    let mut s1 = (s0 + 0.2 * g0).clamp(1e-4, len - 1e-4);
    if (s1 - s0).abs() < 1e-12 {
        s1 = s0;
    }
    for _ in 0..30 {
        if g0.abs() < 1e-10 {
            break;
        }
        let (r1, t1) = ret(s1)?;
        let g1 = r1 - s1;
        if g1.abs() < 1e-10 {
            s0 = s1;
            r0 = r1;
            t0 = t1;
            g0 = g1;
            break;
        }
        let denom = g1 - g0;
        let s2 = if denom.abs() > 1e-15 {
            (s1 - g1 * (s1 - s0) / denom).clamp(1e-4, len - 1e-4)
        } else {
            (s1 + 0.5 * g1).clamp(1e-4, len - 1e-4)
        };
        s0 = s1;
        g0 = g1;
        s1 = s2;
        r0 = r1;
        t0 = t1;
    }
    let _ = r0;
    if g0.abs() > 1e-8 {
        return None;
    }
    let start = point_at(s0);
    let period = t0;
    if !(period > 0.0) {
        return None;
    }

    // reconstruct the closed polyline densely over one period
    let mut dense = *cfg;
    dense.max_step = period / 512.0;
    let orbit = flow(field, surface, start, period, &dense).ok()?;
    if orbit.reason != Termination::TimeReached {
        return None;
    }
    let gap = orbit.endpoint().dist(start);
    if gap > CLOSURE_GAP {
        return None;
    }
    Some(Cycle {
        points: orbit.samples.iter().map(|&(_, p)| p).collect(),
        period,
        transversal: (a, b),
        closure_gap: gap,
    })
}
