//! Local semiflows of inward vector fields.
//!
//! Forward-time integration with two methods: classic fixed-step RK4 and
//! an adaptive Dormand-Prince 5(4) pair. The boundary policy decides what
//! happens when a step leaves the surface: `Project` retracts the point
//! back (the right model for inward fields, making the surface positively
//! invariant by construction), `Reject` terminates the trajectory.

use crate::error::FlowError;
use crate::field::VectorField;
use crate::geom::{Mat2, Vec2};
use crate::surface::{Surface, BOUNDARY_TOL};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMethod {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Retract each accepted step onto the surface; steps that would leave
    /// by more than 10x the tolerance are rejected and retried smaller.
    Project,
    /// Terminate with `LeftSurface` on the first outside step.
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub method: FlowMethod,
    /// Fixed step size for `Rk4Fixed`.
    pub step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub boundary: BoundaryPolicy,
    pub max_steps: usize,
    pub blowup_norm: f64,
    /// Cap on the adaptive step size; 0 disables the cap. Event detection
    /// (crossings, recurrence) needs densely sampled orbits.
    pub max_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            method: FlowMethod::Rk45Adaptive,
            step: 1e-3,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            boundary: BoundaryPolicy::Project,
            max_steps: 4_000_000,
            blowup_norm: 1e12,
            max_step: 0.0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.step > 0.0) {
            return Err(format!("step must be positive, got {}", self.step));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err("tolerances must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TimeReached,
    LeftSurface,
    StepUnderflow,
    Blowup,
}

/// A time-stamped forward orbit. `samples[0]` is `(0, initial)`, times are
/// strictly increasing, and under the `Project` policy every sample lies
/// on the surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: Vec2,
    pub samples: Vec<(f64, Vec2)>,
    pub reason: Termination,
}

impl Trajectory {
    pub fn endpoint(&self) -> Vec2 {
        self.samples.last().map(|&(_, p)| p).unwrap_or(self.initial)
    }

    pub fn end_time(&self) -> f64 {
        self.samples.last().map(|&(t, _)| t).unwrap_or(0.0)
    }
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk45_step(
    field: &dyn VectorField,
    p: Vec2,
    h: f64,
) -> Result<(Vec2, f64), crate::error::EvalError> {
    let mut k = [Vec2::ZERO; 7];
    k[0] = field.eval(p)?;
    for i in 0..6 {
        let mut q = p;
        for (j, kj) in k.iter().enumerate().take(i + 1) {
            q = q + *kj * (h * A[i][j]);
        }
        k[i + 1] = field.eval(q)?;
    }
    let mut y5 = p;
    let mut y4 = p;
    for i in 0..7 {
        y5 = y5 + k[i] * (h * B5[i]);
        y4 = y4 + k[i] * (h * B4[i]);
    }
    Ok((y5, (y5 - y4).norm()))
}

fn rk4_step(field: &dyn VectorField, p: Vec2, h: f64) -> Result<Vec2, crate::error::EvalError> {
    let k1 = field.eval(p)?;
    let k2 = field.eval(p + k1 * (h / 2.0))?;
    let k3 = field.eval(p + k2 * (h / 2.0))?;
    let k4 = field.eval(p + k3 * h)?;
    Ok(p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrates `dy/dt = X(y)` from `p` for time `t >= 0` on the surface.
pub fn flow(
    field: &dyn VectorField,
    surface: &Surface,
    p: Vec2,
    t: f64,
    cfg: &FlowConfig,
) -> Result<Trajectory, FlowError> {
    if !surface.contains_with_tol(p, BOUNDARY_TOL) {
        return Err(FlowError::StartOutside { at: p });
    }
    let start = surface.retract(p).unwrap_or(p);
    let mut samples = vec![(0.0, start)];
    if t <= 0.0 {
        return Ok(Trajectory {
            initial: start,
            samples,
            reason: Termination::TimeReached,
        });
    }

    let h_min = 1e-14 * t.max(1.0);
    let excursion_cap = 10.0 * cfg.abs_tol.max(1e-12);
    let mut now = 0.0;
    let mut point = start;
    let mut h = match cfg.method {
        FlowMethod::Rk4Fixed => cfg.step,
        FlowMethod::Rk45Adaptive => cfg.step.min(t),
    };

    let underflow = |samples: Vec<(f64, Vec2)>| Trajectory {
        initial: start,
        samples,
        reason: Termination::StepUnderflow,
    };

    for _ in 0..cfg.max_steps {
        if now + h_min >= t {
            break;
        }
        let mut h_att = h.min(t - now);
        if cfg.max_step > 0.0 {
            h_att = h_att.min(cfg.max_step);
        }
        let attempted = match cfg.method {
            FlowMethod::Rk4Fixed => rk4_step(field, point, h_att).map(|q| (q, 0.0)),
            FlowMethod::Rk45Adaptive => rk45_step(field, point, h_att),
        };
        let (candidate, err) = match attempted {
            Ok(v) => v,
            Err(e) => {
                // domain error mid-step: retry smaller, like stiffness
                h = h_att / 2.0;
                if h < h_min {
                    return Err(FlowError::Eval(e));
                }
                continue;
            }
        };

        let mut next_h = h_att;
        if cfg.method == FlowMethod::Rk45Adaptive {
            let scale = cfg.abs_tol + cfg.rel_tol * point.norm().max(candidate.norm());
            let ratio = err / scale;
            if ratio > 1.0 {
                h = h_att * (0.9 / ratio.powf(0.2)).max(0.2);
                if h < h_min {
                    return Ok(underflow(samples));
                }
                continue;
            }
            next_h = if ratio > 0.0 {
                h_att * (0.9 / ratio.powf(0.2)).min(5.0)
            } else {
                h_att * 5.0
            };
        }

        if !candidate.is_finite() || candidate.norm() > cfg.blowup_norm {
            samples.push((now + h_att, candidate));
            return Ok(Trajectory {
                initial: start,
                samples,
                reason: Termination::Blowup,
            });
        }

        let mut accepted = candidate;
        match cfg.boundary {
            BoundaryPolicy::Project => {
                let excursion = surface.distance_outside(accepted);
                if excursion > excursion_cap {
                    h = h_att / 2.0;
                    if h < h_min {
                        return Ok(underflow(samples));
                    }
                    continue;
                }
                if excursion > 0.0 {
                    accepted = surface.retract(accepted)?;
                }
            }
            BoundaryPolicy::Reject => {
                if !surface.contains_with_tol(accepted, BOUNDARY_TOL) {
                    samples.push((now + h_att, accepted));
                    return Ok(Trajectory {
                        initial: start,
                        samples,
                        reason: Termination::LeftSurface,
                    });
                }
            }
        }

        now += h_att;
        h = next_h;
        samples.push((now, accepted));
        point = accepted;
    }

    Ok(Trajectory {
        initial: start,
        samples,
        reason: Termination::TimeReached,
    })
}

/// Endpoint of the flow; convenience over [`flow`].
pub fn flow_endpoint(
    field: &dyn VectorField,
    surface: &Surface,
    p: Vec2,
    t: f64,
    cfg: &FlowConfig,
) -> Result<Vec2, FlowError> {
    let traj = flow(field, surface, p, t, cfg)?;
    match traj.reason {
        Termination::TimeReached => Ok(traj.endpoint()),
        Termination::LeftSurface => Err(FlowError::Interrupted {
            reason: "left the surface",
            at: traj.endpoint(),
        }),
        Termination::StepUnderflow => Err(FlowError::Interrupted {
            reason: "step underflow",
            at: traj.endpoint(),
        }),
        Termination::Blowup => Err(FlowError::Interrupted {
            reason: "norm blowup",
            at: traj.endpoint(),
        }),
    }
}

/// Product-formula composition `(f_{t/k} o g_{t/k})^k (p)` where `f`, `g`
/// are the flows of the two fields. Converges to the flow of the sum as
/// `k` grows.
pub fn nelson_compose(
    first: &dyn VectorField,
    second: &dyn VectorField,
    surface: &Surface,
    p: Vec2,
    t: f64,
    k: u32,
    cfg: &FlowConfig,
) -> Result<Vec2, FlowError> {
    assert!(k >= 1, "composition count must be positive");
    let dt = t / f64::from(k);
    let mut q = p;
    for _ in 0..k {
        q = flow_endpoint(second, surface, q, dt, cfg)?;
        q = flow_endpoint(first, surface, q, dt, cfg)?;
    }
    Ok(q)
}

/// Jacobian of the time-`t` flow map at `p` by central differences with
/// step `h = step_scale * (1 + |p|)`.
pub fn flow_map_jacobian(
    field: &dyn VectorField,
    surface: &Surface,
    p: Vec2,
    t: f64,
    cfg: &FlowConfig,
    step_scale: f64,
) -> Result<Mat2, FlowError> {
    let h = step_scale * (1.0 + p.norm());
    let xp = flow_endpoint(field, surface, p + Vec2::new(h, 0.0), t, cfg)?;
    let xm = flow_endpoint(field, surface, p - Vec2::new(h, 0.0), t, cfg)?;
    let yp = flow_endpoint(field, surface, p + Vec2::new(0.0, h), t, cfg)?;
    let ym = flow_endpoint(field, surface, p - Vec2::new(0.0, h), t, cfg)?;
    Ok(Mat2::new(
        (xp.x - xm.x) / (2.0 * h),
        (yp.x - ym.x) / (2.0 * h),
        (xp.y - xm.y) / (2.0 * h),
        (yp.y - ym.y) / (2.0 * h),
    ))
}

/// One sample's outcome in a positive-invariance probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceViolation {
    pub sample: Vec2,
    pub time: f64,
    pub point: Vec2,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub violations: Vec<InvarianceViolation>,
    pub integration_failures: usize,
    pub max_distance: f64,
}

/// Flows each sample for `t_max` and reports excursions from the set `L`,
/// described by a distance function (`<= tol` means membership).
pub fn check_positive_invariance(
    set_distance: &dyn Fn(Vec2) -> f64,
    field: &dyn VectorField,
    surface: &Surface,
    samples: &[Vec2],
    t_max: f64,
    tol: f64,
    cfg: &FlowConfig,
) -> InvarianceReport {
    let mut report = InvarianceReport {
        violations: Vec::new(),
        integration_failures: 0,
        max_distance: 0.0,
    };
    for &s in samples {
        match flow(field, surface, s, t_max, cfg) {
            Ok(traj) => {
                let mut worst: Option<InvarianceViolation> = None;
                for &(time, point) in &traj.samples {
                    let d = set_distance(point);
                    report.max_distance = report.max_distance.max(d);
                    if d > tol {
                        let replace = worst.as_ref().map(|w| d > w.distance).unwrap_or(true);
                        if replace {
                            worst = Some(InvarianceViolation {
                                sample: s,
                                time,
                                point,
                                distance: d,
                            });
                        }
                    }
                }
                if let Some(v) = worst {
                    report.violations.push(v);
                }
            }
            Err(_) => report.integration_failures += 1,
        }
    }
    report
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermuteEntry {
    pub sample: Vec2,
    pub image: Vec2,
    /// Recovered scalar `c` with `TPhi(X_p) = c * X_q`.
    pub factor: f64,
    /// Normalized wedge residual between `TPhi(X_p)` and `X_q`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermuteReport {
    pub entries: Vec<PermuteEntry>,
    pub max_residual: f64,
    pub all_factors_positive: bool,
}

/// Tests that the flow of the second field permutes integral curves of the
/// first: the pushforward of `X_p` under the time-`t` map of `Y` must be a
/// positive multiple of `X` at the image point.
pub fn check_permutes_integral_curves(
    carried: &dyn VectorField,
    mover: &dyn VectorField,
    surface: &Surface,
    samples: &[Vec2],
    t: f64,
    cfg: &FlowConfig,
) -> Result<PermuteReport, FlowError> {
    let mut entries = Vec::with_capacity(samples.len());
    let mut max_residual = 0.0f64;
    let mut all_positive = true;
    for &p in samples {
        let xp = carried.eval(p)?;
        if xp.norm() < 1e-8 {
            return Err(FlowError::NearZeroSet {
                at: p,
                modulus: xp.norm(),
            });
        }
        let q = flow_endpoint(mover, surface, p, t, cfg)?;
        let xq = carried.eval(q)?;
        if xq.norm() < 1e-8 {
            return Err(FlowError::NearZeroSet {
                at: q,
                modulus: xq.norm(),
            });
        }
        let jac = flow_map_jacobian(mover, surface, p, t, cfg, 1e-5)?;
        let pushed = jac.apply(xp);
        let residual = pushed.cross(xq).abs() / (pushed.norm() * xq.norm());
        let factor = pushed.dot(xq) / xq.norm_sq();
        max_residual = max_residual.max(residual);
        all_positive &= factor > 0.0;
        entries.push(PermuteEntry {
            sample: p,
            image: q,
            factor,
            residual,
        });
    }
    Ok(PermuteReport {
        entries,
        max_residual,
        all_factors_positive: all_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_field;
    use crate::surface::Surface;

    fn disk2() -> Surface {
        Surface::disk(Vec2::ZERO, 2.0).unwrap()
    }

    #[test]
    fn contraction_flow_matches_closed_form() {
        let field = parse_field("(-x, -y)").unwrap();
        let cfg = FlowConfig::default();
        let traj = flow(&field, &disk2(), Vec2::new(1.0, 0.0), 1.0, &cfg).unwrap();
        assert_eq!(traj.reason, Termination::TimeReached);
        let expected = Vec2::new((-1.0f64).exp(), 0.0);
        assert!(
            traj.endpoint().dist(expected) < 1e-8,
            "endpoint {:?}",
            traj.endpoint()
        );
    }

    #[test]
    fn zero_field_is_stationary() {
        let field = parse_field("(0, 0)").unwrap();
        let cfg = FlowConfig::default();
        let p = Vec2::new(0.3, -1.2);
        let traj = flow(&field, &disk2(), p, 5.0, &cfg).unwrap();
        assert_eq!(traj.endpoint(), p);
    }

    #[test]
    fn rotation_quarter_turn() {
        let field = parse_field("(-y, x)").unwrap();
        let cfg = FlowConfig::default();
        let end = flow_endpoint(
            &field,
            &disk2(),
            Vec2::new(1.0, 0.0),
            std::f64::consts::FRAC_PI_2,
            &cfg,
        )
        .unwrap();
        assert!(end.dist(Vec2::new(0.0, 1.0)) < 1e-8, "got {:?}", end);
    }

    #[test]
    fn rk4_fixed_also_integrates() {
        let field = parse_field("(-y, x)").unwrap();
        let cfg = FlowConfig {
            method: FlowMethod::Rk4Fixed,
            step: 1e-3,
            ..FlowConfig::default()
        };
        let end = flow_endpoint(
            &field,
            &disk2(),
            Vec2::new(1.0, 0.0),
            std::f64::consts::PI,
            &cfg,
        )
        .unwrap();
        assert!(end.dist(Vec2::new(-1.0, 0.0)) < 1e-9, "got {:?}", end);
    }

    #[test]
    fn semiflow_composition_property() {
        let field = parse_field("(y - x*0.5, -x - y*0.1)").unwrap();
        let cfg = FlowConfig::default();
        let s = 0.7;
        let t = 0.9;
        let p = Vec2::new(0.4, 0.3);
        let once = flow_endpoint(&field, &disk2(), p, s + t, &cfg).unwrap();
        let mid = flow_endpoint(&field, &disk2(), p, s, &cfg).unwrap();
        let twice = flow_endpoint(&field, &disk2(), mid, t, &cfg).unwrap();
        assert!(once.dist(twice) < 1e-6, "{:?} vs {:?}", once, twice);
    }

    #[test]
    fn projection_keeps_surface_invariant() {
        // outward-pointing radial field: projection pins the orbit to the
        // boundary circle rather than letting it escape
        let field = parse_field("(x, y)").unwrap();
        let cfg = FlowConfig::default();
        let traj = flow(&field, &disk2(), Vec2::new(1.0, 0.0), 2.0, &cfg).unwrap();
        for &(_, p) in &traj.samples {
            assert!(disk2().contains_with_tol(p, 1e-9), "sample {:?} escaped", p);
        }
    }

    #[test]
    fn reject_policy_reports_exit() {
        let field = parse_field("(x, y)").unwrap();
        let cfg = FlowConfig {
            boundary: BoundaryPolicy::Reject,
            ..FlowConfig::default()
        };
        let traj = flow(&field, &disk2(), Vec2::new(1.0, 0.0), 2.0, &cfg).unwrap();
        assert_eq!(traj.reason, Termination::LeftSurface);
    }

    #[test]
    fn blowup_detected() {
        // x' = 1 + x^2 blows up in finite time ~ pi/2 from 0
        let field = parse_field("(1 + x^2, 0)").unwrap();
        let huge = Surface::halfplane_window(-1e13, 1e13, 1e13)
            .unwrap()
            .with_retraction_margin(1.0);
        let cfg = FlowConfig {
            blowup_norm: 1e6,
            boundary: BoundaryPolicy::Reject,
            ..FlowConfig::default()
        };
        let traj = flow(&field, &huge, Vec2::new(0.0, 1.0), 3.0, &cfg).unwrap();
        assert!(matches!(
            traj.reason,
            Termination::Blowup | Termination::StepUnderflow
        ));
    }

    #[test]
    fn nelson_exact_for_commuting_translations() {
        let fx = parse_field("(1, 0)").unwrap();
        let fy = parse_field("(0, 1)").unwrap();
        let s = Surface::halfplane_window(-10.0, 10.0, 10.0).unwrap();
        let cfg = FlowConfig::default();
        for k in [1u32, 3, 8] {
            let end = nelson_compose(&fx, &fy, &s, Vec2::new(0.0, 1.0), 1.0, k, &cfg).unwrap();
            assert!(end.dist(Vec2::new(1.0, 2.0)) < 1e-9, "k={k} end={end:?}");
        }
    }

    #[test]
    fn nelson_with_itself_matches_doubled_field() {
        let f = parse_field("(-y, x)").unwrap();
        let doubled = parse_field("(-2*y, 2*x)").unwrap();
        let s = disk2();
        let cfg = FlowConfig::default();
        let p = Vec2::new(1.0, 0.0);
        let direct = flow_endpoint(&doubled, &s, p, 0.4, &cfg).unwrap();
        for k in [2u32, 5] {
            let composed = nelson_compose(&f, &f, &s, p, 0.4, k, &cfg).unwrap();
            assert!(composed.dist(direct) < 1e-8, "k={k}");
        }
    }

    #[test]
    fn invariance_of_circle_under_rotation() {
        let rot = parse_field("(-y, x)").unwrap();
        let s = disk2();
        let cfg = FlowConfig::default();
        let circle_dist = |p: Vec2| (p.norm() - 1.0).abs();
        let samples: Vec<Vec2> = (0..8)
            .map(|i| {
                let a = i as f64 * 0.7;
                Vec2::new(a.cos(), a.sin())
            })
            .collect();
        let report = check_positive_invariance(&circle_dist, &rot, &s, &samples, 3.0, 1e-6, &cfg);
        assert!(report.violations.is_empty(), "{:?}", report.violations);

        // radial field escapes the circle
        let radial = parse_field("(x, y)").unwrap();
        let report =
            check_positive_invariance(&circle_dist, &radial, &s, &samples, 0.5, 1e-6, &cfg);
        assert_eq!(report.violations.len(), samples.len());
    }

    #[test]
    fn permute_integral_curves_lima_planar_pair() {
        // carried X = (1,0), mover Y = (x,y): time-t map is e^t * id,
        // pushing X_p to e^t * (1,0) which is parallel to X with c = e^t
        let x = parse_field("(1, 0)").unwrap();
        let y = parse_field("(x, y)").unwrap();
        let s = Surface::halfplane_window(-6.0, 6.0, 6.0).unwrap();
        let cfg = FlowConfig::default();
        let report = check_permutes_integral_curves(
            &x,
            &y,
            &s,
            &[Vec2::new(1.0, 1.0), Vec2::new(0.5, 2.0)],
            0.3,
            &cfg,
        )
        .unwrap();
        assert!(
            report.max_residual < 1e-5,
            "residual {}",
            report.max_residual
        );
        assert!(report.all_factors_positive);
        for e in &report.entries {
            assert!(
                (e.factor - 0.3f64.exp()).abs() < 1e-4,
                "factor {}",
                e.factor
            );
        }
    }

    #[test]
    fn permute_rejects_samples_on_zero_set() {
        let x = parse_field("(x, y)").unwrap();
        let cfg = FlowConfig::default();
        let err =
            check_permutes_integral_curves(&x, &x, &disk2(), &[Vec2::ZERO], 0.1, &cfg).unwrap_err();
        assert!(matches!(err, FlowError::NearZeroSet { .. }));
    }
}
