//! Area-preservation probes for semiflows.
//!
//! Two independent tests: the divergence of the field sampled over the
//! surface (exact for symbolic fields), and the determinant of the
//! finite-difference Jacobian of the time-`t` flow map at probe points.
//! The flow preserves area exactly when the divergence vanishes; the
//! Jacobian determinant test catches the same thing dynamically.

use crate::field::VectorField;
use crate::flow::{flow_map_jacobian, FlowConfig};
use crate::geom::Vec2;
use crate::surface::Surface;
use serde::{Deserialize, Serialize};

/// Divergence/determinant threshold for the "preserving" verdict.
pub const AREA_TOL: f64 = 1e-6;

/// Grid used for divergence sampling.
const DIVERGENCE_GRID: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaReport {
    pub divergence_max: f64,
    pub jacobian_deviation_max: f64,
    pub preserving: bool,
    /// Probes dropped because integration failed.
    pub failures: usize,
}

/// Tests whether the flow of the field preserves area.
pub fn is_area_preserving(
    field: &dyn VectorField,
    surface: &Surface,
    probes: &[Vec2],
    t: f64,
    cfg: &FlowConfig,
) -> AreaReport {
    let mut divergence_max = 0.0f64;
    for p in surface.grid_points(DIVERGENCE_GRID) {
        if let Ok(d) = field.divergence(p) {
            divergence_max = divergence_max.max(d.abs());
        }
    }

    // determinant errors scale like (integration error) / h, so tighten
    // the integrator and use a wider difference step than elsewhere
    let mut tight = *cfg;
    tight.abs_tol = cfg.abs_tol.min(1e-12);
    tight.rel_tol = cfg.rel_tol.min(1e-12);

    let mut jacobian_deviation_max = 0.0f64;
    let mut failures = 0usize;
    for &p in probes {
        match flow_map_jacobian(field, surface, p, t, &tight, 1e-4) {
            Ok(j) => {
                jacobian_deviation_max = jacobian_deviation_max.max((j.det() - 1.0).abs());
            }
            Err(_) => failures += 1,
        }
    }

    AreaReport {
        divergence_max,
        jacobian_deviation_max,
        preserving: divergence_max < AREA_TOL && jacobian_deviation_max < AREA_TOL,
        failures,
    }
}

/// Evenly spread interior probe points for the Jacobian test.
pub fn default_probes(surface: &Surface, n: usize) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = surface
        .grid_points(8)
        .into_iter()
        .filter(|&p| surface.distance_to_boundary(p) > 0.05 * surface.retraction_margin().max(1.0))
        .collect();
    out.truncate(n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_field;

    #[test]
    fn rotation_preserves_area() {
        let f = parse_field("(-y, x)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 2.0).unwrap();
        let probes = [
            Vec2::new(0.5, 0.0),
            Vec2::new(-0.3, 0.8),
            Vec2::new(0.1, -1.0),
        ];
        let r = is_area_preserving(&f, &s, &probes, 1.0, &FlowConfig::default());
        assert!(r.preserving, "{r:?}");
        assert!(r.divergence_max < 1e-10, "symbolic divergence is exact");
    }

    #[test]
    fn radial_expansion_is_not_preserving() {
        let f = parse_field("(x, y)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 10.0).unwrap();
        let probes = [Vec2::new(0.5, 0.0), Vec2::new(0.0, 0.25)];
        let t = 0.5;
        let r = is_area_preserving(&f, &s, &probes, t, &FlowConfig::default());
        assert!(!r.preserving);
        assert!((r.divergence_max - 2.0).abs() < 1e-12);
        // det of the flow Jacobian is e^{2t}
        let expected = (2.0 * t).exp() - 1.0;
        assert!(
            (r.jacobian_deviation_max - expected).abs() < 1e-4,
            "deviation {} vs {}",
            r.jacobian_deviation_max,
            expected
        );
    }

    #[test]
    fn zero_field_preserves_trivially() {
        let f = parse_field("(0, 0)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 1.0).unwrap();
        let r = is_area_preserving(&f, &s, &[Vec2::ZERO], 2.0, &FlowConfig::default());
        assert!(r.preserving);
        assert_eq!(r.divergence_max, 0.0);
    }

    #[test]
    fn hamiltonian_polynomial_field_preserves() {
        // X = (dH/dy, -dH/dx) for H = x^2 y - y^3 / 3
        let f = parse_field("(x^2 - y^2, -2*x*y)").unwrap();
        let s = Surface::disk(Vec2::ZERO, 1.0).unwrap();
        let probes = [Vec2::new(0.4, 0.1), Vec2::new(-0.2, 0.3)];
        let r = is_area_preserving(&f, &s, &probes, 0.5, &FlowConfig::default());
        assert!(r.preserving, "{r:?}");
    }
}
