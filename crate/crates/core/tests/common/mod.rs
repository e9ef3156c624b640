//! Shared helpers for the integration suites: a deterministic generator,
//! the brute-force winding oracle, and random hyperbolic field instances.

// each test target compiles this module separately and uses a subset
#![allow(dead_code)]

use fieldindex_core::{parse_scalar, FieldExpr, ScalarExpr, Surface, Vec2, VectorField};

/// splitmix64: tiny, seedable, good enough for test-case generation.
pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        self.next_u64() as f64 / u64::MAX as f64
    }

    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

/// Brute-force winding oracle: plain angle sum at `n` uniform samples of
/// the circle of radius `r` around `center`. Independent of the adaptive
/// implementation.
pub fn angle_sum_oracle(field: &dyn VectorField, center: Vec2, r: f64, n: usize) -> i64 {
    let mut total = 0.0;
    let mut prev: Option<Vec2> = None;
    for i in 0..=n {
        let t = 2.0 * std::f64::consts::PI * (i % n) as f64 / n as f64;
        let p = center + Vec2::new(r * t.cos(), r * t.sin());
        let v = field.eval(p).expect("oracle eval");
        if let Some(pv) = prev {
            total += pv.angle_to(v);
        }
        prev = Some(v);
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Random degree-<=2 polynomial scalar with coefficients in [-c, c].
fn random_quadratic(rng: &mut SplitMix, c: f64) -> ScalarExpr {
    let coef = |rng: &mut SplitMix| format!("{:.4}", rng.in_range(-c, c));
    let text = format!(
        "{} + {}*x + {}*y + {}*x^2 + {}*x*y + {}*y^2",
        coef(rng),
        coef(rng),
        coef(rng),
        coef(rng),
        coef(rng),
        coef(rng)
    );
    parse_scalar(&text).unwrap()
}

/// Draws random degree-<=2 polynomial fields until `count` qualify: at
/// least one zero, all zeros inside radius 1.3 and pairwise separated,
/// hyperbolic (eigenvalue real parts bounded away from zero), no
/// curve-like zero cells anywhere in the scan disk of radius 2, and the
/// enclosing circle r = 1.7 comfortably zero-free.
pub fn random_hyperbolic_fields(count: usize, seed: u64) -> Vec<(FieldExpr, Vec<Vec2>)> {
    let scan_surface = Surface::disk(Vec2::ZERO, 2.0).unwrap();
    let mut rng = SplitMix::new(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 4000 {
        attempts += 1;
        let field = FieldExpr::new(
            random_quadratic(&mut rng, 1.0),
            random_quadratic(&mut rng, 1.0),
        );
        let Ok(scan) = fieldindex_core::find_zeros(&field, &scan_surface, 96) else {
            continue;
        };
        if !scan.suspect_cells.is_empty() || scan.zeros.is_empty() {
            continue;
        }
        let zeros: Vec<Vec2> = scan.zeros.iter().map(|z| z.point).collect();
        // zeros strictly inside the enclosing circle, pairwise separated
        let mut ok = zeros.iter().all(|z| z.norm() < 1.3);
        for (i, a) in zeros.iter().enumerate() {
            for b in zeros.iter().skip(i + 1) {
                ok &= a.dist(*b) > 0.35;
            }
        }
        if !ok {
            continue;
        }
        let hyperbolic = zeros.iter().all(|&z| {
            field
                .jacobian(z)
                .map(|j| j.eigenvalues().iter().all(|l| l.0.abs() > 1e-6))
                .unwrap_or(false)
        });
        if !hyperbolic {
            continue;
        }
        let clear = (0..64).all(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
            let p = Vec2::new(1.7 * t.cos(), 1.7 * t.sin());
            field.eval(p).map(|v| v.norm() > 0.05).unwrap_or(false)
        });
        if !clear {
            continue;
        }
        out.push((field, zeros));
    }
    out
}

/// Probe radius around a zero: clear of the other zeros and inside the
/// enclosing region.
pub fn probe_radius(z: Vec2, zeros: &[Vec2]) -> f64 {
    let nearest_other = zeros
        .iter()
        .filter(|&&w| w.dist(z) > 1e-9)
        .map(|&w| w.dist(z))
        .fold(f64::INFINITY, f64::min);
    (nearest_other / 3.0).min(0.15)
}
