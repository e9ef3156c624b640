//! The Lima-type pair on the closed unit disk.
//!
//! Start from the planar fields `(1, 0)` and the radial field `(x, y)`,
//! whose bracket is the first field again. Push both forward to the open
//! unit disk through the diffeomorphism
//!
//! ```text
//! p  ->  R(w(r)) * p / sqrt(1 + |p|^2),      w(r) = -(twist/2) ln(1 - r^2)
//! ```
//!
//! a radial compactification followed by a twist that winds infinitely
//! as `r -> 1`. The twist is what lets the pushed-forward radial field
//! limit onto a nonvanishing rotation along the boundary circle:
//!
//! - the second field becomes the polynomial
//!   `(1 - r^2) q + twist * r^2 * q_perp`, whose only zero is the origin;
//! - the first field acquires a `sqrt(1 - r^2)` factor and, after an
//!   extra positive rescale by `(1 - r^2)^steepness`, extends continuously
//!   by zero to the whole closed disk, so its zero set is exactly the
//!   boundary circle.
//!
//! Rescaling the first field of a pair by a positive function keeps the
//! wedge condition `[X, Y] ^ X = 0` intact, so the pair satisfies the same
//! bracket hypothesis as the planar model while its fields have disjoint
//! zero sets. First-component derivatives are computed with dual numbers,
//! so Jacobians are exact to roundoff.

use crate::error::EvalError;
use crate::field::{FieldExpr, VectorField};
use crate::geom::{Mat2, Vec2};
use crate::parser::parse_field;
use std::ops::{Add, Mul, Neg, Sub};

/// Angular winding rate of the compactifying twist.
pub const TWIST: f64 = 1.0;

/// Forward-mode dual scalar carrying a gradient in `x`, `y`.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    dx: f64,
    dy: f64,
}

impl Dual {
    fn constant(v: f64) -> Self {
        Dual {
            v,
            dx: 0.0,
            dy: 0.0,
        }
    }

    fn var_x(v: f64) -> Self {
        Dual {
            v,
            dx: 1.0,
            dy: 0.0,
        }
    }

    fn var_y(v: f64) -> Self {
        Dual {
            v,
            dx: 0.0,
            dy: 1.0,
        }
    }

    fn ln(self) -> Self {
        Dual {
            v: self.v.ln(),
            dx: self.dx / self.v,
            dy: self.dy / self.v,
        }
    }

    fn sqrt(self) -> Self {
        let root = self.v.sqrt();
        let half = 0.5 / root;
        Dual {
            v: root,
            dx: self.dx * half,
            dy: self.dy * half,
        }
    }

    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        Dual {
            v: s,
            dx: self.dx * c,
            dy: self.dy * c,
        }
    }

    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        Dual {
            v: c,
            dx: -self.dx * s,
            dy: -self.dy * s,
        }
    }

    fn powf(self, a: f64) -> Self {
        let p = self.v.powf(a);
        let slope = a * self.v.powf(a - 1.0);
        Dual {
            v: p,
            dx: self.dx * slope,
            dy: self.dy * slope,
        }
    }

    fn scale(self, c: f64) -> Self {
        Dual {
            v: self.v * c,
            dx: self.dx * c,
            dy: self.dy * c,
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

/// The boundary-vanishing field of the pair: pushforward of `(1, 0)`
/// rescaled by `(1 - r^2)^steepness`, extended by zero outside the open
/// disk.
#[derive(Debug, Clone, Copy)]
pub struct LimaField {
    pub steepness: f64,
    pub twist: f64,
}

impl LimaField {
    fn components(&self, p: Vec2) -> Option<[Dual; 2]> {
        let x = Dual::var_x(p.x);
        let y = Dual::var_y(p.y);
        let r2 = x * x + y * y;
        let u = Dual::constant(1.0) - r2; // 1 - r^2
        if u.v <= 1e-14 {
            return None; // boundary or beyond: continuous extension by 0
        }
        // untwist the input point: q0 = R(-w) q
        let w = u.ln().scale(-self.twist / 2.0);
        let c = w.cos();
        let s = w.sin();
        let q0x = c * x + s * y;
        let q0y = -(s * x) + c * y;
        // pushforward of (1, 0) through the compactification, then the
        // twist correction, all in the untwisted frame:
        //   sqrt(1 - r^2) * (e1 - q0x * q0 + twist * q0x * q0_perp)
        let bx = Dual::constant(1.0) - q0x * q0x - (q0x * q0y).scale(self.twist);
        let by = -(q0x * q0y) + (q0x * q0x).scale(self.twist);
        let root = u.sqrt();
        let vx = root * bx;
        let vy = root * by;
        // rotate back by +w and apply the positive profile
        let g = u.powf(self.steepness);
        let out_x = g * (c * vx - s * vy);
        let out_y = g * (s * vx + c * vy);
        Some([out_x, out_y])
    }
}

impl VectorField for LimaField {
    fn eval(&self, p: Vec2) -> Result<Vec2, EvalError> {
        match self.components(p) {
            Some([cx, cy]) => Ok(Vec2::new(cx.v, cy.v)),
            None => Ok(Vec2::ZERO),
        }
    }

    fn jacobian(&self, p: Vec2) -> Result<Mat2, EvalError> {
        match self.components(p) {
            Some([cx, cy]) => Ok(Mat2::new(cx.dx, cx.dy, cy.dx, cy.dy)),
            None => Ok(Mat2::new(0.0, 0.0, 0.0, 0.0)),
        }
    }
}

/// Builds the pair: the boundary-vanishing field (zero set = boundary
/// circle) and the interior-zero polynomial field (zero set = origin).
pub fn build_lima_pair(steepness: f64) -> (LimaField, FieldExpr) {
    assert!(steepness > 0.0, "steepness must be positive");
    let x_field = LimaField {
        steepness,
        twist: TWIST,
    };
    // (1 - r^2) q + twist * r^2 * q_perp with twist = 1
    let y_field =
        parse_field("((1 - x^2 - y^2)*x - (x^2 + y^2)*y, (1 - x^2 - y^2)*y + (x^2 + y^2)*x)")
            .expect("fixed formula parses");
    (x_field, y_field)
}
