//! Vector fields on the plane.
//!
//! [`FieldExpr`] is the symbolic pair of scalar expressions produced by the
//! parser; it differentiates exactly. The [`VectorField`] trait is the
//! evaluation interface the rest of the crate works against, so numeric
//! fields (closures, pushforward constructions) plug into the same flow,
//! zero-finding, and index machinery.

use crate::error::EvalError;
use crate::expr::{self, ScalarExpr, Var};
use crate::geom::{Mat2, Vec2};
use crate::poly::Poly;
use crate::surface::Surface;
use std::fmt;

/// A two-component vector field evaluable on (a subset of) the plane.
pub trait VectorField {
    fn eval(&self, p: Vec2) -> Result<Vec2, EvalError>;

    /// Jacobian matrix at `p`. The default uses central differences with
    /// step `1e-5 * (1 + |p|)`; symbolic fields override this exactly.
    fn jacobian(&self, p: Vec2) -> Result<Mat2, EvalError> {
        let h = 1e-5 * (1.0 + p.norm());
        let fx1 = self.eval(p + Vec2::new(h, 0.0))?;
        let fx0 = self.eval(p - Vec2::new(h, 0.0))?;
        let fy1 = self.eval(p + Vec2::new(0.0, h))?;
        let fy0 = self.eval(p - Vec2::new(0.0, h))?;
        Ok(Mat2::new(
            (fx1.x - fx0.x) / (2.0 * h),
            (fy1.x - fy0.x) / (2.0 * h),
            (fx1.y - fx0.y) / (2.0 * h),
            (fy1.y - fy0.y) / (2.0 * h),
        ))
    }

    fn divergence(&self, p: Vec2) -> Result<f64, EvalError> {
        Ok(self.jacobian(p)?.trace())
    }
}

impl<'a, T: VectorField + ?Sized> VectorField for &'a T {
    fn eval(&self, p: Vec2) -> Result<Vec2, EvalError> {
        (**self).eval(p)
    }
    fn jacobian(&self, p: Vec2) -> Result<Mat2, EvalError> {
        (**self).jacobian(p)
    }
    fn divergence(&self, p: Vec2) -> Result<f64, EvalError> {
        (**self).divergence(p)
    }
}

/// A symbolic vector field: a pair of expression trees in `x`, `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    pub fx: ScalarExpr,
    pub fy: ScalarExpr,
}

impl FieldExpr {
    pub fn new(fx: ScalarExpr, fy: ScalarExpr) -> Self {
        FieldExpr {
            fx: fx.simplified(),
            fy: fy.simplified(),
        }
    }

    pub fn zero() -> Self {
        FieldExpr::new(ScalarExpr::Const(0.0), ScalarExpr::Const(0.0))
    }

    pub fn constant(v: Vec2) -> Self {
        FieldExpr::new(ScalarExpr::Const(v.x), ScalarExpr::Const(v.y))
    }

    pub fn is_polynomial(&self) -> bool {
        self.fx.is_polynomial() && self.fy.is_polynomial()
    }

    /// Componentwise sum.
    pub fn add(&self, other: &FieldExpr) -> FieldExpr {
        FieldExpr::new(
            expr::add(self.fx.clone(), other.fx.clone()),
            expr::add(self.fy.clone(), other.fy.clone()),
        )
    }

    /// Multiplication by a constant.
    pub fn scale(&self, c: f64) -> FieldExpr {
        FieldExpr::new(
            expr::mul(ScalarExpr::Const(c), self.fx.clone()),
            expr::mul(ScalarExpr::Const(c), self.fy.clone()),
        )
    }

    /// Multiplication by a scalar expression.
    pub fn scale_expr(&self, h: &ScalarExpr) -> FieldExpr {
        FieldExpr::new(
            expr::mul(h.clone(), self.fx.clone()),
            expr::mul(h.clone(), self.fy.clone()),
        )
    }

    /// Addition of a constant vector (used for perturbation stability).
    pub fn offset(&self, v: Vec2) -> FieldExpr {
        self.add(&FieldExpr::constant(v))
    }

    /// Exact symbolic divergence.
    pub fn divergence_expr(&self) -> ScalarExpr {
        expr::add(self.fx.diff(Var::X), self.fy.diff(Var::Y)).simplified()
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.fx, self.fy)
    }
}

impl VectorField for FieldExpr {
    fn eval(&self, p: Vec2) -> Result<Vec2, EvalError> {
        Ok(Vec2::new(self.fx.eval(p)?, self.fy.eval(p)?))
    }

    fn jacobian(&self, p: Vec2) -> Result<Mat2, EvalError> {
        Ok(Mat2::new(
            self.fx.diff(Var::X).eval(p)?,
            self.fx.diff(Var::Y).eval(p)?,
            self.fy.diff(Var::X).eval(p)?,
            self.fy.diff(Var::Y).eval(p)?,
        ))
    }

    fn divergence(&self, p: Vec2) -> Result<f64, EvalError> {
        self.divergence_expr().eval(p)
    }
}

/// Lie bracket `[X, Y] = DY * X - DX * Y`, exact for symbolic fields.
pub fn lie_bracket(x: &FieldExpr, y: &FieldExpr) -> FieldExpr {
    let comp = |yi: &ScalarExpr, xi: &ScalarExpr| {
        let dyx = expr::add(
            expr::mul(x.fx.clone(), yi.diff(Var::X)),
            expr::mul(x.fy.clone(), yi.diff(Var::Y)),
        );
        let dxy = expr::add(
            expr::mul(y.fx.clone(), xi.diff(Var::X)),
            expr::mul(y.fy.clone(), xi.diff(Var::Y)),
        );
        expr::sub(dyx, dxy)
    };
    FieldExpr::new(comp(&y.fx, &x.fx), comp(&y.fy, &x.fy))
}

/// Wedge scalar `X1*Y2 - X2*Y1`; vanishes exactly where the two fields are
/// linearly dependent.
pub fn wedge(x: &FieldExpr, y: &FieldExpr) -> ScalarExpr {
    expr::sub(
        expr::mul(x.fx.clone(), y.fy.clone()),
        expr::mul(x.fy.clone(), y.fx.clone()),
    )
    .simplified()
}

/// Numeric wedge of two evaluated vectors.
pub fn wedge_at(x: Vec2, y: Vec2) -> f64 {
    x.cross(y)
}

/// Numeric Lie bracket via Jacobians, for fields without symbolic form.
pub fn lie_bracket_at(
    x: &dyn VectorField,
    y: &dyn VectorField,
    p: Vec2,
) -> Result<Vec2, EvalError> {
    let xv = x.eval(p)?;
    let yv = y.eval(p)?;
    let dx = x.jacobian(p)?;
    let dy = y.jacobian(p)?;
    Ok(dy.apply(xv) - dx.apply(yv))
}

/// Outcome of the bracket-condition test `[X, Y] ^ X = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum BracketVerdict {
    /// Condition holds; `exact` distinguishes coefficient-level proof from
    /// a sampled check with `max_residual <= tol`.
    Holds { exact: bool, max_residual: f64 },
    Fails {
        exact: bool,
        witness: Vec2,
        residual: f64,
    },
}

impl BracketVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, BracketVerdict::Holds { .. })
    }
}

/// Default sampling grid for non-polynomial bracket checks.
pub const BRACKET_GRID: usize = 64;
/// Default residual tolerance for sampled bracket checks.
pub const BRACKET_TOL: f64 = 1e-8;

/// Tests Hypothesis `[X, Y] ^ X = 0` on the surface.
///
/// Polynomial pairs are decided exactly by expanding
/// `wedge(lie_bracket(X, Y), X)` to canonical form. Everything else falls
/// back to the symbolic residual sampled on a `BRACKET_GRID`^2 grid
/// intersected with the surface.
pub fn check_bracket_condition(
    x: &FieldExpr,
    y: &FieldExpr,
    surface: &Surface,
    tol: f64,
) -> Result<BracketVerdict, EvalError> {
    let bracket = lie_bracket(x, y);
    let residual_expr = wedge(&bracket, x);
    if x.is_polynomial() && y.is_polynomial() {
        if let Some(poly) = Poly::from_expr(&residual_expr) {
            if poly.is_zero() {
                return Ok(BracketVerdict::Holds {
                    exact: true,
                    max_residual: 0.0,
                });
            }
            // identity fails; report the worst sampled point as witness
            let (witness, residual) = max_on_grid(&residual_expr, surface)?;
            return Ok(BracketVerdict::Fails {
                exact: true,
                witness,
                residual,
            });
        }
    }
    let (witness, residual) = max_on_grid(&residual_expr, surface)?;
    if residual <= tol {
        Ok(BracketVerdict::Holds {
            exact: false,
            max_residual: residual,
        })
    } else {
        Ok(BracketVerdict::Fails {
            exact: false,
            witness,
            residual,
        })
    }
}

/// Sampled bracket check for fields with no symbolic form; the bracket is
/// assembled from Jacobians at each grid point.
pub fn check_bracket_condition_numeric(
    x: &dyn VectorField,
    y: &dyn VectorField,
    surface: &Surface,
    tol: f64,
) -> Result<BracketVerdict, EvalError> {
    let mut max_residual = 0.0;
    let mut witness = Vec2::ZERO;
    for p in surface.grid_points(BRACKET_GRID) {
        let bracket = lie_bracket_at(x, y, p)?;
        let xv = x.eval(p)?;
        let r = wedge_at(bracket, xv).abs();
        if r > max_residual {
            max_residual = r;
            witness = p;
        }
    }
    if max_residual <= tol {
        Ok(BracketVerdict::Holds {
            exact: false,
            max_residual,
        })
    } else {
        Ok(BracketVerdict::Fails {
            exact: false,
            witness,
            residual: max_residual,
        })
    }
}

fn max_on_grid(e: &ScalarExpr, surface: &Surface) -> Result<(Vec2, f64), EvalError> {
    let mut max_abs = -1.0;
    let mut witness = Vec2::ZERO;
    for p in surface.grid_points(BRACKET_GRID) {
        let v = e.eval(p)?.abs();
        if v > max_abs {
            max_abs = v;
            witness = p;
        }
    }
    Ok((witness, max_abs.max(0.0)))
}

/// Field defined by a closure, with finite-difference derivatives.
pub struct FnField<F>(pub F)
where
    F: Fn(Vec2) -> Result<Vec2, EvalError>;

impl<F> VectorField for FnField<F>
where
    F: Fn(Vec2) -> Result<Vec2, EvalError>,
{
    fn eval(&self, p: Vec2) -> Result<Vec2, EvalError> {
        (self.0)(p)
    }
}

/// Linear combination `sum_i c_i * F_i` of borrowed fields.
pub struct ComboField<'a> {
    terms: Vec<(f64, &'a dyn VectorField)>,
}

impl<'a> ComboField<'a> {
    pub fn new(terms: Vec<(f64, &'a dyn VectorField)>) -> Self {
        ComboField { terms }
    }

    pub fn sum(a: &'a dyn VectorField, b: &'a dyn VectorField) -> Self {
        ComboField::new(vec![(1.0, a), (1.0, b)])
    }
}

impl VectorField for ComboField<'_> {
    fn eval(&self, p: Vec2) -> Result<Vec2, EvalError> {
        let mut acc = Vec2::ZERO;
        for (c, f) in &self.terms {
            acc = acc + f.eval(p)? * *c;
        }
        Ok(acc)
    }

    fn jacobian(&self, p: Vec2) -> Result<Mat2, EvalError> {
        let mut acc = Mat2::new(0.0, 0.0, 0.0, 0.0);
        for (c, f) in &self.terms {
            let j = f.jacobian(p)?;
            acc = Mat2::new(
                acc.a + c * j.a,
                acc.b + c * j.b,
                acc.c + c * j.c,
                acc.d + c * j.d,
            );
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_field;
    use crate::surface::Surface;

    fn disk() -> Surface {
        Surface::disk(Vec2::ZERO, 1.0).unwrap()
    }

    #[test]
    fn eval_field_examples() {
        let rotation = parse_field("(-y, x)").unwrap();
        assert_eq!(
            rotation.eval(Vec2::new(1.0, 0.0)).unwrap(),
            Vec2::new(0.0, 1.0)
        );
        let radial = parse_field("(x, y)").unwrap();
        assert_eq!(
            radial.eval(Vec2::new(2.0, 3.0)).unwrap(),
            Vec2::new(2.0, 3.0)
        );
        let zero = FieldExpr::zero();
        assert_eq!(zero.eval(Vec2::new(-7.0, 0.3)).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn bracket_of_lima_planar_pair_is_first_field() {
        // [X1, Y1] = X1 for X1 = (1,0), Y1 = (x,y)
        let x1 = parse_field("(1, 0)").unwrap();
        let y1 = parse_field("(x, y)").unwrap();
        let b = lie_bracket(&x1, &y1);
        assert_eq!(
            Poly::exprs_equal(&b.fx, &x1.fx),
            Some(true),
            "bracket x-component"
        );
        assert_eq!(Poly::exprs_equal(&b.fy, &x1.fy), Some(true));
    }

    #[test]
    fn bracket_is_alternating() {
        let x = parse_field("(x^2 - y, x*y + 1)").unwrap();
        let b = lie_bracket(&x, &x);
        assert!(Poly::from_expr(&b.fx).unwrap().is_zero());
        assert!(Poly::from_expr(&b.fy).unwrap().is_zero());
    }

    #[test]
    fn bracket_rotation_radial_commutes() {
        // independent hand expansion: DY*X - DX*Y with Y = (x, y) radial,
        // X = (-y, x): DY = I so DY*X = (-y, x); DX = [[0,-1],[1,0]] so
        // DX*Y = (-y, x); difference is zero.
        let x = parse_field("(-y, x)").unwrap();
        let y = parse_field("(x, y)").unwrap();
        let b = lie_bracket(&x, &y);
        assert!(Poly::from_expr(&b.fx).unwrap().is_zero());
        assert!(Poly::from_expr(&b.fy).unwrap().is_zero());
    }

    #[test]
    fn wedge_examples() {
        let x = parse_field("(-y, x)").unwrap();
        let y = parse_field("(x, y)").unwrap();
        // alternating
        let w = wedge(&x, &x);
        assert!(Poly::from_expr(&w).unwrap().is_zero());
        // determinant of identity frame
        let e1 = parse_field("(1, 0)").unwrap();
        let e2 = parse_field("(0, 1)").unwrap();
        let w = wedge(&e1, &e2);
        let one = ScalarExpr::Const(1.0);
        assert_eq!(Poly::exprs_equal(&w, &one), Some(true));
        // rotation ^ radial = -(x^2 + y^2), by symbolic determinant
        let w = wedge(&x, &y);
        let expected = crate::parser::parse_scalar("-(x^2 + y^2)").unwrap();
        assert_eq!(Poly::exprs_equal(&w, &expected), Some(true));
    }

    #[test]
    fn bracket_condition_lima_planar_pair_holds_exactly() {
        let x1 = parse_field("(1, 0)").unwrap();
        let y1 = parse_field("(x, y)").unwrap();
        let v = check_bracket_condition(&x1, &y1, &disk(), 1e-8).unwrap();
        assert_eq!(
            v,
            BracketVerdict::Holds {
                exact: true,
                max_residual: 0.0
            }
        );
    }

    #[test]
    fn bracket_condition_commuting_pair_holds() {
        let x = parse_field("(-y, x)").unwrap();
        let y = parse_field("(x, y)").unwrap();
        assert!(check_bracket_condition(&x, &y, &disk(), 1e-8)
            .unwrap()
            .holds());
    }

    #[test]
    fn bracket_condition_failure_has_unit_residual() {
        // [X, Y] = (0, 1) for X = (1,0), Y = (0,x); wedge with X is -1
        let x = parse_field("(1, 0)").unwrap();
        let y = parse_field("(0, x)").unwrap();
        match check_bracket_condition(&x, &y, &disk(), 1e-8).unwrap() {
            BracketVerdict::Fails {
                exact, residual, ..
            } => {
                assert!(exact);
                assert!((residual - 1.0).abs() < 1e-12);
            }
            other => panic!("expected failure, got {:?}", other),
        }
    }

    #[test]
    fn non_polynomial_pairs_fall_back_to_sampling() {
        let x = parse_field("(sin(x), cos(y))").unwrap();
        let v = check_bracket_condition(&x, &x, &disk(), 1e-8).unwrap();
        match v {
            BracketVerdict::Holds {
                exact,
                max_residual,
            } => {
                assert!(!exact);
                assert!(max_residual <= 1e-8);
            }
            other => panic!("[X, X] = 0 must hold, got {:?}", other),
        }
    }

    #[test]
    fn symbolic_jacobian_matches_finite_differences() {
        let f = parse_field("(x^2 - y, sin(x)*y)").unwrap();
        let p = Vec2::new(0.4, -0.8);
        let sym = f.jacobian(p).unwrap();
        let num = FnField(|q| f.eval(q)).jacobian(p).unwrap();
        for (s, n) in [
            (sym.a, num.a),
            (sym.b, num.b),
            (sym.c, num.c),
            (sym.d, num.d),
        ] {
            assert!((s - n).abs() < 1e-8, "{} vs {}", s, n);
        }
    }
}
