//! Scalar expression trees over the variables `x` and `y`.
//!
//! The node set is deliberately small: constants, the two variables,
//! `+ - * /`, integer powers, and the functions `sin cos exp sqrt`.
//! Every node has a total symbolic derivative, so fields written in this
//! language can be differentiated exactly (Jacobians, Lie brackets,
//! divergences) without any numeric differencing.

use crate::error::EvalError;
use crate::geom::Vec2;
use std::fmt;

/// The two plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

/// A scalar expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Var(Var),
    Neg(Box<ScalarExpr>),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    /// Integer power; negative exponents are rational functions.
    Pow(Box<ScalarExpr>, i32),
    Sin(Box<ScalarExpr>),
    Cos(Box<ScalarExpr>),
    Exp(Box<ScalarExpr>),
    Sqrt(Box<ScalarExpr>),
}

use ScalarExpr::*;

impl ScalarExpr {
    pub fn constant(c: f64) -> Self {
        Const(c)
    }

    pub fn var(v: Var) -> Self {
        Var(v)
    }

    /// Evaluates at `(p.x, p.y)`. Division by zero, square roots of
    /// negative numbers, and non-finite results are domain errors.
    pub fn eval(&self, p: Vec2) -> Result<f64, EvalError> {
        let v = self.eval_raw(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { at: p })
        }
    }

    fn eval_raw(&self, p: Vec2) -> Result<f64, EvalError> {
        Ok(match self {
            Const(c) => *c,
            Var(Var::X) => p.x,
            Var(Var::Y) => p.y,
            Neg(e) => -e.eval_raw(p)?,
            Add(a, b) => a.eval_raw(p)? + b.eval_raw(p)?,
            Sub(a, b) => a.eval_raw(p)? - b.eval_raw(p)?,
            Mul(a, b) => a.eval_raw(p)? * b.eval_raw(p)?,
            Div(a, b) => {
                let num = a.eval_raw(p)?;
                let den = b.eval_raw(p)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero { at: p });
                }
                num / den
            }
            Pow(base, n) => {
                let b = base.eval_raw(p)?;
                if *n < 0 && b == 0.0 {
                    return Err(EvalError::DivisionByZero { at: p });
                }
                b.powi(*n)
            }
            Sin(e) => e.eval_raw(p)?.sin(),
            Cos(e) => e.eval_raw(p)?.cos(),
            Exp(e) => e.eval_raw(p)?.exp(),
            Sqrt(e) => {
                let v = e.eval_raw(p)?;
                if v < 0.0 {
                    return Err(EvalError::SqrtOfNegative { at: p });
                }
                v.sqrt()
            }
        })
    }

    /// Exact partial derivative with respect to `var`, lightly simplified.
    pub fn diff(&self, var: Var) -> ScalarExpr {
        match self {
            Const(_) => Const(0.0),
            Var(v) => Const(if *v == var { 1.0 } else { 0.0 }),
            Neg(e) => neg(e.diff(var)),
            Add(a, b) => add(a.diff(var), b.diff(var)),
            Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Mul(a, b) => add(
                mul(a.diff(var), (**b).clone()),
                mul((**a).clone(), b.diff(var)),
            ),
            Div(a, b) => {
                // (a' b - a b') / b^2
                let num = sub(
                    mul(a.diff(var), (**b).clone()),
                    mul((**a).clone(), b.diff(var)),
                );
                div(num, pow((**b).clone(), 2))
            }
            Pow(base, n) => {
                if *n == 0 {
                    Const(0.0)
                } else {
                    // n * base^(n-1) * base'
                    mul(
                        mul(Const(f64::from(*n)), pow((**base).clone(), *n - 1)),
                        base.diff(var),
                    )
                }
            }
            Sin(e) => mul(cos_expr((**e).clone()), e.diff(var)),
            Cos(e) => neg(mul(sin_expr((**e).clone()), e.diff(var))),
            Exp(e) => mul(exp_expr((**e).clone()), e.diff(var)),
            Sqrt(e) => div(e.diff(var), mul(Const(2.0), sqrt_expr((**e).clone()))),
        }
    }

    /// True when the tree uses only constant, variable, `+ - *`, and
    /// nonnegative integer power nodes. A negative exponent is division in
    /// disguise, so it does not count.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Const(_) | Var(_) => true,
            Neg(e) => e.is_polynomial(),
            Add(a, b) | Sub(a, b) | Mul(a, b) => a.is_polynomial() && b.is_polynomial(),
            Pow(base, n) => *n >= 0 && base.is_polynomial(),
            Div(..) | Sin(_) | Cos(_) | Exp(_) | Sqrt(_) => false,
        }
    }

    /// Constant-folding and identity elimination. Exact: never rewrites in
    /// a way that changes values or hides domain errors (division by a
    /// constant zero is left in place).
    pub fn simplified(&self) -> ScalarExpr {
        match self {
            Const(_) | Var(_) => self.clone(),
            Neg(e) => neg(e.simplified()),
            Add(a, b) => add(a.simplified(), b.simplified()),
            Sub(a, b) => sub(a.simplified(), b.simplified()),
            Mul(a, b) => mul(a.simplified(), b.simplified()),
            Div(a, b) => div(a.simplified(), b.simplified()),
            Pow(base, n) => pow(base.simplified(), *n),
            Sin(e) => sin_expr(e.simplified()),
            Cos(e) => cos_expr(e.simplified()),
            Exp(e) => exp_expr(e.simplified()),
            Sqrt(e) => sqrt_expr(e.simplified()),
        }
    }
}

fn is_const(e: &ScalarExpr, v: f64) -> bool {
    matches!(e, Const(c) if *c == v)
}

pub(crate) fn neg(e: ScalarExpr) -> ScalarExpr {
    match e {
        Const(c) => Const(-c),
        Neg(inner) => *inner,
        other => Neg(Box::new(other)),
    }
}

pub(crate) fn add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    if let (Const(x), Const(y)) = (&a, &b) {
        return Const(x + y);
    }
    Add(Box::new(a), Box::new(b))
}

pub(crate) fn sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return neg(b);
    }
    if let (Const(x), Const(y)) = (&a, &b) {
        return Const(x - y);
    }
    Sub(Box::new(a), Box::new(b))
}

pub(crate) fn mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Const(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&a, -1.0) {
        return neg(b);
    }
    if is_const(&b, -1.0) {
        return neg(a);
    }
    if let (Const(x), Const(y)) = (&a, &b) {
        return Const(x * y);
    }
    Mul(Box::new(a), Box::new(b))
}

pub(crate) fn div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&a, 0.0) && !is_const(&b, 0.0) {
        return Const(0.0);
    }
    if let (Const(x), Const(y)) = (&a, &b) {
        if *y != 0.0 {
            return Const(x / y);
        }
    }
    Div(Box::new(a), Box::new(b))
}

pub(crate) fn pow(base: ScalarExpr, n: i32) -> ScalarExpr {
    match n {
        0 => Const(1.0),
        1 => base,
        _ => {
            if let Const(c) = base {
                if n > 0 || c != 0.0 {
                    return Const(c.powi(n));
                }
            }
            Pow(Box::new(base), n)
        }
    }
}

pub(crate) fn sin_expr(e: ScalarExpr) -> ScalarExpr {
    Sin(Box::new(e))
}

pub(crate) fn cos_expr(e: ScalarExpr) -> ScalarExpr {
    Cos(Box::new(e))
}

pub(crate) fn exp_expr(e: ScalarExpr) -> ScalarExpr {
    Exp(Box::new(e))
}

pub(crate) fn sqrt_expr(e: ScalarExpr) -> ScalarExpr {
    Sqrt(Box::new(e))
}

// Printing with minimal parentheses. Precedence levels: additive 1,
// multiplicative 2, unary minus 2, power 3, atoms 4.
impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

fn precedence(e: &ScalarExpr) -> u8 {
    match e {
        Add(..) | Sub(..) => 1,
        Mul(..) | Div(..) => 2,
        Neg(_) => 2,
        Pow(..) => 3,
        Const(c) if *c < 0.0 => 2,
        _ => 4,
    }
}

fn write_expr(e: &ScalarExpr, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
    let prec = precedence(e);
    let parens = prec < parent;
    if parens {
        write!(f, "(")?;
    }
    match e {
        Const(c) => {
            if *c == c.trunc() && c.abs() < 1e15 {
                write!(f, "{}", *c as i64)?;
            } else {
                write!(f, "{}", c)?;
            }
        }
        Var(v) => write!(f, "{}", v.name())?,
        Neg(inner) => {
            write!(f, "-")?;
            write_expr(inner, f, 3)?;
        }
        Add(a, b) => {
            write_expr(a, f, 1)?;
            write!(f, " + ")?;
            write_expr(b, f, 2)?;
        }
        Sub(a, b) => {
            write_expr(a, f, 1)?;
            write!(f, " - ")?;
            write_expr(b, f, 2)?;
        }
        Mul(a, b) => {
            write_expr(a, f, 2)?;
            write!(f, "*")?;
            write_expr(b, f, 3)?;
        }
        Div(a, b) => {
            write_expr(a, f, 2)?;
            write!(f, "/")?;
            write_expr(b, f, 3)?;
        }
        Pow(base, n) => {
            write_expr(base, f, 4)?;
            write!(f, "^{}", n)?;
        }
        Sin(a) => {
            write!(f, "sin(")?;
            write_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Cos(a) => {
            write!(f, "cos(")?;
            write_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Exp(a) => {
            write!(f, "exp(")?;
            write_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Sqrt(a) => {
            write!(f, "sqrt(")?;
            write_expr(a, f, 0)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}
