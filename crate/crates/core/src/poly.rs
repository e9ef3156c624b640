//! Exact bivariate polynomials with rational coefficients.
//!
//! Used to decide polynomial identities (`expr == 0`) by expansion to a
//! canonical monomial map. Every finite `f64` literal is a dyadic rational,
//! so the conversion from an expression tree is exact; identities decided
//! here are exact statements about the parsed coefficients, with no grid
//! sampling involved.

use crate::expr::{ScalarExpr, Var};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Canonical form: monomial exponents `(i, j)` for `x^i y^j` mapped to a
/// nonzero rational coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert((0, 0), c);
        }
        p
    }

    pub fn variable(v: Var) -> Self {
        let mut p = Poly::zero();
        let key = match v {
            Var::X => (1, 0),
            Var::Y => (0, 1),
        };
        p.terms.insert(key, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    fn insert(&mut self, key: (u32, u32), coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in &self.terms {
            out.terms.insert(*k, -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &other.terms {
                out.insert((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(BigRational::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        out
    }

    /// Exact expansion of a polynomial expression tree. `None` when the
    /// tree contains a non-polynomial node (division, sqrt, trig, exp,
    /// negative exponent) or a non-finite constant.
    pub fn from_expr(e: &ScalarExpr) -> Option<Poly> {
        match e {
            ScalarExpr::Const(c) => {
                // every finite f64 is an exact dyadic rational
                BigRational::from_float(*c).map(Poly::constant).or({
                    if *c == 0.0 {
                        Some(Poly::zero())
                    } else {
                        None
                    }
                })
            }
            ScalarExpr::Var(v) => Some(Poly::variable(*v)),
            ScalarExpr::Neg(a) => Some(Poly::from_expr(a)?.neg()),
            ScalarExpr::Add(a, b) => Some(Poly::from_expr(a)?.add(&Poly::from_expr(b)?)),
            ScalarExpr::Sub(a, b) => Some(Poly::from_expr(a)?.sub(&Poly::from_expr(b)?)),
            ScalarExpr::Mul(a, b) => Some(Poly::from_expr(a)?.mul(&Poly::from_expr(b)?)),
            ScalarExpr::Pow(base, n) => {
                if *n < 0 {
                    None
                } else {
                    Some(Poly::from_expr(base)?.pow(*n as u32))
                }
            }
            ScalarExpr::Div(..)
            | ScalarExpr::Sin(_)
            | ScalarExpr::Cos(_)
            | ScalarExpr::Exp(_)
            | ScalarExpr::Sqrt(_) => None,
        }
    }

    /// Exact equality of two polynomial expressions.
    pub fn exprs_equal(a: &ScalarExpr, b: &ScalarExpr) -> Option<bool> {
        Some(Poly::from_expr(a)?.sub(&Poly::from_expr(b)?).is_zero())
    }

    /// Evaluates exactly at an integer point; used by tests as an
    /// independent route around floating-point evaluation.
    pub fn eval_int(&self, x: i64, y: i64) -> BigRational {
        let mut acc = BigRational::zero();
        for ((i, j), c) in &self.terms {
            let xi = BigInt::from(x).pow(*i);
            let yj = BigInt::from(y).pow(*j);
            acc += c * BigRational::from_integer(xi * yj);
        }
        acc
    }
}
