//! Recursive-descent parser for the field syntax.
//!
//! Grammar (whitespace allowed between tokens):
//!
//! ```text
//! field   := '(' expr ',' expr ')'
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? digits                      (integers only)
//! atom    := number | 'x' | 'y'
//!          | ('sin' | 'cos' | 'exp' | 'sqrt') '(' expr ')'
//!          | '(' expr ')'
//! number  := digits ('.' digits)?
//! ```
//!
//! Errors carry the byte offset of the offending token.

use crate::error::{ParseError, ParseErrorKind};
use crate::expr::{ScalarExpr, Var};
use crate::field::FieldExpr;

/// Parses a two-component field `"(expr_x, expr_y)"`.
pub fn parse_field(src: &str) -> Result<FieldExpr, ParseError> {
    let mut p = Parser::new(src);
    p.skip_ws();
    p.expect('(')?;
    let fx = p.parse_expr()?;
    p.skip_ws();
    p.expect(',')?;
    let fy = p.parse_expr()?;
    p.skip_ws();
    p.expect(')')?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(ParseErrorKind::TrailingInput));
    }
    Ok(FieldExpr::new(fx, fy))
}

/// Parses a single scalar expression.
pub fn parse_scalar(src: &str) -> Result<ScalarExpr, ParseError> {
    let mut p = Parser::new(src);
    let e = p.parse_expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(ParseErrorKind::TrailingInput));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b) if b == c as u8 => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => Err(self.error(ParseErrorKind::UnexpectedChar(b as char))),
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn parse_expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = ScalarExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = ScalarExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = ScalarExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = ScalarExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<ScalarExpr, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.parse_unary()?;
            return Ok(ScalarExpr::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.parse_atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.parse_exponent()?;
            return Ok(ScalarExpr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let digits_start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.error(ParseErrorKind::Expected("integer exponent")));
        }
        // a decimal point here means a fractional exponent was written
        if self.peek() == Some(b'.') {
            self.pos = start;
            return Err(self.error(ParseErrorKind::NonIntegerExponent));
        }
        let text = &self.src[digits_start..self.pos];
        let mag: i64 = text.parse().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::BadNumber,
        })?;
        let val = if negative { -mag } else { mag };
        i32::try_from(val).map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::BadNumber,
        })
    }

    fn parse_atom(&mut self) -> Result<ScalarExpr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.parse_expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(b'0'..=b'9' | b'.') => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() => self.parse_identifier(),
            Some(c) => Err(self.error(ParseErrorKind::UnexpectedChar(c as char))),
        }
    }

    fn parse_number(&mut self) -> Result<ScalarExpr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        let text = &self.src[start..self.pos];
        if text == "." || text.is_empty() {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::BadNumber,
            });
        }
        let value: f64 = text.parse().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::BadNumber,
        })?;
        Ok(ScalarExpr::Const(value))
    }

    fn parse_identifier(&mut self) -> Result<ScalarExpr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        match name {
            "x" => Ok(ScalarExpr::Var(Var::X)),
            "y" => Ok(ScalarExpr::Var(Var::Y)),
            "sin" | "cos" | "exp" | "sqrt" => {
                self.expect('(')?;
                let arg = self.parse_expr()?;
                self.expect(')')?;
                Ok(match name {
                    "sin" => ScalarExpr::Sin(Box::new(arg)),
                    "cos" => ScalarExpr::Cos(Box::new(arg)),
                    "exp" => ScalarExpr::Exp(Box::new(arg)),
                    _ => ScalarExpr::Sqrt(Box::new(arg)),
                })
            }
            _ => Err(ParseError {
                offset: start,
                kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
            }),
        }
    }
}
