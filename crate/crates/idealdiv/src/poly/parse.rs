//! Text form of polynomials.
//!
//! ```text
//! poly   := ['-'] term (('+'|'-') term)*
//! term   := factor ('*'? factor)*
//! factor := coeff | var ['^' nat] | '(' poly ')' ['^' nat]
//! coeff  := nat ['/' nat]
//! var    := 'z' nat
//! ```
//!
//! Whitespace is insignificant.  Affine polynomials use `z1..zn`; the
//! projective entry point additionally admits `z0`.  Canonical printing (see
//! `format_with_names`) emits grevlex-descending terms with explicit `*` and
//! `^` only for exponents above one, and parsing that output reproduces the
//! polynomial exactly.

use super::{Monomial, Polynomial, Rational};
use num_bigint::BigInt;
use num_traits::Zero;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PolyError {
    /// Malformed input; `offset` is a byte position into the source text.
    Parse { offset: usize, message: String },
    /// A variable token outside the declared range, e.g. `z3` with two
    /// variables, or `z0` in an affine context.
    VariableOutOfRange { offset: usize, index: usize },
    /// Homogenization to a degree below the actual degree of the input.
    DegreeBelowActual { declared: usize, actual: usize },
    /// A section whose polynomial is not homogeneous of the declared degree.
    NotHomogeneous { declared: usize },
    /// Norm evaluation at the excluded point 0.
    ZeroPoint,
    PointLengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::Parse { offset, message } => {
                write!(f, "parse error at byte {}: {}", offset, message)
            }
            PolyError::VariableOutOfRange { offset, index } => {
                write!(f, "variable index out of range at byte {}: z{}", offset, index)
            }
            PolyError::DegreeBelowActual { declared, actual } => {
                write!(f, "declared degree {} is below actual degree {}", declared, actual)
            }
            PolyError::NotHomogeneous { declared } => {
                write!(f, "polynomial is not homogeneous of declared degree {}", declared)
            }
            PolyError::ZeroPoint => write!(f, "section norm is undefined at the zero point"),
            PolyError::PointLengthMismatch { expected, got } => {
                write!(f, "point has {} coordinates, expected {}", got, expected)
            }
        }
    }
}

impl std::error::Error for PolyError {}

impl Polynomial {
    /// Parse an affine polynomial in variables `z1..z{nvars}`.
    pub fn parse(text: &str, nvars: usize) -> Result<Polynomial, PolyError> {
        parse_with_base(text, nvars, 1)
    }

    /// Parse a polynomial in `z0..z{nvars-1}`; `nvars` counts `z0`.
    pub fn parse_projective(text: &str, nvars: usize) -> Result<Polynomial, PolyError> {
        parse_with_base(text, nvars, 0)
    }
}

/// `base` is the printed index of slot 0: 1 for affine input, 0 when the
/// homogenizing variable participates.
pub(crate) fn parse_with_base(text: &str, nvars: usize, base: usize) -> Result<Polynomial, PolyError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, nvars, base };
    p.skip_ws();
    let poly = p.parse_poly()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    base: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> PolyError {
        PolyError::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn parse_poly(&mut self) -> Result<Polynomial, PolyError> {
        self.skip_ws();
        let mut negate = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            negate = true;
        }
        let mut acc = self.parse_term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = &acc + &t;
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = &acc - &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.parse_factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.parse_factor()?;
                    acc = &acc * &f;
                }
                // juxtaposition: a new factor may start without an explicit *
                Some(c) if c == b'(' || c == b'z' || c.is_ascii_digit() => {
                    let f = self.parse_factor()?;
                    acc = &acc * &f;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Polynomial, PolyError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_poly()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                let e = self.parse_optional_exponent()?;
                Ok(inner.pow(e))
            }
            Some(b'z') => {
                let var_offset = self.pos;
                self.pos += 1;
                let idx = self.parse_nat_usize("variable index")?;
                if idx < self.base || idx - self.base >= self.nvars {
                    return Err(PolyError::VariableOutOfRange { offset: var_offset, index: idx });
                }
                let slot = idx - self.base;
                let e = self.parse_optional_exponent()?;
                let mut exps = vec![0u32; self.nvars];
                exps[slot] = u32::try_from(e).map_err(|_| self.err("exponent too large"))?;
                Ok(Polynomial::from_term(Monomial::new(exps), Rational::from(BigInt::from(1))))
            }
            Some(c) if c.is_ascii_digit() => {
                let numer = self.parse_nat_bigint()?;
                self.skip_ws();
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let den_offset = self.pos;
                    let denom = self.parse_nat_bigint()?;
                    if denom.is_zero() {
                        return Err(PolyError::Parse {
                            offset: den_offset,
                            message: "zero denominator".into(),
                        });
                    }
                    Ok(Polynomial::constant(self.nvars, Rational::new(numer, denom)))
                } else {
                    Ok(Polynomial::constant(self.nvars, Rational::from(numer)))
                }
            }
            _ => Err(self.err("expected a coefficient, variable, or '('")),
        }
    }

    fn parse_optional_exponent(&mut self) -> Result<usize, PolyError> {
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.parse_nat_usize("exponent")
        } else {
            Ok(1)
        }
    }

    fn parse_nat_usize(&mut self, what: &str) -> Result<usize, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(&format!("expected {}", what)));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<usize>()
            .map_err(|_| PolyError::Parse { offset: start, message: format!("{} too large", what) })
    }

    fn parse_nat_bigint(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<BigInt>()
            .expect("digit string parses as integer"))
    }
}
