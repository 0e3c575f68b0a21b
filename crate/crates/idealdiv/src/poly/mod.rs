//! Sparse multivariate polynomials over Q.
//!
//! A polynomial is a map from exponent vectors to nonzero rational
//! coefficients.  The number of variables is fixed per polynomial and mixing
//! arities in arithmetic is a programming error (asserted, not silently
//! broadcast).  Term storage is a `BTreeMap` keyed by graded reverse
//! lexicographic order, so iteration is deterministic and canonical printing
//! is just reverse iteration.
//!
//! Affine polynomials name their variables `z1..zn`.  Homogeneous sections
//! live in one extra variable `z0` (slot 0) and print accordingly.

mod parse;

pub use parse::PolyError;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rational = BigRational;

/// Convenience constructor for small rational constants.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

// ============================================================================
// Monomials
// ============================================================================

/// Exponent vector of a single monomial.  `Ord` is graded reverse
/// lexicographic, ascending: compare total degree first, then the rightmost
/// differing exponent decides with the larger entry ranked smaller.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    /// The monomial 1.
    pub fn unit(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.0.len(), other.0.len(), "monomial arity mismatch");
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        assert_eq!(self.0.len(), other.0.len(), "monomial arity mismatch");
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.0.len(), other.0.len(), "monomial arity mismatch");
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Equal degree: scan from the last variable; the first difference
        // found ranks the monomial with the LARGER exponent as smaller.
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            match a.cmp(b) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {}
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `nvars` variables of total degree at most `max_degree`,
/// in ascending grevlex order.  Count is C(nvars + max_degree, nvars).
pub fn monomials_up_to(nvars: usize, max_degree: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut layer = Vec::new();
        enumerate_degree(nvars, &mut vec![0u32; nvars], 0, d, &mut layer);
        layer.sort();
        out.extend(layer);
    }
    out
}

fn enumerate_degree(
    nvars: usize,
    current: &mut Vec<u32>,
    var: usize,
    remaining: usize,
    out: &mut Vec<Monomial>,
) {
    if nvars == 0 {
        if remaining == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if var == nvars - 1 {
        current[var] = remaining as u32;
        out.push(Monomial(current.clone()));
        current[var] = 0;
        return;
    }
    for e in 0..=remaining {
        current[var] = e as u32;
        enumerate_degree(nvars, current, var + 1, remaining - e, out);
    }
    current[var] = 0;
}

/// Binomial coefficient as usize; panics on overflow, which cannot happen at
/// the problem sizes this crate targets.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    (num / den).to_usize().expect("binomial overflow")
}

// ============================================================================
// Polynomials
// ============================================================================

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::unit(nvars), c);
        }
        p
    }

    /// The variable with slot index `var` (0-based).
    pub fn variable(nvars: usize, var: usize) -> Self {
        assert!(var < nvars, "variable slot out of range");
        let mut exps = vec![0u32; nvars];
        exps[var] = 1;
        Self::from_term(Monomial(exps), Rational::one())
    }

    pub fn from_term(mono: Monomial, coeff: Rational) -> Self {
        let mut p = Self::zero(mono.nvars());
        if !coeff.is_zero() {
            p.terms.insert(mono, coeff);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree.  The zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Terms in ascending grevlex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Rational {
        self.terms.get(mono).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Rational) {
        assert_eq!(mono.nvars(), self.nvars, "monomial arity mismatch");
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.mul(mono), v.clone())).collect(),
        }
    }

    pub fn pow(&self, e: usize) -> Polynomial {
        let mut result = Polynomial::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn partial_derivative(&self, var: usize) -> Polynomial {
        assert!(var < self.nvars, "variable slot out of range");
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[var] = e - 1;
            out.add_term(Monomial(exps), c * Rational::from(BigInt::from(e)));
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars, "point length mismatch");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (var, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t *= &point[var];
                }
            }
            acc += t;
        }
        acc
    }

    /// Floating point evaluation at a complex point.  Precomputes per-variable
    /// power tables; the quadrature loops call this at every node.
    pub fn eval_complex(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars, "point length mismatch");
        let mut max_exp = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (v, &e) in m.exponents().iter().enumerate() {
                if e > max_exp[v] {
                    max_exp[v] = e;
                }
            }
        }
        let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(self.nvars);
        for (v, &me) in max_exp.iter().enumerate() {
            let mut tab = Vec::with_capacity(me as usize + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            tab.push(acc);
            for _ in 0..me {
                acc *= point[v];
                tab.push(acc);
            }
            powers.push(tab);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = Complex64::new(rational_to_f64(c), 0.0);
            for (v, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= powers[v][e as usize];
                }
            }
            sum += t;
        }
        sum
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(|m| m.total_degree());
        match degrees.next() {
            None => true,
            Some(d0) => degrees.all(|d| d == d0),
        }
    }

    /// Canonical text form with slot 0 printed as `z0` (projective naming).
    pub fn to_string_projective(&self) -> String {
        self.format_with_base(0)
    }

    pub(crate) fn format_with_base(&self, base: u32) -> String {
        self.format_with_names(&|slot| format!("z{}", slot as u32 + base))
    }

    /// Render with caller-chosen variable names; used where the canonical
    /// `z`-naming would be ambiguous (e.g. mixed zeta/z Hefer forms).
    pub fn format_with_names(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (mono, coeff)) in self.terms.iter().rev().enumerate() {
            let neg = coeff.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let abs = coeff.abs();
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || mono.is_unit() {
                factors.push(abs.to_string());
            }
            for (slot, &e) in mono.exponents().iter().enumerate() {
                if e == 1 {
                    factors.push(name(slot));
                } else if e > 1 {
                    factors.push(format!("{}^{}", name(slot), e));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

pub(crate) fn rational_to_f64(c: &Rational) -> f64 {
    // Ratio::to_f64 handles magnitudes beyond f64 by returning inf; exact
    // coefficients in this crate stay far below that.
    c.to_f64().unwrap_or(f64::NAN)
}

/// Canonical monomial rendering with affine naming, e.g. `z1*z2^2`.
pub fn monomial_string(mono: &Monomial) -> String {
    Polynomial::from_term(mono.clone(), Rational::one()).to_string()
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_with_base(1))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

// ============================================================================
// Homogeneous sections
// ============================================================================

/// A homogeneous polynomial of declared degree `d` in `n + 1` variables
/// `z0..zn`, i.e. a section of O(d) on projective n-space.  The zero section
/// is allowed at any degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomogeneousSection {
    poly: Polynomial,
    degree: usize,
}

impl HomogeneousSection {
    pub fn new(poly: Polynomial, degree: usize) -> Result<Self, PolyError> {
        if !poly.is_zero() {
            if !poly.is_homogeneous() || poly.degree() != degree {
                return Err(PolyError::NotHomogeneous { declared: degree });
            }
        }
        Ok(HomogeneousSection { poly, degree })
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Ambient projective dimension n (poly has n + 1 slots).
    pub fn n(&self) -> usize {
        self.poly.nvars() - 1
    }

    pub fn eval_complex(&self, point: &[Complex64]) -> Complex64 {
        self.poly.eval_complex(point)
    }
}

impl fmt::Display for HomogeneousSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly.to_string_projective())
    }
}

/// `z0^d * F(z'/z0)` as a degree-`d` section; errors if `d` is below the
/// actual degree of `F`.
pub fn homogenize(f: &Polynomial, d: usize) -> Result<HomogeneousSection, PolyError> {
    if !f.is_zero() && f.degree() > d {
        return Err(PolyError::DegreeBelowActual { declared: d, actual: f.degree() });
    }
    let n = f.nvars();
    let mut poly = Polynomial::zero(n + 1);
    for (m, c) in f.terms() {
        let mut exps = Vec::with_capacity(n + 1);
        exps.push((d - m.total_degree()) as u32);
        exps.extend_from_slice(m.exponents());
        poly.add_term(Monomial::new(exps), c.clone());
    }
    HomogeneousSection::new(poly, d)
}

/// Substitute `z0 = 1`, dropping back to the affine chart.
pub fn dehomogenize(s: &HomogeneousSection) -> Polynomial {
    let n = s.n();
    let mut out = Polynomial::zero(n);
    for (m, c) in s.poly.terms() {
        out.add_term(Monomial::new(m.exponents()[1..].to_vec()), c.clone());
    }
    out
}

/// Pointwise squared norm of a tuple of sections at a nonzero point of
/// C^{n+1}: the sum of |f_j(z)|^2 / |z|^(2 d_j).  Homogeneity makes this
/// invariant under complex scaling of `z`.
pub fn section_norm_sq(sections: &[HomogeneousSection], z: &[Complex64]) -> Result<f64, PolyError> {
    let norm2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(PolyError::ZeroPoint);
    }
    let mut total = 0.0;
    for s in sections {
        if z.len() != s.poly.nvars() {
            return Err(PolyError::PointLengthMismatch { expected: s.poly.nvars(), got: z.len() });
        }
        let v = s.poly.eval_complex(z);
        total += v.norm_sqr() / norm2.powi(s.degree as i32);
    }
    Ok(total)
}
