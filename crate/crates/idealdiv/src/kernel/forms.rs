//! A small exterior algebra over the generators `dζ_k`, `dζ̄_k` (k = 1..n)
//! and `ε_j`, `ε*_j` (j = 1..m), with complex coefficients frozen at a
//! chart point.
//!
//! Every generator is odd, and a term is a subset of generators encoded as
//! a bit mask: `dζ_k` at bit `2(k-1)`, `dζ̄_k` at bit `2(k-1)+1`, then all
//! `ε_j`, then all `ε*_j`.  A term's canonical orientation is its
//! generators wedged in ascending bit order, and products pick up the sign
//! of the merge permutation.  Nothing here knows about polynomials or
//! quadrature; elements are plain linear combinations and the context
//! ([`FormSpace`]) only hands out generators and the `ε`-extraction.

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Ambient description: `n` complex slots (each carrying `dζ` and `dζ̄`)
/// and `m` odd frame pairs `ε`, `ε*`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FormSpace {
    n: usize,
    m: usize,
}

/// A complex linear combination of generator subsets.
#[derive(Clone, Debug, Default)]
pub struct FormElement {
    terms: BTreeMap<u32, Complex64>,
}

/// Sign of sorting the concatenation of two disjoint masks: counts the
/// pairs that sit out of order.
fn merge_sign(a: u32, b: u32) -> f64 {
    debug_assert_eq!(a & b, 0, "wedge factors must be disjoint");
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        inversions += ((a >> bit) >> 1).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl FormElement {
    pub fn zero() -> Self {
        FormElement { terms: BTreeMap::new() }
    }

    pub fn scalar(c: Complex64) -> Self {
        let mut e = FormElement::zero();
        e.insert_add(0, c);
        e
    }

    /// A single generator, identified by its bit.
    fn generator(bit: u32) -> Self {
        let mut e = FormElement::zero();
        e.insert_add(1 << bit, Complex64::new(1.0, 0.0));
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u32) -> Complex64 {
        self.terms.get(&mask).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.terms.iter().map(|(&mask, &c)| (mask, c))
    }

    fn insert_add(&mut self, mask: u32, c: Complex64) {
        let entry = self.terms.entry(mask).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.re == 0.0 && entry.im == 0.0 {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &FormElement) -> FormElement {
        let mut out = self.clone();
        for (&mask, &c) in &other.terms {
            out.insert_add(mask, c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> FormElement {
        if c.re == 0.0 && c.im == 0.0 {
            return FormElement::zero();
        }
        FormElement { terms: self.terms.iter().map(|(&m, &v)| (m, v * c)).collect() }
    }

    /// Graded anticommutative product; terms sharing a generator die.
    pub fn wedge(&self, other: &FormElement) -> FormElement {
        let mut out = FormElement::zero();
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                out.insert_add(ma | mb, ca * cb * merge_sign(ma, mb));
            }
        }
        out
    }

    /// `1 + x + x∧x/2! + ...` for a nilpotent even element.
    ///
    /// Panics if the series has not terminated after the generator count
    /// allows, which means the argument was not nilpotent-even.
    pub fn exp(&self) -> FormElement {
        let mut result = FormElement::scalar(Complex64::new(1.0, 0.0));
        let mut term = FormElement::scalar(Complex64::new(1.0, 0.0));
        for k in 1..=33u32 {
            term = term.wedge(self).scale(Complex64::new(1.0 / k as f64, 0.0));
            if term.is_zero() {
                return result;
            }
            result = result.add(&term);
        }
        panic!("exp argument is not nilpotent");
    }
}

impl FormSpace {
    /// A space with `n` complex slots and `m` frame pairs; everything must
    /// fit into the 32 generator bits.
    pub fn new(n: usize, m: usize) -> Self {
        assert!(2 * (n + m) <= 32, "too many generators for the bit mask");
        FormSpace { n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn dzeta_bit(&self, k: usize) -> u32 {
        assert!((1..=self.n).contains(&k), "slot index out of range");
        (2 * (k - 1)) as u32
    }

    fn eps_bit(&self, j: usize) -> u32 {
        assert!((1..=self.m).contains(&j), "frame index out of range");
        (2 * self.n + (j - 1)) as u32
    }

    pub fn dzeta(&self, k: usize) -> FormElement {
        FormElement::generator(self.dzeta_bit(k))
    }

    pub fn dzeta_bar(&self, k: usize) -> FormElement {
        FormElement::generator(self.dzeta_bit(k) + 1)
    }

    pub fn eps(&self, j: usize) -> FormElement {
        FormElement::generator(self.eps_bit(j))
    }

    pub fn eps_star(&self, j: usize) -> FormElement {
        FormElement::generator(self.eps_bit(j) + (self.m as u32))
    }

    /// Mask of every `dζ` and `dζ̄` bit: the top differential form.
    pub fn top_form_mask(&self) -> u32 {
        (1u32 << (2 * self.n)) - 1
    }

    /// Mask of every `ε` and `ε*` bit.
    pub fn full_eps_mask(&self) -> u32 {
        let all = (1u64 << (2 * self.n + 2 * self.m)) - 1;
        (all as u32) & !self.top_form_mask()
    }

    /// The sign relating the canonical (ascending-bit) full `ε` term to
    /// the product `(ε*_1∧ε_1)∧…∧(ε*_m∧ε_m)`.
    fn epsilon_top_sign(&self) -> f64 {
        let mut product = FormElement::scalar(Complex64::new(1.0, 0.0));
        for j in 1..=self.m {
            product = product.wedge(&self.eps_star(j)).wedge(&self.eps(j));
        }
        let c = product.coefficient(self.full_eps_mask());
        debug_assert!(c.im == 0.0 && c.re.abs() == 1.0);
        c.re
    }

    /// Extracts the component along `(Σ_j ε*_j∧ε_j)^m / m!`: terms
    /// carrying the full `ε` mask keep their differential part, all others
    /// vanish.
    pub fn epsilon_integral(&self, a: &FormElement) -> FormElement {
        let eps_all = self.full_eps_mask();
        let sigma = self.epsilon_top_sign();
        let mut out = FormElement::zero();
        for (mask, c) in a.terms() {
            if mask & eps_all == eps_all {
                // Differential bits all sit below the ε bits, so the
                // factorization (rest)∧(ε part) carries no extra sign.
                out.insert_add(mask & !eps_all, c.scale(sigma));
            }
        }
        out
    }

    /// Contraction with the frame dual of `ε_j`: removes the `ε_j` factor
    /// with the sign of carrying the contraction past the generators
    /// below it.
    pub fn contract_eps(&self, j: usize, a: &FormElement) -> FormElement {
        let bit = 1u32 << self.eps_bit(j);
        let mut out = FormElement::zero();
        for (mask, c) in a.terms() {
            if mask & bit == 0 {
                continue;
            }
            let below = (mask & (bit - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            out.insert_add(mask & !bit, c.scale(sign));
        }
        out
    }
}
