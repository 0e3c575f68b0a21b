//! Interpolation of a polynomial difference `F(ζ) - F(z)` by forms along
//! `ζ_k - z_k`.
//!
//! The decomposition produced here is exact over the rationals: writing
//! both point sets into one variable list (first the `ζ` slots, then the
//! `z` slots), it returns polynomials `h^1, ..., h^n` with
//!
//! ```text
//! F(ζ) - F(z) = Σ_k h^k(ζ, z) · (ζ_k - z_k),    deg h^k ≤ deg F - 1.
//! ```
//!
//! The construction telescopes through the hybrid points
//! `(z_1, ..., z_{k-1}, ζ_k, ..., ζ_n)` and divides each bracket by its
//! linear factor with synthetic division, so no linear solve is involved
//! and the result is deterministic.

use crate::poly::{Monomial, Polynomial};

/// The interpolating forms for one polynomial: `forms[k]` is `h^{k+1}`,
/// a polynomial in `2n` variables whose first `n` slots are the `ζ` point
/// and whose last `n` slots are the `z` point.
#[derive(Clone, Debug)]
pub struct HeferDecomposition {
    n: usize,
    forms: Vec<Polynomial>,
}

impl HeferDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The form attached to slot `k` (1-based).
    pub fn form(&self, k: usize) -> &Polynomial {
        assert!((1..=self.n).contains(&k), "slot index out of range");
        &self.forms[k - 1]
    }

    pub fn forms(&self) -> &[Polynomial] {
        &self.forms
    }
}

/// Embeds an `n`-variable polynomial into `2n` variables, sending
/// variable `i` to the `ζ` slot when `i >= split` and to the `z` slot
/// otherwise.
fn embed_hybrid(f: &Polynomial, split: usize) -> Polynomial {
    let n = f.nvars();
    let mut out = Polynomial::zero(2 * n);
    for (mono, coeff) in f.terms() {
        let mut exps = vec![0u32; 2 * n];
        for i in 0..n {
            let e = mono.exponent(i);
            if i >= split {
                exps[i] = e;
            } else {
                exps[n + i] = e;
            }
        }
        out.add_term(Monomial::new(exps), coeff.clone());
    }
    out
}

/// Exact division of `p` by `(x_a - x_b)` for a polynomial vanishing on
/// `x_a = x_b`: each power of `x_a` is expanded through the geometric
/// telescope, and the substituted remainder must cancel.
fn divide_by_slot_difference(p: &Polynomial, a: usize, b: usize) -> (Polynomial, Polynomial) {
    let nv = p.nvars();
    let mut quotient = Polynomial::zero(nv);
    let mut remainder = Polynomial::zero(nv);
    for (mono, coeff) in p.terms() {
        let e = mono.exponent(a);
        let mut base = mono.exponents().to_vec();
        base[a] = 0;
        // x_a^e = (x_a - x_b)·Σ_{t<e} x_a^t x_b^{e-1-t} + x_b^e.
        for t in 0..e {
            let mut exps = base.clone();
            exps[a] = t;
            exps[b] += e - 1 - t;
            quotient.add_term(Monomial::new(exps), coeff.clone());
        }
        let mut exps = base;
        exps[b] += e;
        remainder.add_term(Monomial::new(exps), coeff.clone());
    }
    (quotient, remainder)
}

/// Splits `F(ζ) - F(z)` along the coordinate differences.
pub fn hefer_decompose(f: &Polynomial) -> HeferDecomposition {
    let n = f.nvars();
    let mut forms = Vec::with_capacity(n);
    for k in 0..n {
        // F at (z_1..z_k, ζ_{k+1}..ζ_n) minus F at (z_1..z_{k+1}, ζ_{k+2}..ζ_n).
        let upper = embed_hybrid(f, k);
        let lower = embed_hybrid(f, k + 1);
        let bracket = &upper - &lower;
        let (quotient, remainder) = divide_by_slot_difference(&bracket, k, n + k);
        assert!(remainder.is_zero(), "bracket must vanish on the diagonal");
        forms.push(quotient);
    }
    HeferDecomposition { n, forms }
}

/// Checks the interpolation identity and the degree bound exactly.
pub fn verify_hefer(f: &Polynomial, h: &HeferDecomposition) -> bool {
    let n = f.nvars();
    if h.n != n {
        return false;
    }
    let bound = f.degree().saturating_sub(1);
    for form in &h.forms {
        if form.nvars() != 2 * n {
            return false;
        }
        if !form.is_zero() && form.degree() > bound {
            return false;
        }
    }
    let mut sum = Polynomial::zero(2 * n);
    for (k, form) in h.forms.iter().enumerate() {
        let zeta = Polynomial::variable(2 * n, k);
        let z = Polynomial::variable(2 * n, n + k);
        let difference = &zeta - &z;
        sum = &sum + &(form * &difference);
    }
    let target = &embed_hybrid(f, 0) - &embed_hybrid(f, n);
    (&sum - &target).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::poly::rat;

    fn p(text: &str, nvars: usize) -> Polynomial {
        Polynomial::parse(text, nvars).unwrap()
    }

    #[test]
    fn product_of_two_variables() {
        // F = z1·z2 splits as ζ2·(ζ1 - z1) + z1·(ζ2 - z2).
        let f = p("z1*z2", 2);
        let h = hefer_decompose(&f);
        assert_eq!(h.form(1), &p("z2", 4));
        assert_eq!(h.form(2), &p("z3", 4));
        assert!(verify_hefer(&f, &h));
    }

    #[test]
    fn square_of_one_variable() {
        // F = z1² gives the symmetric factor ζ1 + z1.
        let f = p("z1^2", 2);
        let h = hefer_decompose(&f);
        assert_eq!(h.form(1), &p("z1 + z3", 4));
        assert!(h.form(2).is_zero());
        assert!(verify_hefer(&f, &h));
    }

    #[test]
    fn constants_decompose_to_zero() {
        let f = p("7", 3);
        let h = hefer_decompose(&f);
        for k in 1..=3 {
            assert!(h.form(k).is_zero());
        }
        assert!(verify_hefer(&f, &h));
        let zero = Polynomial::zero(2);
        let hz = hefer_decompose(&zero);
        assert!(verify_hefer(&zero, &hz));
    }

    #[test]
    fn univariate_power_telescopes() {
        // F = w³: h¹ = ζ² + ζz + z².
        let f = p("z1^3", 1);
        let h = hefer_decompose(&f);
        assert_eq!(h.form(1), &p("z1^2 + z1*z2 + z2^2", 2));
        assert!(verify_hefer(&f, &h));
    }

    #[test]
    fn degree_bound_is_tight_for_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3usize);
            let deg = rng.gen_range(0..=4usize);
            let mut f = Polynomial::zero(n);
            for _ in 0..8 {
                let mut exps = vec![0u32; n];
                let mut budget = deg as u32;
                for slot in exps.iter_mut() {
                    let e = rng.gen_range(0..=budget);
                    *slot = e;
                    budget -= e;
                }
                let num = rng.gen_range(-9i64..=9);
                let den = rng.gen_range(1i64..=4);
                f.add_term(Monomial::new(exps), rat(num, den));
            }
            let h = hefer_decompose(&f);
            assert!(verify_hefer(&f, &h));
        }
    }

    #[test]
    fn verify_rejects_a_tampered_form() {
        let f = p("z1^2 + z2", 2);
        let h = hefer_decompose(&f);
        assert!(verify_hefer(&f, &h));
        let mut bad_forms = h.forms().to_vec();
        bad_forms[0] = &bad_forms[0] + &Polynomial::one(4);
        let bad = HeferDecomposition { n: 2, forms: bad_forms };
        assert!(!verify_hefer(&f, &bad));
        // A form of excessive degree fails even if some identity held.
        let mut high = h.forms().to_vec();
        high[1] = p("z1^5", 4);
        let bad_degree = HeferDecomposition { n: 2, forms: high };
        assert!(!verify_hefer(&f, &bad_degree));
    }
}
