//! Annihilation tests for complete intersections of coordinate powers.
//!
//! For generators `z_{k_1}^{a_1}, ..., z_{k_m}^{a_m}` in distinct
//! variables, the residue attached to the intersection acts on a monomial
//! as a tensor product of one-variable factors, and each factor obeys a
//! single reduction rule: multiplying the order-`p` one-variable current
//! by `z^k` leaves a current of order `p - k`, which is zero once `k >= p`
//! ([`onevar_reduce`]).  A polynomial is annihilated exactly when every
//! one of its monomials kills at least one factor, which is the same as
//! divisibility by some generator, monomial by monomial.
//!
//! Annihilation is equivalent to degree-bounded membership at the target's
//! own degree, and [`duality_oracle`] computes that second route through
//! the exact solver so the two can be played against each other; the
//! equivalence is a test asset, not an implementation detail, so the two
//! paths share no code.

use std::fmt;

use crate::membership::{divide, GeneratorSystem, MembershipError};
use crate::poly::{HomogeneousSection, Monomial, Polynomial};

/// Validation failures for [`MonomialCI`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ResidueError {
    /// At least one coordinate power is required.
    Empty,
    /// A variable slot lies outside the ambient variable count.
    SlotOutOfRange { slot: usize, nvars: usize },
    /// Two generators use the same variable, so the intersection is not
    /// complete.
    DuplicateSlot { slot: usize },
    /// Exponent zero would make a generator the constant 1.
    ZeroExponent { slot: usize },
}

impl fmt::Display for ResidueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueError::Empty => write!(f, "a monomial intersection needs a generator"),
            ResidueError::SlotOutOfRange { slot, nvars } => {
                write!(f, "variable slot {} out of range for {} variables", slot, nvars)
            }
            ResidueError::DuplicateSlot { slot } => {
                write!(f, "variable slot {} appears twice", slot)
            }
            ResidueError::ZeroExponent { slot } => {
                write!(f, "zero exponent at variable slot {}", slot)
            }
        }
    }
}

impl std::error::Error for ResidueError {}

/// A complete intersection of coordinate powers, affine
/// (`z_1..z_n`, slot `i` is `z_{i+1}`) or homogeneous
/// (`z_0..z_n`, slot `i` is `z_i`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonomialCI {
    n: usize,
    gens: Vec<(usize, u32)>,
    homogeneous: bool,
}

impl MonomialCI {
    /// Coordinate powers in affine `n`-space; `powers` lists
    /// (variable slot, exponent) pairs with pairwise distinct slots.
    pub fn affine(n: usize, powers: &[(usize, u32)]) -> Result<Self, ResidueError> {
        MonomialCI::validated(n, powers, false)
    }

    /// Coordinate powers among the `n + 1` homogeneous coordinates of
    /// projective `n`-space; slot 0 is the hyperplane coordinate `z_0`.
    pub fn projective(n: usize, powers: &[(usize, u32)]) -> Result<Self, ResidueError> {
        MonomialCI::validated(n, powers, true)
    }

    fn validated(n: usize, powers: &[(usize, u32)], homogeneous: bool) -> Result<Self, ResidueError> {
        if powers.is_empty() {
            return Err(ResidueError::Empty);
        }
        let nvars = if homogeneous { n + 1 } else { n };
        let mut seen = vec![false; nvars];
        for &(slot, exponent) in powers {
            if slot >= nvars {
                return Err(ResidueError::SlotOutOfRange { slot, nvars });
            }
            if seen[slot] {
                return Err(ResidueError::DuplicateSlot { slot });
            }
            if exponent == 0 {
                return Err(ResidueError::ZeroExponent { slot });
            }
            seen[slot] = true;
        }
        Ok(MonomialCI { n, gens: powers.to_vec(), homogeneous })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of variables the generators live in.
    pub fn nvars(&self) -> usize {
        if self.homogeneous {
            self.n + 1
        } else {
            self.n
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn powers(&self) -> &[(usize, u32)] {
        &self.gens
    }

    /// The same intersection as an explicit generator system, each
    /// coordinate power declared at its own degree.
    pub fn generator_system(&self) -> GeneratorSystem {
        let nvars = self.nvars();
        let polys = self
            .gens
            .iter()
            .map(|&(slot, exponent)| {
                let mut exps = vec![0u32; nvars];
                exps[slot] = exponent;
                Polynomial::from_term(Monomial::new(exps), crate::poly::rat(1, 1))
            })
            .collect();
        let degrees = self.gens.iter().map(|&(_, exponent)| exponent as usize).collect();
        GeneratorSystem::new(nvars, polys, degrees)
            .expect("coordinate powers always form a valid system")
    }
}

/// The one-variable current of pole order `p`, with `p = 0` standing for
/// the zero current.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct OneVarCurrent {
    pole_order: u32,
}

impl OneVarCurrent {
    pub fn pole_order(&self) -> u32 {
        self.pole_order
    }

    pub fn is_zero(&self) -> bool {
        self.pole_order == 0
    }
}

/// Multiplies the order-`p` one-variable current by `z^k`: the order drops
/// by `k`, and the current dies once `k >= p`.
pub fn onevar_reduce(k: u32, p: u32) -> OneVarCurrent {
    OneVarCurrent { pole_order: p.saturating_sub(k) }
}

/// Whether the residue of `ci` annihilates `phi`.
///
/// Monomial by monomial: the action factors through one variable per
/// generator, and a monomial is killed exactly when [`onevar_reduce`]
/// empties some factor, i.e. the monomial is divisible by that generator.
/// The zero polynomial is always annihilated.
///
/// Panics if `phi` lives in a different variable count than the
/// generators.
pub fn annihilates(ci: &MonomialCI, phi: &Polynomial) -> bool {
    assert_eq!(phi.nvars(), ci.nvars(), "variable count mismatch");
    phi.terms().all(|(mono, _)| {
        ci.powers()
            .iter()
            .any(|&(slot, exponent)| onevar_reduce(mono.exponent(slot), exponent).is_zero())
    })
}

/// Annihilation over projective space: the section may borrow `s` extra
/// factors of the hyperplane coordinate `z_0` before the test.
///
/// Panics if `ci` is not homogeneous or the section has the wrong
/// dimension.
pub fn annihilates_projective(
    ci: &MonomialCI,
    phi: &HomogeneousSection,
    extra_power_of_z0: usize,
) -> bool {
    assert!(ci.is_homogeneous(), "projective test needs homogeneous generators");
    assert_eq!(phi.n(), ci.n(), "projective dimension mismatch");
    let mut exps = vec![0u32; ci.nvars()];
    exps[0] = extra_power_of_z0 as u32;
    let lifted = phi.poly().mul_monomial(&Monomial::new(exps));
    annihilates(ci, &lifted)
}

/// The independent route to the same answer: membership at the target's
/// own degree, decided by the exact solver.  For coordinate-power
/// generators this agrees with [`annihilates`] everywhere; the agreement
/// is what the test suites check.
pub fn duality_oracle(g: &GeneratorSystem, phi: &Polynomial) -> Result<bool, MembershipError> {
    Ok(divide(g, phi, phi.degree())?.is_feasible())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::poly::{homogenize, rat};

    fn p(text: &str, nvars: usize) -> Polynomial {
        Polynomial::parse(text, nvars).unwrap()
    }

    #[test]
    fn validation_catches_bad_intersections() {
        assert_eq!(MonomialCI::affine(2, &[]), Err(ResidueError::Empty));
        assert_eq!(
            MonomialCI::affine(2, &[(2, 1)]),
            Err(ResidueError::SlotOutOfRange { slot: 2, nvars: 2 })
        );
        assert_eq!(
            MonomialCI::affine(2, &[(0, 1), (0, 2)]),
            Err(ResidueError::DuplicateSlot { slot: 0 })
        );
        assert_eq!(
            MonomialCI::affine(2, &[(1, 0)]),
            Err(ResidueError::ZeroExponent { slot: 1 })
        );
        // The projective flavor gets one extra slot for z0.
        assert!(MonomialCI::projective(2, &[(2, 1)]).is_ok());
    }

    #[test]
    fn onevar_reduction_rule() {
        assert_eq!(onevar_reduce(1, 3).pole_order(), 2);
        assert!(onevar_reduce(3, 3).is_zero());
        assert_eq!(onevar_reduce(0, 5).pole_order(), 5);
    }

    #[test]
    fn onevar_reduction_composes() {
        for p0 in 1u32..=6 {
            for k1 in 0u32..=3 {
                for k2 in 0u32..=3 {
                    let step = onevar_reduce(k2, p0);
                    if step.is_zero() {
                        continue;
                    }
                    assert_eq!(
                        onevar_reduce(k1, step.pole_order()),
                        onevar_reduce(k1 + k2, p0)
                    );
                }
            }
        }
    }

    #[test]
    fn square_pair_annihilation() {
        let ci = MonomialCI::affine(2, &[(0, 2), (1, 2)]).unwrap();
        assert!(annihilates(&ci, &p("(z1 + z2)^4", 2)));
        assert!(!annihilates(&ci, &p("(z1 + z2)^2", 2)));
        assert!(annihilates(&ci, &Polynomial::zero(2)));
    }

    #[test]
    fn power_sharpness_families() {
        // F_j = z_j^(M m) for j = 1..m in m variables, target the M m-th
        // power of the coordinate sum: the m-th power of the target is
        // annihilated, the (m-1)-st is not.
        for (big_m, m) in [(1u32, 2usize), (1, 3), (2, 2)] {
            let d = big_m * m as u32;
            let powers: Vec<(usize, u32)> = (0..m).map(|slot| (slot, d)).collect();
            let ci = MonomialCI::affine(m, &powers).unwrap();
            let mut sum = Polynomial::zero(m);
            for v in 0..m {
                sum = &sum + &Polynomial::variable(m, v);
            }
            let phi = sum.pow(d as usize);
            assert!(annihilates(&ci, &phi.pow(m)), "M = {}, m = {}", big_m, m);
            assert!(!annihilates(&ci, &phi.pow(m - 1)), "M = {}, m = {}", big_m, m);
        }
    }

    #[test]
    fn projective_annihilation_examples() {
        let ci = MonomialCI::projective(2, &[(1, 2), (2, 2)]).unwrap();
        let phi = homogenize(&p("(z1 + z2)^4", 2), 4).unwrap();
        assert!(annihilates_projective(&ci, &phi, 0));

        // A single power of z0 on the line: divisibility decides, and the
        // extra power can supply the missing factor.
        let ci = MonomialCI::projective(1, &[(0, 1)]).unwrap();
        let with_z0 = HomogeneousSection::new(
            Polynomial::parse_projective("z0 z1^2", 2).unwrap(),
            3,
        )
        .unwrap();
        let without = HomogeneousSection::new(
            Polynomial::parse_projective("z1^3", 2).unwrap(),
            3,
        )
        .unwrap();
        assert!(annihilates_projective(&ci, &with_z0, 0));
        assert!(!annihilates_projective(&ci, &without, 0));
        assert!(annihilates_projective(&ci, &without, 1));
    }

    #[test]
    fn oracle_agreement_on_the_square_pair() {
        let ci = MonomialCI::affine(2, &[(0, 2), (1, 2)]).unwrap();
        let g = ci.generator_system();
        for text in ["(z1 + z2)^4", "(z1 + z2)^2", "z1^2 + z2^2", "z1 z2"] {
            let phi = p(text, 2);
            assert_eq!(
                annihilates(&ci, &phi),
                duality_oracle(&g, &phi).unwrap(),
                "target {}",
                text
            );
        }
    }

    #[test]
    fn oracle_agreement_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let monos = crate::poly::monomials_up_to(2, 5);
        for _ in 0..25 {
            let a = rng.gen_range(1u32..=3);
            let b = rng.gen_range(1u32..=3);
            let ci = MonomialCI::affine(2, &[(0, a), (1, b)]).unwrap();
            let g = ci.generator_system();
            let mut phi = Polynomial::zero(2);
            for _ in 0..rng.gen_range(1..=4) {
                let mono = monos[rng.gen_range(0..monos.len())].clone();
                let choices = [rat(1, 1), rat(-1, 1), rat(2, 1), rat(-2, 1)];
                phi.add_term(mono, choices[rng.gen_range(0..4)].clone());
            }
            assert_eq!(annihilates(&ci, &phi), duality_oracle(&g, &phi).unwrap());
        }
    }

    #[test]
    fn killing_power_is_monotone() {
        let ci = MonomialCI::affine(2, &[(0, 2), (1, 2)]).unwrap();
        let phi = p("(z1 + z2)^2", 2);
        assert!(annihilates(&ci, &phi.pow(2)));
        for b in 3..=5 {
            assert!(annihilates(&ci, &phi.pow(b)));
        }
    }

    #[test]
    fn generator_system_shape() {
        let ci = MonomialCI::affine(3, &[(0, 2), (2, 3)]).unwrap();
        let g = ci.generator_system();
        assert_eq!(g.len(), 2);
        assert_eq!(g.generator(0), &p("z1^2", 3));
        assert_eq!(g.generator(1), &p("z3^3", 3));
        assert_eq!(g.degrees(), &[2, 3]);
    }
}
