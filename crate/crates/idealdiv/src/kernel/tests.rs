use num_complex::Complex64;

use super::*;
use crate::membership::divide;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(text: &str, nvars: usize) -> Polynomial {
    Polynomial::parse(text, nvars).unwrap()
}

fn sys(gens: &[&str], degrees: &[usize], n: usize) -> GeneratorSystem {
    let polys: Vec<Polynomial> = gens.iter().map(|t| p(t, n)).collect();
    GeneratorSystem::new(n, polys, degrees.to_vec()).unwrap()
}

#[test]
fn complex_poly_basics() {
    let mut q = ComplexPoly::zero(2);
    assert!(q.is_zero());
    q.add_term(Monomial::new(vec![1, 1]), c(2.0, -1.0));
    q.add_term(Monomial::new(vec![0, 0]), c(0.5, 0.0));
    q.add_term(Monomial::new(vec![1, 1]), c(-2.0, 1.0));
    assert_eq!(q.degree(), 0);
    assert!((q.eval(&[c(3.0, 0.0), c(4.0, 0.0)]) - c(0.5, 0.0)).norm() < 1e-15);
    let exact = ComplexPoly::from_exact(&p("z1^2 - 1/2", 2));
    assert_eq!(exact.degree(), 2);
    let shown = exact.to_string();
    assert!(shown.contains("z1^2"), "display was {shown}");
}

#[test]
fn alpha_form_matches_the_closed_determinant() {
    // In two variables the squared (1,1) part has top coefficient
    // 2!·(1/2πi)²·(1+|ζ|²)^{-3}.
    let space = FormSpace::new(2, 0);
    let zeta = [c(0.3, 0.1), c(-0.7, 0.4)];
    let alpha1 = alpha1_element(&space, &zeta);
    let squared = alpha1.wedge(&alpha1);
    let w2 = 1.0 + zeta[0].norm_sqr() + zeta[1].norm_sqr();
    let expected = two_pi_i_inv() * two_pi_i_inv() * (2.0 / w2.powi(3));
    let got = squared.coefficient(space.top_form_mask());
    assert!((got - expected).norm() < 1e-15, "got {got}, expected {expected}");
}

#[test]
fn alpha_top_power_integrates_to_one() {
    for (n, resolution, tolerance) in [(1usize, 48usize, 1e-10), (2, 20, 1e-6)] {
        let space = FormSpace::new(n, 0);
        let rule = fs_quadrature(n, resolution).unwrap();
        let conversion = pairing_conversion(n);
        let total = rule.integrate(|zeta| {
            let mut power = FormElement::scalar(c(1.0, 0.0));
            let alpha1 = alpha1_element(&space, zeta);
            for _ in 0..n {
                power = power.wedge(&alpha1);
            }
            let mut w2 = 1.0;
            for z in zeta {
                w2 += z.norm_sqr();
            }
            power.coefficient(space.top_form_mask()) * conversion * w2.powi(n as i32 + 1)
        });
        assert!(
            (total - c(1.0, 0.0)).norm() < tolerance,
            "n = {n}: integral was {total}"
        );
    }
}

#[test]
fn alpha_kernel_couples_the_points() {
    let zeta = [c(0.2, -0.1)];
    let z = [c(0.5, 0.5)];
    let kernel = alpha_kernel(1, &zeta, &z);
    let w2 = 1.0 + zeta[0].norm_sqr();
    let expected = (c(1.0, 0.0) + z[0] * zeta[0].conj()) / w2;
    assert!((kernel.alpha0 - expected).norm() < 1e-15);
    assert!(!kernel.alpha1.is_zero());
}

#[test]
fn assembled_chain_contracts_to_one() {
    let cases: Vec<(GeneratorSystem, Vec<Complex64>)> = vec![
        (sys(&["z1", "1 - z1"], &[1, 1], 1), vec![c(0.4, -0.2)]),
        (sys(&["z1", "z2^2 - 1", "z1 + 3*z2"], &[1, 2, 1], 2), vec![c(0.1, 0.0), c(0.2, 0.5)]),
        (sys(&["z1^2", "z2^2", "1 - z1 - z2"], &[2, 2, 2], 2), vec![c(-0.3, 0.2), c(0.6, 0.1)]),
    ];
    for (g, zeta) in cases {
        let space = FormSpace::new(g.n(), g.len());
        let chain = assemble_u(&g, &zeta).unwrap();
        let mut contracted = FormElement::zero();
        for (j, f) in g.polys().iter().enumerate() {
            let value = f.eval_complex(&zeta);
            contracted = contracted.add(&space.contract_eps(j + 1, &chain).scale(value));
        }
        let scalar = contracted.coefficient(0);
        assert!(
            (scalar - c(1.0, 0.0)).norm() < 1e-12,
            "contraction gave {scalar}"
        );
    }
}

#[test]
fn degenerate_sections_are_refused() {
    // Both generators vanish at the origin.
    let g = sys(&["z1", "z1^2"], &[1, 2], 1);
    match assemble_u(&g, &[c(0.0, 0.0)]) {
        Err(KernelError::DegenerateNorm { norm_sq }) => assert!(norm_sq < 1e-12),
        other => panic!("unexpected outcome: {other:?}"),
    }
}

#[test]
fn toy_division_reproduces_the_target() {
    // The pair {w, 1-w} never vanishes simultaneously, including at
    // infinity, so the integral cofactors must reconstruct the target on
    // the whole plane.
    let g = sys(&["z1", "1 - z1"], &[1, 1], 1);
    let rule = fs_quadrature(1, 24).unwrap();
    for (phi_text, r) in [("1", 0usize), ("z1", 1)] {
        let phi = p(phi_text, 1);
        let division = kernel_divide(&g, &phi, r, &rule).unwrap();
        assert_eq!(division.cofactors().len(), 2);
        for (j, q) in division.cofactors().iter().enumerate() {
            assert!(q.degree() + g.declared_degree(j) <= division.degree_bound());
        }
        for residual in division.fit_residuals() {
            assert!(*residual < 1e-3);
        }
        for k in 0..12 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
            let z = [c(0.65 * theta.cos(), 0.65 * theta.sin())];
            let mut total = c(0.0, 0.0);
            for (f, q) in g.polys().iter().zip(division.cofactors()) {
                total += f.eval_complex(&z) * q.eval(&z);
            }
            let gap = (total - phi.eval_complex(&z)).norm();
            assert!(gap < 5e-3, "phi = {phi_text}: gap {gap:.3e} at node {k}");
        }
    }
}

#[test]
fn kernel_divide_rejects_bad_inputs() {
    let rule = fs_quadrature(1, 8).unwrap();
    let single = sys(&["z1"], &[1], 1);
    match kernel_divide(&single, &p("z1", 1), 1, &rule) {
        Err(KernelError::TooFewGenerators { m: 1 }) => {}
        other => panic!("unexpected outcome: {other:?}"),
    }
    let g = sys(&["z1", "1 - z1"], &[1, 1], 1);
    let wide = fs_quadrature(2, 4).unwrap();
    match kernel_divide(&g, &p("z1", 1), 1, &wide) {
        Err(KernelError::DimensionMismatch { .. }) => {}
        other => panic!("unexpected outcome: {other:?}"),
    }
    match kernel_divide(&g, &p("z1^3", 1), 2, &rule) {
        Err(KernelError::BudgetTooSmall { degree: 3, budget: 2 }) => {}
        other => panic!("unexpected outcome: {other:?}"),
    }
}

#[test]
fn projection_distance_separates_exact_from_perturbed() {
    let g = sys(&["z1", "z2"], &[1, 1], 2);
    let phi = p("z1*z2 + z1", 2);
    let outcome = divide(&g, &phi, 2).unwrap();
    let certificate = outcome.certificate().expect("feasible system");
    let numeric: Vec<ComplexPoly> =
        certificate.cofactors().iter().map(ComplexPoly::from_exact).collect();
    let exact_distance = macaulay_projection_distance(&g, &phi, 2, &numeric).unwrap();
    assert!(exact_distance < 1e-12, "distance {exact_distance:.3e}");

    // Shifting a cofactor by a constant changes the represented sum by
    // 0.01·z1, which no solution-space direction can absorb.
    let mut perturbed = numeric.clone();
    let mut shifted = perturbed[0].clone();
    shifted.add_term(Monomial::new(vec![0, 0]), c(0.01, 0.0));
    perturbed[0] = shifted;
    let moved = macaulay_projection_distance(&g, &phi, 2, &perturbed).unwrap();
    assert!((moved - 0.01).abs() < 1e-9, "distance {moved:.3e}");

    // A numeric term outside the budget counts in full.
    let mut overflowing = numeric.clone();
    let mut tall = overflowing[1].clone();
    tall.add_term(Monomial::new(vec![0, 3]), c(0.02, 0.0));
    overflowing[1] = tall;
    let outside = macaulay_projection_distance(&g, &phi, 2, &overflowing).unwrap();
    assert!((outside - 0.02).abs() < 1e-9, "distance {outside:.3e}");
}

#[test]
fn projection_distance_validates_inputs() {
    let g = sys(&["z1", "z2"], &[1, 1], 2);
    let phi = p("z1", 2);
    match macaulay_projection_distance(&g, &phi, 1, &[ComplexPoly::zero(2)]) {
        Err(KernelError::DimensionMismatch { expected: 2, got: 1 }) => {}
        other => panic!("unexpected outcome: {other:?}"),
    }
    // z1·z2 + 1 is not in the ideal at any budget; the exact leg reports it.
    let stranger = p("z1*z2 + 1", 2);
    let zeros = vec![ComplexPoly::zero(2), ComplexPoly::zero(2)];
    match macaulay_projection_distance(&g, &stranger, 3, &zeros) {
        Err(KernelError::ExactInfeasible) => {}
        other => panic!("unexpected outcome: {other:?}"),
    }
}
