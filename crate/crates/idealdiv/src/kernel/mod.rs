//! Division with explicit integral kernels.
//!
//! Where the membership solver certifies `Φ = Σ F_j Q_j` by exact linear
//! algebra, this module produces the cofactors `Q_j` by evaluating a
//! closed-form integral: the generator tuple is turned into a metric
//! section over the chart, coupled to the evaluation point through
//! interpolation forms, wedged against a reproducing weight, and
//! integrated numerically.  The construction is only valid when the
//! generators have no common zero on the compactified chart, which is the
//! regime all entry points enforce by watching the section norm along the
//! integration nodes.
//!
//! The pieces live in three submodules: [`forms`] provides the graded
//! algebra the kernel is assembled in, [`hefer`] the exact interpolation
//! forms, [`quadrature`] the chart integration.  This module wires them
//! together and compresses the resulting point values back into
//! polynomial cofactors, with an exact cross-check available through
//! [`macaulay_projection_distance`].

mod forms;
mod hefer;
mod quadrature;

pub use forms::{FormElement, FormSpace};
pub use hefer::{hefer_decompose, verify_hefer, HeferDecomposition};
pub use quadrature::{bergman_reproduce, fs_quadrature, QuadratureRule};

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;

use num_complex::Complex64;

use crate::linalg::SolveOutcome;
use crate::membership::{build_macaulay, GeneratorSystem, MembershipError};
use crate::parallel;
use crate::poly::{
    binomial, monomial_string, monomials_up_to, rational_to_f64, Monomial, Polynomial,
};

/// Section norms below this are treated as a zero on the chart, which the
/// kernel construction cannot tolerate.
const NORM_FLOOR: f64 = 1e-12;

/// Largest admissible root-mean-square residual when sampled cofactor
/// values are compressed to polynomials.
const FIT_TOLERANCE: f64 = 1e-3;

/// Nodes per work unit; fixing the chunk makes the summation tree, and
/// hence the floating-point result, independent of scheduling.
const NODE_CHUNK: usize = 256;

/// `1/(2πi)`, the normalization every chart differential carries.
fn two_pi_i_inv() -> Complex64 {
    Complex64::new(0.0, -0.5 / std::f64::consts::PI)
}

#[derive(Clone, Debug)]
pub enum KernelError {
    /// The chart dimension is outside the supported range.
    UnsupportedDimension { n: usize },
    /// A target degree does not fit under the requested budget.
    BudgetTooSmall { degree: usize, budget: usize },
    /// Mismatched variable counts between the inputs.
    DimensionMismatch { expected: usize, got: usize },
    /// Integral division needs at least two generators.
    TooFewGenerators { m: usize },
    /// The generator section (numerically) vanishes on the chart.
    DegenerateNorm { norm_sq: f64 },
    /// The sampled values do not look like polynomials of the predicted
    /// degree.
    FitResidual { residual: f64, tolerance: f64 },
    /// The exact solver found no certificate at the reference budget.
    ExactInfeasible,
    /// A delegated exact computation failed.
    Membership(MembershipError),
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::UnsupportedDimension { n } => {
                write!(f, "unsupported chart dimension {n}: only 1 or 2 complex variables")
            }
            KernelError::BudgetTooSmall { degree, budget } => {
                write!(f, "target degree {degree} exceeds the budget {budget}")
            }
            KernelError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected} variables, got {got}")
            }
            KernelError::TooFewGenerators { m } => {
                write!(f, "integral division needs at least two generators, got {m}")
            }
            KernelError::DegenerateNorm { norm_sq } => {
                write!(f, "generator section norm {norm_sq:.3e} vanishes on the chart")
            }
            KernelError::FitResidual { residual, tolerance } => {
                write!(f, "cofactor fit residual {residual:.3e} exceeds tolerance {tolerance:.3e}")
            }
            KernelError::ExactInfeasible => {
                write!(f, "exact division at the reference budget is infeasible")
            }
            KernelError::Membership(e) => write!(f, "{e}"),
        }
    }
}

impl Error for KernelError {}

impl From<MembershipError> for KernelError {
    fn from(e: MembershipError) -> Self {
        KernelError::Membership(e)
    }
}

// ============================================================================
// Complex-coefficient polynomials
// ============================================================================

/// A polynomial with floating complex coefficients, used for numerically
/// recovered cofactors.  Terms are kept in the same monomial order as the
/// exact polynomials, and exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl ComplexPoly {
    pub fn zero(nvars: usize) -> Self {
        ComplexPoly { nvars, terms: BTreeMap::new() }
    }

    /// Converts an exact polynomial coefficient-wise.
    pub fn from_exact(p: &Polynomial) -> Self {
        let mut out = ComplexPoly::zero(p.nvars());
        for (mono, coeff) in p.terms() {
            out.add_term(mono.clone(), Complex64::new(rational_to_f64(coeff), 0.0));
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree of the stored support; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, mono: &Monomial) -> Complex64 {
        self.terms.get(mono).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Complex64) {
        assert_eq!(mono.nvars(), self.nvars, "monomial arity mismatch");
        match self.terms.entry(mono) {
            Entry::Vacant(slot) => {
                if coeff.re != 0.0 || coeff.im != 0.0 {
                    slot.insert(coeff);
                }
            }
            Entry::Occupied(mut slot) => {
                let total = *slot.get() + coeff;
                if total.re == 0.0 && total.im == 0.0 {
                    slot.remove();
                } else {
                    slot.insert(total);
                }
            }
        }
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars, "evaluation arity mismatch");
        let mut total = Complex64::new(0.0, 0.0);
        for (mono, coeff) in &self.terms {
            total += coeff * eval_monomial(mono, point);
        }
        total
    }
}

impl fmt::Display for ComplexPoly {
    /// Terms in descending monomial order, coefficients with 12
    /// significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, coeff) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let sign = if coeff.im < 0.0 { '-' } else { '+' };
            write!(f, "({:.11e} {} {:.11e}i)", coeff.re, sign, coeff.im.abs())?;
            if !mono.is_unit() {
                write!(f, "*{}", monomial_string(mono))?;
            }
        }
        Ok(())
    }
}

fn eval_monomial(mono: &Monomial, point: &[Complex64]) -> Complex64 {
    let mut value = Complex64::new(1.0, 0.0);
    for (k, &e) in mono.exponents().iter().enumerate() {
        if e > 0 {
            value *= point[k].powu(e);
        }
    }
    value
}

// ============================================================================
// The reproducing weight
// ============================================================================

/// The weight at a chart pair `(ζ, z)`: a scalar part coupling the two
/// points and a (1,1)-form part carrying the chart volume.  Raised to the
/// power `n + r` it reproduces polynomials of degree up to `r`.
#[derive(Clone, Debug)]
pub struct AlphaKernel {
    pub alpha0: Complex64,
    pub alpha1: FormElement,
}

/// Builds the weight at one chart pair.
pub fn alpha_kernel(n: usize, zeta: &[Complex64], z: &[Complex64]) -> AlphaKernel {
    assert_eq!(zeta.len(), n, "chart point arity mismatch");
    assert_eq!(z.len(), n, "evaluation point arity mismatch");
    let space = FormSpace::new(n, 0);
    AlphaKernel { alpha0: alpha0_value(zeta, z), alpha1: alpha1_element(&space, zeta) }
}

fn alpha0_value(zeta: &[Complex64], z: &[Complex64]) -> Complex64 {
    let mut pairing = Complex64::new(1.0, 0.0);
    let mut w2 = 1.0;
    for (zk, ck) in z.iter().zip(zeta) {
        pairing += zk * ck.conj();
        w2 += ck.norm_sqr();
    }
    pairing / w2
}

/// The (1,1) part of the weight at `ζ`; independent of the evaluation
/// point.  Its `n`-th power integrates to one against the chart pairing.
fn alpha1_element(space: &FormSpace, zeta: &[Complex64]) -> FormElement {
    let n = space.n();
    let mut w2 = 1.0;
    for c in zeta {
        w2 += c.norm_sqr();
    }
    let mut out = FormElement::zero();
    for j in 1..=n {
        for k in 1..=n {
            let mut coeff = Complex64::new(0.0, 0.0);
            if j == k {
                coeff += Complex64::new(1.0 / w2, 0.0);
            }
            coeff -= zeta[j - 1].conj() * zeta[k - 1] / (w2 * w2);
            if coeff.re != 0.0 || coeff.im != 0.0 {
                let pair = space.dzeta(j).wedge(&space.dzeta_bar(k));
                out = out.add(&pair.scale(coeff * two_pi_i_inv()));
            }
        }
    }
    out
}

/// `(α_0 + α_1)^exponent` collapsed through the binomial theorem; powers
/// of the form part beyond those supplied are zero by degree.
fn alpha_combination(
    alpha0: Complex64,
    alpha1_powers: &[FormElement],
    exponent: usize,
) -> FormElement {
    let mut out = FormElement::zero();
    for (p, power) in alpha1_powers.iter().enumerate() {
        if p > exponent {
            break;
        }
        let count = binomial(exponent, p) as f64;
        let scalar = alpha0.powu((exponent - p) as u32) * count;
        out = out.add(&power.scale(scalar));
    }
    out
}

// ============================================================================
// The metric section and its chain
// ============================================================================

/// Pointwise data of a generator tuple on the chart.
struct SectionData {
    values: Vec<Complex64>,
    derivatives: Vec<Vec<Complex64>>,
    w2: f64,
    norm_sq: f64,
}

fn partials(g: &GeneratorSystem) -> Vec<Vec<Polynomial>> {
    let n = g.n();
    g.polys().iter().map(|f| (0..n).map(|k| f.partial_derivative(k)).collect()).collect()
}

fn evaluate_section(
    g: &GeneratorSystem,
    derivs: &[Vec<Polynomial>],
    zeta: &[Complex64],
) -> SectionData {
    let mut w2 = 1.0;
    for c in zeta {
        w2 += c.norm_sqr();
    }
    let values: Vec<Complex64> = g.polys().iter().map(|f| f.eval_complex(zeta)).collect();
    let derivatives: Vec<Vec<Complex64>> = derivs
        .iter()
        .map(|row| row.iter().map(|d| d.eval_complex(zeta)).collect())
        .collect();
    let norm_sq = values
        .iter()
        .zip(g.degrees())
        .map(|(v, &d)| v.norm_sqr() / w2.powi(d as i32))
        .sum();
    SectionData { values, derivatives, w2, norm_sq }
}

/// The interior chain `Σ_k s∧(∂̄s)^k / ‖f‖^{2(k+1)}` of the metric dual
/// section at one chart point.
fn section_chain(
    space: &FormSpace,
    degrees: &[usize],
    data: &SectionData,
    zeta: &[Complex64],
) -> FormElement {
    let n = space.n();
    let m = space.m();
    let w2 = data.w2;
    let mut s = FormElement::zero();
    for j in 1..=m {
        let c = data.values[j - 1].conj() / w2.powi(degrees[j - 1] as i32);
        if c.re != 0.0 || c.im != 0.0 {
            s = s.add(&space.eps(j).scale(c));
        }
    }
    let mut dbar_s = FormElement::zero();
    for j in 1..=m {
        let d = degrees[j - 1];
        for k in 1..=n {
            // ∂̄ of conj(F_j)/w2^d in the k-th slot.
            let a = data.derivatives[j - 1][k - 1].conj() / w2.powi(d as i32)
                - (d as f64) * data.values[j - 1].conj() * zeta[k - 1] / w2.powi(d as i32 + 1);
            if a.re != 0.0 || a.im != 0.0 {
                dbar_s = dbar_s.add(&space.dzeta_bar(k).wedge(&space.eps(j)).scale(a));
            }
        }
    }
    let mut chain = FormElement::zero();
    let mut power = FormElement::scalar(Complex64::new(1.0, 0.0));
    let mut denom = data.norm_sq;
    for _ in 0..m {
        chain = chain.add(&s.wedge(&power).scale(Complex64::new(1.0 / denom, 0.0)));
        power = power.wedge(&dbar_s);
        denom *= data.norm_sq;
    }
    chain
}

/// Assembles the interior chain of a generator tuple at one chart point.
///
/// Contracting the result with the tuple itself gives a scalar part of
/// exactly one, which is the identity the whole kernel construction rides
/// on; the chart point must keep the section norm above the degeneracy
/// floor.
pub fn assemble_u(g: &GeneratorSystem, zeta: &[Complex64]) -> Result<FormElement, KernelError> {
    if zeta.len() != g.n() {
        return Err(KernelError::DimensionMismatch { expected: g.n(), got: zeta.len() });
    }
    let space = FormSpace::new(g.n(), g.len());
    let derivs = partials(g);
    let data = evaluate_section(g, &derivs, zeta);
    if data.norm_sq < NORM_FLOOR {
        return Err(KernelError::DegenerateNorm { norm_sq: data.norm_sq });
    }
    Ok(section_chain(&space, g.degrees(), &data, zeta))
}

// ============================================================================
// Integral division
// ============================================================================

/// Cofactors recovered from the integral kernel, with the shared degree
/// budget and the per-cofactor fit diagnostics.
#[derive(Clone, Debug)]
pub struct KernelDivision {
    cofactors: Vec<ComplexPoly>,
    degree_bound: usize,
    fit_residuals: Vec<f64>,
}

impl KernelDivision {
    pub fn cofactors(&self) -> &[ComplexPoly] {
        &self.cofactors
    }

    pub fn cofactor(&self, j: usize) -> &ComplexPoly {
        &self.cofactors[j]
    }

    /// The common bound on `deg F_j + deg Q_j`.
    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn fit_residuals(&self) -> &[f64] {
        &self.fit_residuals
    }
}

/// Produces cofactors `Q_j` with `Φ(z) = Σ_j F_j(z) Q_j(z)` by numerical
/// integration, for a tuple without common zeros on the compactified
/// chart.
///
/// Each cofactor is the integral of an explicit kernel against `Φ`; the
/// integrals are evaluated on a lattice of points unisolvent for the
/// predicted cofactor degrees and compressed to polynomials by least
/// squares.  The budget `r` must cover `deg Φ` and enters the degree
/// bound `deg F_j + deg Q_j ≤ B`, where `B` adds `r` to the largest
/// possible pole order of the section chain.  Coefficients smaller than
/// `1e-12` of the leading one are discarded as quadrature noise.
pub fn kernel_divide(
    g: &GeneratorSystem,
    phi: &Polynomial,
    r: usize,
    rule: &QuadratureRule,
) -> Result<KernelDivision, KernelError> {
    let n = g.n();
    let m = g.len();
    if m < 2 {
        return Err(KernelError::TooFewGenerators { m });
    }
    if rule.n() != n {
        return Err(KernelError::DimensionMismatch { expected: n, got: rule.n() });
    }
    if phi.nvars() != n {
        return Err(KernelError::DimensionMismatch { expected: n, got: phi.nvars() });
    }
    if phi.degree() > r {
        return Err(KernelError::BudgetTooSmall { degree: phi.degree(), budget: r });
    }

    let space = FormSpace::new(n, m);
    let mu = n.min(m - 1);
    let mut sorted = g.degrees().to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let degree_bound: usize = sorted.iter().take(mu + 1).sum::<usize>() + r;
    let caps: Vec<usize> = g.degrees().iter().map(|&d| degree_bound - d).collect();
    let cap_max = *caps.iter().max().expect("nonempty system");

    let samples = principal_lattice(n, cap_max);
    let sample_count = samples.len();
    let width = m * sample_count;

    let hefers: Vec<HeferDecomposition> = g.polys().iter().map(hefer_decompose).collect();
    let derivs = partials(g);
    // Orientation of the full frame product, read off the engine once;
    // it is ±1, so multiplying by it divides by it.
    let sigma = full_frame_product(&space).coefficient(space.full_eps_mask()).re;
    let exponent = n + r;
    let conversion = pairing_conversion(n);
    let full_mask = space.top_form_mask() | space.full_eps_mask();
    let omega = frame_identity(&space);

    let total = rule.len();
    let chunk_count = total.div_ceil(NODE_CHUNK);
    let chunk_sums: Vec<Result<Vec<Complex64>, KernelError>> =
        parallel::map_indexed(chunk_count, |chunk| {
            let start = chunk * NODE_CHUNK;
            let end = total.min(start + NODE_CHUNK);
            let mut per_node: Vec<Vec<Complex64>> = Vec::with_capacity(end - start);
            let mut buffer = [Complex64::new(0.0, 0.0); 2];
            let mut point2n = vec![Complex64::new(0.0, 0.0); 2 * n];
            for index in start..end {
                let weight = rule.fill_node(index, &mut buffer);
                let zeta = &buffer[..n];
                let data = evaluate_section(g, &derivs, zeta);
                if data.norm_sq < NORM_FLOOR {
                    return Err(KernelError::DegenerateNorm { norm_sq: data.norm_sq });
                }
                let chain = section_chain(&space, g.degrees(), &data, zeta);
                let alpha1 = alpha1_element(&space, zeta);
                let mut alpha1_powers = vec![FormElement::scalar(Complex64::new(1.0, 0.0))];
                for p in 1..=n {
                    alpha1_powers.push(alpha1_powers[p - 1].wedge(&alpha1));
                }
                let phi_value = phi.eval_complex(zeta);
                let node_factor = Complex64::new(weight * data.w2.powi(n as i32 + 1), 0.0)
                    * conversion
                    * phi_value
                    * sigma;
                point2n[..n].copy_from_slice(zeta);
                let mut values = vec![Complex64::new(0.0, 0.0); width];
                for (si, z) in samples.iter().enumerate() {
                    point2n[n..].copy_from_slice(z);
                    // The transport factor couples ε*_j to dζ_k with the
                    // same 1/(2πi) orientation as the weight form; the
                    // reproduction tests pin this sign.
                    let mut coupling = omega.clone();
                    for j in 1..=m {
                        for k in 1..=n {
                            let hv = hefers[j - 1].form(k).eval_complex(&point2n);
                            if hv.re != 0.0 || hv.im != 0.0 {
                                let attach = space.eps_star(j).wedge(&space.dzeta(k));
                                coupling = coupling.add(&attach.scale(hv * two_pi_i_inv()));
                            }
                        }
                    }
                    let transported = coupling.exp();
                    let alpha0 = alpha0_value(zeta, z);
                    let weight_power = alpha_combination(alpha0, &alpha1_powers, exponent);
                    let common = transported.wedge(&chain).wedge(&weight_power);
                    for j in 1..=m {
                        let kernel = space.eps_star(j).wedge(&common);
                        values[(j - 1) * sample_count + si] =
                            kernel.coefficient(full_mask) * node_factor;
                    }
                }
                per_node.push(values);
            }
            Ok(sum_vectors_pairwise(per_node, width))
        });

    let mut collected = Vec::with_capacity(chunk_count);
    for chunk in chunk_sums {
        collected.push(chunk?);
    }
    let totals = sum_vectors_pairwise(collected, width);

    let mut cofactors = Vec::with_capacity(m);
    let mut fit_residuals = Vec::with_capacity(m);
    for j in 0..m {
        let basis = monomials_up_to(n, caps[j]);
        let values = &totals[j * sample_count..(j + 1) * sample_count];
        let (poly, residual) = fit_polynomial(n, &basis, &samples, values)?;
        cofactors.push(poly);
        fit_residuals.push(residual);
    }
    Ok(KernelDivision { cofactors, degree_bound, fit_residuals })
}

/// The product `(ε*_1∧ε_1)∧…∧(ε*_m∧ε_m)` used to read off the frame
/// orientation.
fn full_frame_product(space: &FormSpace) -> FormElement {
    let mut product = FormElement::scalar(Complex64::new(1.0, 0.0));
    for j in 1..=space.m() {
        product = product.wedge(&space.eps_star(j)).wedge(&space.eps(j));
    }
    product
}

/// `Σ_j ε*_j∧ε_j`, the identity element the coupling exponentiates over.
fn frame_identity(space: &FormSpace) -> FormElement {
    let mut omega = FormElement::zero();
    for j in 1..=space.m() {
        omega = omega.add(&space.eps_star(j).wedge(&space.eps(j)));
    }
    omega
}

/// Factor translating a top-form coefficient into an integral against
/// the chart volume: `(2i)^n · π^n / n!`.
fn pairing_conversion(n: usize) -> Complex64 {
    let mut factor = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        factor *= Complex64::new(0.0, 2.0) * std::f64::consts::PI / k as f64;
    }
    factor
}

/// Sample points unisolvent for total degree `d`: per-axis roots of unity
/// at staggered radii, restricted to the triangular index set.
fn principal_lattice(n: usize, d: usize) -> Vec<Vec<Complex64>> {
    let radii = [0.6, 0.5];
    let count = d + 1;
    let axis_points: Vec<Vec<Complex64>> = (0..n)
        .map(|axis| {
            (0..count)
                .map(|a| {
                    let theta = 2.0 * std::f64::consts::PI * a as f64 / count as f64;
                    Complex64::new(radii[axis] * theta.cos(), radii[axis] * theta.sin())
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    match n {
        1 => {
            for a in 0..count {
                out.push(vec![axis_points[0][a]]);
            }
        }
        2 => {
            for a in 0..count {
                for b in 0..count - a {
                    out.push(vec![axis_points[0][a], axis_points[1][b]]);
                }
            }
        }
        _ => unreachable!("dimension checked by the callers"),
    }
    debug_assert_eq!(out.len(), binomial(n + d, n));
    out
}

/// Least-squares compression of sampled values onto a monomial basis;
/// returns the polynomial and the root-mean-square residual.
fn fit_polynomial(
    nvars: usize,
    basis: &[Monomial],
    samples: &[Vec<Complex64>],
    values: &[Complex64],
) -> Result<(ComplexPoly, f64), KernelError> {
    let rows = samples.len();
    let cols = basis.len();
    let vandermonde: Vec<Vec<Complex64>> = samples
        .iter()
        .map(|z| basis.iter().map(|mono| eval_monomial(mono, z)).collect())
        .collect();
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); cols]; cols];
    let mut rhs = vec![Complex64::new(0.0, 0.0); cols];
    for p in 0..cols {
        for q in 0..cols {
            let mut total = Complex64::new(0.0, 0.0);
            for s in 0..rows {
                total += vandermonde[s][p].conj() * vandermonde[s][q];
            }
            gram[p][q] = total;
        }
        let mut total = Complex64::new(0.0, 0.0);
        for s in 0..rows {
            total += vandermonde[s][p].conj() * values[s];
        }
        rhs[p] = total;
    }
    let coeffs = solve_complex(gram, rhs).expect("unisolvent sample lattice");
    let mut residual_sq = 0.0;
    for s in 0..rows {
        let mut fitted = Complex64::new(0.0, 0.0);
        for q in 0..cols {
            fitted += vandermonde[s][q] * coeffs[q];
        }
        residual_sq += (fitted - values[s]).norm_sqr();
    }
    let residual = (residual_sq / rows as f64).sqrt();
    if residual > FIT_TOLERANCE {
        return Err(KernelError::FitResidual { residual, tolerance: FIT_TOLERANCE });
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
    let mut poly = ComplexPoly::zero(nvars);
    for (mono, coeff) in basis.iter().zip(&coeffs) {
        if coeff.norm() > 1e-12 * scale {
            poly.add_term(mono.clone(), *coeff);
        }
    }
    Ok((poly, residual))
}

/// Gaussian elimination with partial pivoting over the complex numbers.
fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let size = b.len();
    for col in 0..size {
        let pivot = (col..size).max_by(|&p, &q| {
            a[p][col].norm().partial_cmp(&a[q][col].norm()).expect("finite pivots")
        })?;
        if a[pivot][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..size {
            let factor = a[row][col] / a[col][col];
            if factor.re == 0.0 && factor.im == 0.0 {
                continue;
            }
            for k in col..size {
                let delta = factor * a[col][k];
                a[row][k] -= delta;
            }
            let delta = factor * b[col];
            b[row] -= delta;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); size];
    for col in (0..size).rev() {
        let mut total = b[col];
        for k in col + 1..size {
            total -= a[col][k] * x[k];
        }
        x[col] = total / a[col][col];
    }
    Some(x)
}

/// Elementwise pairwise summation of equal-length vectors, pairing
/// adjacent entries until one remains; the tree depends only on the
/// count.
fn sum_vectors_pairwise(mut items: Vec<Vec<Complex64>>, width: usize) -> Vec<Complex64> {
    if items.is_empty() {
        return vec![Complex64::new(0.0, 0.0); width];
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (slot, value) in a.iter_mut().zip(b) {
                    *slot += value;
                }
            }
            next.push(a);
        }
        items = next;
    }
    items.pop().expect("nonempty")
}

// ============================================================================
// Exact cross-check
// ============================================================================

/// Distance from numerically recovered cofactors to the affine space of
/// exact solutions at budget `r`: the exact system is solved once, the
/// numeric coefficient vector is projected onto the solution space, and
/// the Euclidean gap comes back.  Terms outside the degree budget count
/// into the distance in full.
pub fn macaulay_projection_distance(
    g: &GeneratorSystem,
    phi: &Polynomial,
    r: usize,
    cofactors: &[ComplexPoly],
) -> Result<f64, KernelError> {
    if cofactors.len() != g.len() {
        return Err(KernelError::DimensionMismatch { expected: g.len(), got: cofactors.len() });
    }
    for q in cofactors {
        if q.nvars() != g.n() {
            return Err(KernelError::DimensionMismatch { expected: g.n(), got: q.nvars() });
        }
    }
    if phi.nvars() != g.n() {
        return Err(KernelError::DimensionMismatch { expected: g.n(), got: phi.nvars() });
    }
    let system = build_macaulay(g, r);
    let b = system
        .coefficient_vector(phi)
        .ok_or(KernelError::BudgetTooSmall { degree: phi.degree(), budget: r })?;
    let outcome = system.matrix().solve(&b).map_err(MembershipError::from)?;
    let solution = match outcome {
        SolveOutcome::Solved { solution, .. } => solution,
        SolveOutcome::Inconsistent { .. } => return Err(KernelError::ExactInfeasible),
    };
    let columns = system.cols();
    let mut gap: Vec<Complex64> = columns
        .iter()
        .zip(&solution)
        .map(|((j, mono), exact)| {
            cofactors[*j].coefficient(mono) - Complex64::new(rational_to_f64(exact), 0.0)
        })
        .collect();
    // Numeric terms the budget cannot represent contribute in full.
    let mut excess = 0.0;
    for (j, q) in cofactors.iter().enumerate() {
        let room = r.saturating_sub(g.declared_degree(j));
        for (mono, coeff) in q.terms() {
            if mono.total_degree() > room {
                excess += coeff.norm_sqr();
            }
        }
    }
    let null_basis = system.matrix().nullspace_basis();
    if !null_basis.is_empty() {
        let directions: Vec<Vec<f64>> = null_basis
            .iter()
            .map(|v| v.iter().map(rational_to_f64).collect())
            .collect();
        let k = directions.len();
        let mut gram = vec![vec![Complex64::new(0.0, 0.0); k]; k];
        let mut rhs = vec![Complex64::new(0.0, 0.0); k];
        for p in 0..k {
            for q in 0..k {
                let dot: f64 = directions[p].iter().zip(&directions[q]).map(|(a, b)| a * b).sum();
                gram[p][q] = Complex64::new(dot, 0.0);
            }
            let mut dot = Complex64::new(0.0, 0.0);
            for (a, w) in directions[p].iter().zip(&gap) {
                dot += *w * *a;
            }
            rhs[p] = dot;
        }
        let coeffs = solve_complex(gram, rhs).expect("nullspace basis is independent");
        for (direction, c) in directions.iter().zip(&coeffs) {
            for (slot, a) in gap.iter_mut().zip(direction) {
                *slot -= *c * *a;
            }
        }
    }
    let distance_sq: f64 = gap.iter().map(|c| c.norm_sqr()).sum::<f64>() + excess;
    Ok(distance_sq.sqrt())
}

#[cfg(test)]
mod tests;
