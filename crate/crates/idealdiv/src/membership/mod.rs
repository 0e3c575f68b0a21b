//! Degree-bounded division against a fixed system of generators.
//!
//! The central question: given generators `F_1..F_m` with declared degrees
//! `d_j`, a target `Φ`, and a budget `r`, are there cofactors `Q_j` with
//!
//! ```text
//! F_1 Q_1 + ... + F_m Q_m = Φ^ν,      deg(F_j Q_j) <= r ?
//! ```
//!
//! At a fixed budget this is a finite linear question over the rationals:
//! write each candidate `Q_j` in the monomial basis of degree `<= r - d_j`
//! and match coefficients monomial by monomial.  [`build_macaulay`]
//! materializes that system, [`divide`] solves it exactly, and the answer
//! is either a [`DivisionCertificate`] that re-verifies by plain
//! polynomial arithmetic ([`verify`]), or an infeasibility witness: a
//! monomial whose equation has reduced to `0 = nonzero`, which proves that
//! no cofactors exist within the budget.  No basis conversion, no normal
//! forms; the budget question is answered by the linear system that
//! defines it.
//!
//! [`koszul_divide`] runs the same scheme one level up, for antisymmetric
//! tuples indexed by subsets of the generators, and [`degree_threshold`] /
//! [`power_budget`] report when a budget is a priori large enough for
//! division to succeed.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::linalg::{ExactMatrix, LinalgError, SolveOutcome};
use crate::parallel;
use crate::poly::{monomials_up_to, Monomial, PolyError, Polynomial, Rational};

/// Everything that can go wrong while setting up or running a division.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MembershipError {
    /// A generator system needs at least one generator.
    EmptySystem,
    /// Generator `index` (zero-based) is the zero polynomial.
    ZeroGenerator { index: usize },
    /// A declared degree is smaller than the actual degree of its generator.
    DeclaredDegreeTooSmall { index: usize, declared: usize, actual: usize },
    /// The number of declared degrees does not match the number of generators.
    DegreeCountMismatch { polys: usize, degrees: usize },
    /// A polynomial lives in the wrong number of variables for this system.
    ArityMismatch { expected: usize, got: usize },
    /// The (powered) target has degree beyond the budget, so no row of the
    /// linear system could ever match it.
    TargetDegreeExceedsBudget { degree: usize, budget: usize },
    /// A tuple component is too big for its slot: the slot at index set `J`
    /// only holds polynomials of degree `<= r - sum of d_j over J`.
    ComponentBudgetExceeded { indices: Vec<usize>, degree: usize, r: usize, degree_sum: usize },
    /// A tuple key is not a strictly increasing list of generator indices
    /// (one-based) of the announced length.
    BadComponentIndices { indices: Vec<usize> },
    /// The requested tuple level does not exist for this system.
    LevelOutOfRange { ell: usize, m: usize },
    /// A tuple was built against a different system shape.
    TupleSystemMismatch { expected_m: usize, expected_n: usize, got_m: usize, got_n: usize },
    /// The classical budget `d_1 + ... + d_m - n` needs at least `n + 1`
    /// generators.
    AutoBudgetUndefined { m: usize, n: usize },
    /// A polynomial string failed to parse or validate.
    Poly(PolyError),
    /// The underlying linear solve rejected its input.
    Linalg(LinalgError),
}

impl fmt::Display for MembershipError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MembershipError::EmptySystem => write!(f, "generator system is empty"),
            MembershipError::ZeroGenerator { index } => {
                write!(f, "generator {} is the zero polynomial", index + 1)
            }
            MembershipError::DeclaredDegreeTooSmall { index, declared, actual } => write!(
                f,
                "generator {} has degree {} but declared degree {}",
                index + 1,
                actual,
                declared
            ),
            MembershipError::DegreeCountMismatch { polys, degrees } => {
                write!(f, "{} generators but {} declared degrees", polys, degrees)
            }
            MembershipError::ArityMismatch { expected, got } => {
                write!(f, "expected a polynomial in {} variables, got {}", expected, got)
            }
            MembershipError::TargetDegreeExceedsBudget { degree, budget } => {
                write!(f, "target has degree {} beyond the budget r = {}", degree, budget)
            }
            MembershipError::ComponentBudgetExceeded { indices, degree, r, degree_sum } => write!(
                f,
                "component at {:?} has degree {}, but r - sum of degrees = {} - {} allows {}",
                indices,
                degree,
                r,
                degree_sum,
                if r >= degree_sum {
                    format!("at most {}", r - degree_sum)
                } else {
                    "only zero".to_string()
                }
            ),
            MembershipError::BadComponentIndices { indices } => {
                write!(f, "bad component index set {:?}", indices)
            }
            MembershipError::LevelOutOfRange { ell, m } => {
                write!(f, "tuple level {} is out of range for {} generators", ell, m)
            }
            MembershipError::TupleSystemMismatch { expected_m, expected_n, got_m, got_n } => write!(
                f,
                "tuple was built for m = {}, n = {}, but the system has m = {}, n = {}",
                got_m, got_n, expected_m, expected_n
            ),
            MembershipError::AutoBudgetUndefined { m, n } => write!(
                f,
                "automatic budget needs at least n + 1 = {} generators, got {}",
                n + 1,
                m
            ),
            MembershipError::Poly(e) => write!(f, "{}", e),
            MembershipError::Linalg(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for MembershipError {}

impl From<PolyError> for MembershipError {
    fn from(e: PolyError) -> Self {
        MembershipError::Poly(e)
    }
}

impl From<LinalgError> for MembershipError {
    fn from(e: LinalgError) -> Self {
        MembershipError::Linalg(e)
    }
}

/// Generators `F_1..F_m` in `n` variables together with declared degrees
/// `d_j >= deg F_j`.
///
/// The declared degree, not the actual one, fixes every budget below: a
/// generator of degree 1 declared at degree 2 gets the smaller cofactor
/// space of a quadric.  That is deliberate; declared degrees are part of
/// the problem statement.
#[derive(Clone, Debug)]
pub struct GeneratorSystem {
    n: usize,
    polys: Vec<Polynomial>,
    degrees: Vec<usize>,
}

impl GeneratorSystem {
    pub fn new(
        n: usize,
        polys: Vec<Polynomial>,
        degrees: Vec<usize>,
    ) -> Result<Self, MembershipError> {
        if polys.is_empty() {
            return Err(MembershipError::EmptySystem);
        }
        if polys.len() != degrees.len() {
            return Err(MembershipError::DegreeCountMismatch {
                polys: polys.len(),
                degrees: degrees.len(),
            });
        }
        for (index, p) in polys.iter().enumerate() {
            if p.nvars() != n {
                return Err(MembershipError::ArityMismatch { expected: n, got: p.nvars() });
            }
            if p.is_zero() {
                return Err(MembershipError::ZeroGenerator { index });
            }
            if degrees[index] < p.degree() {
                return Err(MembershipError::DeclaredDegreeTooSmall {
                    index,
                    declared: degrees[index],
                    actual: p.degree(),
                });
            }
        }
        Ok(GeneratorSystem { n, polys, degrees })
    }

    /// Declares each generator at its actual degree.
    pub fn with_actual_degrees(n: usize, polys: Vec<Polynomial>) -> Result<Self, MembershipError> {
        let degrees = polys.iter().map(|p| p.degree()).collect();
        GeneratorSystem::new(n, polys, degrees)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators.
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    /// A constructed system is never empty.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn generator(&self, j: usize) -> &Polynomial {
        &self.polys[j]
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn declared_degree(&self, j: usize) -> usize {
        self.degrees[j]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }
}

/// The coefficient-matching system for `sum_j F_j Q_j` at budget `r`.
///
/// Rows are the monomials of degree `<= r` in ascending grevlex order;
/// columns are pairs of a generator index (zero-based) and a monomial
/// `kappa` of degree `<= r - d_j`, ordered by generator first and then by
/// ascending grevlex.  Entry `(mu, (j, kappa))` is the coefficient of `mu`
/// in `F_j * kappa`.
#[derive(Clone, Debug)]
pub struct MacaulaySystem {
    rows: Vec<Monomial>,
    cols: Vec<(usize, Monomial)>,
    matrix: ExactMatrix,
}

impl MacaulaySystem {
    pub fn rows(&self) -> &[Monomial] {
        &self.rows
    }

    pub fn cols(&self) -> &[(usize, Monomial)] {
        &self.cols
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    /// Coefficients of `phi` in row order, or `None` if some monomial of
    /// `phi` has no row (degree beyond the budget).
    pub fn coefficient_vector(&self, phi: &Polynomial) -> Option<Vec<Rational>> {
        let mut b = vec![Rational::zero(); self.rows.len()];
        for (mono, coeff) in phi.terms() {
            match self.rows.binary_search(mono) {
                Ok(row) => b[row] = coeff.clone(),
                Err(_) => return None,
            }
        }
        Some(b)
    }
}

/// Builds the coefficient-matching system at budget `r`.
///
/// Columns are assembled in parallel when the `parallel` feature is on;
/// the result is identical either way.
pub fn build_macaulay(g: &GeneratorSystem, r: usize) -> MacaulaySystem {
    build_macaulay_impl(g, r, true)
}

/// Sequential twin of [`build_macaulay`], for comparison runs.
pub fn build_macaulay_seq(g: &GeneratorSystem, r: usize) -> MacaulaySystem {
    build_macaulay_impl(g, r, false)
}

fn build_macaulay_impl(g: &GeneratorSystem, r: usize, par: bool) -> MacaulaySystem {
    let rows = monomials_up_to(g.n(), r);
    let mut cols = Vec::new();
    for j in 0..g.len() {
        if g.declared_degree(j) > r {
            continue;
        }
        for kappa in monomials_up_to(g.n(), r - g.declared_degree(j)) {
            cols.push((j, kappa));
        }
    }
    let fill = |c: usize| {
        let (j, kappa) = &cols[c];
        let mut col = vec![Rational::zero(); rows.len()];
        for (mono, coeff) in g.generator(*j).terms() {
            let product = mono.mul(kappa);
            let row = rows
                .binary_search(&product)
                .expect("product degree stays within the row budget");
            col[row] = coeff.clone();
        }
        col
    };
    let columns = if par {
        parallel::map_indexed(cols.len(), fill)
    } else {
        parallel::map_indexed_seq(cols.len(), fill)
    };
    let matrix = ExactMatrix::from_columns(rows.len(), &columns);
    MacaulaySystem { rows, cols, matrix }
}

/// Cofactors `Q_1..Q_m` with `sum_j F_j Q_j = Φ^ν` and
/// `deg(F_j Q_j) <= r`.
///
/// `verified` is true once [`verify`] has confirmed the identity, the
/// product bound, and the per-slot bound `deg Q_j <= r - d_j` by direct
/// recomputation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DivisionCertificate {
    cofactors: Vec<Polynomial>,
    nu: u32,
    r: usize,
    verified: bool,
}

impl DivisionCertificate {
    /// Wraps externally supplied cofactors as an unchecked claim; run
    /// [`verify`] to decide it.
    pub fn claim(cofactors: Vec<Polynomial>, nu: u32, r: usize) -> Self {
        DivisionCertificate { cofactors, nu, r, verified: false }
    }

    pub fn cofactors(&self) -> &[Polynomial] {
        &self.cofactors
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    /// Largest degree among the products `F_j Q_j` (zero if all vanish).
    pub fn max_product_degree(&self, g: &GeneratorSystem) -> usize {
        max_product_degree(g, &self.cofactors)
    }
}

/// Largest degree among the products `F_j Q_j`, zero if every product is.
pub fn max_product_degree(g: &GeneratorSystem, cofactors: &[Polynomial]) -> usize {
    assert_eq!(g.len(), cofactors.len(), "cofactor count mismatch");
    let mut max = 0;
    for (f, q) in g.polys().iter().zip(cofactors) {
        if !q.is_zero() {
            max = max.max(f.degree() + q.degree());
        }
    }
    max
}

/// Outcome of a division at a fixed budget.
///
/// `Infeasible` is a proof, not a failure report: the witness monomial's
/// equation reduced to `0 = nonzero`, so no cofactors of the admissible
/// degrees exist.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DivideOutcome {
    Certificate(DivisionCertificate),
    Infeasible { witness: Monomial },
}

impl DivideOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, DivideOutcome::Certificate(_))
    }

    pub fn certificate(self) -> Option<DivisionCertificate> {
        match self {
            DivideOutcome::Certificate(c) => Some(c),
            DivideOutcome::Infeasible { .. } => None,
        }
    }
}

/// Decides whether `Φ = sum_j F_j Q_j` is solvable with
/// `deg(F_j Q_j) <= r`, and produces the certificate when it is.
///
/// Free coefficients are pinned to zero under the grevlex column order, so
/// the certificate is deterministic.  `Φ = 0` yields the trivial
/// certificate at any budget.
pub fn divide(
    g: &GeneratorSystem,
    phi: &Polynomial,
    r: usize,
) -> Result<DivideOutcome, MembershipError> {
    divide_impl(g, phi, 1, r)
}

fn divide_impl(
    g: &GeneratorSystem,
    phi: &Polynomial,
    nu: u32,
    r: usize,
) -> Result<DivideOutcome, MembershipError> {
    if phi.nvars() != g.n() {
        return Err(MembershipError::ArityMismatch { expected: g.n(), got: phi.nvars() });
    }
    if phi.is_zero() {
        let cofactors = vec![Polynomial::zero(g.n()); g.len()];
        return Ok(DivideOutcome::Certificate(DivisionCertificate {
            cofactors,
            nu,
            r,
            verified: true,
        }));
    }
    let target = if nu == 1 { phi.clone() } else { phi.pow(nu as usize) };
    if target.degree() > r {
        return Err(MembershipError::TargetDegreeExceedsBudget {
            degree: target.degree(),
            budget: r,
        });
    }
    let system = build_macaulay(g, r);
    let b = system
        .coefficient_vector(&target)
        .expect("target degree is within the row budget");
    match system.matrix.solve(&b)? {
        SolveOutcome::Solved { solution, .. } => {
            let mut cofactors = vec![Polynomial::zero(g.n()); g.len()];
            for (c, (j, kappa)) in system.cols.iter().enumerate() {
                if !solution[c].is_zero() {
                    cofactors[*j].add_term(kappa.clone(), solution[c].clone());
                }
            }
            let mut cert = DivisionCertificate { cofactors, nu, r, verified: false };
            cert.verified = verify(g, phi, &cert);
            Ok(DivideOutcome::Certificate(cert))
        }
        SolveOutcome::Inconsistent { witness_row } => {
            Ok(DivideOutcome::Infeasible { witness: system.rows[witness_row].clone() })
        }
    }
}

/// Division with target 1: a certificate here exhibits `1 ∈ (F)`, so the
/// generators have no common zero.
pub fn bezout(g: &GeneratorSystem, r: usize) -> Result<DivideOutcome, MembershipError> {
    divide(g, &Polynomial::one(g.n()), r)
}

/// The classical budget `d_1 + ... + d_m - n`, defined once there are at
/// least `n + 1` generators.
pub fn macaulay_budget(g: &GeneratorSystem) -> Result<usize, MembershipError> {
    if g.len() < g.n() + 1 {
        return Err(MembershipError::AutoBudgetUndefined { m: g.len(), n: g.n() });
    }
    let sum: usize = g.degrees().iter().sum();
    Ok(sum.saturating_sub(g.n()))
}

/// Outcome of the upward search over powers of the target.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PowerDivideOutcome {
    /// Certificate for the smallest feasible power; its `nu` records which.
    Found(DivisionCertificate),
    /// No power up to `nu_max` worked; the witness belongs to the last
    /// attempt.
    Infeasible { witness: Monomial },
}

/// Searches for the smallest `ν <= nu_max` with
/// `divide(g, Φ^ν, r_of_nu(ν))` feasible.
///
/// The interesting direction is upward: a small feasible power is the
/// informative answer, while the budget rule encodes how much room each
/// power is given.
pub fn power_divide<F>(
    g: &GeneratorSystem,
    phi: &Polynomial,
    nu_max: u32,
    r_of_nu: F,
) -> Result<PowerDivideOutcome, MembershipError>
where
    F: Fn(u32) -> usize,
{
    assert!(nu_max >= 1, "nu_max must be at least 1");
    let mut last_witness = None;
    for nu in 1..=nu_max {
        match divide_impl(g, phi, nu, r_of_nu(nu))? {
            DivideOutcome::Certificate(cert) => return Ok(PowerDivideOutcome::Found(cert)),
            DivideOutcome::Infeasible { witness } => last_witness = Some(witness),
        }
    }
    let witness = last_witness.expect("at least one power was attempted");
    Ok(PowerDivideOutcome::Infeasible { witness })
}

/// Checks a certificate by direct recomputation, independent of the
/// solver: the identity `sum_j F_j Q_j = Φ^ν` must hold exactly, every
/// product must satisfy `deg(F_j Q_j) <= r`, and every cofactor must fit
/// its slot, `deg Q_j <= r - d_j`.
pub fn verify(g: &GeneratorSystem, phi: &Polynomial, cert: &DivisionCertificate) -> bool {
    if cert.cofactors.len() != g.len() || phi.nvars() != g.n() || cert.nu == 0 {
        return false;
    }
    let mut sum = Polynomial::zero(g.n());
    for (j, q) in cert.cofactors.iter().enumerate() {
        if q.nvars() != g.n() {
            return false;
        }
        if q.is_zero() {
            continue;
        }
        if q.degree() + g.declared_degree(j) > cert.r {
            return false;
        }
        let product = g.generator(j) * q;
        if !product.is_zero() && product.degree() > cert.r {
            return false;
        }
        sum = &sum + &product;
    }
    sum == phi.pow(cert.nu as usize)
}

/// An antisymmetric tuple: one polynomial per strictly increasing index
/// set `J ⊆ {1..m}` of size `ell`, of degree at most `r - sum of d_j over
/// J`.  Index sets whose degree sum exceeds `r` can only hold zero, so
/// their components are simply absent.
///
/// Level 0 has the single empty index set and is just a polynomial of
/// degree `<= r`; level 1 is a candidate cofactor tuple.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KoszulTuple {
    m: usize,
    n: usize,
    ell: usize,
    r: usize,
    components: BTreeMap<Vec<usize>, Polynomial>,
}

impl KoszulTuple {
    /// Validates index sets and slot budgets against `g`; zero components
    /// are dropped.
    pub fn new(
        g: &GeneratorSystem,
        ell: usize,
        r: usize,
        components: BTreeMap<Vec<usize>, Polynomial>,
    ) -> Result<Self, MembershipError> {
        let mut kept = BTreeMap::new();
        for (indices, poly) in components {
            let increasing = indices.windows(2).all(|w| w[0] < w[1]);
            let in_range = indices.iter().all(|&j| j >= 1 && j <= g.len());
            if indices.len() != ell || !increasing || !in_range {
                return Err(MembershipError::BadComponentIndices { indices });
            }
            if poly.nvars() != g.n() {
                return Err(MembershipError::ArityMismatch { expected: g.n(), got: poly.nvars() });
            }
            if poly.is_zero() {
                continue;
            }
            let degree_sum: usize = indices.iter().map(|&j| g.declared_degree(j - 1)).sum();
            if degree_sum > r || poly.degree() > r - degree_sum {
                return Err(MembershipError::ComponentBudgetExceeded {
                    indices,
                    degree: poly.degree(),
                    r,
                    degree_sum,
                });
            }
            kept.insert(indices, poly);
        }
        Ok(KoszulTuple { m: g.len(), n: g.n(), ell, r, components: kept })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// The component at `indices`, or `None` when it is zero.
    pub fn component(&self, indices: &[usize]) -> Option<&Polynomial> {
        self.components.get(indices)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Polynomial)> {
        self.components.iter()
    }

    fn check_system(&self, g: &GeneratorSystem) -> Result<(), MembershipError> {
        if self.m != g.len() || self.n != g.n() {
            return Err(MembershipError::TupleSystemMismatch {
                expected_m: g.len(),
                expected_n: g.n(),
                got_m: self.m,
                got_n: self.n,
            });
        }
        Ok(())
    }
}

/// Outcome of a tuple division.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum KoszulOutcome {
    Tuple(KoszulTuple),
    /// The equation block at `witness_indices`, row `witness_monomial`,
    /// reduced to `0 = nonzero`.
    Infeasible { witness_indices: Vec<usize>, witness_monomial: Monomial },
}

/// Strictly increasing `k`-subsets of `1..=m`, lexicographically.
fn index_sets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for j in start..=(m + 1 - need) {
            cur.push(j);
            extend(m, k, j + 1, cur, out);
            cur.pop();
        }
    }
    if k > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    extend(m, k, 1, &mut Vec::new(), &mut out);
    out
}

/// Degree room left at the slot `indices`, or `None` when the slot only
/// holds zero.
fn slot_budget(g: &GeneratorSystem, r: usize, indices: &[usize]) -> Option<usize> {
    let degree_sum: usize = indices.iter().map(|&j| g.declared_degree(j - 1)).sum();
    if degree_sum > r {
        None
    } else {
        Some(r - degree_sum)
    }
}

struct TupleBlock {
    indices: Vec<usize>,
    rows: Vec<Monomial>,
    offset: usize,
}

/// Solves `delta(psi) = phi` for a tuple `psi` one level above `phi`,
/// where `delta` is the alternating contraction of [`koszul_delta`].
///
/// Level 0 coincides with [`divide`]: the empty index set carries the
/// target, and the level-1 solution is the cofactor tuple.
pub fn koszul_divide(
    g: &GeneratorSystem,
    phi: &KoszulTuple,
) -> Result<KoszulOutcome, MembershipError> {
    phi.check_system(g)?;
    if phi.ell() >= g.len() {
        return Err(MembershipError::LevelOutOfRange { ell: phi.ell(), m: g.len() });
    }
    let n = g.n();
    let r = phi.r();

    let mut blocks = Vec::new();
    let mut total_rows = 0;
    for indices in index_sets(g.len(), phi.ell()) {
        let budget = match slot_budget(g, r, &indices) {
            Some(b) => b,
            None => continue,
        };
        let rows = monomials_up_to(n, budget);
        let offset = total_rows;
        total_rows += rows.len();
        blocks.push(TupleBlock { indices, rows, offset });
    }
    let block_position: BTreeMap<Vec<usize>, usize> =
        blocks.iter().enumerate().map(|(i, b)| (b.indices.clone(), i)).collect();

    // Unknown slots one level up, flattened to (index set, kappa) columns.
    let mut unknown_sets = Vec::new();
    let mut col_specs = Vec::new();
    for indices in index_sets(g.len(), phi.ell() + 1) {
        let budget = match slot_budget(g, r, &indices) {
            Some(b) => b,
            None => continue,
        };
        let kappas = monomials_up_to(n, budget);
        unknown_sets.push((indices.clone(), col_specs.len(), kappas.len()));
        for kappa in kappas {
            col_specs.push((indices.clone(), kappa));
        }
    }

    let columns = parallel::map_indexed(col_specs.len(), |c| {
        let (indices, kappa) = &col_specs[c];
        let mut col = vec![Rational::zero(); total_rows];
        for (pos, &j) in indices.iter().enumerate() {
            let mut sub = indices.clone();
            sub.remove(pos);
            let block = &blocks[block_position[&sub]];
            let negate = pos % 2 == 1;
            for (mono, coeff) in g.generator(j - 1).terms() {
                let product = mono.mul(kappa);
                let row = block
                    .rows
                    .binary_search(&product)
                    .expect("product degree stays within the block budget");
                let signed = if negate { -coeff.clone() } else { coeff.clone() };
                let slot = block.offset + row;
                col[slot] = col[slot].clone() + signed;
            }
        }
        col
    });
    let matrix = ExactMatrix::from_columns(total_rows, &columns);

    let mut b = vec![Rational::zero(); total_rows];
    for block in &blocks {
        if let Some(poly) = phi.component(&block.indices) {
            for (mono, coeff) in poly.terms() {
                let row = block
                    .rows
                    .binary_search(mono)
                    .expect("component degree is within its slot budget");
                b[block.offset + row] = coeff.clone();
            }
        }
    }

    match matrix.solve(&b)? {
        SolveOutcome::Solved { solution, .. } => {
            let mut components = BTreeMap::new();
            for (indices, first_col, count) in unknown_sets {
                let mut poly = Polynomial::zero(n);
                for c in first_col..first_col + count {
                    if !solution[c].is_zero() {
                        poly.add_term(col_specs[c].1.clone(), solution[c].clone());
                    }
                }
                components.insert(indices, poly);
            }
            let psi = KoszulTuple::new(g, phi.ell() + 1, r, components)?;
            Ok(KoszulOutcome::Tuple(psi))
        }
        SolveOutcome::Inconsistent { witness_row } => {
            let block = blocks
                .iter()
                .rfind(|b| b.offset <= witness_row)
                .expect("witness row lies in some block");
            Ok(KoszulOutcome::Infeasible {
                witness_indices: block.indices.clone(),
                witness_monomial: block.rows[witness_row - block.offset].clone(),
            })
        }
    }
}

/// The alternating contraction against the generators: the component of
/// `delta(psi)` at `J` is `sum over j not in J` of `±F_j` times the
/// component of `psi` at `J ∪ {j}`, with the sign `(-1)^(i-1)` for `j` in
/// position `i` of the enlarged set.
///
/// Applying it twice gives zero, so `koszul_divide` asks for a preimage
/// under this map.
pub fn koszul_delta(
    g: &GeneratorSystem,
    psi: &KoszulTuple,
) -> Result<KoszulTuple, MembershipError> {
    psi.check_system(g)?;
    if psi.ell() == 0 {
        return Err(MembershipError::LevelOutOfRange { ell: 0, m: g.len() });
    }
    let mut components: BTreeMap<Vec<usize>, Polynomial> = BTreeMap::new();
    for (indices, poly) in psi.components() {
        for (pos, &j) in indices.iter().enumerate() {
            let mut sub = indices.clone();
            sub.remove(pos);
            let mut term = g.generator(j - 1) * poly;
            if pos % 2 == 1 {
                term = -&term;
            }
            let entry = components.entry(sub).or_insert_with(|| Polynomial::zero(g.n()));
            *entry = &*entry + &term;
        }
    }
    KoszulTuple::new(g, psi.ell() - 1, psi.r(), components)
}

/// Whether a budget is known in advance to make level-`ell` division
/// solvable.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Threshold {
    /// Few enough generators that the obstruction vanishes at any budget:
    /// `m - ell <= n`.
    AutoSatisfied,
    /// Smallest budget covered by the degree-sum bound.
    MinimalR(usize),
}

/// The degree threshold for solvability at level `ell`: division succeeds
/// whenever `m - ell <= n`, or else whenever `r` is at least the sum of
/// the `n + ell + 1` largest declared degrees minus `n`.
///
/// With fewer than `n + ell + 1` generators the degree sum would be
/// truncated, but that regime is exactly `m - ell <= n`, so the answer is
/// `AutoSatisfied` and the sum is never formed.
pub fn degree_threshold(degrees: &[usize], n: usize, ell: usize) -> Threshold {
    let m = degrees.len();
    if m <= n + ell {
        return Threshold::AutoSatisfied;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let sum: usize = sorted.iter().take(n + ell + 1).sum();
    Threshold::MinimalR(sum.saturating_sub(n))
}

/// What the scaling factor in [`power_budget`] means.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BudgetMode {
    /// The factor is a degree bound `r` for the target of a membership
    /// question.
    Membership,
    /// The factor is a global growth exponent `M` for a target of 1.
    Bezout,
}

/// Power and budget granted by the min(m, n) bound.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PowerBudget {
    pub mode: BudgetMode,
    /// Exponent `min(m, n)` to raise the target to.
    pub power: usize,
    /// Degree budget `factor * min(m, n)`.
    pub degree_budget: usize,
    /// Whether the budget clears the degree-sum condition (automatic for
    /// `m <= n`).
    pub condition_ok: bool,
}

/// The min(m, n)-power budget: raising the target to `min(m, n)` and
/// allowing degree `factor * min(m, n)` suffices once that budget reaches
/// the sum of the `n + 1` largest declared degrees minus `n` (or
/// unconditionally when `m <= n`).
///
/// The arithmetic is the same in both modes; `mode` only records what the
/// factor meant, which matters for reading the result.
pub fn power_budget(degrees: &[usize], n: usize, factor: usize, mode: BudgetMode) -> PowerBudget {
    let m = degrees.len();
    let power = m.min(n);
    let degree_budget = factor * power;
    let condition_ok = if m <= n {
        true
    } else {
        let mut sorted = degrees.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let sum: usize = sorted.iter().take(n + 1).sum();
        degree_budget >= sum.saturating_sub(n)
    };
    PowerBudget { mode, power, degree_budget, condition_ok }
}

/// On-disk form of a division certificate, for exchange between runs and
/// tools.  All polynomials are strings in the input grammar.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub n: usize,
    pub generators: Vec<String>,
    pub declared_degrees: Vec<usize>,
    pub target: String,
    pub nu: u32,
    pub r: usize,
    pub cofactors: Vec<String>,
    pub verified: bool,
    pub max_deg_fq: usize,
}

impl CertificateFile {
    pub fn from_certificate(
        g: &GeneratorSystem,
        phi: &Polynomial,
        cert: &DivisionCertificate,
    ) -> Self {
        CertificateFile {
            n: g.n(),
            generators: g.polys().iter().map(|f| f.to_string()).collect(),
            declared_degrees: g.degrees().to_vec(),
            target: phi.to_string(),
            nu: cert.nu(),
            r: cert.r(),
            cofactors: cert.cofactors().iter().map(|q| q.to_string()).collect(),
            verified: cert.verified(),
            max_deg_fq: cert.max_product_degree(g),
        }
    }

    /// Re-parses every polynomial and re-runs [`verify`] from scratch.
    ///
    /// `Ok(true)` means the file is internally consistent AND the identity
    /// checks out AND the file claims `verified`; a file that honestly
    /// declares itself unverified fails the check.
    pub fn check(&self) -> Result<bool, MembershipError> {
        let polys = self
            .generators
            .iter()
            .map(|s| Polynomial::parse(s, self.n))
            .collect::<Result<Vec<_>, _>>()?;
        let g = GeneratorSystem::new(self.n, polys, self.declared_degrees.clone())?;
        let phi = Polynomial::parse(&self.target, self.n)?;
        let cofactors = self
            .cofactors
            .iter()
            .map(|s| Polynomial::parse(s, self.n))
            .collect::<Result<Vec<_>, _>>()?;
        if cofactors.len() != g.len() {
            return Ok(false);
        }
        let cert = DivisionCertificate::claim(cofactors, self.nu, self.r);
        let sound = verify(&g, &phi, &cert);
        let max_deg = cert.max_product_degree(&g);
        Ok(sound && self.verified && max_deg == self.max_deg_fq)
    }
}
