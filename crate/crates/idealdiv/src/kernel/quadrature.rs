//! Numerical integration over the affine chart of projective space in the
//! Fubini-Study normalization of total volume one.
//!
//! Each complex axis is covered by a periodic trapezoid rule in the angle
//! and a Gauss-Legendre rule in a compactified radial coordinate
//! `t ∈ (0, π/2)`.  The radius of an axis is `tan t` scaled by the norm
//! accumulated over the earlier axes: that nested chart splits the joint
//! volume density into one analytic factor per axis, so the tensor rule
//! keeps its spectral accuracy in several variables (with independent
//! per-axis radii the density has a corner where two radii diverge
//! together, and the same rule stalls near 1e-6).
//!
//! Nodes are never materialized as a list: a rule knows how to produce
//! the node of any index, and integration walks the index range in fixed
//! chunks with pairwise summation, so the result does not depend on how
//! the walk is scheduled.

use num_complex::Complex64;

use super::KernelError;
use crate::parallel;
use crate::poly::{binomial, Polynomial};

/// Nodes and weights for one or two complex variables; weights carry the
/// full Fubini-Study density, so they sum to the unit total volume, and
/// in fact each axis sums to one on its own.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    n: usize,
    resolution: usize,
    /// Per axis, per radial node: `tan t` (to be scaled by the partial
    /// norm at evaluation time) and the complete axis weight, density
    /// share included.
    radial: Vec<Vec<(f64, f64)>>,
    /// Cosine and sine of each angular node.
    angular: Vec<(f64, f64)>,
}

/// Chunk length used by every integration walk; fixing it makes the
/// summation tree identical no matter how chunks are scheduled.
const CHUNK: usize = 1024;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(count: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    let nf = count as f64;
    for k in 1..=count {
        let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (nf + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..64 {
            // Legendre recurrence for P_count(x) and P'_count(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=count {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let value = if count == 1 { x } else { p1 };
            derivative = nf * (x * value - p0) / (x * x - 1.0);
            let step = value / derivative;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - x * x) * derivative * derivative);
        out.push((x, weight));
    }
    out
}

/// Builds the product rule for `n` complex variables at the given
/// per-axis resolution (that many angles and that many radii per axis).
pub fn fs_quadrature(n: usize, resolution: usize) -> Result<QuadratureRule, KernelError> {
    if n == 0 || n > 2 {
        return Err(KernelError::UnsupportedDimension { n });
    }
    assert!(resolution >= 1, "resolution must be positive");
    let quarter = std::f64::consts::FRAC_PI_4;
    let angular_step = 2.0 * std::f64::consts::PI / resolution as f64;
    let base = gauss_legendre(resolution);
    let radial = (0..n)
        .map(|axis| {
            // Axis `a` gets the radius `sqrt(1 + Σ_{k<a} ρ_k²)·tan t`.
            // Under that substitution the polar Jacobian and this axis'
            // share of the volume density collapse to the profile
            // `sin t·cos^{2a+1} t`, analytic on the closed interval, and
            // with the prefactor `(a+1)/π` the axis sums to one on its
            // own: `2π·(a+1)/π·∫ sin t·cos^{2a+1} t dt = 1`.
            let share = (axis as f64 + 1.0) / std::f64::consts::PI;
            base.iter()
                .map(|&(x, w)| {
                    let t = quarter * (x + 1.0);
                    let profile = t.sin() * t.cos().powi(2 * axis as i32 + 1);
                    (t.tan(), w * quarter * share * profile * angular_step)
                })
                .collect()
        })
        .collect();
    let angular = (0..resolution)
        .map(|a| {
            let theta = 2.0 * std::f64::consts::PI * a as f64 / resolution as f64;
            (theta.cos(), theta.sin())
        })
        .collect();
    Ok(QuadratureRule { n, resolution, radial, angular })
}

impl QuadratureRule {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Total number of nodes: `resolution²` per complex variable.
    pub fn len(&self) -> usize {
        (self.resolution * self.resolution).pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes node `index` into `out[..n]` and returns its weight,
    /// density included.
    pub(crate) fn fill_node(&self, index: usize, out: &mut [Complex64; 2]) -> f64 {
        let mut rest = index;
        let mut digits = [(0usize, 0usize); 2];
        for axis in (0..self.n).rev() {
            let a = rest % self.resolution;
            rest /= self.resolution;
            let g = rest % self.resolution;
            rest /= self.resolution;
            digits[axis] = (g, a);
        }
        let mut weight = 1.0;
        let mut scale_sq = 1.0f64;
        for axis in 0..self.n {
            let (g, a) = digits[axis];
            let (tan_t, axis_weight) = self.radial[axis][g];
            let (cos, sin) = self.angular[a];
            let rho = scale_sq.sqrt() * tan_t;
            out[axis] = Complex64::new(rho * cos, rho * sin);
            weight *= axis_weight;
            scale_sq *= 1.0 + tan_t * tan_t;
        }
        weight
    }

    /// The node of the given index and its weight.
    pub fn node(&self, index: usize) -> (Vec<Complex64>, f64) {
        assert!(index < self.len(), "node index out of range");
        let mut buffer = [Complex64::new(0.0, 0.0); 2];
        let weight = self.fill_node(index, &mut buffer);
        (buffer[..self.n].to_vec(), weight)
    }

    /// Integrates `f` against the Fubini-Study volume.  The summation
    /// tree is fixed by the node indexing, so the parallel and the
    /// sequential walk produce identical results.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let chunks = self.chunk_values(&f, false);
        pairwise_sum(&chunks)
    }

    /// The strictly sequential twin of [`integrate`](Self::integrate).
    pub fn integrate_seq<F>(&self, f: F) -> Complex64
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let chunks = self.chunk_values(&f, true);
        pairwise_sum(&chunks)
    }

    fn chunk_values<F>(&self, f: &F, sequential: bool) -> Vec<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let total = self.len();
        let count = total.div_ceil(CHUNK);
        let evaluate = |chunk: usize| {
            let start = chunk * CHUNK;
            let end = total.min(start + CHUNK);
            let mut values = Vec::with_capacity(end - start);
            let mut buffer = [Complex64::new(0.0, 0.0); 2];
            for index in start..end {
                let weight = self.fill_node(index, &mut buffer);
                values.push(f(&buffer[..self.n]) * weight);
            }
            pairwise_sum(&values)
        };
        if sequential {
            parallel::map_indexed_seq(count, evaluate)
        } else {
            parallel::map_indexed(count, evaluate)
        }
    }
}

/// Sums by recursive halving; the tree depends only on the length.
pub(crate) fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        len => {
            let mid = len / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Evaluates the degree-`r` reproducing integral at `z`: for a polynomial
/// of degree at most `r` the result converges to `phi(z)` as the rule is
/// refined.
pub fn bergman_reproduce(
    phi: &Polynomial,
    r: usize,
    z: &[Complex64],
    rule: &QuadratureRule,
) -> Result<Complex64, KernelError> {
    let n = rule.n();
    if phi.nvars() != n || z.len() != n {
        return Err(KernelError::DimensionMismatch { expected: n, got: phi.nvars().max(z.len()) });
    }
    if phi.degree() > r {
        return Err(KernelError::BudgetTooSmall { degree: phi.degree(), budget: r });
    }
    let factor = binomial(n + r, n) as f64;
    let value = rule.integrate(|zeta| {
        let mut w2 = 1.0;
        let mut pairing = Complex64::new(1.0, 0.0);
        for k in 0..n {
            w2 += zeta[k].norm_sqr();
            pairing += z[k] * zeta[k].conj();
        }
        (pairing / w2).powu(r as u32) * phi.eval_complex(zeta)
    });
    Ok(value * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauss_legendre_integrates_low_degrees_exactly() {
        for count in [1usize, 2, 5, 16] {
            let rule = gauss_legendre(count);
            let total: f64 = rule.iter().map(|&(_, w)| w).sum();
            assert!((total - 2.0).abs() < 1e-13);
            if count >= 2 {
                let quadratic: f64 = rule.iter().map(|&(x, w)| w * x * x).sum();
                assert!((quadratic - 2.0 / 3.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn weights_sum_to_unit_volume_in_one_variable() {
        let rule = fs_quadrature(1, 64).unwrap();
        let total = rule.integrate(|_| c(1.0, 0.0));
        assert!((total - c(1.0, 0.0)).norm() < 1e-10, "total {}", total);
    }

    #[test]
    fn weights_sum_to_unit_volume_in_two_variables() {
        let rule = fs_quadrature(2, 48).unwrap();
        let total = rule.integrate(|_| c(1.0, 0.0));
        assert!((total - c(1.0, 0.0)).norm() < 1e-8, "total {}", total);
    }

    #[test]
    fn odd_moments_vanish() {
        let rule = fs_quadrature(1, 32).unwrap();
        let moment = rule.integrate(|zeta| zeta[0]);
        assert!(moment.norm() < 1e-12);
    }

    #[test]
    fn radial_moment_matches_the_closed_form() {
        // ∫ |ζ|²/(1+|ζ|²) dV = 1/2 on the line.
        let rule = fs_quadrature(1, 64).unwrap();
        let moment = rule.integrate(|zeta| {
            let r2 = zeta[0].norm_sqr();
            c(r2 / (1.0 + r2), 0.0)
        });
        assert!((moment - c(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn parallel_and_sequential_walks_agree_exactly() {
        let rule = fs_quadrature(1, 40).unwrap();
        let f = |zeta: &[Complex64]| zeta[0] * zeta[0].conj() + c(0.25, -0.125);
        assert_eq!(rule.integrate(f), rule.integrate_seq(f));
        let rule2 = fs_quadrature(2, 12).unwrap();
        let g = |zeta: &[Complex64]| zeta[0] * zeta[1].conj() + c(1.0, 0.5);
        assert_eq!(rule2.integrate(g), rule2.integrate_seq(g));
    }

    #[test]
    fn node_indexing_is_lazy_and_consistent() {
        let rule = fs_quadrature(2, 6).unwrap();
        assert_eq!(rule.len(), 6usize.pow(4));
        let (point, weight) = rule.node(rule.len() - 1);
        assert_eq!(point.len(), 2);
        assert!(weight > 0.0);
        let direct = rule.integrate(|_| c(1.0, 0.0));
        let mut manual = Vec::with_capacity(rule.len());
        for index in 0..rule.len() {
            let (_, w) = rule.node(index);
            manual.push(c(w, 0.0));
        }
        // Same nodes, same weights; only the tree shape differs.
        assert!((direct - pairwise_sum(&manual)).norm() < 1e-12);
    }

    #[test]
    fn constant_is_reproduced() {
        let rule = fs_quadrature(1, 64).unwrap();
        let phi = Polynomial::one(1);
        let value = bergman_reproduce(&phi, 0, &[c(0.0, 0.0)], &rule).unwrap();
        assert!((value - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn linear_is_reproduced_off_center() {
        let rule = fs_quadrature(1, 64).unwrap();
        let phi = Polynomial::variable(1, 0);
        let value = bergman_reproduce(&phi, 1, &[c(0.5, 0.0)], &rule).unwrap();
        assert!((value - c(0.5, 0.0)).norm() < 1e-8, "value {}", value);
    }

    #[test]
    fn quadratic_is_reproduced() {
        let rule = fs_quadrature(1, 64).unwrap();
        let phi = Polynomial::parse("z1^2", 1).unwrap();
        let value = bergman_reproduce(&phi, 2, &[c(0.3, 0.0)], &rule).unwrap();
        assert!((value - c(0.09, 0.0)).norm() < 1e-8, "value {}", value);
    }

    #[test]
    fn two_variable_product_is_reproduced() {
        let rule = fs_quadrature(2, 24).unwrap();
        let phi = Polynomial::parse("z1*z2", 2).unwrap();
        let value = bergman_reproduce(&phi, 2, &[c(0.2, 0.1), c(-0.3, 0.0)], &rule).unwrap();
        let expected = c(0.2, 0.1) * c(-0.3, 0.0);
        assert!((value - expected).norm() < 1e-4, "value {}", value);
    }

    #[test]
    fn excess_budget_still_reproduces() {
        let rule = fs_quadrature(1, 64).unwrap();
        let phi = Polynomial::variable(1, 0);
        let value = bergman_reproduce(&phi, 3, &[c(-0.4, 0.2)], &rule).unwrap();
        assert!((value - c(-0.4, 0.2)).norm() < 1e-7, "value {}", value);
    }

    #[test]
    fn undersized_budget_is_rejected() {
        let rule = fs_quadrature(1, 8).unwrap();
        let phi = Polynomial::parse("z1^2", 1).unwrap();
        match bergman_reproduce(&phi, 1, &[c(0.0, 0.0)], &rule) {
            Err(KernelError::BudgetTooSmall { degree: 2, budget: 1 }) => {}
            other => panic!("unexpected outcome: {:?}", other),
        }
        match fs_quadrature(3, 8) {
            Err(KernelError::UnsupportedDimension { n: 3 }) => {}
            other => panic!("unexpected outcome: {:?}", other.map(|_| ())),
        }
    }
}
