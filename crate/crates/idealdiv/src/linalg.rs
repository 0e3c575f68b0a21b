//! Exact rational linear algebra.
//!
//! `solve`, `rank` and `nullspace_basis` all run on one engine: rows are
//! scaled to a common-denominator-cleared integer matrix, then reduced by
//! Bareiss fraction-free elimination.  Every internal division is checked to
//! leave no remainder, so a broken invariant aborts loudly instead of
//! corrupting a certificate.  Outputs are fully deterministic: pivots are
//! chosen left to right with the first usable row, free variables are pinned
//! to zero, and identically-zero columns are pruned up front and reinserted
//! afterwards.

use crate::parallel;
use crate::poly::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LinalgError {
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {}, got {}", expected, got)
            }
        }
    }
}

impl std::error::Error for LinalgError {}

/// Outcome of solving `A x = b` exactly.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SolveOutcome {
    /// A solution with every free variable set to zero, plus the pivot
    /// columns (ascending) that carry it.
    Solved { solution: Vec<Rational>, pivot_columns: Vec<usize> },
    /// No solution; `witness_row` is the smallest original row index whose
    /// reduced form reads `0 = nonzero`.
    Inconsistent { witness_row: usize },
}

/// Dense matrix of exact rationals, row major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Rational>,
}

impl ExactMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        ExactMatrix { nrows, ncols, data: vec![Rational::zero(); nrows * ncols] }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend(r);
        }
        ExactMatrix { nrows, ncols, data }
    }

    /// Assemble from columns, each of length `nrows`.
    pub fn from_columns(nrows: usize, columns: &[Vec<Rational>]) -> Self {
        let ncols = columns.len();
        let mut m = Self::zeros(nrows, ncols);
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), nrows, "column length mismatch");
            for (r, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.set(r, c, v.clone());
                }
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.ncols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.ncols + c] = v;
    }

    /// Exact matrix-vector product; used by callers to recheck solutions.
    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.ncols, "length mismatch");
        (0..self.nrows)
            .map(|r| {
                let mut acc = Rational::zero();
                for c in 0..self.ncols {
                    let a = self.get(r, c);
                    if !a.is_zero() && !x[c].is_zero() {
                        acc += a * &x[c];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn solve(&self, b: &[Rational]) -> Result<SolveOutcome, LinalgError> {
        self.solve_impl(b, true)
    }

    /// Single-threaded variant of `solve`; the benchmark suite compares the
    /// two, and both return identical outcomes.
    pub fn solve_seq(&self, b: &[Rational]) -> Result<SolveOutcome, LinalgError> {
        self.solve_impl(b, false)
    }

    fn solve_impl(&self, b: &[Rational], par: bool) -> Result<SolveOutcome, LinalgError> {
        if b.len() != self.nrows {
            return Err(LinalgError::DimensionMismatch { expected: self.nrows, got: b.len() });
        }
        let live = self.live_columns();
        let nlive = live.len();

        // integer augmented matrix [A|b], one shared denominator per row
        let mut mat: Vec<Vec<BigInt>> = Vec::with_capacity(self.nrows);
        for r in 0..self.nrows {
            let mut rationals: Vec<&Rational> = Vec::with_capacity(nlive + 1);
            for &c in &live {
                rationals.push(self.get(r, c));
            }
            rationals.push(&b[r]);
            mat.push(clear_denominators(&rationals));
        }

        let ech = bareiss(mat, nlive, par);

        // consistency: all rows past the pivot count have zero A-part
        let rank = ech.pivots.len();
        let mut witness: Option<usize> = None;
        for i in rank..ech.mat.len() {
            if !ech.mat[i][nlive].is_zero() {
                let orig = ech.origin[i];
                witness = Some(witness.map_or(orig, |w: usize| w.min(orig)));
            }
        }
        if let Some(w) = witness {
            return Ok(SolveOutcome::Inconsistent { witness_row: w });
        }

        // back-substitution over rationals, free variables pinned to zero
        let mut x = vec![Rational::zero(); nlive];
        for &(prow, pcol) in ech.pivots.iter().rev() {
            let row = &ech.mat[prow];
            let mut acc = Rational::from(row[nlive].clone());
            for j in pcol + 1..nlive {
                if !row[j].is_zero() && !x[j].is_zero() {
                    acc -= Rational::from(row[j].clone()) * &x[j];
                }
            }
            x[pcol] = acc / Rational::from(row[pcol].clone());
        }

        let mut solution = vec![Rational::zero(); self.ncols];
        for (k, &c) in live.iter().enumerate() {
            solution[c] = std::mem::take(&mut x[k]);
        }
        let pivot_columns = ech.pivots.iter().map(|&(_, pc)| live[pc]).collect();
        Ok(SolveOutcome::Solved { solution, pivot_columns })
    }

    pub fn rank(&self) -> usize {
        let live = self.live_columns();
        let mat: Vec<Vec<BigInt>> = (0..self.nrows)
            .map(|r| {
                let rationals: Vec<&Rational> = live.iter().map(|&c| self.get(r, c)).collect();
                clear_denominators(&rationals)
            })
            .collect();
        bareiss(mat, live.len(), true).pivots.len()
    }

    /// Basis of the right nullspace, one vector per free column (ascending),
    /// normalized to a 1 in the defining free column.
    pub fn nullspace_basis(&self) -> Vec<Vec<Rational>> {
        let live = self.live_columns();
        let nlive = live.len();
        let mat: Vec<Vec<BigInt>> = (0..self.nrows)
            .map(|r| {
                let rationals: Vec<&Rational> = live.iter().map(|&c| self.get(r, c)).collect();
                clear_denominators(&rationals)
            })
            .collect();
        let ech = bareiss(mat, nlive, true);

        let mut is_pivot = vec![false; nlive];
        for &(_, pc) in &ech.pivots {
            is_pivot[pc] = true;
        }

        // free original columns: pruned columns plus non-pivot live columns
        let live_set: std::collections::BTreeSet<usize> = live.iter().copied().collect();
        let mut free_original: Vec<usize> =
            (0..self.ncols).filter(|c| !live_set.contains(c)).collect();
        for k in 0..nlive {
            if !is_pivot[k] {
                free_original.push(live[k]);
            }
        }
        free_original.sort_unstable();

        let mut basis = Vec::with_capacity(free_original.len());
        for &fc in &free_original {
            let mut v = vec![Rational::zero(); self.ncols];
            v[fc] = Rational::one();
            if live_set.contains(&fc) {
                // compact back-substitution with the single free slot set
                let k = live.iter().position(|&c| c == fc).unwrap();
                let mut xc = vec![Rational::zero(); nlive];
                xc[k] = Rational::one();
                for &(prow, pcol) in ech.pivots.iter().rev() {
                    let row = &ech.mat[prow];
                    let mut acc = Rational::zero();
                    for j in pcol + 1..nlive {
                        if !row[j].is_zero() && !xc[j].is_zero() {
                            acc -= Rational::from(row[j].clone()) * &xc[j];
                        }
                    }
                    xc[pcol] = acc / Rational::from(row[pcol].clone());
                }
                for (kk, &c) in live.iter().enumerate() {
                    v[c] = std::mem::take(&mut xc[kk]);
                }
            }
            basis.push(v);
        }
        basis
    }

    fn live_columns(&self) -> Vec<usize> {
        (0..self.ncols)
            .filter(|&c| (0..self.nrows).any(|r| !self.get(r, c).is_zero()))
            .collect()
    }
}

/// Scale a row of rationals to integers by the least common multiple of the
/// denominators.  Row scaling by a positive rational preserves the solution
/// set and the row space.
fn clear_denominators(row: &[&Rational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for v in row {
        if !v.is_zero() {
            lcm = lcm.lcm(v.denom());
        }
    }
    row.iter()
        .map(|v| {
            if v.is_zero() {
                BigInt::zero()
            } else {
                v.numer() * (&lcm / v.denom())
            }
        })
        .collect()
}

struct Echelon {
    mat: Vec<Vec<BigInt>>,
    /// original row index of each current row position
    origin: Vec<usize>,
    /// (row position, column) per pivot, in elimination order
    pivots: Vec<(usize, usize)>,
}

/// Fraction-free forward elimination.  Pivot search runs over the first
/// `pivot_cols` columns only (the remainder ride along, e.g. an augmented
/// right-hand side).  After step k the entries below the pivot rows are,
/// up to sign, (k+1)-minors of the row-permuted input, so dividing by the
/// previous pivot is exact; `exact_div` asserts it.
fn bareiss(mut mat: Vec<Vec<BigInt>>, pivot_cols: usize, par: bool) -> Echelon {
    let nrows = mat.len();
    let mut origin: Vec<usize> = (0..nrows).collect();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut next_row = 0usize;

    for col in 0..pivot_cols {
        if next_row == nrows {
            break;
        }
        let Some(found) = (next_row..nrows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(next_row, found);
        origin.swap(next_row, found);

        let pivot = mat[next_row][col].clone();
        let (top, below) = mat.split_at_mut(next_row + 1);
        let prow: &[BigInt] = &top[next_row];
        let prev_ref = &prev;
        let pivot_ref = &pivot;
        parallel::for_each_mut(par, below, |_, row| {
            eliminate_row(row, prow, pivot_ref, prev_ref, col);
        });

        pivots.push((next_row, col));
        prev = pivot;
        next_row += 1;
    }

    Echelon { mat, origin, pivots }
}

fn eliminate_row(row: &mut [BigInt], prow: &[BigInt], pivot: &BigInt, prev: &BigInt, col: usize) {
    let lead = std::mem::replace(&mut row[col], BigInt::zero());
    if lead.is_zero() {
        if pivot == prev {
            return;
        }
        for j in col + 1..row.len() {
            if !row[j].is_zero() {
                let t = pivot * &row[j];
                row[j] = exact_div(t, prev);
            }
        }
        return;
    }
    for j in col + 1..row.len() {
        let t = if row[j].is_zero() {
            if prow[j].is_zero() {
                continue;
            }
            -(&lead * &prow[j])
        } else if prow[j].is_zero() {
            pivot * &row[j]
        } else {
            pivot * &row[j] - &lead * &prow[j]
        };
        row[j] = exact_div(t, prev);
    }
}

fn exact_div(t: BigInt, d: &BigInt) -> BigInt {
    if t.is_zero() {
        return t;
    }
    if d.is_one() {
        return t;
    }
    let (q, r) = t.div_rem(d);
    assert!(r.is_zero(), "fraction-free invariant violated: inexact division");
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| rat(v, 1)).collect()).collect(),
        )
    }

    fn v(vals: &[i64]) -> Vec<Rational> {
        vals.iter().map(|&x| rat(x, 1)).collect()
    }

    #[test]
    fn solve_diagonal() {
        let a = m(&[&[1, 0], &[0, 2]]);
        match a.solve(&v(&[3, 4])).unwrap() {
            SolveOutcome::Solved { solution, pivot_columns } => {
                assert_eq!(solution, vec![rat(3, 1), rat(2, 1)]);
                assert_eq!(pivot_columns, vec![0, 1]);
            }
            o => panic!("unexpected {:?}", o),
        }
    }

    #[test]
    fn inconsistent_reports_witness() {
        let a = m(&[&[1, 1], &[1, 1]]);
        match a.solve(&v(&[0, 1])).unwrap() {
            SolveOutcome::Inconsistent { witness_row } => assert_eq!(witness_row, 1),
            o => panic!("unexpected {:?}", o),
        }
    }

    #[test]
    fn underdetermined_pins_free_variables() {
        let a = m(&[&[1, 1]]);
        match a.solve(&v(&[2])).unwrap() {
            SolveOutcome::Solved { solution, pivot_columns } => {
                assert_eq!(solution, vec![rat(2, 1), rat(0, 1)]);
                assert_eq!(pivot_columns, vec![0]);
            }
            o => panic!("unexpected {:?}", o),
        }
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = m(&[&[1, 2], &[2, 4]]);
        let basis = a.nullspace_basis();
        assert_eq!(basis, vec![vec![rat(-2, 1), rat(1, 1)]]);
        assert_eq!(a.rank(), 1);
    }

    #[test]
    fn rank_cases() {
        assert_eq!(m(&[&[1, 0], &[0, 1]]).rank(), 2);
        assert_eq!(m(&[&[0, 0], &[0, 0]]).rank(), 0);
        assert_eq!(ExactMatrix::zeros(0, 3).rank(), 0);
    }

    #[test]
    fn zero_column_is_pruned_and_reinserted() {
        // middle column identically zero: solve leaves it at 0, nullspace
        // contains its unit vector
        let a = m(&[&[1, 0, 2], &[0, 0, 1]]);
        match a.solve(&v(&[3, 1])).unwrap() {
            SolveOutcome::Solved { solution, pivot_columns } => {
                assert_eq!(solution, vec![rat(1, 1), rat(0, 1), rat(1, 1)]);
                assert_eq!(pivot_columns, vec![0, 2]);
            }
            o => panic!("unexpected {:?}", o),
        }
        let basis = a.nullspace_basis();
        assert_eq!(basis, vec![vec![rat(0, 1), rat(1, 1), rat(0, 1)]]);
    }

    #[test]
    fn empty_shapes() {
        let a = ExactMatrix::zeros(0, 2);
        match a.solve(&[]).unwrap() {
            SolveOutcome::Solved { solution, pivot_columns } => {
                assert_eq!(solution, vec![rat(0, 1); 2]);
                assert!(pivot_columns.is_empty());
            }
            o => panic!("unexpected {:?}", o),
        }
        let b = ExactMatrix::zeros(2, 0);
        match b.solve(&v(&[0, 5])).unwrap() {
            SolveOutcome::Inconsistent { witness_row } => assert_eq!(witness_row, 1),
            o => panic!("unexpected {:?}", o),
        }
    }

    #[test]
    fn rational_entries() {
        let a = ExactMatrix::from_rows(vec![
            vec![rat(1, 2), rat(1, 3)],
            vec![rat(1, 5), rat(1, 7)],
        ]);
        let b = vec![rat(1, 1), rat(2, 1)];
        match a.solve(&b).unwrap() {
            SolveOutcome::Solved { solution, .. } => {
                assert_eq!(a.mul_vec(&solution), b);
            }
            o => panic!("unexpected {:?}", o),
        }
    }

    fn arb_matrix(max_dim: usize) -> impl Strategy<Value = (ExactMatrix, Vec<Rational>)> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
            (
                proptest::collection::vec(-9i64..10, r * c),
                proptest::collection::vec(-9i64..10, r),
            )
                .prop_map(move |(entries, rhs)| {
                    let rows: Vec<Vec<Rational>> = entries
                        .chunks(c)
                        .map(|ch| ch.iter().map(|&x| rat(x, 1)).collect())
                        .collect();
                    (ExactMatrix::from_rows(rows), rhs.into_iter().map(|x| rat(x, 1)).collect())
                })
        })
    }

    proptest! {
        // The fraction-free property itself is enforced by the always-on
        // remainder assertion inside exact_div; these runs would abort if a
        // Bareiss intermediate ever failed to be an integer.
        #[test]
        fn solve_soundness_random((a, b) in arb_matrix(12)) {
            match a.solve(&b).unwrap() {
                SolveOutcome::Solved { solution, .. } => {
                    prop_assert_eq!(a.mul_vec(&solution), b);
                }
                SolveOutcome::Inconsistent { witness_row } => {
                    prop_assert!(witness_row < a.nrows());
                }
            }
        }

        #[test]
        fn nullspace_is_annihilated((a, _b) in arb_matrix(8)) {
            let basis = a.nullspace_basis();
            let zero = vec![rat(0, 1); a.nrows()];
            prop_assert_eq!(a.rank() + basis.len(), a.ncols());
            for v in &basis {
                prop_assert_eq!(a.mul_vec(v), zero.clone());
            }
        }

        #[test]
        fn parallel_and_sequential_agree((a, b) in arb_matrix(8)) {
            prop_assert_eq!(a.solve(&b).unwrap(), a.solve_seq(&b).unwrap());
        }
    }
}
