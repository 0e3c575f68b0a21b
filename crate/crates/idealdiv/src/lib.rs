//! Exact division certificates for polynomial ideal membership under degree
//! budgets, with residue-style annihilation tests and numerically evaluated
//! integral division formulas on projective space.
//!
//! The solver works over exact rationals end to end: feasibility of
//! `sum_j F_j Q_j = Phi^nu` with `deg(F_j Q_j) <= r` is decided by
//! fraction-free elimination on a Macaulay-style linear system, never by
//! floating point and never by Groebner bases.  The numeric side (Fubini-Study
//! quadrature, Bergman-type reproduction, the kernel division formula) is
//! validated against the exact side in the test suite.

pub mod kernel;
pub mod linalg;
pub mod membership;
pub mod poly;
pub mod residue;

mod parallel;
