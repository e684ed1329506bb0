//! Auxiliary LPs deciding feasibility and boundedness.

use num_traits::{One, Signed, Zero};

use crate::rational::{Rational, RationalLp, SparseRationalMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxKind {
    Feasibility,
    Unboundedness,
}

/// `min -tau s.t. A xi - (b - A l) tau = 0, tau + s = 1, xi, tau, s >= 0`.
///
/// Variables are ordered `xi` (n), `tau`, `s`; rows are the `m` rows of `A`
/// followed by the `tau` bound row. The optimum is `tau = 1` exactly when the
/// original LP is feasible, and then the duals of the first `m` rows at a
/// `tau = 0` optimum form a Farkas proof.
pub fn build_feasibility_lp(lp: &RationalLp) -> RationalLp {
    let (m, n) = (lp.nrows(), lp.ncols());
    let al = lp.a.mul_vec(&lp.lower);
    let shifted: Vec<Rational> = lp.b.iter().zip(&al).map(|(b, v)| b - v).collect();

    let mut columns: Vec<Vec<(usize, Rational)>> = lp.a.columns().to_vec();
    let mut tau: Vec<(usize, Rational)> =
        shifted.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, -v)).collect();
    tau.push((m, Rational::one()));
    columns.push(tau);
    columns.push(vec![(m, Rational::one())]);

    let a = SparseRationalMatrix::from_columns(m + 1, columns).expect("well-formed columns");
    let mut b = vec![Rational::zero(); m];
    b.push(Rational::one());
    let mut c = vec![Rational::zero(); n + 2];
    c[n] = -Rational::one();
    RationalLp::new(a, b, c, vec![Rational::zero(); n + 2]).expect("consistent dimensions")
}

/// `min 0 s.t. A v = 0, c^T v = -1, v >= 0`.
pub fn build_unboundedness_lp(lp: &RationalLp) -> RationalLp {
    let (m, n) = (lp.nrows(), lp.ncols());
    let columns: Vec<Vec<(usize, Rational)>> = (0..n)
        .map(|j| {
            let mut col = lp.a.column(j).to_vec();
            if !lp.c[j].is_zero() {
                col.push((m, lp.c[j].clone()));
            }
            col
        })
        .collect();
    let a = SparseRationalMatrix::from_columns(m + 1, columns).expect("well-formed columns");
    let mut b = vec![Rational::zero(); m];
    b.push(-Rational::one());
    RationalLp::new(a, b, vec![Rational::zero(); n], vec![Rational::zero(); n]).expect("consistent dimensions")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible { witness: Vec<Rational> },
    Infeasible,
}

/// Reads an exact optimum `(xi, tau)` of the feasibility LP: `x = l + xi / tau`
/// when `tau > 0`.
pub fn interpret_feasibility(lp: &RationalLp, tau: &Rational, xi: &[Rational]) -> Feasibility {
    assert!(!tau.is_negative() && *tau <= Rational::one(), "tau = {tau} outside [0, 1]");
    if tau.is_zero() {
        return Feasibility::Infeasible;
    }
    let witness = lp.lower.iter().zip(xi).map(|(l, v)| l + v / tau).collect();
    Feasibility::Feasible { witness }
}

/// Splits an optimal solution of the feasibility LP into `(tau, xi)`.
pub fn feasibility_parts(original: &RationalLp, aux_x: &[Rational]) -> (Rational, Vec<Rational>) {
    let n = original.ncols();
    (aux_x[n].clone(), aux_x[..n].to_vec())
}
