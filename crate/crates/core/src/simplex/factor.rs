//! Basis factorization at working precision: threshold-Markowitz LU plus
//! product-form eta updates between refactorizations.

use crate::float::{Precision, Real, ToleranceSet};
use crate::lu::{self, LuFactors, PivotRule, Singular};

/// Relative pivot threshold for the float LU.
pub const MARKOWITZ_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct BasisFactor<T> {
    lu: LuFactors<T>,
    /// `(position, B^-1 a_q)` for every basis change since the last refactorization
    etas: Vec<(usize, Vec<T>)>,
}

/// LU-factorizes the basis matrix given by its columns. Fails when no entry
/// of magnitude at least `pivot_eps` remains in the active submatrix.
pub fn factorize<T: Real>(columns: &[Vec<(usize, T)>], tolerances: &ToleranceSet, precision: Precision) -> Result<BasisFactor<T>, Singular> {
    let rule = PivotRule::Threshold {
        pivot_eps: T::from_f64(tolerances.pivot_eps, precision),
        zero_eps: T::from_f64(tolerances.zero_eps, precision),
        relative: T::from_f64(MARKOWITZ_THRESHOLD, precision),
    };
    let lu = lu::factorize(columns.len(), columns, &rule)?;
    Ok(BasisFactor { lu, etas: Vec::new() })
}

impl<T: Real> BasisFactor<T> {
    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = v` for the current basis.
    pub fn ftran(&self, v: &[T]) -> Vec<T> {
        let mut x = self.lu.solve(v);
        for (r, w) in &self.etas {
            let xr = x[*r].div(&w[*r]);
            if !xr.is_zero() {
                for (i, wi) in w.iter().enumerate() {
                    if i != *r && !wi.is_zero() {
                        x[i] = x[i].sub(&wi.mul(&xr));
                    }
                }
            }
            x[*r] = xr;
        }
        x
    }

    /// Solves `B^T y = d` for the current basis.
    pub fn btran(&self, d: &[T]) -> Vec<T> {
        let mut d = d.to_vec();
        for (r, w) in self.etas.iter().rev() {
            let mut acc = d[*r].clone();
            for (i, wi) in w.iter().enumerate() {
                if i != *r && !wi.is_zero() && !d[i].is_zero() {
                    acc = acc.sub(&wi.mul(&d[i]));
                }
            }
            d[*r] = acc.div(&w[*r]);
        }
        self.lu.solve_transpose(&d)
    }

    /// Records the replacement of the column at `position` by a column whose
    /// ftran image is `w`.
    pub fn push_eta(&mut self, position: usize, w: Vec<T>) {
        self.etas.push((position, w));
    }
}
