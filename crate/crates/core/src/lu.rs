//! Sparse LU factorization with Markowitz pivot selection, generic over the
//! scalar field.
//!
//! The factorization is stored as the sequence of row eliminations `E` and the
//! resulting rows of `U = E B`: at step `k` pivot `(row_perm[k], col_perm[k])`
//! is chosen, every other active row with a nonzero in the pivot column is
//! updated, and the pivot row becomes row `k` of `U`.

use std::collections::{BTreeMap, BTreeSet};

use crate::scalar::Scalar;

/// Pivot acceptance rule.
#[derive(Clone, Debug)]
pub enum PivotRule<T> {
    /// Any exact nonzero qualifies; pure fill minimization.
    Exact,
    /// Threshold Markowitz: `|a| >= pivot_eps` and `|a| >= relative * max |column|`.
    /// Fill-in below `zero_eps` is dropped.
    Threshold { pivot_eps: T, zero_eps: T, relative: T },
}

/// Factorization failure: the pivots found before running out of acceptable
/// entries. Columns not listed are linearly dependent on the pivoted ones at
/// the working tolerance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Singular {
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct LuFactors<T> {
    dim: usize,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    /// multipliers `(row, l)` applied as `row -= l * pivot_row` at each step
    lower: Vec<Vec<(usize, T)>>,
    /// off-diagonal entries `(col, u)` of each pivot row
    upper: Vec<Vec<(usize, T)>>,
    pivots: Vec<T>,
}

/// Factorizes the square matrix given by its sparse columns.
pub fn factorize<T: Scalar>(dim: usize, columns: &[Vec<(usize, T)>], rule: &PivotRule<T>) -> Result<LuFactors<T>, Singular> {
    assert_eq!(columns.len(), dim, "matrix must be square");
    let mut rows: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); dim];
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); dim];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col {
            assert!(*i < dim, "row index out of range");
            if !v.is_zero() {
                rows[*i].insert(j, v.clone());
                cols[j].insert(*i);
            }
        }
    }
    let mut col_active = vec![true; dim];

    let mut lu = LuFactors {
        dim,
        row_perm: Vec::with_capacity(dim),
        col_perm: Vec::with_capacity(dim),
        lower: Vec::with_capacity(dim),
        upper: Vec::with_capacity(dim),
        pivots: Vec::with_capacity(dim),
    };

    for _ in 0..dim {
        let mut best: Option<(usize, usize, usize, T)> = None; // (cost, row, col, |a|)
        for j in (0..dim).filter(|&j| col_active[j]) {
            let col_count = cols[j].len();
            if col_count == 0 {
                continue;
            }
            let col_max = match rule {
                PivotRule::Exact => None,
                PivotRule::Threshold { .. } => cols[j].iter().map(|&i| rows[i][&j].abs()).reduce(|a, b| if b > a { b } else { a }),
            };
            for &i in &cols[j] {
                let v = &rows[i][&j];
                let mag = v.abs();
                if let (PivotRule::Threshold { pivot_eps, relative, .. }, Some(col_max)) = (rule, &col_max) {
                    if mag < *pivot_eps || mag < col_max.mul(relative) {
                        continue;
                    }
                }
                let cost = (rows[i].len() - 1) * (col_count - 1);
                let better = match &best {
                    None => true,
                    Some((bc, _, _, bm)) => match rule {
                        PivotRule::Exact => cost < *bc,
                        PivotRule::Threshold { .. } => cost < *bc || (cost == *bc && mag > *bm),
                    },
                };
                if better {
                    best = Some((cost, i, j, mag));
                }
            }
        }
        let Some((_, r, c, _)) = best else {
            return Err(Singular { pivot_rows: lu.row_perm, pivot_cols: lu.col_perm });
        };

        let pivot_row = std::mem::take(&mut rows[r]);
        let pivot = pivot_row[&c].clone();
        for j in pivot_row.keys() {
            cols[*j].remove(&r);
        }
        let targets: Vec<usize> = cols[c].iter().copied().collect();
        let mut multipliers = Vec::with_capacity(targets.len());
        for i in targets {
            let row = &mut rows[i];
            let mult = row.remove(&c).expect("column set in sync").div(&pivot);
            cols[c].remove(&i);
            for (j, u) in &pivot_row {
                if *j == c {
                    continue;
                }
                let updated = match row.get(j) {
                    Some(v) => v.sub(&mult.mul(u)),
                    None => mult.mul(u).neg(),
                };
                let negligible = match rule {
                    PivotRule::Exact => updated.is_zero(),
                    PivotRule::Threshold { zero_eps, .. } => updated.abs() < *zero_eps,
                };
                if negligible {
                    row.remove(j);
                    cols[*j].remove(&i);
                } else {
                    row.insert(*j, updated);
                    cols[*j].insert(i);
                }
            }
            multipliers.push((i, mult));
        }
        col_active[c] = false;
        lu.row_perm.push(r);
        lu.col_perm.push(c);
        lu.lower.push(multipliers);
        lu.upper.push(pivot_row.into_iter().filter(|(j, _)| *j != c).collect());
        lu.pivots.push(pivot);
    }
    Ok(lu)
}

impl<T: Scalar> LuFactors<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pivots(&self) -> &[T] {
        &self.pivots
    }

    /// Solves `B x = v`; `v` is indexed by row, `x` by column.
    pub fn solve(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.dim);
        let mut w = v.to_vec();
        for (k, mults) in self.lower.iter().enumerate() {
            let r = self.row_perm[k];
            if w[r].is_zero() {
                continue;
            }
            let wr = w[r].clone();
            for (i, l) in mults {
                w[*i] = w[*i].sub(&l.mul(&wr));
            }
        }
        let mut x = w.clone();
        for k in (0..self.dim).rev() {
            let (r, c) = (self.row_perm[k], self.col_perm[k]);
            let mut acc = w[r].clone();
            for (j, u) in &self.upper[k] {
                if !x[*j].is_zero() {
                    acc = acc.sub(&u.mul(&x[*j]));
                }
            }
            x[c] = acc.div(&self.pivots[k]);
        }
        x
    }

    /// Solves `B^T y = d`; `d` is indexed by column, `y` by row.
    pub fn solve_transpose(&self, d: &[T]) -> Vec<T> {
        assert_eq!(d.len(), self.dim);
        let mut rhs = d.to_vec();
        let mut z = d.to_vec();
        for k in 0..self.dim {
            let (r, c) = (self.row_perm[k], self.col_perm[k]);
            let zr = rhs[c].div(&self.pivots[k]);
            if !zr.is_zero() {
                for (j, u) in &self.upper[k] {
                    rhs[*j] = rhs[*j].sub(&u.mul(&zr));
                }
            }
            z[r] = zr;
        }
        for k in (0..self.dim).rev() {
            let r = self.row_perm[k];
            let mut acc = z[r].clone();
            for (i, l) in &self.lower[k] {
                if !z[*i].is_zero() {
                    acc = acc.sub(&l.mul(&z[*i]));
                }
            }
            z[r] = acc;
        }
        z
    }

    /// Determinant, from the pivots and the permutation parities.
    pub fn determinant(&self) -> Option<T> {
        let first = self.pivots.first()?;
        let mut det = first.one_like();
        for p in &self.pivots {
            det = det.mul(p);
        }
        if permutation_parity(&self.row_perm) != permutation_parity(&self.col_perm) {
            det = det.neg();
        }
        Some(det)
    }
}

/// `true` for odd permutations.
fn permutation_parity(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut odd = false;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}
