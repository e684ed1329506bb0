//! Brute-force rational oracle shared by the integration tests. It uses
//! its own dense Gaussian elimination and never calls into the solver.

#![allow(dead_code)]

use exactlp::{Rational, RationalLp};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Optimal(Rational),
    Infeasible,
    Unbounded,
}

pub type Dense = Vec<Vec<Rational>>;

pub fn dense(lp: &RationalLp) -> Dense {
    (0..lp.nrows()).map(|i| (0..lp.ncols()).map(|j| lp.a.get(i, j)).collect()).collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mat_vec(a: &Dense, x: &[Rational]) -> Vec<Rational> {
    a.iter().map(|row| dot(row, x)).collect()
}

pub fn vec_mat(y: &[Rational], a: &Dense, ncols: usize) -> Vec<Rational> {
    (0..ncols).map(|j| a.iter().zip(y).map(|(row, yi)| &row[j] * yi).sum()).collect()
}

/// Row-reduces `[a | b]` and returns the independent rows, or `None` when
/// the system is inconsistent.
fn independent_rows(a: &Dense, b: &[Rational], ncols: usize) -> Option<(Dense, Vec<Rational>)> {
    let mut rows: Vec<(Vec<Rational>, Rational)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else { continue };
        rows.swap(rank, p);
        let (pivot_row, pivot_rhs) = rows[rank].clone();
        for i in 0..rows.len() {
            if i == rank || rows[i].0[col].is_zero() {
                continue;
            }
            let f = &rows[i].0[col] / &pivot_row[col];
            for k in 0..ncols {
                let delta = &f * &pivot_row[k];
                rows[i].0[k] -= delta;
            }
            rows[i].1 -= &f * &pivot_rhs;
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|(_, r)| !r.is_zero()) {
        return None;
    }
    rows.truncate(rank);
    Some(rows.into_iter().unzip())
}

/// Solves the square system, `None` if singular.
pub fn solve_square(a: &Dense, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    let mut m: Vec<Vec<Rational>> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, p);
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let f = &m[i][col] / &m[col][col];
                for k in col..=n {
                    let delta = &f * &m[col][k];
                    m[i][k] -= delta;
                }
            }
        }
    }
    Some((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if acc.len() == k {
            f(acc);
            return;
        }
        for j in start..n {
            if n - j < k - acc.len() {
                break;
            }
            acc.push(j);
            go(j + 1, n, k, acc, f);
            acc.pop();
        }
    }
    go(0, n, k, &mut Vec::with_capacity(k), f);
}

/// All basic feasible solutions of `{z >= 0 | a z = b}`.
pub fn vertices(a: &Dense, b: &[Rational], ncols: usize) -> Vec<Vec<Rational>> {
    let Some((rows, rhs)) = independent_rows(a, b, ncols) else { return Vec::new() };
    let r = rows.len();
    let mut out = Vec::new();
    combinations(ncols, r, &mut |cols| {
        let sub: Dense = rows.iter().map(|row| cols.iter().map(|&j| row[j].clone()).collect()).collect();
        if let Some(zb) = solve_square(&sub, &rhs) {
            if zb.iter().all(|v| !v.is_negative()) {
                let mut z = vec![Rational::zero(); ncols];
                for (&j, v) in cols.iter().zip(zb) {
                    z[j] = v;
                }
                out.push(z);
            }
        }
    });
    out
}

/// Exact verdict by enumerating every basis.
pub fn brute_force(lp: &RationalLp) -> Verdict {
    let (m, n) = (lp.nrows(), lp.ncols());
    let a = dense(lp);
    let al = mat_vec(&a, &lp.lower);
    let shifted: Vec<Rational> = lp.b.iter().zip(&al).map(|(b, v)| b - v).collect();
    let verts = vertices(&a, &shifted, n);
    if verts.is_empty() {
        return Verdict::Infeasible;
    }
    let mut with_cost = a.clone();
    with_cost.push(lp.c.clone());
    let mut rhs = vec![Rational::zero(); m];
    rhs.push(-Rational::one());
    if !vertices(&with_cost, &rhs, n).is_empty() {
        return Verdict::Unbounded;
    }
    let base = dot(&lp.c, &lp.lower);
    let best = verts.iter().map(|z| dot(&lp.c, z)).min().expect("nonempty");
    Verdict::Optimal(base + best)
}

/// `y^T A <= 0` and `y^T (b - A l) > 0`.
pub fn is_farkas(lp: &RationalLp, y: &[Rational]) -> bool {
    let a = dense(lp);
    let al = mat_vec(&a, &lp.lower);
    let shifted: Vec<Rational> = lp.b.iter().zip(&al).map(|(b, v)| b - v).collect();
    y.len() == lp.nrows()
        && vec_mat(y, &a, lp.ncols()).iter().all(|v| !v.is_positive())
        && dot(y, &shifted).is_positive()
}

pub fn is_feasible(lp: &RationalLp, x: &[Rational]) -> bool {
    x.len() == lp.ncols()
        && x.iter().zip(&lp.lower).all(|(v, l)| v >= l)
        && mat_vec(&dense(lp), x) == lp.b
}

/// `A v = 0`, `v >= 0`, `c^T v < 0`.
pub fn is_ray(lp: &RationalLp, v: &[Rational]) -> bool {
    v.len() == lp.ncols()
        && v.iter().all(|x| !x.is_negative())
        && mat_vec(&dense(lp), v).iter().all(Zero::is_zero)
        && dot(&lp.c, v).is_negative()
}

pub fn objective(lp: &RationalLp, x: &[Rational]) -> Rational {
    dot(&lp.c, x)
}
