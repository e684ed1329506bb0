//! Exact verification: rational basis factorization, basic solutions, and
//! checks for optimality, Farkas proofs and unbounded rays.
//!
//! Farkas convention for `{A x = b, x >= l}`: a vector `y` proves
//! infeasibility when `y^T A <= 0` and `y^T b - (y^T A) l > 0`. For a
//! feasible `x` we would get `y^T b = (y^T A) x <= (y^T A) l`, since
//! `y^T A <= 0` and `x >= l`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::SingularBasis;
use crate::lu::{self, LuFactors, PivotRule};
use crate::rational::{compute_residuals, dot, serde_rational, PrimalDualSolution, Rational, RationalLp};
use crate::simplex::Basis;

/// Exact LU factorization with fill-minimizing pivot choice.
pub fn lu_factorize_rational(columns: &[Vec<(usize, Rational)>]) -> Result<LuFactors<Rational>, SingularBasis> {
    lu::factorize(columns.len(), columns, &PivotRule::Exact)
        .map_err(|s| SingularBasis { rank: s.pivot_cols.len(), dim: columns.len() })
}

/// Columns of the basis matrix, logicals included.
pub fn basis_columns(lp: &RationalLp, basis: &Basis) -> Vec<Vec<(usize, Rational)>> {
    let n = lp.ncols();
    basis
        .basic()
        .iter()
        .map(|&j| if j < n { lp.a.column(j).to_vec() } else { vec![(j - n, Rational::one())] })
        .collect()
}

/// Exact factorization of a basis together with its basic solution.
pub struct ExactBasis {
    pub lu: LuFactors<Rational>,
    /// values of the basic variables, by basis position
    pub x_basic: Vec<Rational>,
    pub solution: PrimalDualSolution,
}

pub fn factor_basis(lp: &RationalLp, basis: &Basis) -> Result<ExactBasis, SingularBasis> {
    let (m, n) = (lp.nrows(), lp.ncols());
    assert!(basis.fits(n, m), "basis does not match the LP");
    let lu = lu_factorize_rational(&basis_columns(lp, basis))?;
    let mut x = lp.lower.clone();
    for &j in basis.basic() {
        if j < n {
            x[j] = Rational::zero();
        }
    }
    let mut rhs = lp.b.clone();
    for (j, col) in lp.a.columns().iter().enumerate() {
        if x[j].is_zero() {
            continue;
        }
        for (i, a) in col {
            rhs[*i] -= a * &x[j];
        }
    }
    let x_basic = lu.solve(&rhs);
    for (pos, &j) in basis.basic().iter().enumerate() {
        if j < n {
            x[j] = x_basic[pos].clone();
        }
    }
    let c_basic: Vec<Rational> =
        basis.basic().iter().map(|&j| if j < n { lp.c[j].clone() } else { Rational::zero() }).collect();
    let y = lu.solve_transpose(&c_basic);
    Ok(ExactBasis { lu, x_basic, solution: PrimalDualSolution::exact(x, y) })
}

/// Nonbasic variables at their bounds, basic ones from `B x_B = b - N l_N`,
/// duals from `B^T y = c_B`.
pub fn basic_solution(lp: &RationalLp, basis: &Basis) -> Result<PrimalDualSolution, SingularBasis> {
    factor_basis(lp, basis).map(|f| f.solution)
}

/// `A x = b`, `x >= l` and `c - A^T y >= 0`, exactly.
pub fn verify_optimal(lp: &RationalLp, sol: &PrimalDualSolution) -> bool {
    if sol.x.len() != lp.ncols() || sol.y.len() != lp.nrows() {
        return false;
    }
    let res = compute_residuals(lp, sol);
    if !res.delta_p.is_zero() || !res.delta_d.is_zero() {
        return false;
    }
    // complementary slackness
    res.c_hat.iter().zip(&res.l_hat).all(|(d, s)| d.is_zero() || s.is_zero())
}

pub fn verify_farkas(lp: &RationalLp, y: &[Rational]) -> bool {
    if y.len() != lp.nrows() {
        return false;
    }
    let yta = lp.a.tr_mul_vec(y);
    if yta.iter().any(|v| v.is_positive()) {
        return false;
    }
    (dot(y, &lp.b) - dot(&yta, &lp.lower)).is_positive()
}

/// `A v = 0`, `v >= 0`, `c^T v < 0`.
pub fn verify_ray(lp: &RationalLp, ray: &[Rational]) -> bool {
    ray.len() == lp.ncols()
        && ray.iter().all(|v| !v.is_negative())
        && lp.a.mul_vec(ray).iter().all(Zero::is_zero)
        && dot(&lp.c, ray).is_negative()
}

pub fn verify_feasible(lp: &RationalLp, x: &[Rational]) -> bool {
    x.len() == lp.ncols()
        && x.iter().zip(&lp.lower).all(|(v, l)| v >= l)
        && lp.a.mul_vec(x).iter().zip(&lp.b).all(|(ax, b)| ax == b)
}

/// A feasible point plus an improving ray of the recession cone.
pub fn verify_unbounded(lp: &RationalLp, witness: &[Rational], ray: &[Rational]) -> bool {
    verify_feasible(lp, witness) && verify_ray(lp, ray)
}

/// Bounded-violation conditions for an approximate solution lifted to
/// rationals: primal residual and bound violation at most `eta`, reduced
/// costs at least `-eta`, and `|(x - l)^T (c - A^T y)| <= sigma`.
pub fn check_oracle_contract(lp: &RationalLp, sol: &PrimalDualSolution, eta: &Rational, sigma: &Rational) -> bool {
    let res = compute_residuals(lp, sol);
    let neg_eta = -eta;
    let primal = res.b_hat.iter().all(|v| v.abs() <= *eta) && res.l_hat.iter().all(|v| v <= eta);
    let dual = res.c_hat.iter().all(|v| *v >= neg_eta);
    let gap: Rational = res.l_hat.iter().zip(&res.c_hat).map(|(s, d)| -s * d).sum();
    primal && dual && gap.abs() <= *sigma
}

/// Candidate Farkas proof from a basis: the phase-1 duals for the exact
/// infeasibilities of its basic solution.
pub fn farkas_from_basis(lp: &RationalLp, basis: &Basis) -> Option<Vec<Rational>> {
    let n = lp.ncols();
    let f = factor_basis(lp, basis).ok()?;
    let costs: Vec<Rational> = basis
        .basic()
        .iter()
        .zip(&f.x_basic)
        .map(|(&j, v)| {
            if j < n {
                if *v < lp.lower[j] {
                    -Rational::one()
                } else {
                    Rational::zero()
                }
            } else {
                Rational::from_integer(v.signum().to_integer())
            }
        })
        .collect();
    if costs.iter().all(Zero::is_zero) {
        return None;
    }
    let y = f.lu.solve_transpose(&costs);
    verify_farkas(lp, &y).then_some(y)
}

/// Candidate ray from a basis and an entering column: `v_q = 1`,
/// `v_B = -B^{-1} a_q`, normalized to `c^T v = -1`.
pub fn ray_from_basis(lp: &RationalLp, basis: &Basis, entering: usize) -> Option<Vec<Rational>> {
    let (m, n) = (lp.nrows(), lp.ncols());
    if entering >= n || basis.basic().contains(&entering) {
        return None;
    }
    let lu = lu_factorize_rational(&basis_columns(lp, basis)).ok()?;
    let mut aq = vec![Rational::zero(); m];
    for (i, v) in lp.a.column(entering) {
        aq[*i] = v.clone();
    }
    let w = lu.solve(&aq);
    let mut ray = vec![Rational::zero(); n];
    ray[entering] = Rational::one();
    for (pos, &j) in basis.basic().iter().enumerate() {
        if j < n {
            ray[j] = -&w[pos];
        } else if !w[pos].is_zero() {
            return None;
        }
    }
    let cv = dot(&lp.c, &ray);
    if !cv.is_negative() {
        return None;
    }
    let scale = -cv.recip();
    ray.iter_mut().for_each(|v| *v *= &scale);
    verify_ray(lp, &ray).then_some(ray)
}

/// A certified outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Optimal {
        #[serde(with = "serde_rational::vec")]
        x: Vec<Rational>,
        #[serde(with = "serde_rational::vec")]
        y: Vec<Rational>,
        basis: Basis,
        #[serde(with = "serde_rational")]
        objective: Rational,
    },
    Infeasible {
        #[serde(with = "serde_rational::vec")]
        farkas: Vec<Rational>,
    },
    Unbounded {
        #[serde(with = "serde_rational::vec")]
        witness: Vec<Rational>,
        #[serde(with = "serde_rational::vec")]
        ray: Vec<Rational>,
    },
}

impl Certificate {
    pub fn optimal(lp: &RationalLp, sol: PrimalDualSolution, basis: Basis) -> Self {
        let objective = lp.objective(&sol.x);
        Certificate::Optimal { x: sol.x, y: sol.y, basis, objective }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Certificate::Optimal { .. } => "optimal",
            Certificate::Infeasible { .. } => "infeasible",
            Certificate::Unbounded { .. } => "unbounded",
        }
    }

    pub fn objective(&self) -> Option<&Rational> {
        match self {
            Certificate::Optimal { objective, .. } => Some(objective),
            _ => None,
        }
    }

    /// Re-checks the certificate against `lp` from scratch.
    pub fn verify(&self, lp: &RationalLp) -> bool {
        match self {
            Certificate::Optimal { x, y, objective, .. } => {
                let sol = PrimalDualSolution::exact(x.clone(), y.clone());
                verify_optimal(lp, &sol) && lp.objective(x) == *objective && strong_duality(lp, &sol)
            }
            Certificate::Infeasible { farkas } => verify_farkas(lp, farkas),
            Certificate::Unbounded { witness, ray } => verify_unbounded(lp, witness, ray),
        }
    }
}

/// `c^T x = b^T y + (c - A^T y)^T l`.
fn strong_duality(lp: &RationalLp, sol: &PrimalDualSolution) -> bool {
    let reduced: Vec<Rational> = lp.c.iter().zip(lp.a.tr_mul_vec(&sol.y)).map(|(c, v)| c - v).collect();
    lp.objective(&sol.x) == dot(&lp.b, &sol.y) + dot(&reduced, &lp.lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int, SparseRationalMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp(rows: &[&[i64]], b: &[i64], c: &[i64]) -> RationalLp {
        let dense: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&v| rat_int(v)).collect()).collect();
        let n = c.len();
        RationalLp::new(
            SparseRationalMatrix::from_dense(&dense),
            b.iter().map(|&v| rat_int(v)).collect(),
            c.iter().map(|&v| rat_int(v)).collect(),
            vec![Rational::zero(); n],
        )
        .unwrap()
    }

    fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
        if m.is_empty() {
            return Rational::one();
        }
        let mut det = Rational::zero();
        for (j, a) in m[0].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = a * cofactor_det(&minor);
            if j % 2 == 0 {
                det += term;
            } else {
                det -= term;
            }
        }
        det
    }

    #[test]
    fn identity_and_permutation() {
        let id = vec![vec![(0, rat_int(1))], vec![(1, rat_int(1))]];
        let lu = lu_factorize_rational(&id).unwrap();
        assert_eq!(lu.determinant(), Some(rat_int(1)));
        let perm = vec![vec![(1, rat_int(1))], vec![(0, rat_int(1))]];
        assert_eq!(lu_factorize_rational(&perm).unwrap().determinant(), Some(rat_int(-1)));
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let dense: Vec<Vec<Rational>> =
                (0..6).map(|_| (0..6).map(|_| rat_int(rng.gen_range(-9..=9))).collect()).collect();
            let cols: Vec<Vec<(usize, Rational)>> = (0..6)
                .map(|j| (0..6).filter(|&i| !dense[i][j].is_zero()).map(|i| (i, dense[i][j].clone())).collect())
                .collect();
            let expected = cofactor_det(&dense);
            match lu_factorize_rational(&cols) {
                Ok(lu) => assert_eq!(lu.determinant().unwrap(), expected),
                Err(_) => assert!(expected.is_zero()),
            }
        }
    }

    #[test]
    fn basic_solutions_of_small_lp() {
        // min -x s.t. x + s = 1
        let p = lp(&[&[1, 1]], &[1], &[-1, 0]);
        let at_x = basic_solution(&p, &Basis::new(2, vec![0]).unwrap()).unwrap();
        assert_eq!(at_x.x, vec![rat_int(1), rat_int(0)]);
        assert_eq!(at_x.y, vec![rat_int(-1)]);
        assert!(verify_optimal(&p, &at_x));

        let at_s = basic_solution(&p, &Basis::new(2, vec![1]).unwrap()).unwrap();
        assert_eq!(at_s.x, vec![rat_int(0), rat_int(1)]);
        assert_eq!(at_s.y, vec![rat_int(0)]);
        assert!(!verify_optimal(&p, &at_s));
    }

    #[test]
    fn farkas_examples() {
        let p = lp(&[&[1]], &[-1], &[0]);
        assert!(verify_farkas(&p, &[rat_int(-1)]));
        assert!(!verify_farkas(&p, &[rat_int(1)]));
        // the same proof on a perturbed row picks up a positive entry in y^T A
        let q = lp(&[&[1, -1]], &[-1], &[0, 0]);
        assert!(!verify_farkas(&q, &[rat_int(-1)]));
    }

    #[test]
    fn farkas_is_sound_on_feasible_lps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rows: Vec<Vec<i64>> = (0..3).map(|_| (0..5).map(|_| rng.gen_range(-5..=5)).collect()).collect();
            let x: Vec<i64> = (0..5).map(|_| rng.gen_range(0..=4)).collect();
            let b: Vec<i64> = rows.iter().map(|r| r.iter().zip(&x).map(|(a, v)| a * v).sum()).collect();
            let row_refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            let p = lp(&row_refs, &b, &[0; 5]);
            let y: Vec<Rational> = (0..3).map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=9))).collect();
            assert!(!verify_farkas(&p, &y));
        }
    }

    #[test]
    fn farkas_and_ray_from_bases() {
        let p = lp(&[&[1]], &[-1], &[0]);
        let y = farkas_from_basis(&p, &Basis::slack(1, 1)).unwrap();
        assert!(verify_farkas(&p, &y));

        // min -x1 s.t. x1 - x2 = 0: ray (1, 1)
        let q = lp(&[&[1, -1]], &[0], &[-1, 0]);
        let ray = ray_from_basis(&q, &Basis::new(2, vec![1]).unwrap(), 0).unwrap();
        assert_eq!(ray, vec![rat_int(1), rat_int(1)]);
    }

    #[test]
    fn oracle_contract() {
        let p = lp(&[&[1]], &[1], &[1]);
        let exact = PrimalDualSolution::exact(vec![rat_int(1)], vec![rat_int(1)]);
        assert!(check_oracle_contract(&p, &exact, &rat(1, 2), &rat(1, 1000)));
        let off = PrimalDualSolution::exact(vec![rat_int(3)], vec![rat_int(1)]);
        assert!(!check_oracle_contract(&p, &off, &rat(1, 2), &rat(1, 1000)));
    }

    #[test]
    fn certificates_serialize_rationals_as_strings() {
        let cert = Certificate::Infeasible { farkas: vec![rat(-1, 3)] };
        let json = serde_json::to_string(&cert).unwrap();
        assert_eq!(json, r#"{"kind":"infeasible","farkas":["-1/3"]}"#);
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
    }
}
