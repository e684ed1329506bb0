//! LP iterative refinement: repeatedly solve scaled residual LPs at working
//! precision and apply the corrections in exact arithmetic.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::float::{tolerance_set, FloatLp, FloatMatrix, MpFloat, Precision, Real, ToleranceMode};
use crate::rational::{compute_residuals, PrimalDualSolution, Rational, RationalLp, Residuals};
use crate::simplex::{solve_fp, Basis, FpStatus, NumericalIssue, SimplexOptions, REFACTOR_INTERVAL};
use crate::verify::{basic_solution, verify_optimal};

/// Violation ratio below which a refinement round counts as slow.
pub const STALL_RATIO: u32 = 16;
/// Rational factorization is attempted once the violation drops below
/// `10^-CHECK_REDUCTION_DIGITS` times its initial value.
pub const CHECK_REDUCTION_DIGITS: u32 = 15;
pub const CHECK_INTERVAL: usize = 5;

/// `1 / max(delta, 1 / (alpha * previous))`.
pub fn scale_factors(delta: &Rational, previous: &Rational, alpha: &Rational) -> Rational {
    let cap = (alpha * previous).recip();
    if *delta > cap {
        delta.recip()
    } else {
        cap.recip()
    }
}

/// Largest power of two not exceeding `q > 0`.
pub fn floor_power_of_two(q: &Rational) -> Rational {
    let bits = |v: &BigInt| v.bits() as i64;
    let mut e = bits(q.numer()) - bits(q.denom());
    let two = |e: i64| {
        if e >= 0 {
            Rational::from_integer(BigInt::one() << e as usize)
        } else {
            Rational::new(BigInt::one(), BigInt::one() << (-e) as usize)
        }
    };
    while two(e) > *q {
        e -= 1;
    }
    while two(e + 1) <= *q {
        e += 1;
    }
    two(e)
}

/// True when each of the last two rounds reduced the violation by less than
/// [`STALL_RATIO`].
pub fn detect_stall(history: &[Rational]) -> bool {
    if history.len() < 3 {
        return false;
    }
    let ratio = Rational::from_integer(STALL_RATIO.into());
    let slow = |prev: &Rational, cur: &Rational| !cur.is_zero() && prev < &(cur * &ratio);
    let k = history.len() - 1;
    slow(&history[k - 2], &history[k - 1]) && slow(&history[k - 1], &history[k])
}

fn scaled<T: Real>(v: &[Rational], factor: &Rational, p: Precision) -> Vec<T> {
    v.iter().map(|q| T::from_rational(&(q * factor), p)).collect()
}

/// `min (Delta_D c_hat)^T x s.t. A x = Delta_P b_hat, x >= Delta_P l_hat` at `p`.
pub fn build_transformed_lp<T: Real>(
    lp: &RationalLp,
    res: &Residuals,
    delta_p: &Rational,
    delta_d: &Rational,
    p: Precision,
    mode: ToleranceMode,
) -> FloatLp<T> {
    transformed(Arc::new(FloatMatrix::round(lp, p)), res, delta_p, delta_d, p, mode)
}

fn transformed<T: Real>(
    a: Arc<FloatMatrix<T>>,
    res: &Residuals,
    delta_p: &Rational,
    delta_d: &Rational,
    p: Precision,
    mode: ToleranceMode,
) -> FloatLp<T> {
    FloatLp {
        a,
        b: scaled(&res.b_hat, delta_p, p),
        c: scaled(&res.c_hat, delta_d, p),
        lower: scaled(&res.l_hat, delta_p, p),
        precision: p,
        tolerances: tolerance_set(p, mode),
    }
}

/// Applies `x += x_hat / Delta_P`, `y += y_hat / Delta_D`.
pub fn correct(sol: &mut PrimalDualSolution, x_hat: &[Rational], y_hat: &[Rational], delta_p: &Rational, delta_d: &Rational) {
    for (x, d) in sol.x.iter_mut().zip(x_hat) {
        if !d.is_zero() {
            *x += d / delta_p;
        }
    }
    for (y, d) in sol.y.iter_mut().zip(y_hat) {
        if !d.is_zero() {
            *y += d / delta_d;
        }
    }
}

#[derive(Clone, Debug)]
pub struct RefineLimits {
    pub alpha: Rational,
    pub max_rounds: usize,
    pub iteration_limit: u64,
    pub deadline: Option<Instant>,
    pub tolerances: ToleranceMode,
    pub record_trace: bool,
    /// Attempt exact termination checks; when off, exactly `max_rounds`
    /// rounds are run unless the float solver fails.
    pub check_termination: bool,
}

impl Default for RefineLimits {
    fn default() -> Self {
        RefineLimits {
            alpha: Rational::from_integer(BigInt::from(10u64.pow(12))),
            max_rounds: 50,
            iteration_limit: 100_000,
            deadline: None,
            tolerances: ToleranceMode::default(),
            record_trace: false,
            check_termination: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefineOutcome {
    ExactOptimal { solution: PrimalDualSolution, basis: Basis },
    /// Approximate Farkas proof; it carries over unchanged from the residual
    /// LPs to the original one.
    FpInfeasible { farkas: Vec<Rational>, basis: Basis },
    /// Approximate improving ray; valid for the original LP as well.
    FpUnbounded { ray: Vec<Rational>, entering: usize, basis: Basis },
    /// Carries the last basis the float solver reported optimal.
    Stalled { basis: Basis },
    /// Carries the basis to restart from, if any.
    NumericalFailure { issue: NumericalIssue, restart: Option<Basis> },
    OracleViolation { restart: Option<Basis> },
    IterationLimit { basis: Basis },
    TimeLimit,
}

#[derive(Clone, Debug, Default)]
pub struct RefineReport {
    /// Float solves performed; the first solves the LP itself.
    pub rounds: usize,
    pub pivots: u64,
    pub first_solve_pivots: u64,
    pub exact_checks: usize,
    /// `max(delta_P, delta_D)` of the candidate before each round, followed by
    /// the value after the last one.
    pub violations: Vec<Rational>,
    pub trace: Vec<(usize, usize)>,
}

/// Runs iterative refinement at precision `p`, warm-started from `warm`.
pub fn refine_loop(lp: &RationalLp, p: Precision, warm: Option<&Basis>, limits: &RefineLimits) -> (RefineOutcome, RefineReport) {
    if p.is_double() {
        refine_generic::<f64>(lp, p, warm, limits)
    } else {
        refine_generic::<MpFloat>(lp, p, warm, limits)
    }
}

fn lift<T: Real>(v: &[T]) -> Vec<Rational> {
    v.iter().map(Real::to_rational).collect()
}

/// Last snapshot taken at least two refactorization cycles before `failed_at`.
pub(crate) fn stable_snapshot(snapshots: &[(u64, Basis)], failed_at: u64) -> Option<Basis> {
    let horizon = failed_at.checked_sub(2 * REFACTOR_INTERVAL as u64)?;
    snapshots.iter().rev().find(|(it, _)| *it <= horizon).map(|(_, b)| b.clone())
}

fn refine_generic<T: Real>(
    lp: &RationalLp,
    p: Precision,
    warm: Option<&Basis>,
    limits: &RefineLimits,
) -> (RefineOutcome, RefineReport) {
    let (m, n) = (lp.nrows(), lp.ncols());
    let matrix: Arc<FloatMatrix<T>> = Arc::new(FloatMatrix::round(lp, p));
    let mut report = RefineReport::default();
    let mut sol = PrimalDualSolution { x: vec![Rational::zero(); n], y: vec![Rational::zero(); m], source_precision: p.bits() };
    let mut res = compute_residuals(lp, &sol);
    let initial = res.max_violation();
    report.violations.push(initial.clone());
    let check_threshold = initial.clone() * Rational::new(BigInt::one(), BigInt::from(10u64).pow(CHECK_REDUCTION_DIGITS));

    let one = Rational::one();
    let (mut delta_p, mut delta_d) = (one.clone(), one.clone());
    let mut basis = warm.cloned();
    let mut last_optimal: Option<Basis> = None;
    let mut last_checked: Option<Basis> = None;

    loop {
        if report.rounds >= limits.max_rounds {
            let basis = last_optimal.unwrap_or_else(|| Basis::slack(n, m));
            return (RefineOutcome::Stalled { basis }, report);
        }
        let flp = transformed(matrix.clone(), &res, &delta_p, &delta_d, p, limits.tolerances);
        let opts = SimplexOptions { iteration_limit: limits.iteration_limit, deadline: limits.deadline, record_trace: limits.record_trace };
        let start = basis.clone();
        let out = solve_fp(&flp, start.as_ref(), &opts);
        report.rounds += 1;
        report.pivots += out.iterations;
        if report.rounds == 1 {
            report.first_solve_pivots = out.iterations;
        }
        report.trace.extend_from_slice(&out.trace);
        let restart = || stable_snapshot(&out.snapshots, out.iterations).or_else(|| start.clone());

        let (x_hat, y_hat) = match out.status {
            FpStatus::Optimal { x, y } => (lift(&x), lift(&y)),
            FpStatus::Infeasible { farkas } => {
                return (RefineOutcome::FpInfeasible { farkas: lift(&farkas), basis: out.basis }, report);
            }
            FpStatus::Unbounded { ray, entering } => {
                return (RefineOutcome::FpUnbounded { ray: lift(&ray), entering, basis: out.basis }, report);
            }
            FpStatus::NumericalFailure(issue) => {
                return (RefineOutcome::NumericalFailure { issue, restart: restart() }, report);
            }
            FpStatus::IterationLimit => return (RefineOutcome::IterationLimit { basis: out.basis }, report),
            FpStatus::TimeLimit => return (RefineOutcome::TimeLimit, report),
        };

        correct(&mut sol, &x_hat, &y_hat, &delta_p, &delta_d);
        res = compute_residuals(lp, &sol);
        let violation = res.max_violation();
        let scaled_violation = (&delta_p * &res.delta_p).max(&delta_d * &res.delta_d);
        if scaled_violation >= one {
            return (RefineOutcome::OracleViolation { restart: restart() }, report);
        }
        report.violations.push(violation.clone());
        basis = Some(out.basis.clone());
        last_optimal = Some(out.basis.clone());

        let due = report.rounds == 1
            || violation <= check_threshold
            || report.rounds % CHECK_INTERVAL == 0
            || violation.is_zero();
        if limits.check_termination && due && last_checked.as_ref() != Some(&out.basis) {
            report.exact_checks += 1;
            last_checked = Some(out.basis.clone());
            if let Ok(exact) = basic_solution(lp, &out.basis) {
                if verify_optimal(lp, &exact) {
                    return (RefineOutcome::ExactOptimal { solution: exact, basis: out.basis }, report);
                }
            }
        }
        if detect_stall(&report.violations) {
            return (RefineOutcome::Stalled { basis: out.basis }, report);
        }

        delta_p = floor_power_of_two(&scale_factors(&res.delta_p, &delta_p, &limits.alpha));
        delta_d = floor_power_of_two(&scale_factors(&res.delta_d, &delta_d, &limits.alpha));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int, SparseRationalMatrix};

    fn pow2(e: i32) -> Rational {
        if e >= 0 {
            Rational::from_integer(BigInt::one() << e)
        } else {
            Rational::new(BigInt::one(), BigInt::one() << -e)
        }
    }

    fn single(b: Rational) -> RationalLp {
        RationalLp::new(SparseRationalMatrix::from_dense(&[vec![rat_int(1)]]), vec![b], vec![rat_int(1)], vec![rat_int(0)])
            .unwrap()
    }

    #[test]
    fn scale_factor_examples() {
        assert_eq!(scale_factors(&rat_int(1), &rat_int(1), &rat_int(2)), rat_int(1));
        assert_eq!(scale_factors(&rat_int(0), &rat_int(4), &pow2(10)), pow2(12));
        assert_eq!(scale_factors(&pow2(-20), &rat_int(1), &pow2(30)), pow2(20));
    }

    #[test]
    fn powers_of_two() {
        assert_eq!(floor_power_of_two(&rat(3, 1)), rat_int(2));
        assert_eq!(floor_power_of_two(&rat(1, 3)), rat(1, 4));
        assert_eq!(floor_power_of_two(&rat(1, 4)), rat(1, 4));
        assert_eq!(floor_power_of_two(&rat_int(1_000_000_000_000)), pow2(39));
    }

    #[test]
    fn stall_examples() {
        assert!(!detect_stall(&[rat_int(1), rat(1, 32), rat(1, 1024)]));
        assert!(detect_stall(&[rat_int(1), rat(1, 2), rat(1, 4)]));
        assert!(!detect_stall(&[rat_int(1), rat(1, 2), rat(1, 1000)]));
        assert!(!detect_stall(&[rat_int(1)]));
    }

    #[test]
    fn transformed_lp_example() {
        let lp = single(rat_int(1));
        let sol = PrimalDualSolution::exact(vec![rat(1, 2)], vec![rat_int(0)]);
        let res = compute_residuals(&lp, &sol);
        let flp: FloatLp<f64> = build_transformed_lp(&lp, &res, &rat_int(2), &rat_int(1), Precision::DOUBLE, ToleranceMode::default());
        assert_eq!((flp.b[0], flp.lower[0], flp.c[0]), (1.0, -1.0, 1.0));

        let mut corrected = sol.clone();
        correct(&mut corrected, &[rat_int(1)], &[rat_int(0)], &rat_int(2), &rat_int(1));
        assert_eq!(corrected.x, vec![rat_int(1)]);
        assert!(compute_residuals(&lp, &corrected).delta_p.is_zero());

        let mut unchanged = sol.clone();
        correct(&mut unchanged, &[rat_int(0)], &[rat_int(0)], &rat_int(2), &rat_int(1));
        assert_eq!(unchanged, sol);
    }

    #[test]
    fn zero_residual_image() {
        let lp = single(rat_int(1));
        let sol = PrimalDualSolution::exact(vec![rat_int(1)], vec![rat_int(1)]);
        let res = compute_residuals(&lp, &sol);
        let flp: FloatLp<f64> = build_transformed_lp(&lp, &res, &pow2(40), &pow2(40), Precision::DOUBLE, ToleranceMode::default());
        assert_eq!(flp.b, vec![0.0]);
        assert!(flp.lower.iter().all(|v| *v <= 0.0));
        assert_eq!(flp.c, vec![0.0]);
    }

    #[test]
    fn refines_one_third() {
        let lp = single(rat(1, 3));
        let (outcome, report) = refine_loop(&lp, Precision::DOUBLE, None, &RefineLimits::default());
        match outcome {
            RefineOutcome::ExactOptimal { solution, .. } => assert_eq!(solution.x, vec![rat(1, 3)]),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(report.rounds, 1);
    }

    #[test]
    fn exact_first_basis_needs_no_refinement() {
        let lp = single(rat_int(2));
        let (outcome, report) = refine_loop(&lp, Precision::DOUBLE, None, &RefineLimits::default());
        assert!(matches!(outcome, RefineOutcome::ExactOptimal { .. }));
        assert_eq!((report.rounds, report.exact_checks), (1, 1));
    }

    #[test]
    fn infeasible_single_row() {
        let lp = single(rat_int(-1));
        let (outcome, _) = refine_loop(&lp, Precision::DOUBLE, None, &RefineLimits::default());
        match outcome {
            RefineOutcome::FpInfeasible { farkas, .. } => assert!(num_traits::Signed::is_negative(&farkas[0])),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn refinement_at_higher_precision() {
        let lp = single(rat(1, 7));
        let p = Precision::new(192).unwrap();
        let (outcome, _) = refine_loop(&lp, p, None, &RefineLimits::default());
        assert!(matches!(outcome, RefineOutcome::ExactOptimal { .. }));
    }
}
