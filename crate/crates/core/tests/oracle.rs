mod common;

use common::{brute_force, is_farkas, is_feasible, is_ray, mat_vec, Verdict};
use exactlp::corpus::{random_lp, RandomLpParams};
use exactlp::float::{round_lp, tolerance_set, MpFloat, Precision, Real, ToleranceMode};
use exactlp::general::{solve_general, to_standard_form, Column, GeneralLp, Row, RowKind, Sense};
use exactlp::io::{parse_mps, write_mps};
use exactlp::simplex::{factorize, solve_fp, FpStatus, SimplexOptions};
use exactlp::verify::Certificate;
use exactlp::{solve_exact, Mode, Outcome, Rational, RationalLp, SolveConfig, SparseRationalMatrix};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn random_dense<R: Rng>(rng: &mut R, m: usize, n: usize, max: i64) -> Vec<Vec<Rational>> {
    (0..m).map(|_| (0..n).map(|_| int(rng.gen_range(-max..=max))).collect()).collect()
}

#[test]
fn float_simplex_matches_basis_enumeration_on_5x8() {
    let mut rng = ChaCha8Rng::seed_from_u64(58);
    let mut optimal = 0;
    for _ in 0..60 {
        let rows = random_dense(&mut rng, 5, 8, 9);
        let x0: Vec<Rational> = (0..8).map(|_| int(rng.gen_range(0..=3))).collect();
        let b = mat_vec(&rows, &x0);
        let c: Vec<Rational> = (0..8).map(|_| int(rng.gen_range(-9..=9))).collect();
        let lp = RationalLp::new(SparseRationalMatrix::from_dense(&rows), b, c, vec![int(0); 8]).unwrap();
        let Verdict::Optimal(exact) = brute_force(&lp) else { continue };
        let flp = round_lp::<f64>(&lp, Precision::DOUBLE, ToleranceMode::default());
        let FpStatus::Optimal { x, .. } = solve_fp(&flp, None, &SimplexOptions::default()).status else {
            panic!("float simplex missed an optimum");
        };
        let obj: f64 = x.iter().zip(&flp.c).map(|(a, b)| a * b).sum();
        let exact = exact.to_f64().unwrap();
        assert!((obj - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{obj} vs {exact}");
        optimal += 1;
    }
    assert!(optimal >= 20, "only {optimal} optimal instances");
}

#[test]
fn ftran_residual_on_well_conditioned_6x6() {
    let p = Precision::new(192).unwrap();
    let tol = tolerance_set(p, ToleranceMode::default());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        // diagonally dominant, hence well conditioned
        let mut b = random_dense(&mut rng, 6, 6, 5);
        for (i, row) in b.iter_mut().enumerate() {
            row[i] = int(40);
        }
        let columns: Vec<Vec<(usize, MpFloat)>> = (0..6)
            .map(|j| (0..6).map(|i| (i, <MpFloat as Real>::from_rational(&b[i][j], p))).collect())
            .collect();
        let f = factorize(&columns, &tol, p).unwrap();
        let v: Vec<Rational> = (0..6).map(|_| Rational::new(rng.gen_range(-99..=99).into(), rng.gen_range(1..=99).into())).collect();
        let v_float: Vec<MpFloat> = v.iter().map(|q| <MpFloat as Real>::from_rational(q, p)).collect();
        let x: Vec<Rational> = f.ftran(&v_float).iter().map(Real::to_rational).collect();
        let residual = mat_vec(&b, &x).iter().zip(&v).map(|(a, b)| (a - b).abs()).max().unwrap();
        let norm = v.iter().map(|q| q.abs()).max().unwrap();
        let bound = Rational::new(BigInt::from(10), BigInt::from(10).pow(57)) * norm;
        assert!(residual <= bound);
    }
}

fn check_against_oracle(lp: &RationalLp, result: &exactlp::ExactResult, verdict: &Verdict) {
    match (&result.outcome, verdict) {
        (Outcome::Certified(Certificate::Optimal { x, objective, .. }), Verdict::Optimal(expected)) => {
            assert_eq!(objective, expected);
            assert!(is_feasible(lp, x));
            assert_eq!(&common::objective(lp, x), expected);
        }
        (Outcome::Certified(Certificate::Infeasible { farkas }), Verdict::Infeasible) => assert!(is_farkas(lp, farkas)),
        (Outcome::Certified(Certificate::Unbounded { witness, ray }), Verdict::Unbounded) => {
            assert!(is_feasible(lp, witness) && is_ray(lp, ray));
        }
        (Outcome::Failure(_), _) => {}
        (other, expected) => panic!("verdict mismatch: {other:?} vs {expected:?}"),
    }
}

#[test]
fn exact_solves_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = RandomLpParams { max_rows: 4, max_cols: 7, ..RandomLpParams::default() };
    for _ in 0..60 {
        let lp = random_lp(&mut rng, &params);
        let verdict = brute_force(&lp);
        for mode in Mode::ALL {
            let result = solve_exact(&lp, &SolveConfig::with_mode(mode));
            if mode != Mode::IrDouble {
                assert!(matches!(result.outcome, Outcome::Certified(_)), "{mode} failed");
            }
            check_against_oracle(&lp, &result, &verdict);
        }
    }
}

fn random_general<R: Rng>(rng: &mut R, max_dim: usize) -> GeneralLp {
    let m = rng.gen_range(1..=max_dim);
    let n = rng.gen_range(1..=max_dim);
    let mut lp = GeneralLp::new("g");
    lp.sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    for i in 0..m {
        let kind = [RowKind::Eq, RowKind::Le, RowKind::Ge][rng.gen_range(0..3)];
        let range = (kind != RowKind::Eq && rng.gen_bool(0.4)).then(|| int(rng.gen_range(1..=4)));
        lp.rows.push(Row { name: format!("r{i}"), kind, rhs: int(rng.gen_range(-4..=4)), range });
    }
    for j in 0..n {
        let mut col = Column::new(format!("x{j}"), int(rng.gen_range(-3..=3)));
        col.lower = match rng.gen_range(0..3) {
            0 => None,
            1 => Some(int(0)),
            _ => Some(int(rng.gen_range(-3..=1))),
        };
        if rng.gen_bool(0.5) {
            let base = col.lower.clone().unwrap_or_else(|| int(-2));
            col.upper = Some(base + int(rng.gen_range(0..=4)));
        }
        for i in 0..m {
            let v = rng.gen_range(-3..=3);
            if v != 0 {
                col.entries.push((i, int(v)));
            }
        }
        lp.columns.push(col);
    }
    lp
}

/// Solutions mapped back from the standard form must be feasible for the
/// original rows and bounds and keep the objective value.
#[test]
fn standard_form_preserves_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..200 {
        let lp = random_general(&mut rng, 3);
        let (std, map) = to_standard_form(&lp).unwrap();
        let verdict = brute_force(&std);
        let (result, _) = solve_general(&lp, &SolveConfig::default()).unwrap();
        check_against_oracle(&std, &result, &verdict);
        if let Outcome::Certified(Certificate::Optimal { x, objective, .. }) = &result.outcome {
            let original = map.recover(x);
            assert!(lp.is_feasible(&original));
            assert_eq!(lp.objective(&original), map.objective(objective));
            checked += 1;
        }
    }
    assert!(checked >= 30, "only {checked} optimal instances");
}

/// Splits every variable, gives each finite row side and bound its own
/// slack, and negates the objective of maximization problems.
fn naive_standard_form(lp: &GeneralLp) -> RationalLp {
    let n = lp.columns.len();
    let mut rows: Vec<(Vec<Rational>, Rational, i64)> = Vec::new();
    let coeff = |i: usize| -> Vec<Rational> {
        lp.columns.iter().map(|c| c.entries.iter().find(|(r, _)| *r == i).map_or(int(0), |(_, v)| v.clone())).collect()
    };
    for (i, row) in lp.rows.iter().enumerate() {
        let a = coeff(i);
        let r = row.range.clone().map(|r| r.abs());
        let (lo, hi) = match row.kind {
            RowKind::Eq => (Some(row.rhs.clone()), Some(row.rhs.clone())),
            RowKind::Le => (r.map(|r| &row.rhs - r), Some(row.rhs.clone())),
            RowKind::Ge => (Some(row.rhs.clone()), r.map(|r| &row.rhs + r)),
        };
        if lo.is_some() && lo == hi {
            rows.push((a, lo.unwrap(), 0));
            continue;
        }
        if let Some(lo) = lo {
            rows.push((a.clone(), lo, -1));
        }
        if let Some(hi) = hi {
            rows.push((a, hi, 1));
        }
    }
    for (j, col) in lp.columns.iter().enumerate() {
        let mut e = vec![int(0); n];
        e[j] = int(1);
        if let Some(l) = &col.lower {
            rows.push((e.clone(), l.clone(), -1));
        }
        if let Some(u) = &col.upper {
            rows.push((e, u.clone(), 1));
        }
    }
    let slacks = rows.iter().filter(|r| r.2 != 0).count();
    let width = 2 * n + slacks;
    let mut dense_rows = Vec::new();
    let mut next = 2 * n;
    for (a, _, sign) in &rows {
        let mut row = vec![int(0); width];
        for j in 0..n {
            row[j] = a[j].clone();
            row[n + j] = -&a[j];
        }
        if *sign != 0 {
            row[next] = int(*sign);
            next += 1;
        }
        dense_rows.push(row);
    }
    let sign = if lp.sense == Sense::Maximize { int(-1) } else { int(1) };
    let mut c = vec![int(0); width];
    for (j, col) in lp.columns.iter().enumerate() {
        c[j] = &sign * &col.cost;
        c[n + j] = -&c[j];
    }
    let b = rows.into_iter().map(|r| r.1).collect();
    RationalLp::new(SparseRationalMatrix::from_dense(&dense_rows), b, c, vec![int(0); width]).unwrap()
}

#[test]
fn standard_form_agrees_with_naive_conversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut optimal = 0;
    for _ in 0..150 {
        let lp = random_general(&mut rng, 2);
        let (result, map) = solve_general(&lp, &SolveConfig::default()).unwrap();
        let naive = brute_force(&naive_standard_form(&lp));
        match (result.certificate().expect("certified"), naive) {
            (Certificate::Optimal { objective, .. }, Verdict::Optimal(v)) => {
                let v = if lp.sense == Sense::Maximize { -v } else { v };
                assert_eq!(map.objective(objective), v + &lp.objective_constant);
                optimal += 1;
            }
            (Certificate::Infeasible { .. }, Verdict::Infeasible) | (Certificate::Unbounded { .. }, Verdict::Unbounded) => {}
            (cert, naive) => panic!("{} vs {naive:?}", cert.status()),
        }
    }
    assert!(optimal >= 20, "only {optimal} optimal instances");
}

#[test]
fn mps_round_trip_preserves_rational_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let mut lp = random_general(&mut rng, 3);
        for col in &mut lp.columns {
            col.cost = Rational::new(BigInt::from(rng.gen_range(-50..=50)), BigInt::from(rng.gen_range(1..=12)));
        }
        let again = parse_mps(&write_mps(&lp)).unwrap();
        assert_eq!(again, lp);
    }
}

#[test]
fn certificates_survive_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let lp = random_lp(&mut rng, &RandomLpParams::default());
        let result = solve_exact(&lp, &SolveConfig::default());
        let cert = result.certificate().expect("ir-boosting certifies small LPs");
        let back: Certificate = serde_json::from_str(&serde_json::to_string(cert).unwrap()).unwrap();
        assert_eq!(&back, cert);
        assert!(back.verify(&lp));
        if let Certificate::Optimal { x, .. } = &back {
            assert!(is_feasible(&lp, x));
        }
    }
}

#[test]
fn refinement_never_increases_violation() {
    use exactlp::refine::{refine_loop, RefineLimits};
    let limits = RefineLimits { check_termination: false, max_rounds: 4, ..RefineLimits::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let params = RandomLpParams { max_rows: 4, max_cols: 6, ..RandomLpParams::default() };
    let mut checked = 0;
    while checked < 40 {
        let lp = random_lp(&mut rng, &params);
        if !matches!(brute_force(&lp), Verdict::Optimal(_)) {
            continue;
        }
        let (_, report) = refine_loop(&lp, Precision::DOUBLE, None, &limits);
        // a zero violation ends refinement, later rounds only see the alpha cap
        let end = report.violations.iter().position(Zero::is_zero).map_or(report.violations.len(), |k| k + 1);
        for pair in report.violations[..end].windows(2) {
            assert!(pair[1] <= pair[0], "{:?}", report.violations.iter().map(|v| v.to_f64()).collect::<Vec<_>>());
        }
        checked += 1;
    }
}
