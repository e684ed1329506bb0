//! The exact solve driver: iterative refinement with precision boosting as
//! the fallback, plus the pure boosting and double-only variants.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{build_feasibility_lp, build_unboundedness_lp, feasibility_parts, interpret_feasibility, Feasibility};
use crate::float::{boost_precision, round_lp, MpFloat, Precision, Real, ToleranceMode, DEFAULT_FEASIBILITY_TOL, MAX_PRECISION_BITS};
use crate::rational::{Rational, RationalLp};
use crate::refine::{refine_loop, stable_snapshot, RefineLimits, RefineOutcome, RefineReport};
use crate::simplex::{solve_fp, Basis, FpSolveOutcome, FpStatus, SimplexOptions};
use crate::verify::{
    basic_solution, farkas_from_basis, ray_from_basis, verify_farkas, verify_feasible, verify_optimal, Certificate,
};

/// Iterations between forced snapshots.
pub const SNAPSHOT_GAP: u64 = 10_000;

/// Whether the simplex should record its basis at `iteration`.
pub fn snapshot_policy(iteration: u64, last_snapshot: u64) -> bool {
    iteration.is_power_of_two() || iteration.saturating_sub(last_snapshot) >= SNAPSHOT_GAP
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Iterative refinement in double precision only.
    IrDouble,
    /// Re-solve from scratch at increasing precision, no refinement.
    BoostingPure,
    /// Iterative refinement, boosting the precision on failure.
    IrBoosting,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::IrDouble, Mode::BoostingPure, Mode::IrBoosting];

    pub fn name(self) -> &'static str {
        match self {
            Mode::IrDouble => "ir-double",
            Mode::BoostingPure => "boosting-pure",
            Mode::IrBoosting => "ir-boosting",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub mode: Mode,
    pub alpha: Rational,
    pub time_limit: Option<Duration>,
    /// Pivot limit for each float solve.
    pub iteration_limit: u64,
    pub max_precision_bits: u32,
    pub max_refinements: usize,
    /// Double-precision feasibility and optimality tolerances.
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub record_trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: Mode::IrBoosting,
            alpha: Rational::from_integer(BigInt::from(10u64.pow(12))),
            time_limit: None,
            iteration_limit: 1_000_000,
            max_precision_bits: MAX_PRECISION_BITS,
            max_refinements: 50,
            feas_tol: DEFAULT_FEASIBILITY_TOL,
            opt_tol: DEFAULT_FEASIBILITY_TOL,
            record_trace: false,
        }
    }
}

impl SolveConfig {
    pub fn with_mode(mode: Mode) -> Self {
        SolveConfig { mode, ..SolveConfig::default() }
    }

    fn tolerance_mode(&self) -> ToleranceMode {
        match self.mode {
            Mode::BoostingPure => ToleranceMode::Scaled { feas: self.feas_tol, opt: self.opt_tol },
            _ => ToleranceMode::Fixed { feas: self.feas_tol, opt: self.opt_tol },
        }
    }
}

/// Warm-start bases kept per problem across precision boosts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvancedBases {
    pub original: Option<Basis>,
    pub feasibility: Option<Basis>,
    pub unboundedness: Option<Basis>,
}

/// Facts about the original LP established by exact auxiliary solves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeasKnowledge {
    pub feasibility_established: bool,
    pub boundedness_established: bool,
    pub witness: Option<Vec<Rational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    Numerical,
    PrecisionLimit,
    TimeLimit,
    IterationLimit,
}

impl FailureReason {
    pub fn name(self) -> &'static str {
        match self {
            FailureReason::Numerical => "numerical",
            FailureReason::PrecisionLimit => "precision limit",
            FailureReason::TimeLimit => "time limit",
            FailureReason::IterationLimit => "iteration limit",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub boosts: u32,
    /// Precision in use when the solve ended.
    pub precision_final: u32,
    pub refinement_rounds: usize,
    pub exact_checks: usize,
    pub aux_solves: usize,
    /// Pivots of the very first float solve.
    pub first_solve_pivots: u64,
    /// Pivots at the starting precision after the first solve.
    pub pivots_initial: u64,
    /// Pivots at boosted precisions.
    pub pivots_boosted: u64,
    pub pivots_by_precision: BTreeMap<u32, u64>,
    pub first_solve_seconds: f64,
    pub total_seconds: f64,
    /// `(entering, leaving)` per pivot across all float solves, when recorded.
    #[serde(skip)]
    pub trace: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Certified(Certificate),
    Failure(FailureReason),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult {
    pub outcome: Outcome,
    pub stats: SolveStats,
}

impl ExactResult {
    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.outcome {
            Outcome::Certified(c) => Some(c),
            Outcome::Failure(_) => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match &self.outcome {
            Outcome::Certified(c) => c.status(),
            Outcome::Failure(FailureReason::TimeLimit) => "timeout",
            Outcome::Failure(_) => "failure",
        }
    }

    pub fn objective(&self) -> Option<&Rational> {
        self.certificate().and_then(Certificate::objective)
    }
}

/// Solves `lp` exactly. Every certified outcome has passed exact verification.
pub fn solve_exact(lp: &RationalLp, config: &SolveConfig) -> ExactResult {
    let mut driver = Driver::new(config);
    let outcome = match driver.solve_original(lp) {
        Ok(cert) => {
            debug_assert!(cert.verify(lp));
            Outcome::Certified(cert)
        }
        Err(reason) => Outcome::Failure(reason),
    };
    driver.stats.precision_final = driver.precision.bits();
    driver.stats.total_seconds = driver.started.elapsed().as_secs_f64();
    ExactResult { outcome, stats: driver.stats }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Problem {
    Original,
    Feasibility,
    Unboundedness,
}

type Step<T> = Result<T, FailureReason>;

struct Driver<'c> {
    config: &'c SolveConfig,
    started: Instant,
    deadline: Option<Instant>,
    precision: Precision,
    bases: AdvancedBases,
    knowledge: FeasKnowledge,
    stats: SolveStats,
    solves: usize,
}

impl<'c> Driver<'c> {
    fn new(config: &'c SolveConfig) -> Self {
        let started = Instant::now();
        Driver {
            config,
            started,
            deadline: config.time_limit.map(|d| started + d),
            precision: Precision::DOUBLE,
            bases: AdvancedBases::default(),
            knowledge: FeasKnowledge::default(),
            stats: SolveStats::default(),
            solves: 0,
        }
    }

    fn basis_slot(&mut self, problem: Problem) -> &mut Option<Basis> {
        match problem {
            Problem::Original => &mut self.bases.original,
            Problem::Feasibility => &mut self.bases.feasibility,
            Problem::Unboundedness => &mut self.bases.unboundedness,
        }
    }

    fn check_time(&self) -> Step<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(FailureReason::TimeLimit),
            _ => Ok(()),
        }
    }

    /// Moves to the next rung of the precision ladder.
    fn boost(&mut self) -> Step<()> {
        if self.config.mode == Mode::IrDouble {
            return Err(FailureReason::Numerical);
        }
        self.check_time()?;
        match boost_precision(self.precision) {
            Ok(next) if next.bits() <= self.config.max_precision_bits => {
                self.precision = next;
                self.stats.boosts += 1;
                Ok(())
            }
            _ => Err(FailureReason::PrecisionLimit),
        }
    }

    fn record_pivots(&mut self, pivots: u64, first_solve_pivots: u64, seconds: f64) {
        let first = self.solves == 0;
        self.solves += 1;
        *self.stats.pivots_by_precision.entry(self.precision.bits()).or_default() += pivots;
        if self.precision.is_double() {
            if first {
                self.stats.first_solve_pivots = first_solve_pivots;
                self.stats.first_solve_seconds = seconds;
                self.stats.pivots_initial += pivots - first_solve_pivots;
            } else {
                self.stats.pivots_initial += pivots;
            }
        } else {
            self.stats.pivots_boosted += pivots;
        }
    }

    fn solve_original(&mut self, lp: &RationalLp) -> Step<Certificate> {
        match self.config.mode {
            Mode::BoostingPure => self.pure(lp, Problem::Original),
            _ => self.refined(lp, Problem::Original),
        }
    }

    fn refine(&mut self, lp: &RationalLp, problem: Problem) -> Step<RefineOutcome> {
        self.check_time()?;
        let limits = RefineLimits {
            alpha: self.config.alpha.clone(),
            max_rounds: self.config.max_refinements,
            iteration_limit: self.config.iteration_limit,
            deadline: self.deadline,
            tolerances: self.config.tolerance_mode(),
            record_trace: self.config.record_trace,
            check_termination: true,
        };
        let warm = self.basis_slot(problem).clone();
        let started = Instant::now();
        let (outcome, report): (RefineOutcome, RefineReport) = refine_loop(lp, self.precision, warm.as_ref(), &limits);
        self.record_pivots(report.pivots, report.first_solve_pivots, started.elapsed().as_secs_f64());
        self.stats.refinement_rounds += report.rounds;
        self.stats.exact_checks += report.exact_checks;
        self.stats.trace.extend(report.trace);
        Ok(outcome)
    }

    /// Refinement with boosting on failure, for `Mode::IrDouble` and `Mode::IrBoosting`.
    fn refined(&mut self, lp: &RationalLp, problem: Problem) -> Step<Certificate> {
        loop {
            let outcome = self.refine(lp, problem)?;
            match outcome {
                RefineOutcome::ExactOptimal { solution, basis } => {
                    *self.basis_slot(problem) = Some(basis.clone());
                    return Ok(Certificate::optimal(lp, solution, basis));
                }
                RefineOutcome::Stalled { basis } => {
                    *self.basis_slot(problem) = Some(basis);
                    self.boost()?;
                }
                RefineOutcome::NumericalFailure { restart, .. } | RefineOutcome::OracleViolation { restart } => {
                    *self.basis_slot(problem) = restart;
                    self.boost()?;
                }
                RefineOutcome::IterationLimit { .. } => return Err(FailureReason::IterationLimit),
                RefineOutcome::TimeLimit => return Err(FailureReason::TimeLimit),
                RefineOutcome::FpInfeasible { farkas, basis } => {
                    *self.basis_slot(problem) = Some(basis);
                    if let Some(cert) = self.on_infeasible(lp, problem, &farkas)? {
                        return Ok(cert);
                    }
                    self.boost()?;
                }
                RefineOutcome::FpUnbounded { basis, .. } => {
                    *self.basis_slot(problem) = Some(basis);
                    if let Some(cert) = self.on_unbounded(lp, problem)? {
                        return Ok(cert);
                    }
                    self.boost()?;
                }
            }
        }
    }

    /// Handles a float infeasibility claim. `None` means the claim was
    /// rejected and the caller should boost.
    fn on_infeasible(&mut self, lp: &RationalLp, problem: Problem, farkas: &[Rational]) -> Step<Option<Certificate>> {
        match problem {
            // feasible by construction
            Problem::Feasibility => Ok(None),
            // a Farkas proof here only shows that no improving ray exists
            Problem::Unboundedness => Ok(direct_farkas(lp, farkas, self.bases.unboundedness.as_ref())),
            Problem::Original => {
                if self.knowledge.feasibility_established {
                    return Ok(None);
                }
                match self.test_feasibility(lp)? {
                    FeasibilityVerdict::Infeasible(y) => Ok(Some(Certificate::Infeasible { farkas: y })),
                    FeasibilityVerdict::Feasible => Ok(None),
                }
            }
        }
    }

    fn on_unbounded(&mut self, lp: &RationalLp, problem: Problem) -> Step<Option<Certificate>> {
        if problem != Problem::Original || self.knowledge.boundedness_established {
            // auxiliary problems are bounded by construction
            return Ok(None);
        }
        let Some(ray) = self.test_unboundedness(lp)? else {
            return Ok(None);
        };
        if !self.knowledge.feasibility_established {
            if let FeasibilityVerdict::Infeasible(y) = self.test_feasibility(lp)? {
                return Ok(Some(Certificate::Infeasible { farkas: y }));
            }
        }
        let witness = self.knowledge.witness.clone().expect("witness recorded with feasibility");
        Ok(Some(Certificate::Unbounded { witness, ray }))
    }

    /// Solves the auxiliary problem exactly, sharing precision, deadline and
    /// statistics with the caller.
    fn solve_aux(&mut self, aux: &RationalLp, problem: Problem) -> Step<Certificate> {
        self.stats.aux_solves += 1;
        match self.config.mode {
            Mode::BoostingPure => self.pure(aux, problem),
            _ => self.refined(aux, problem),
        }
    }

    fn test_feasibility(&mut self, lp: &RationalLp) -> Step<FeasibilityVerdict> {
        let aux = build_feasibility_lp(lp);
        let cert = self.solve_aux(&aux, Problem::Feasibility)?;
        let Certificate::Optimal { x, y, .. } = cert else {
            unreachable!("the feasibility LP is feasible and bounded");
        };
        let (tau, xi) = feasibility_parts(lp, &x);
        match interpret_feasibility(lp, &tau, &xi) {
            Feasibility::Infeasible => {
                let farkas = y[..lp.nrows()].to_vec();
                assert!(verify_farkas(lp, &farkas), "duals of a zero-tau optimum prove infeasibility");
                Ok(FeasibilityVerdict::Infeasible(farkas))
            }
            Feasibility::Feasible { witness } => {
                assert!(verify_feasible(lp, &witness));
                self.knowledge.feasibility_established = true;
                self.knowledge.witness = Some(witness);
                Ok(FeasibilityVerdict::Feasible)
            }
        }
    }

    /// Returns an exact ray, or records that none exists.
    fn test_unboundedness(&mut self, lp: &RationalLp) -> Step<Option<Vec<Rational>>> {
        let aux = build_unboundedness_lp(lp);
        match self.solve_aux(&aux, Problem::Unboundedness)? {
            Certificate::Optimal { x, .. } => Ok(Some(x)),
            Certificate::Infeasible { .. } => {
                self.knowledge.boundedness_established = true;
                Ok(None)
            }
            Certificate::Unbounded { .. } => unreachable!("zero objective"),
        }
    }

    /// Solves from scratch at increasing precision and verifies each
    /// returned basis in exact arithmetic.
    fn pure(&mut self, lp: &RationalLp, problem: Problem) -> Step<Certificate> {
        loop {
            self.check_time()?;
            let warm = self.basis_slot(problem).clone();
            let started = Instant::now();
            let out = if self.precision.is_double() {
                self.pure_solve::<f64>(lp, warm.as_ref())
            } else {
                self.pure_solve::<MpFloat>(lp, warm.as_ref())
            };
            self.record_pivots(out.iterations, out.iterations, started.elapsed().as_secs_f64());
            self.stats.trace.extend_from_slice(&out.trace);
            *self.basis_slot(problem) = Some(out.basis.clone());
            match out.status {
                PureStatus::Optimal => {
                    self.stats.exact_checks += 1;
                    if let Ok(sol) = basic_solution(lp, &out.basis) {
                        if verify_optimal(lp, &sol) {
                            return Ok(Certificate::optimal(lp, sol, out.basis));
                        }
                    }
                }
                PureStatus::Infeasible { farkas } => {
                    self.stats.exact_checks += 1;
                    if problem != Problem::Feasibility {
                        if let Some(cert) = direct_farkas(lp, &farkas, Some(&out.basis)) {
                            return Ok(cert);
                        }
                    }
                }
                PureStatus::Unbounded { entering } => {
                    self.stats.exact_checks += 1;
                    if problem == Problem::Original {
                        if let Some(cert) = self.pure_unbounded(lp, &out.basis, entering)? {
                            return Ok(cert);
                        }
                    }
                }
                PureStatus::NumericalFailure => {
                    *self.basis_slot(problem) = out.restart;
                }
                PureStatus::IterationLimit => return Err(FailureReason::IterationLimit),
                PureStatus::TimeLimit => return Err(FailureReason::TimeLimit),
            }
            self.boost()?;
        }
    }

    fn pure_solve<T: Real>(&self, lp: &RationalLp, warm: Option<&Basis>) -> PureOutcome {
        let flp = round_lp::<T>(lp, self.precision, self.config.tolerance_mode());
        let opts = SimplexOptions {
            iteration_limit: self.config.iteration_limit,
            deadline: self.deadline,
            record_trace: self.config.record_trace,
        };
        PureOutcome::from(solve_fp(&flp, warm, &opts), warm)
    }

    fn pure_unbounded(&mut self, lp: &RationalLp, basis: &Basis, entering: usize) -> Step<Option<Certificate>> {
        let Some(ray) = ray_from_basis(lp, basis, entering) else {
            return Ok(None);
        };
        if let Ok(sol) = basic_solution(lp, basis) {
            if verify_feasible(lp, &sol.x) {
                return Ok(Some(Certificate::Unbounded { witness: sol.x, ray }));
            }
        }
        if !self.knowledge.feasibility_established {
            if let FeasibilityVerdict::Infeasible(y) = self.test_feasibility(lp)? {
                return Ok(Some(Certificate::Infeasible { farkas: y }));
            }
        }
        let witness = self.knowledge.witness.clone().expect("witness recorded with feasibility");
        Ok(Some(Certificate::Unbounded { witness, ray }))
    }
}

enum FeasibilityVerdict {
    Feasible,
    Infeasible(Vec<Rational>),
}

/// Precision-independent view of a float solve.
struct PureOutcome {
    status: PureStatus,
    basis: Basis,
    iterations: u64,
    trace: Vec<(usize, usize)>,
    restart: Option<Basis>,
}

enum PureStatus {
    Optimal,
    Infeasible { farkas: Vec<Rational> },
    Unbounded { entering: usize },
    NumericalFailure,
    IterationLimit,
    TimeLimit,
}

impl PureOutcome {
    fn from<T: Real>(out: FpSolveOutcome<T>, warm: Option<&Basis>) -> Self {
        let restart = stable_snapshot(&out.snapshots, out.iterations).or_else(|| warm.cloned());
        let status = match out.status {
            FpStatus::Optimal { .. } => PureStatus::Optimal,
            FpStatus::Infeasible { farkas } => PureStatus::Infeasible { farkas: farkas.iter().map(Real::to_rational).collect() },
            FpStatus::Unbounded { entering, .. } => PureStatus::Unbounded { entering },
            FpStatus::NumericalFailure(_) => PureStatus::NumericalFailure,
            FpStatus::IterationLimit => PureStatus::IterationLimit,
            FpStatus::TimeLimit => PureStatus::TimeLimit,
        };
        PureOutcome { status, basis: out.basis, iterations: out.iterations, trace: out.trace, restart }
    }
}

/// An exact Farkas proof from the basis phase-1 duals or the rounded float
/// proof, whichever verifies.
fn direct_farkas(lp: &RationalLp, approx: &[Rational], basis: Option<&Basis>) -> Option<Certificate> {
    basis
        .and_then(|b| farkas_from_basis(lp, b))
        .or_else(|| verify_farkas(lp, approx).then(|| approx.to_vec()))
        .map(|farkas| Certificate::Infeasible { farkas })
}
