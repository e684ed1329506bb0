//! Revised primal simplex over `A x = b, x >= l` at any working precision.
//!
//! Each row `i` owns a logical column `e_i` (index `n + i`) that is fixed at
//! zero. Logicals start out basic, may stay basic at value zero when `A` is
//! rank deficient, and never re-enter once they leave. Phase 1 minimizes the
//! sum of infeasibilities of the current basis (composite phase 1), so warm
//! starts from primal infeasible bases need no special handling.

mod factor;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use factor::{factorize, BasisFactor, MARKOWITZ_THRESHOLD};

use crate::boost::snapshot_policy;
use crate::float::{FloatLp, Real};
use crate::lu::Singular;

/// Pivots between scheduled refactorizations.
pub const REFACTOR_INTERVAL: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
}

/// An ordered list of the `m` basic variables. Indices `>= num_cols` denote
/// row logicals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    num_cols: usize,
    basic: Vec<usize>,
}

impl Basis {
    pub fn new(num_cols: usize, basic: Vec<usize>) -> Result<Self, String> {
        let total = num_cols + basic.len();
        let mut seen = vec![false; total];
        for &j in &basic {
            if j >= total {
                return Err(format!("basic index {j} out of range"));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(format!("variable {j} basic twice"));
            }
        }
        Ok(Basis { num_cols, basic })
    }

    /// The all-logical basis.
    pub fn slack(num_cols: usize, num_rows: usize) -> Self {
        Basis { num_cols, basic: (num_cols..num_cols + num_rows).collect() }
    }

    pub fn basic(&self) -> &[usize] {
        &self.basic
    }

    pub fn num_rows(&self) -> usize {
        self.basic.len()
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn is_logical(&self, index: usize) -> bool {
        index >= self.num_cols
    }

    /// Status of every structural variable.
    pub fn statuses(&self) -> Vec<VarStatus> {
        let mut status = vec![VarStatus::AtLower; self.num_cols];
        for &j in &self.basic {
            if j < self.num_cols {
                status[j] = VarStatus::Basic;
            }
        }
        status
    }

    pub fn fits(&self, num_cols: usize, num_rows: usize) -> bool {
        self.num_cols == num_cols && self.basic.len() == num_rows
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumericalIssue {
    /// No acceptable pivot left in the basis matrix.
    SingularBasis,
    /// Too many consecutive non-improving pivots, or a repeated basis,
    /// even under Bland's rule.
    Cycling,
    /// Phase 1 found an improving direction that nothing blocks.
    Unstable,
}

#[derive(Clone, Debug)]
pub enum FpStatus<T> {
    Optimal { x: Vec<T>, y: Vec<T> },
    /// `farkas` approximately satisfies `y^T A <= 0`, `y^T (b - A l) > 0`.
    Infeasible { farkas: Vec<T> },
    /// `ray` approximately satisfies `A v = 0`, `v >= 0`, `c^T v < 0`.
    Unbounded { ray: Vec<T>, entering: usize },
    NumericalFailure(NumericalIssue),
    IterationLimit,
    TimeLimit,
}

#[derive(Clone, Debug)]
pub struct FpSolveOutcome<T> {
    pub status: FpStatus<T>,
    /// Final basis; for failures, the basis at the point of failure.
    pub basis: Basis,
    pub iterations: u64,
    pub snapshots: Vec<(u64, Basis)>,
    /// `(entering, leaving)` per pivot, when requested.
    pub trace: Vec<(usize, usize)>,
}

impl<T> FpSolveOutcome<T> {
    pub fn is_optimal(&self) -> bool {
        matches!(self.status, FpStatus::Optimal { .. })
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub iteration_limit: u64,
    pub deadline: Option<Instant>,
    pub record_trace: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { iteration_limit: 100_000, deadline: None, record_trace: false }
    }
}

/// Solves `min { c^T x | A x = b, x >= l }` approximately at the precision of
/// `flp`, optionally warm-started from `warm`.
pub fn solve_fp<T: Real>(flp: &FloatLp<T>, warm: Option<&Basis>, opts: &SimplexOptions) -> FpSolveOutcome<T> {
    let mut solver = Solver::new(flp, opts);
    let status = solver.run(warm);
    FpSolveOutcome {
        status,
        basis: Basis { num_cols: solver.n, basic: solver.head },
        iterations: solver.iterations,
        snapshots: solver.snapshots,
        trace: solver.trace,
    }
}

struct Solver<'a, T> {
    lp: &'a FloatLp<T>,
    opts: &'a SimplexOptions,
    m: usize,
    n: usize,
    head: Vec<usize>,
    position: Vec<Option<usize>>,
    x: Vec<T>,
    factor: Option<BasisFactor<T>>,
    fresh: bool,
    zero: T,
    one: T,
    pivot_eps: T,
    update_eps: T,
    feas: T,
    opt: T,
    iterations: u64,
    snapshots: Vec<(u64, Basis)>,
    last_snapshot: u64,
    trace: Vec<(usize, usize)>,
    degenerate_run: usize,
    /// Hashes of visited basic sets together with their phase 1 costs.
    visited: HashSet<u64>,
    forced_bland: bool,
}

enum Blocking {
    Row(usize),
    None,
}

impl<'a, T: Real> Solver<'a, T> {
    fn new(lp: &'a FloatLp<T>, opts: &'a SimplexOptions) -> Self {
        let p = lp.precision;
        let tol = &lp.tolerances;
        let zero = T::zero(p);
        let one = T::from_f64(1.0, p);
        Solver {
            lp,
            opts,
            m: lp.nrows(),
            n: lp.ncols(),
            head: Vec::new(),
            position: Vec::new(),
            x: Vec::new(),
            factor: None,
            fresh: false,
            zero,
            one,
            pivot_eps: T::from_f64(tol.pivot_eps, p),
            update_eps: T::from_f64(tol.update_eps, p),
            feas: T::from_f64(tol.feas_tol, p),
            opt: T::from_f64(tol.opt_tol, p),
            iterations: 0,
            snapshots: Vec::new(),
            last_snapshot: 0,
            trace: Vec::new(),
            degenerate_run: 0,
            visited: HashSet::new(),
            forced_bland: false,
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, T)> {
        if j < self.n {
            self.lp.a.columns[j].clone()
        } else {
            vec![(j - self.n, self.one.clone())]
        }
    }

    fn nonbasic_value(&self, j: usize) -> T {
        if j < self.n {
            self.lp.lower[j].clone()
        } else {
            self.zero.clone()
        }
    }

    fn set_head(&mut self, head: Vec<usize>) {
        self.position = vec![None; self.n + self.m];
        for (pos, &j) in head.iter().enumerate() {
            self.position[j] = Some(pos);
        }
        self.x = (0..self.n + self.m).map(|j| self.nonbasic_value(j)).collect();
        self.head = head;
    }

    fn refactor(&mut self) -> Result<(), Singular> {
        let columns: Vec<_> = self.head.iter().map(|&j| self.column(j)).collect();
        match factorize(&columns, &self.lp.tolerances, self.lp.precision) {
            Ok(f) => {
                self.factor = Some(f);
                self.fresh = true;
                self.compute_basic_values();
                Ok(())
            }
            Err(e) => {
                self.factor = None;
                Err(e)
            }
        }
    }

    fn factor(&self) -> &BasisFactor<T> {
        self.factor.as_ref().expect("basis factorized")
    }

    fn compute_basic_values(&mut self) {
        let mut rhs = self.lp.b.clone();
        for j in 0..self.n {
            if self.position[j].is_some() || self.x[j].is_zero() {
                continue;
            }
            for (i, a) in &self.lp.a.columns[j] {
                rhs[*i] = rhs[*i].sub(&a.mul(&self.x[j]));
            }
        }
        let xb = self.factor().ftran(&rhs);
        for (pos, v) in xb.into_iter().enumerate() {
            self.x[self.head[pos]] = v;
        }
    }

    /// Installs the warm basis, repairing it with logicals if it is singular
    /// at this precision.
    fn install(&mut self, warm: Option<&Basis>) -> Result<(), NumericalIssue> {
        let head = match warm {
            Some(b) if b.fits(self.n, self.m) => b.basic.clone(),
            _ => (self.n..self.n + self.m).collect(),
        };
        self.set_head(head);
        let Err(singular) = self.refactor() else {
            return Ok(());
        };
        let mut head = self.head.clone();
        let pivoted_rows: std::collections::HashSet<usize> = singular.pivot_rows.iter().copied().collect();
        let pivoted_pos: std::collections::HashSet<usize> = singular.pivot_cols.iter().copied().collect();
        let free_rows = (0..self.m).filter(|r| !pivoted_rows.contains(r));
        let dropped = (0..self.m).filter(|p| !pivoted_pos.contains(p));
        for (pos, row) in dropped.zip(free_rows) {
            head[pos] = self.n + row;
        }
        self.set_head(head);
        if self.refactor().is_ok() {
            return Ok(());
        }
        self.set_head((self.n..self.n + self.m).collect());
        self.refactor().map_err(|_| NumericalIssue::SingularBasis)
    }

    /// Phase-1 cost of the basic variable at `pos`: -1 below its lower bound,
    /// +1/-1 for a logical away from zero, otherwise 0.
    fn infeasibility_cost(&self, pos: usize) -> i8 {
        let j = self.head[pos];
        let v = &self.x[j];
        if j < self.n {
            let shortfall = self.lp.lower[j].sub(v);
            if shortfall > self.feas {
                return -1;
            }
            0
        } else if *v > self.feas {
            1
        } else if v.neg() > self.feas {
            -1
        } else {
            0
        }
    }

    fn reduced_cost(&self, j: usize, phase1: bool, y: &[T]) -> T {
        let mut r = if phase1 { self.zero.clone() } else { self.lp.c[j].clone() };
        for (i, a) in &self.lp.a.columns[j] {
            if !y[*i].is_zero() {
                r = r.sub(&a.mul(&y[*i]));
            }
        }
        r
    }

    fn basis_hash(&self, phase1_costs: &[i8]) -> u64 {
        let mut basic = self.head.clone();
        basic.sort_unstable();
        let mut h = DefaultHasher::new();
        basic.hash(&mut h);
        phase1_costs.hash(&mut h);
        h.finish()
    }

    fn bland_active(&self) -> bool {
        self.forced_bland || self.degenerate_run >= 3 * (self.n + self.m)
    }

    fn run(&mut self, warm: Option<&Basis>) -> FpStatus<T> {
        if let Err(issue) = self.install(warm) {
            return FpStatus::NumericalFailure(issue);
        }
        let cycle_cap = 3 * (self.n + self.m) + 50 * (self.n + self.m) + 1000;
        loop {
            if self.iterations >= self.opts.iteration_limit {
                return FpStatus::IterationLimit;
            }
            if self.opts.deadline.is_some_and(|d| Instant::now() >= d) {
                return FpStatus::TimeLimit;
            }
            if self.degenerate_run > cycle_cap {
                return FpStatus::NumericalFailure(NumericalIssue::Cycling);
            }

            let phase1_costs: Vec<i8> = (0..self.m).map(|pos| self.infeasibility_cost(pos)).collect();
            let phase1 = phase1_costs.iter().any(|&c| c != 0);
            let costs: Vec<T> = if phase1 {
                phase1_costs
                    .iter()
                    .map(|&c| match c {
                        1 => self.one.clone(),
                        -1 => self.one.neg(),
                        _ => self.zero.clone(),
                    })
                    .collect()
            } else {
                self.head.iter().map(|&j| if j < self.n { self.lp.c[j].clone() } else { self.zero.clone() }).collect()
            };
            let y = self.factor().btran(&costs);

            let bland = self.bland_active();
            let mut entering: Option<(usize, T)> = None;
            for j in 0..self.n {
                if self.position[j].is_some() {
                    continue;
                }
                let r = self.reduced_cost(j, phase1, &y);
                if r.neg() <= self.opt {
                    continue;
                }
                if bland {
                    entering = Some((j, r));
                    break;
                }
                if entering.as_ref().is_none_or(|(_, best)| r < *best) {
                    entering = Some((j, r));
                }
            }

            let Some((q, rq)) = entering else {
                if !self.fresh {
                    if self.refactor().is_err() {
                        return FpStatus::NumericalFailure(NumericalIssue::SingularBasis);
                    }
                    continue;
                }
                return if phase1 {
                    FpStatus::Infeasible { farkas: y }
                } else {
                    FpStatus::Optimal { x: self.x[..self.n].to_vec(), y }
                };
            };

            let aq = self.column(q);
            let mut dense = vec![self.zero.clone(); self.m];
            for (i, v) in &aq {
                dense[*i] = v.clone();
            }
            let w = self.factor().ftran(&dense);
            if self.factor().eta_count() > 0 && !self.update_is_accurate(&w, &aq) {
                if self.refactor().is_err() {
                    return FpStatus::NumericalFailure(NumericalIssue::SingularBasis);
                }
                continue;
            }

            match self.ratio_test(&w, bland) {
                Blocking::None => {
                    if !self.fresh {
                        if self.refactor().is_err() {
                            return FpStatus::NumericalFailure(NumericalIssue::SingularBasis);
                        }
                        continue;
                    }
                    if phase1 {
                        return FpStatus::NumericalFailure(NumericalIssue::Unstable);
                    }
                    let mut ray = vec![self.zero.clone(); self.n];
                    ray[q] = self.one.clone();
                    for (pos, &j) in self.head.iter().enumerate() {
                        if j < self.n {
                            ray[j] = w[pos].neg();
                        }
                    }
                    return FpStatus::Unbounded { ray, entering: q };
                }
                Blocking::Row(r) => {
                    if let Err(issue) = self.pivot(q, r, w, &rq) {
                        return FpStatus::NumericalFailure(issue);
                    }
                    // a basis seen before under the same costs means the
                    // objective did not really improve
                    if !self.visited.insert(self.basis_hash(&phase1_costs)) {
                        if bland {
                            return FpStatus::NumericalFailure(NumericalIssue::Cycling);
                        }
                        self.forced_bland = true;
                        self.visited.clear();
                    }
                }
            }
        }
    }

    /// Backward error check of `B w = a_q` against the update tolerance.
    fn update_is_accurate(&self, w: &[T], aq: &[(usize, T)]) -> bool {
        let mut residual = vec![self.zero.clone(); self.m];
        let mut col_norm = self.zero.clone();
        for (i, v) in aq {
            residual[*i] = v.neg();
        }
        for (pos, &j) in self.head.iter().enumerate() {
            let col = self.column(j);
            for (_, v) in &col {
                let a = v.abs();
                if a > col_norm {
                    col_norm = a;
                }
            }
            if w[pos].is_zero() {
                continue;
            }
            for (i, v) in col {
                residual[i] = residual[i].add(&v.mul(&w[pos]));
            }
        }
        let max_of = |v: &[T]| v.iter().map(Scalar::abs).fold(self.zero.clone(), |a, b| if b > a { b } else { a });
        let aq_norm = aq.iter().map(|(_, v)| v.abs()).fold(self.zero.clone(), |a, b| if b > a { b } else { a });
        let scale = aq_norm.add(&col_norm.mul(&max_of(w)));
        max_of(&residual) <= self.update_eps.mul(&scale)
    }

    /// Harris two-pass ratio test, or textbook minimum ratio with smallest
    /// index tie-break under Bland's rule.
    fn ratio_test(&self, w: &[T], bland: bool) -> Blocking {
        // (pos, exact ratio, relaxed ratio, |w|)
        let mut candidates: Vec<(usize, T, T, T)> = Vec::new();
        for (pos, wi) in w.iter().enumerate() {
            let mag = wi.abs();
            if mag <= self.pivot_eps {
                continue;
            }
            let j = self.head[pos];
            let v = &self.x[j];
            let decreasing = wi.is_positive();
            let (gap, relaxed) = if j < self.n {
                let l = &self.lp.lower[j];
                let below = l.sub(v) > self.feas;
                match (below, decreasing) {
                    // infeasible and rising: blocks when it reaches its bound
                    (true, false) => (l.sub(v), l.sub(v).add(&self.feas)),
                    (false, true) => {
                        let slack = v.sub(l);
                        let slack = if slack.is_negative() { self.zero.clone() } else { slack };
                        (slack.clone(), slack.add(&self.feas))
                    }
                    _ => continue,
                }
            } else {
                let toward_zero = (v.is_positive() && decreasing) || (v.is_negative() && !decreasing);
                let off = v.abs() > self.feas;
                if off && !toward_zero {
                    continue;
                }
                if toward_zero {
                    (v.abs(), v.abs().add(&self.feas))
                } else {
                    (self.zero.clone(), self.feas.clone())
                }
            };
            candidates.push((pos, gap.div(&mag), relaxed.div(&mag), mag));
        }
        if candidates.is_empty() {
            return Blocking::None;
        }
        if bland {
            let min = candidates.iter().map(|c| c.1.clone()).reduce(|a, b| if b < a { b } else { a }).unwrap();
            let pos = candidates
                .iter()
                .filter(|c| c.1 <= min)
                .min_by_key(|c| self.head[c.0])
                .map(|c| c.0)
                .unwrap();
            return Blocking::Row(pos);
        }
        let bound = candidates.iter().map(|c| c.2.clone()).reduce(|a, b| if b < a { b } else { a }).unwrap();
        let mut best: Option<&(usize, T, T, T)> = None;
        for c in candidates.iter().filter(|c| c.1 <= bound) {
            if best.is_none_or(|b| c.3 > b.3) {
                best = Some(c);
            }
        }
        Blocking::Row(best.expect("minimum ratio row qualifies").0)
    }

    /// `rq` is the reduced cost of the entering column; a pivot counts as
    /// non-improving when `step * |rq|` is within the feasibility tolerance.
    fn pivot(&mut self, q: usize, r: usize, w: Vec<T>, rq: &T) -> Result<(), NumericalIssue> {
        let leaving = self.head[r];
        let target = self.nonbasic_value(leaving);
        let step = self.x[leaving].sub(&target).div(&w[r]);
        let step = if step.is_negative() { self.zero.clone() } else { step };
        for (pos, wi) in w.iter().enumerate() {
            if !wi.is_zero() {
                let j = self.head[pos];
                self.x[j] = self.x[j].sub(&step.mul(wi));
            }
        }
        self.x[q] = self.x[q].add(&step);
        self.x[leaving] = target;
        self.head[r] = q;
        self.position[q] = Some(r);
        self.position[leaving] = None;
        self.iterations += 1;
        self.fresh = false;
        if self.opts.record_trace {
            self.trace.push((q, leaving));
        }
        if step.mul(&rq.abs()) <= self.feas {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        if snapshot_policy(self.iterations, self.last_snapshot) {
            self.last_snapshot = self.iterations;
            self.snapshots.push((self.iterations, Basis { num_cols: self.n, basic: self.head.clone() }));
        }

        let factor = self.factor.as_mut().expect("basis factorized");
        factor.push_eta(r, w);
        if factor.eta_count() >= REFACTOR_INTERVAL {
            self.refactor().map_err(|_| NumericalIssue::SingularBasis)?;
        }
        Ok(())
    }
}

use crate::scalar::Scalar;
