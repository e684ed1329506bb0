//! LPs with inequality and ranged rows, two-sided and free variables, and
//! either objective sense, and their conversion to standard form.

use num_traits::{One, Signed, Zero};

use crate::boost::{solve_exact, ExactResult, SolveConfig};
use crate::error::LpError;
use crate::rational::{Rational, RationalLp, SparseRationalMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `a^T x = rhs`
    Eq,
    /// `a^T x <= rhs`
    Le,
    /// `a^T x >= rhs`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub rhs: Rational,
    /// MPS range: a `Le` row becomes `rhs - |r| <= a^T x <= rhs`, a `Ge`
    /// row `rhs <= a^T x <= rhs + |r|`.
    pub range: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub cost: Rational,
    /// `None` is minus infinity.
    pub lower: Option<Rational>,
    /// `None` is plus infinity.
    pub upper: Option<Rational>,
    /// `(row, coefficient)`, rows strictly increasing.
    pub entries: Vec<(usize, Rational)>,
}

impl Column {
    pub fn new(name: impl Into<String>, cost: Rational) -> Self {
        Column { name: name.into(), cost, lower: Some(Rational::zero()), upper: None, entries: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralLp {
    pub name: String,
    pub sense: Sense,
    pub objective_name: String,
    /// Added to `c^T x`.
    pub objective_constant: Rational,
    pub rows: Vec<Row>,
    pub columns: Vec<Column>,
}

impl GeneralLp {
    pub fn new(name: impl Into<String>) -> Self {
        GeneralLp {
            name: name.into(),
            sense: Sense::Minimize,
            objective_name: "obj".into(),
            objective_constant: Rational::zero(),
            rows: Vec::new(),
            columns: Vec::new(),
        }
    }

    /// Wraps a standard-form LP, naming rows `R1..` and columns `X1..`.
    pub fn from_standard(name: impl Into<String>, lp: &RationalLp) -> Self {
        let mut out = GeneralLp::new(name);
        out.rows = lp
            .b
            .iter()
            .enumerate()
            .map(|(i, b)| Row { name: format!("R{}", i + 1), kind: RowKind::Eq, rhs: b.clone(), range: None })
            .collect();
        out.columns = (0..lp.ncols())
            .map(|j| Column {
                name: format!("X{}", j + 1),
                cost: lp.c[j].clone(),
                lower: Some(lp.lower[j].clone()),
                upper: None,
                entries: lp.a.column(j).to_vec(),
            })
            .collect();
        out
    }

    /// Objective value of `x` in the original space.
    pub fn objective(&self, x: &[Rational]) -> Rational {
        self.columns.iter().zip(x).map(|(c, v)| &c.cost * v).sum::<Rational>() + &self.objective_constant
    }

    /// Checks rows, bounds and dimensions exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.columns.len() {
            return false;
        }
        let mut activity = vec![Rational::zero(); self.rows.len()];
        for (col, v) in self.columns.iter().zip(x) {
            if col.lower.as_ref().is_some_and(|l| v < l) || col.upper.as_ref().is_some_and(|u| v > u) {
                return false;
            }
            for (i, a) in &col.entries {
                activity[*i] += a * v;
            }
        }
        self.rows.iter().zip(&activity).all(|(row, act)| {
            let (lo, hi) = row_interval(row);
            lo.is_none_or(|l| *act >= l) && hi.is_none_or(|h| *act <= h)
        })
    }

    /// Every row an equality, every variable bounded below only.
    fn is_standard(&self) -> bool {
        self.sense == Sense::Minimize
            && self.objective_constant.is_zero()
            && self.rows.iter().all(|r| r.kind == RowKind::Eq && r.range.is_none())
            && self.columns.iter().all(|c| c.lower.is_some() && c.upper.is_none())
    }
}

fn row_interval(row: &Row) -> (Option<Rational>, Option<Rational>) {
    let r = row.range.as_ref().map(|r| r.abs());
    match row.kind {
        RowKind::Eq => (Some(row.rhs.clone()), Some(row.rhs.clone())),
        RowKind::Le => (r.map(|r| &row.rhs - r), Some(row.rhs.clone())),
        RowKind::Ge => (Some(row.rhs.clone()), r.map(|r| &row.rhs + r)),
    }
}

/// How an original variable is expressed in standard-form variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarImage {
    /// `x = z[i]`
    Direct(usize),
    /// `x = -z[i]`
    Negated(usize),
    /// `x = z[pos] - z[neg]`
    Split { pos: usize, neg: usize },
}

/// Maps standard-form solutions back to the original variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableMap {
    pub images: Vec<VarImage>,
    pub sense: Sense,
    pub objective_constant: Rational,
    pub num_standard: usize,
    /// Rows of the original LP; they come first in the standard form.
    pub num_rows: usize,
}

impl VariableMap {
    pub fn identity(n: usize, m: usize) -> Self {
        VariableMap {
            images: (0..n).map(VarImage::Direct).collect(),
            sense: Sense::Minimize,
            objective_constant: Rational::zero(),
            num_standard: n,
            num_rows: m,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sense == Sense::Minimize
            && self.objective_constant.is_zero()
            && self.images.len() == self.num_standard
            && self.images.iter().enumerate().all(|(j, im)| *im == VarImage::Direct(j))
    }

    pub fn recover(&self, z: &[Rational]) -> Vec<Rational> {
        self.images
            .iter()
            .map(|im| match im {
                VarImage::Direct(i) => z[*i].clone(),
                VarImage::Negated(i) => -&z[*i],
                VarImage::Split { pos, neg } => &z[*pos] - &z[*neg],
            })
            .collect()
    }

    /// Duals of the original rows, signed for the original objective sense.
    pub fn recover_duals(&self, y: &[Rational]) -> Vec<Rational> {
        y[..self.num_rows]
            .iter()
            .map(|v| match self.sense {
                Sense::Minimize => v.clone(),
                Sense::Maximize => -v,
            })
            .collect()
    }

    /// Original objective from the standard-form objective value.
    pub fn objective(&self, standard: &Rational) -> Rational {
        match self.sense {
            Sense::Minimize => standard + &self.objective_constant,
            Sense::Maximize => -standard + &self.objective_constant,
        }
    }
}

#[derive(Default)]
struct Columns {
    entries: Vec<Vec<(usize, Rational)>>,
    cost: Vec<Rational>,
    lower: Vec<Rational>,
}

impl Columns {
    fn push(&mut self, entries: Vec<(usize, Rational)>, cost: Rational, lower: Rational) -> usize {
        self.entries.push(entries);
        self.cost.push(cost);
        self.lower.push(lower);
        self.entries.len() - 1
    }
}

/// Rewrites `lp` as `min { c^T z | A z = b, z >= l }`.
///
/// Column order: one column per original variable (the positive part for
/// free ones), then negative parts of free variables, row slacks, slacks
/// closing ranges, and slacks of upper bounds. Row order: original rows,
/// then range rows, then upper-bound rows.
pub fn to_standard_form(lp: &GeneralLp) -> Result<(RationalLp, VariableMap), LpError> {
    for row in &lp.rows {
        if row.kind == RowKind::Eq && row.range.is_some() {
            return Err(LpError::Format(format!("row `{}` is both an equality and ranged", row.name)));
        }
    }
    for col in &lp.columns {
        if let Some((i, _)) = col.entries.iter().find(|(i, _)| *i >= lp.rows.len()) {
            return Err(LpError::Dimension(format!("column `{}` references row {i}", col.name)));
        }
        if let (Some(l), Some(u)) = (&col.lower, &col.upper) {
            if l > u {
                return Err(LpError::Format(format!("column `{}` has lower bound above upper bound", col.name)));
            }
        }
    }
    if lp.is_standard() {
        let n = lp.columns.len();
        let columns = lp.columns.iter().map(|c| c.entries.clone()).collect();
        let a = SparseRationalMatrix::from_columns(lp.rows.len(), columns)?;
        let std = RationalLp::new(
            a,
            lp.rows.iter().map(|r| r.rhs.clone()).collect(),
            lp.columns.iter().map(|c| c.cost.clone()).collect(),
            lp.columns.iter().map(|c| c.lower.clone().expect("finite lower bound")).collect(),
        )?;
        return Ok((std, VariableMap::identity(n, lp.rows.len())));
    }

    let sign = match lp.sense {
        Sense::Minimize => Rational::one(),
        Sense::Maximize => -Rational::one(),
    };
    let mut b: Vec<Rational> = lp.rows.iter().map(|r| r.rhs.clone()).collect();
    let mut cols = Columns::default();

    let mut images = Vec::with_capacity(lp.columns.len());
    let mut free = Vec::new();
    // upper bounds still to be imposed: (standard column, bound)
    let mut uppers: Vec<(usize, Rational)> = Vec::new();
    for (j, col) in lp.columns.iter().enumerate() {
        let cost = &sign * &col.cost;
        match (&col.lower, &col.upper) {
            (Some(l), upper) => {
                let z = cols.push(col.entries.clone(), cost, l.clone());
                if let Some(u) = upper {
                    uppers.push((z, u.clone()));
                }
                images.push(VarImage::Direct(z));
            }
            (None, Some(u)) => {
                let negated = col.entries.iter().map(|(i, a)| (*i, -a)).collect();
                let z = cols.push(negated, -cost, -u);
                images.push(VarImage::Negated(z));
            }
            (None, None) => {
                let z = cols.push(col.entries.clone(), cost, Rational::zero());
                images.push(VarImage::Split { pos: z, neg: usize::MAX });
                free.push(j);
            }
        }
    }
    for j in free {
        let col = &lp.columns[j];
        let negated = col.entries.iter().map(|(i, a)| (*i, -a)).collect();
        let z = cols.push(negated, -(&sign * &col.cost), Rational::zero());
        if let VarImage::Split { neg, .. } = &mut images[j] {
            *neg = z;
        }
    }

    let mut extra_rows = 0;
    let m = lp.rows.len();
    for (i, row) in lp.rows.iter().enumerate() {
        let range = row.range.as_ref().map(|r| r.abs());
        match (row.kind, range) {
            (RowKind::Eq, _) => {}
            (RowKind::Le, None) => {
                cols.push(vec![(i, Rational::one())], Rational::zero(), Rational::zero());
            }
            (RowKind::Ge, None) => {
                cols.push(vec![(i, -Rational::one())], Rational::zero(), Rational::zero());
            }
            (kind, Some(r)) => {
                // lo <= a^T x <= lo + r as a^T x - s = lo, s + t = r
                if kind == RowKind::Le {
                    b[i] = &row.rhs - &r;
                }
                let row_index = m + extra_rows;
                cols.push(vec![(i, -Rational::one()), (row_index, Rational::one())], Rational::zero(), Rational::zero());
                cols.push(vec![(row_index, Rational::one())], Rational::zero(), Rational::zero());
                extra_rows += 1;
                b.push(r);
            }
        }
    }
    for (z, u) in uppers {
        let row_index = m + extra_rows;
        cols.entries[z].push((row_index, Rational::one()));
        cols.push(vec![(row_index, Rational::one())], Rational::zero(), Rational::zero());
        extra_rows += 1;
        b.push(u);
    }

    let n_std = cols.entries.len();
    let a = SparseRationalMatrix::from_columns(m + extra_rows, cols.entries)?;
    let std = RationalLp::new(a, b, cols.cost, cols.lower)?;
    let map = VariableMap { images, sense: lp.sense, objective_constant: lp.objective_constant.clone(), num_standard: n_std, num_rows: m };
    Ok((std, map))
}

/// Converts `lp` to standard form and solves it exactly.
pub fn solve_general(lp: &GeneralLp, config: &SolveConfig) -> Result<(ExactResult, VariableMap), LpError> {
    let (std, map) = to_standard_form(lp)?;
    Ok((solve_exact(&std, config), map))
}
