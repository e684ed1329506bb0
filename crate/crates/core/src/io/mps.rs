//! MPS reader and writer. Fields are whitespace separated, which covers free
//! MPS and fixed MPS files whose names contain no spaces. Numbers are parsed
//! exactly.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{MpsError, MpsErrorKind};
use crate::general::{Column, GeneralLp, Row, RowKind, Sense};
use crate::rational::{format_rational_decimal, parse_rational, Rational};

/// Bound magnitudes at or above `10^INFINITY_DIGITS` mean infinity.
pub const INFINITY_DIGITS: usize = 30;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum RowRef {
    Objective,
    /// free rows after the first
    Ignored,
    Constraint(usize),
}

struct Parser {
    lp: GeneralLp,
    row_index: HashMap<String, RowRef>,
    col_index: HashMap<String, usize>,
    objective: Option<String>,
    seen: HashSet<(usize, RowRef)>,
    line: usize,
}

impl Parser {
    fn err(&self, kind: MpsErrorKind) -> MpsError {
        MpsError { line: self.line, kind }
    }

    fn number(&self, token: &str) -> Result<Rational, MpsError> {
        parse_rational(token).map_err(|e| self.err(e.into()))
    }

    fn row(&self, name: &str) -> Result<RowRef, MpsError> {
        self.row_index.get(name).copied().ok_or_else(|| self.err(MpsErrorKind::UnknownRow(name.into())))
    }

    fn column(&self, name: &str) -> Result<usize, MpsError> {
        self.col_index.get(name).copied().ok_or_else(|| self.err(MpsErrorKind::UnknownColumn(name.into())))
    }

    fn rows_line(&mut self, fields: &[&str]) -> Result<(), MpsError> {
        let [kind, name] = fields else {
            return Err(self.err(MpsErrorKind::FieldCount));
        };
        if self.row_index.contains_key(*name) {
            return Err(self.err(MpsErrorKind::DuplicateRow(name.to_string())));
        }
        let kind = match kind.to_ascii_uppercase().as_str() {
            "N" => {
                let role = if self.objective.is_none() {
                    self.objective = Some(name.to_string());
                    self.lp.objective_name = name.to_string();
                    RowRef::Objective
                } else {
                    RowRef::Ignored
                };
                self.row_index.insert(name.to_string(), role);
                return Ok(());
            }
            "E" => RowKind::Eq,
            "L" => RowKind::Le,
            "G" => RowKind::Ge,
            other => return Err(self.err(MpsErrorKind::BadRowType(other.into()))),
        };
        self.row_index.insert(name.to_string(), RowRef::Constraint(self.lp.rows.len()));
        self.lp.rows.push(Row { name: name.to_string(), kind, rhs: Rational::zero(), range: None });
        Ok(())
    }

    fn columns_line(&mut self, fields: &[&str]) -> Result<(), MpsError> {
        if fields.len() >= 3 && fields[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
            return Ok(());
        }
        if fields.len() != 3 && fields.len() != 5 {
            return Err(self.err(MpsErrorKind::FieldCount));
        }
        let name = fields[0];
        let j = match self.col_index.get(name) {
            Some(&j) => j,
            None => {
                self.col_index.insert(name.to_string(), self.lp.columns.len());
                self.lp.columns.push(Column::new(name, Rational::zero()));
                self.lp.columns.len() - 1
            }
        };
        for pair in fields[1..].chunks(2) {
            let value = self.number(pair[1])?;
            let row = self.row(pair[0])?;
            if !self.seen.insert((j, row)) {
                return Err(self.err(MpsErrorKind::DuplicateEntry { column: name.into(), row: pair[0].into() }));
            }
            match row {
                RowRef::Objective => self.lp.columns[j].cost = value,
                RowRef::Constraint(i) if !value.is_zero() => self.lp.columns[j].entries.push((i, value)),
                _ => {}
            }
        }
        Ok(())
    }

    /// RHS and RANGES lines, with or without the set name.
    fn vector_line(&mut self, fields: &[&str], ranges: bool) -> Result<(), MpsError> {
        let pairs = match fields.len() {
            2 | 4 => fields,
            3 | 5 => &fields[1..],
            _ => return Err(self.err(MpsErrorKind::FieldCount)),
        };
        for pair in pairs.chunks(2) {
            let value = self.number(pair[1])?;
            match (self.row(pair[0])?, ranges) {
                (RowRef::Objective, false) => self.lp.objective_constant = -value,
                (RowRef::Constraint(i), false) => self.lp.rows[i].rhs = value,
                (RowRef::Constraint(i), true) => self.lp.rows[i].range = Some(value),
                _ => {}
            }
        }
        Ok(())
    }

    fn bounds_line(&mut self, fields: &[&str]) -> Result<(), MpsError> {
        let kind = fields.first().map(|k| k.to_ascii_uppercase()).unwrap_or_default();
        let needs_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
        let (col_name, value) = match (fields.len(), needs_value) {
            (4, true) => (fields[2], Some(self.number(fields[3])?)),
            (3, true) => (fields[1], Some(self.number(fields[2])?)),
            (3, false) => (fields[2], None),
            (2, false) => (fields[1], None),
            (4, false) => (fields[2], None),
            _ => return Err(self.err(MpsErrorKind::FieldCount)),
        };
        let j = self.column(col_name)?;
        let limit = Rational::from_integer(num_traits::pow(10.into(), INFINITY_DIGITS));
        let finite = |v: &Rational| v.abs() < limit;
        let col = &mut self.lp.columns[j];
        match kind.as_str() {
            "UP" | "UI" => {
                let v = value.expect("bound value");
                if v.is_negative() && col.lower.as_ref().is_some_and(Zero::is_zero) {
                    col.lower = None;
                }
                col.upper = finite(&v).then_some(v);
            }
            "LO" | "LI" => {
                let v = value.expect("bound value");
                col.lower = finite(&v).then_some(v);
            }
            "FX" => {
                let v = value.expect("bound value");
                col.lower = Some(v.clone());
                col.upper = Some(v);
            }
            "FR" => {
                col.lower = None;
                col.upper = None;
            }
            "MI" => col.lower = None,
            "PL" => col.upper = None,
            "BV" => {
                col.lower = Some(Rational::zero());
                col.upper = Some(Rational::from_integer(1.into()));
            }
            other => return Err(self.err(MpsErrorKind::BadBoundType(other.into()))),
        }
        Ok(())
    }
}

/// Parses an MPS file into a general LP. Integrality markers are ignored.
pub fn parse_mps(text: &str) -> Result<GeneralLp, MpsError> {
    let mut p = Parser {
        lp: GeneralLp::new(""),
        row_index: HashMap::new(),
        col_index: HashMap::new(),
        objective: None,
        seen: HashSet::new(),
        line: 0,
    };
    let mut section: Option<Section> = None;
    for (k, raw) in text.lines().enumerate() {
        p.line = k + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !raw.starts_with([' ', '\t']) {
            let keyword = fields[0].to_ascii_uppercase();
            let next = match keyword.as_str() {
                "NAME" => {
                    p.lp.name = fields.get(1).copied().unwrap_or("").to_string();
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = fields.get(1) {
                        set_sense(&mut p, s)?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "MAX" | "MAXIMIZE" | "MIN" | "MINIMIZE" if section == Some(Section::ObjSense) => {
                    set_sense(&mut p, &keyword)?;
                    continue;
                }
                other => return Err(p.err(MpsErrorKind::UnknownSection(other.into()))),
            };
            section = Some(next);
            if next == Section::End {
                break;
            }
            continue;
        }
        match section {
            None | Some(Section::Name) | Some(Section::End) => return Err(p.err(MpsErrorKind::NoSection)),
            Some(Section::ObjSense) => set_sense(&mut p, fields[0])?,
            Some(Section::Rows) => p.rows_line(&fields)?,
            Some(Section::Columns) => p.columns_line(&fields)?,
            Some(Section::Rhs) => p.vector_line(&fields, false)?,
            Some(Section::Ranges) => p.vector_line(&fields, true)?,
            Some(Section::Bounds) => p.bounds_line(&fields)?,
        }
    }
    for col in &mut p.lp.columns {
        col.entries.sort_by_key(|(i, _)| *i);
    }
    if p.objective.is_none() {
        return Err(MpsError { line: p.line, kind: MpsErrorKind::NoObjective });
    }
    Ok(p.lp)
}

fn set_sense(p: &mut Parser, word: &str) -> Result<(), MpsError> {
    p.lp.sense = match word.to_ascii_uppercase().as_str() {
        "MAX" | "MAXIMIZE" => Sense::Maximize,
        "MIN" | "MINIMIZE" => Sense::Minimize,
        other => return Err(p.err(MpsErrorKind::UnknownSection(other.into()))),
    };
    Ok(())
}

/// Writes free MPS. Non-terminating decimals are written as `num/den`, which
/// [`parse_mps`] reads back exactly.
pub fn write_mps(lp: &GeneralLp) -> String {
    let num = format_rational_decimal;
    let mut out = String::new();
    let name = if lp.name.is_empty() { "LP" } else { &lp.name };
    let _ = writeln!(out, "NAME {name}");
    if lp.sense == Sense::Maximize {
        let _ = writeln!(out, "OBJSENSE\n    MAX");
    }
    let _ = writeln!(out, "ROWS\n N  {}", lp.objective_name);
    for row in &lp.rows {
        let kind = match row.kind {
            RowKind::Eq => "E",
            RowKind::Le => "L",
            RowKind::Ge => "G",
        };
        let _ = writeln!(out, " {kind}  {}", row.name);
    }
    let _ = writeln!(out, "COLUMNS");
    for col in &lp.columns {
        if !col.cost.is_zero() {
            let _ = writeln!(out, "    {}  {}  {}", col.name, lp.objective_name, num(&col.cost));
        }
        for (i, v) in &col.entries {
            let _ = writeln!(out, "    {}  {}  {}", col.name, lp.rows[*i].name, num(v));
        }
        if col.cost.is_zero() && col.entries.is_empty() {
            let _ = writeln!(out, "    {}  {}  0", col.name, lp.objective_name);
        }
    }
    let _ = writeln!(out, "RHS");
    if !lp.objective_constant.is_zero() {
        let _ = writeln!(out, "    RHS  {}  {}", lp.objective_name, num(&-&lp.objective_constant));
    }
    for row in lp.rows.iter().filter(|r| !r.rhs.is_zero()) {
        let _ = writeln!(out, "    RHS  {}  {}", row.name, num(&row.rhs));
    }
    if lp.rows.iter().any(|r| r.range.is_some()) {
        let _ = writeln!(out, "RANGES");
        for row in &lp.rows {
            if let Some(r) = &row.range {
                let _ = writeln!(out, "    RNG  {}  {}", row.name, num(r));
            }
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for col in &lp.columns {
        match (&col.lower, &col.upper) {
            (None, None) => {
                let _ = writeln!(out, " FR BND  {}", col.name);
            }
            (Some(l), Some(u)) if l == u => {
                let _ = writeln!(out, " FX BND  {}  {}", col.name, num(l));
            }
            (lower, upper) => {
                // a negative upper bound resets a zero lower bound, so it goes first
                if let Some(u) = upper {
                    let _ = writeln!(out, " UP BND  {}  {}", col.name, num(u));
                }
                match lower {
                    None => {
                        let _ = writeln!(out, " MI BND  {}", col.name);
                    }
                    Some(l) if !l.is_zero() || upper.as_ref().is_some_and(Signed::is_negative) => {
                        let _ = writeln!(out, " LO BND  {}  {}", col.name, num(l));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}
