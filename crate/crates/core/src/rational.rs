//! Exact rational scalars, sparse matrices and the standard-form LP model
//! `min { c^T x | A x = b, x >= l }`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LpError, ParseRationalError};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Parses a decimal, scientific (`1.5e-3`) or fractional (`-7/3`) numeral
/// without ever passing through binary floating point.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let token = text.trim();
    let bad = || ParseRationalError::Malformed(token.to_string());
    if token.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = token.split_once('/') {
        let num = parse_signed_integer(num).ok_or_else(bad)?;
        if den.is_empty() || !den.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(token.to_string()));
        }
        return Ok(Rational::new(num, den));
    }

    let (negative, body) = match token.as_bytes()[0] {
        b'+' => (false, &token[1..]),
        b'-' => (true, &token[1..]),
        _ => (false, token),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp = &body[pos + 1..];
            let exp_digits = exp.strip_prefix(['+', '-']).unwrap_or(exp);
            if exp_digits.is_empty() || !exp_digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let exp: i64 = exp.parse().map_err(|_| bad())?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    if negative {
        value = -value;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let result = if scale >= 0 {
        Rational::from_integer(value * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(value, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(result)
}

fn parse_signed_integer(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Formats as `num/den`, or just `num` for integers. Inverse of [`parse_rational`].
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Formats as a finite decimal when the denominator is of the form `2^a 5^b`,
/// falling back to `num/den` otherwise.
pub fn format_rational_decimal(q: &Rational) -> String {
    let mut den = q.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format_rational(q);
    }
    let places = twos.max(fives);
    if places == 0 {
        return q.numer().to_string();
    }
    let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10u32), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if q.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

#[cfg(test)]
pub(crate) fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
pub(crate) fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Column-major sparse matrix with strictly increasing row indices per column
/// and no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseRationalMatrix {
    nrows: usize,
    ncols: usize,
    columns: Vec<Vec<(usize, Rational)>>,
}

impl SparseRationalMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseRationalMatrix { nrows, ncols, columns: vec![Vec::new(); ncols] }
    }

    /// Builds from columns of `(row, value)` pairs in any order. Zeros are
    /// dropped; duplicates and out-of-range rows are rejected.
    pub fn from_columns(nrows: usize, columns: Vec<Vec<(usize, Rational)>>) -> Result<Self, LpError> {
        let ncols = columns.len();
        let mut out = Vec::with_capacity(ncols);
        for (j, mut col) in columns.into_iter().enumerate() {
            col.retain(|(_, v)| !v.is_zero());
            col.sort_by_key(|(i, _)| *i);
            for w in col.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(LpError::Dimension(format!("duplicate entry ({}, {j})", w[0].0)));
                }
            }
            if let Some((i, _)) = col.last() {
                if *i >= nrows {
                    return Err(LpError::Dimension(format!("row index {i} out of range in column {j}")));
                }
            }
            out.push(col);
        }
        Ok(SparseRationalMatrix { nrows, ncols, columns: out })
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let columns = (0..ncols)
            .map(|j| {
                rows.iter()
                    .enumerate()
                    .filter(|(_, r)| !r[j].is_zero())
                    .map(|(i, r)| (i, r[j].clone()))
                    .collect()
            })
            .collect();
        SparseRationalMatrix { nrows, ncols, columns }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn column(&self, j: usize) -> &[(usize, Rational)] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<(usize, Rational)>] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.columns[j]
            .binary_search_by_key(&i, |(r, _)| *r)
            .map(|k| self.columns[j][k].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Row-major copy, materialized on demand.
    pub fn to_rows(&self) -> Vec<Vec<(usize, Rational)>> {
        let mut rows = vec![Vec::new(); self.nrows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                rows[*i].push((j, v.clone()));
            }
        }
        rows
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut dense = vec![vec![Rational::zero(); self.ncols]; self.nrows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                dense[*i][j] = v.clone();
            }
        }
        dense
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.nrows];
        for (j, col) in self.columns.iter().enumerate() {
            if x[j].is_zero() {
                continue;
            }
            for (i, v) in col {
                out[*i] += v * &x[j];
            }
        }
        out
    }

    /// `A^T y`
    pub fn tr_mul_vec(&self, y: &[Rational]) -> Vec<Rational> {
        self.columns
            .iter()
            .map(|col| col.iter().fold(Rational::zero(), |acc, (i, v)| acc + v * &y[*i]))
            .collect()
    }
}

/// Exact standard-form LP `min { c^T x | A x = b, x >= lower }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalLp {
    pub a: SparseRationalMatrix,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    pub lower: Vec<Rational>,
}

impl RationalLp {
    pub fn new(
        a: SparseRationalMatrix,
        b: Vec<Rational>,
        c: Vec<Rational>,
        lower: Vec<Rational>,
    ) -> Result<Self, LpError> {
        if b.len() != a.nrows() {
            return Err(LpError::Dimension(format!("b has length {}, A has {} rows", b.len(), a.nrows())));
        }
        if c.len() != a.ncols() || lower.len() != a.ncols() {
            return Err(LpError::Dimension(format!(
                "c/lower have lengths {}/{}, A has {} columns",
                c.len(),
                lower.len(),
                a.ncols()
            )));
        }
        Ok(RationalLp { a, b, c, lower })
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    pub fn objective(&self, x: &[Rational]) -> Rational {
        dot(&self.c, x)
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (u, v)| acc + u * v)
}

pub fn max_abs(v: &[Rational]) -> Rational {
    v.iter().map(|q| q.abs()).max().unwrap_or_else(Rational::zero)
}

/// A primal-dual pair; `source_precision` is the mantissa width that produced
/// it, 0 for exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimalDualSolution {
    #[serde(with = "serde_rational::vec")]
    pub x: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub y: Vec<Rational>,
    pub source_precision: u32,
}

impl PrimalDualSolution {
    pub fn exact(x: Vec<Rational>, y: Vec<Rational>) -> Self {
        PrimalDualSolution { x, y, source_precision: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residuals {
    /// `b - A x`
    pub b_hat: Vec<Rational>,
    /// `l - x`
    pub l_hat: Vec<Rational>,
    /// `c - A^T y`
    pub c_hat: Vec<Rational>,
    pub delta_p: Rational,
    pub delta_d: Rational,
}

impl Residuals {
    pub fn max_violation(&self) -> Rational {
        self.delta_p.clone().max(self.delta_d.clone())
    }
}

/// Exact residuals of a candidate solution. Only the positive part of
/// `l - x` counts as a primal violation.
pub fn compute_residuals(lp: &RationalLp, sol: &PrimalDualSolution) -> Residuals {
    assert_eq!(sol.x.len(), lp.ncols(), "primal dimension mismatch");
    assert_eq!(sol.y.len(), lp.nrows(), "dual dimension mismatch");
    let ax = lp.a.mul_vec(&sol.x);
    let b_hat: Vec<Rational> = lp.b.iter().zip(&ax).map(|(b, v)| b - v).collect();
    let l_hat: Vec<Rational> = lp.lower.iter().zip(&sol.x).map(|(l, x)| l - x).collect();
    let aty = lp.a.tr_mul_vec(&sol.y);
    let c_hat: Vec<Rational> = lp.c.iter().zip(&aty).map(|(c, v)| c - v).collect();

    let bound_violation = l_hat.iter().filter(|v| v.is_positive()).max().cloned().unwrap_or_else(Rational::zero);
    let delta_p = max_abs(&b_hat).max(bound_violation);
    let delta_d = c_hat
        .iter()
        .filter(|v| v.is_negative())
        .map(|v| -v)
        .max()
        .unwrap_or_else(Rational::zero);
    Residuals { b_hat, l_hat, c_hat, delta_p, delta_d }
}

/// Wrapper giving `Display` as `num/den`.
pub struct Fraction<'a>(pub &'a Rational);

impl fmt::Display for Fraction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts.iter().map(|t| parse_rational(t).map_err(serde::de::Error::custom)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_decimal_and_scientific() {
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("1e-6").unwrap(), rat(1, 1_000_000));
        assert_eq!(parse_rational("-2.375").unwrap(), rat(-19, 8));
        assert_eq!(parse_rational("+12").unwrap(), rat_int(12));
        assert_eq!(parse_rational("2.5E+2").unwrap(), rat_int(250));
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(".25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("3.").unwrap(), rat_int(3));
    }

    #[test]
    fn rejects_malformed_numerals() {
        for bad in ["", "abc", "1.2.3", "1e", "--1", "1/-2", "1/", "/2", "0x10", "1e+"] {
            match parse_rational(bad) {
                Err(ParseRationalError::Malformed(tok)) => assert_eq!(tok, bad.trim()),
                other => panic!("{bad:?} gave {other:?}"),
            }
        }
        assert!(matches!(parse_rational("1/0"), Err(ParseRationalError::ZeroDenominator(_))));
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_rational_decimal(&rat(1, 10)), "0.1");
        assert_eq!(format_rational_decimal(&rat(-19, 8)), "-2.375");
        assert_eq!(format_rational_decimal(&rat(1, 3)), "1/3");
        assert_eq!(format_rational_decimal(&rat_int(-7)), "-7");
    }

    fn single_var_lp() -> RationalLp {
        // min x s.t. x = 1, x >= 0
        let a = SparseRationalMatrix::from_dense(&[vec![rat_int(1)]]);
        RationalLp::new(a, vec![rat_int(1)], vec![rat_int(1)], vec![rat_int(0)]).unwrap()
    }

    #[test]
    fn residuals_at_exact_optimum() {
        let lp = single_var_lp();
        let res = compute_residuals(&lp, &PrimalDualSolution::exact(vec![rat_int(1)], vec![rat_int(1)]));
        assert_eq!(res.b_hat, vec![rat_int(0)]);
        assert_eq!(res.l_hat, vec![rat_int(-1)]);
        assert_eq!(res.c_hat, vec![rat_int(0)]);
        assert!(res.delta_p.is_zero() && res.delta_d.is_zero());
    }

    #[test]
    fn residuals_at_half() {
        let lp = single_var_lp();
        let res = compute_residuals(&lp, &PrimalDualSolution::exact(vec![rat(1, 2)], vec![rat_int(0)]));
        assert_eq!(res.b_hat, vec![rat(1, 2)]);
        assert_eq!(res.delta_p, rat(1, 2));
        assert_eq!(res.c_hat, vec![rat_int(1)]);
        assert!(res.delta_d.is_zero());
    }

    #[test]
    fn residuals_of_zero_lp() {
        let a = SparseRationalMatrix::zeros(0, 1);
        let lp = RationalLp::new(a, vec![], vec![rat_int(0)], vec![rat_int(0)]).unwrap();
        let res = compute_residuals(&lp, &PrimalDualSolution::exact(vec![rat_int(0)], vec![]));
        assert!(res.b_hat.is_empty());
        assert_eq!(res.l_hat, vec![rat_int(0)]);
        assert_eq!(res.c_hat, vec![rat_int(0)]);
        assert!(res.delta_p.is_zero() && res.delta_d.is_zero());
    }

    #[test]
    fn sparse_matrix_rejects_bad_entries() {
        assert!(SparseRationalMatrix::from_columns(2, vec![vec![(2, rat_int(1))]]).is_err());
        assert!(SparseRationalMatrix::from_columns(2, vec![vec![(0, rat_int(1)), (0, rat_int(2))]]).is_err());
        let m = SparseRationalMatrix::from_columns(3, vec![vec![(2, rat_int(1)), (0, rat_int(0)), (1, rat(1, 2))]])
            .unwrap();
        assert_eq!(m.column(0), &[(1, rat(1, 2)), (2, rat_int(1))]);
    }

    proptest! {
        #[test]
        fn parse_inverts_format(n in -10_000i64..10_000, d in 1i64..10_000) {
            let q = rat(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q.clone());
            prop_assert_eq!(parse_rational(&format_rational_decimal(&q)).unwrap(), q);
        }

        #[test]
        fn decimal_parse_is_exact(int in 0u32..100_000, frac in 0u32..1000, exp in -12i32..12) {
            let text = format!("{int}.{frac:03}e{exp}");
            let q = parse_rational(&text).unwrap();
            let base = rat(int as i64 * 1000 + frac as i64, 1000);
            let scale = if exp >= 0 {
                Rational::from_integer(num_traits::pow(BigInt::from(10), exp as usize))
            } else {
                Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-exp) as usize))
            };
            prop_assert_eq!(q, base * scale);
        }
    }
}
