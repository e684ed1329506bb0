//! Precision-parametric floating point: the precision ladder, tolerance
//! schedule, and rounding of exact LPs to a working precision.

mod mpfloat;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use mpfloat::{f64_to_rational, rational_to_f64, MpFloat};

use crate::error::PrecisionLimitReached;
use crate::rational::{Rational, RationalLp};
use crate::scalar::Scalar;

/// Hard ceiling on the mantissa width.
pub const MAX_PRECISION_BITS: u32 = 1000;

/// Mantissa width in bits. 64 stands for hardware double precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Precision(u32);

impl Precision {
    pub const DOUBLE: Precision = Precision(64);

    /// Accepts 64 and the widths `round(192 * 1.5^k) <= 1000`.
    pub fn new(bits: u32) -> Result<Self, String> {
        if Self::ladder().any(|p| p.0 == bits) {
            Ok(Precision(bits))
        } else {
            Err(format!("{bits} bits is not on the precision ladder"))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_double(self) -> bool {
        self.0 == 64
    }

    /// Mantissa bits actually carried by values at this precision.
    pub fn mantissa_bits(self) -> u32 {
        if self.is_double() {
            53
        } else {
            self.0
        }
    }

    /// `p' = p log10(2)`, the precision in decimal digits.
    pub fn decimal_digits(self) -> f64 {
        decimal_digits(self.0)
    }

    /// All valid precisions in increasing order.
    pub fn ladder() -> impl Iterator<Item = Precision> {
        std::iter::successors(Some(Precision(64)), |p| boost_step(p.0).map(Precision))
    }
}

impl TryFrom<u32> for Precision {
    type Error = String;
    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        Precision::new(bits)
    }
}

impl From<Precision> for u32 {
    fn from(p: Precision) -> u32 {
        p.0
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

fn decimal_digits(bits: u32) -> f64 {
    bits as f64 * std::f64::consts::LOG10_2
}

fn boost_step(bits: u32) -> Option<u32> {
    let next = if bits == 64 { 192 } else { (bits * 3).div_ceil(2) };
    (next <= MAX_PRECISION_BITS).then_some(next)
}

/// Next rung of the ladder 64, 192, 288, 432, 648, 972.
pub fn boost_precision(p: Precision) -> Result<Precision, PrecisionLimitReached> {
    boost_step(p.0).map(Precision).ok_or(PrecisionLimitReached { limit: MAX_PRECISION_BITS })
}

/// Scale constants `c` in `10^-floor(p' c)`.
pub const ZERO_EPS_SCALE: f64 = 1.0;
pub const PIVOT_EPS_SCALE: f64 = 0.625;
pub const UPDATE_EPS_SCALE: f64 = 0.8;

/// Default primal/dual feasibility tolerance in double precision.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-9;

/// How feasibility and optimality tolerances follow the precision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ToleranceMode {
    /// Held at the given double-precision values at every precision.
    Fixed { feas: f64, opt: f64 },
    /// A double-precision value `2^a` becomes `2^(a p / 64)` at `p` bits.
    Scaled { feas: f64, opt: f64 },
}

impl Default for ToleranceMode {
    fn default() -> Self {
        ToleranceMode::Fixed { feas: DEFAULT_FEASIBILITY_TOL, opt: DEFAULT_FEASIBILITY_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    /// Magnitudes below this are treated as zero in general computation.
    pub zero_eps: f64,
    /// Candidate pivots below this are rejected.
    pub pivot_eps: f64,
    /// Allowed backward error of the updated basis factorization.
    pub update_eps: f64,
    pub feas_tol: f64,
    pub opt_tol: f64,
}

/// `floor(p' c)` for the tolerance `10^-floor(p' c)`.
pub fn tolerance_exponent(p: Precision, scale: f64) -> i32 {
    (p.decimal_digits() * scale).floor() as i32
}

fn power_of_ten(exponent: i32) -> f64 {
    // parse for a correctly rounded value
    format!("1e{}", -exponent).parse().expect("valid literal")
}

/// Scales a double-precision tolerance to `bits` of mantissa: `2^a -> 2^(a bits/64)`.
pub fn scale_tolerance(double_value: f64, bits: u32) -> f64 {
    double_value.powf(bits as f64 / 64.0)
}

pub fn tolerance_set(p: Precision, mode: ToleranceMode) -> ToleranceSet {
    let (feas_tol, opt_tol) = match mode {
        ToleranceMode::Fixed { feas, opt } => (feas, opt),
        ToleranceMode::Scaled { feas, opt } => (scale_tolerance(feas, p.bits()), scale_tolerance(opt, p.bits())),
    };
    ToleranceSet {
        zero_eps: power_of_ten(tolerance_exponent(p, ZERO_EPS_SCALE)),
        pivot_eps: power_of_ten(tolerance_exponent(p, PIVOT_EPS_SCALE)),
        update_eps: power_of_ten(tolerance_exponent(p, UPDATE_EPS_SCALE)),
        feas_tol,
        opt_tol,
    }
}

/// A scalar type usable by the floating-point simplex.
pub trait Real: Scalar + 'static {
    fn zero(p: Precision) -> Self;
    fn from_rational(q: &Rational, p: Precision) -> Self;
    fn from_f64(v: f64, p: Precision) -> Self;
    /// Exact value.
    fn to_rational(&self) -> Rational;
    fn to_f64(&self) -> f64;
}

impl Real for f64 {
    fn zero(_: Precision) -> Self {
        0.0
    }
    fn from_rational(q: &Rational, _: Precision) -> Self {
        rational_to_f64(q)
    }
    fn from_f64(v: f64, _: Precision) -> Self {
        v
    }
    fn to_rational(&self) -> Rational {
        f64_to_rational(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for MpFloat {
    fn zero(p: Precision) -> Self {
        MpFloat::zero(p.mantissa_bits())
    }
    fn from_rational(q: &Rational, p: Precision) -> Self {
        MpFloat::from_rational(q, p.mantissa_bits())
    }
    fn from_f64(v: f64, p: Precision) -> Self {
        MpFloat::from_f64(v, p.mantissa_bits())
    }
    fn to_rational(&self) -> Rational {
        MpFloat::to_rational(self)
    }
    fn to_f64(&self) -> f64 {
        MpFloat::to_f64(self)
    }
}

/// Column-major sparse matrix at working precision.
#[derive(Clone, Debug)]
pub struct FloatMatrix<T> {
    pub nrows: usize,
    pub columns: Vec<Vec<(usize, T)>>,
}

impl<T: Real> FloatMatrix<T> {
    pub fn round(lp: &RationalLp, p: Precision) -> Self {
        let columns = lp
            .a
            .columns()
            .iter()
            .map(|col| col.iter().map(|(i, v)| (*i, T::from_rational(v, p))).collect())
            .collect();
        FloatMatrix { nrows: lp.nrows(), columns }
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }
}

/// Nearest-rounded image of a [`RationalLp`] at some precision.
#[derive(Clone, Debug)]
pub struct FloatLp<T> {
    pub a: Arc<FloatMatrix<T>>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub lower: Vec<T>,
    pub precision: Precision,
    pub tolerances: ToleranceSet,
}

impl<T: Real> FloatLp<T> {
    pub fn nrows(&self) -> usize {
        self.a.nrows
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }
}

pub fn round_vec<T: Real>(v: &[Rational], p: Precision) -> Vec<T> {
    v.iter().map(|q| T::from_rational(q, p)).collect()
}

/// Rounds every coefficient of `lp` to nearest at `p`.
pub fn round_lp<T: Real>(lp: &RationalLp, p: Precision, mode: ToleranceMode) -> FloatLp<T> {
    FloatLp {
        a: Arc::new(FloatMatrix::round(lp, p)),
        b: round_vec(&lp.b, p),
        c: round_vec(&lp.c, p),
        lower: round_vec(&lp.lower, p),
        precision: p,
        tolerances: tolerance_set(p, mode),
    }
}
