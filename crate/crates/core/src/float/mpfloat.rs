//! Binary floating point with a runtime mantissa width and round-to-nearest-even.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;
use crate::scalar::Scalar;

/// `mantissa * 2^exponent` with `|mantissa| < 2^precision`.
///
/// Every operation rounds its exact result to nearest (ties to even) at the
/// larger of the operand precisions.
#[derive(Clone)]
pub struct MpFloat {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

fn bit_len(m: &BigInt) -> i64 {
    m.bits() as i64
}

impl MpFloat {
    pub fn zero(precision: u32) -> Self {
        assert!(precision >= 2, "precision must be at least 2 bits");
        MpFloat { mantissa: BigInt::zero(), exponent: 0, precision }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Rounds `mantissa * 2^exponent` to `precision` bits.
    pub fn from_parts(mantissa: BigInt, exponent: i64, precision: u32) -> Self {
        Self::round(mantissa, exponent, precision, false)
    }

    /// `sticky` marks a nonzero tail strictly below the least significant bit
    /// of `mantissa`; it only breaks ties.
    fn round(mantissa: BigInt, exponent: i64, precision: u32, sticky: bool) -> Self {
        if mantissa.is_zero() {
            return MpFloat::zero(precision);
        }
        let (sign, mag) = mantissa.into_parts();
        let bits = mag.bits();
        if bits <= precision as u64 {
            debug_assert!(!sticky, "sticky bit requires excess precision");
            return MpFloat { mantissa: BigInt::from_biguint(sign, mag), exponent, precision };
        }
        let shift = bits - precision as u64;
        let mut kept: BigUint = &mag >> shift;
        let half = BigUint::one() << (shift - 1);
        let rem: BigUint = &mag - (&kept << shift);
        let round_up = match rem.cmp(&half) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => sticky || kept.is_odd(),
        };
        let mut exponent = exponent + shift as i64;
        if round_up {
            kept += 1u32;
            if kept.bits() > precision as u64 {
                kept >>= 1;
                exponent += 1;
            }
        }
        MpFloat { mantissa: BigInt::from_biguint(sign, kept), exponent, precision }
    }

    pub fn from_rational(q: &Rational, precision: u32) -> Self {
        if Zero::is_zero(q) {
            return MpFloat::zero(precision);
        }
        Self::quotient(q.numer(), 0, q.denom(), 0, precision)
    }

    /// Correctly rounded `(a 2^ea) / (b 2^eb)`.
    fn quotient(a: &BigInt, ea: i64, b: &BigInt, eb: i64, precision: u32) -> Self {
        let shift = (precision as i64 + 2 + bit_len(b) - bit_len(a)).max(0);
        let num: BigInt = a << shift as usize;
        let (q, r) = num.div_rem(b);
        let sticky = !r.is_zero();
        let mut q: BigInt = q << 1usize;
        if sticky {
            // q and r share the sign of the dividend
            q += if a.is_negative() != b.is_negative() { -1 } else { 1 };
        }
        Self::round(q, ea - eb - shift - 1, precision, false)
    }

    pub fn from_f64(v: f64, precision: u32) -> Self {
        assert!(v.is_finite(), "cannot convert non-finite {v}");
        if v == 0.0 {
            return MpFloat::zero(precision);
        }
        let (mantissa, exponent) = decode_f64(v);
        Self::round(BigInt::from(mantissa), exponent, precision, false)
    }

    pub fn to_rational(&self) -> Rational {
        if self.exponent >= 0 {
            Rational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            Rational::new(self.mantissa.clone(), BigInt::one() << (-self.exponent) as usize)
        }
    }

    /// Nearest double. Values beyond the double range saturate to infinity
    /// and the subnormal range is rounded twice.
    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let r = Self::round(self.mantissa.clone(), self.exponent, 53, false);
        let m = r.mantissa.to_f64().expect("53-bit mantissa fits");
        ldexp(m, r.exponent)
    }

    /// Exponent of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    fn top(&self) -> i64 {
        bit_len(&self.mantissa) + self.exponent
    }

    pub fn signum_i32(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    fn with_precision(&self, precision: u32) -> Self {
        Self::round(self.mantissa.clone(), self.exponent, precision, false)
    }

    fn sum(&self, rhs: &MpFloat, negate_rhs: bool) -> MpFloat {
        let precision = self.precision.max(rhs.precision);
        let rhs_m = if negate_rhs { -&rhs.mantissa } else { rhs.mantissa.clone() };
        if rhs_m.is_zero() {
            return self.with_precision(precision);
        }
        if self.mantissa.is_zero() {
            return Self::round(rhs_m, rhs.exponent, precision, false);
        }
        let p = precision as i64;
        // an addend below a quarter ulp of the other cannot change the rounded sum
        if rhs.top() <= self.top() - p - 2 {
            return self.with_precision(precision);
        }
        if self.top() <= rhs.top() - p - 2 {
            return Self::round(rhs_m, rhs.exponent, precision, false);
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = rhs_m << (rhs.exponent - e) as usize;
        Self::round(a + b, e, precision, false)
    }

    fn cmp_value(&self, rhs: &MpFloat) -> Ordering {
        let (sa, sb) = (self.signum_i32(), rhs.signum_i32());
        if sa != sb || sa == 0 {
            return sa.cmp(&sb);
        }
        let magnitude = match self.top().cmp(&rhs.top()) {
            Ordering::Equal => {
                let e = self.exponent.min(rhs.exponent);
                let a = self.mantissa.magnitude() << (self.exponent - e) as usize;
                let b = rhs.mantissa.magnitude() << (rhs.exponent - e) as usize;
                a.cmp(&b)
            }
            other => other,
        };
        if sa > 0 {
            magnitude
        } else {
            magnitude.reverse()
        }
    }
}

/// Splits a finite nonzero double into an odd-or-normal integer mantissa and
/// a binary exponent.
fn decode_f64(v: f64) -> (i64, i64) {
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mantissa, exponent) = if exp_field == 0 { (frac, -1074) } else { (frac | (1 << 52), exp_field - 1075) };
    (sign * mantissa, exponent)
}

/// `m * 2^e` without intermediate overflow.
fn ldexp(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

/// Exact rational value of a finite double.
pub fn f64_to_rational(v: f64) -> Rational {
    assert!(v.is_finite(), "cannot convert non-finite {v}");
    if v == 0.0 {
        return Rational::zero();
    }
    let (m, e) = decode_f64(v);
    MpFloat { mantissa: BigInt::from(m), exponent: e, precision: 64 }.to_rational()
}

/// Nearest double to `q` (ties to even).
pub fn rational_to_f64(q: &Rational) -> f64 {
    MpFloat::from_rational(q, 53).to_f64()
}

impl PartialEq for MpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}[{}b]", self.to_f64(), self.precision)
    }
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Scalar for MpFloat {
    fn zero_like(&self) -> Self {
        MpFloat::zero(self.precision)
    }
    fn one_like(&self) -> Self {
        MpFloat { mantissa: BigInt::one(), exponent: 0, precision: self.precision }
    }
    fn add(&self, rhs: &Self) -> Self {
        self.sum(rhs, false)
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.sum(rhs, true)
    }
    fn mul(&self, rhs: &Self) -> Self {
        let precision = self.precision.max(rhs.precision);
        Self::round(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent, precision, false)
    }
    fn div(&self, rhs: &Self) -> Self {
        assert!(!rhs.mantissa.is_zero(), "MpFloat division by zero");
        let precision = self.precision.max(rhs.precision);
        if self.mantissa.is_zero() {
            return MpFloat::zero(precision);
        }
        Self::quotient(&self.mantissa, self.exponent, &rhs.mantissa, rhs.exponent, precision)
    }
    fn neg(&self) -> Self {
        MpFloat { mantissa: -&self.mantissa, exponent: self.exponent, precision: self.precision }
    }
    fn abs(&self) -> Self {
        MpFloat { mantissa: self.mantissa.abs(), exponent: self.exponent, precision: self.precision }
    }
    fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }
}
