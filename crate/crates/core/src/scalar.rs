//! Numeric field abstraction shared by every computation in the crate.
//!
//! Two implementations exist: [`Rational`] (arbitrary precision, exact
//! comparisons) and `f64` (comparisons against an absolute tolerance).
//! Algorithms are generic over [`Scalar`], so the arithmetic mode is fixed
//! for a whole computation by the type parameter.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Default absolute tolerance for float comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arithmetic {
    Exact,
    Float,
}

impl FromStr for Arithmetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Arithmetic::Exact),
            "float" => Ok(Arithmetic::Float),
            other => Err(Error::Parse(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

pub trait Scalar:
    Signed + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const MODE: Arithmetic;

    /// Equality up to `tol`. Exact scalars ignore the tolerance.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// `self > tol` for floats, `self > 0` for exact scalars.
    fn is_pos(&self, tol: f64) -> bool;

    /// `self < -tol` for floats, `self < 0` for exact scalars.
    fn is_neg(&self, tol: f64) -> bool {
        (-self.clone()).is_pos(tol)
    }

    fn is_zero_tol(&self, tol: f64) -> bool {
        !self.is_pos(tol) && !self.is_neg(tol)
    }

    /// Parses a decimal literal (`-1.25`, `3`, `2e-3`) or, for exact scalars,
    /// also a fraction `p/q`. Decimal literals are read exactly in exact mode.
    fn parse_literal(s: &str) -> Result<Self, Error>;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("every i64 is representable")
    }

    /// Text form that [`Scalar::parse_literal`] reads back to the same value.
    fn to_literal(&self) -> String {
        format!("{self}")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const MODE: Arithmetic = Arithmetic::Float;

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn is_pos(&self, tol: f64) -> bool {
        *self > tol
    }

    fn parse_literal(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| bad_literal(s))?;
            let q: f64 = q.trim().parse().map_err(|_| bad_literal(s))?;
            if q == 0.0 {
                return Err(bad_literal(s));
            }
            return Ok(p / q);
        }
        let v: f64 = s.parse().map_err(|_| bad_literal(s))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad_literal(s))
        }
    }
}

impl Scalar for Rational {
    const MODE: Arithmetic = Arithmetic::Exact;

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn is_pos(&self, _tol: f64) -> bool {
        self.is_positive()
    }

    fn is_neg(&self, _tol: f64) -> bool {
        self.is_negative()
    }

    fn parse_literal(s: &str) -> Result<Self, Error> {
        parse_rational(s.trim())
    }

    /// Terminating decimals are written as decimals, everything else as `p/q`.
    fn to_literal(&self) -> String {
        decimal_rendering(self).unwrap_or_else(|| format!("{self}"))
    }
}

fn decimal_rendering(r: &Rational) -> Option<String> {
    let mut denom = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if denom != BigInt::from(1) {
        return None;
    }
    let digits = twos.max(fives);
    let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10), digits));
    debug_assert!(scaled.is_integer());
    let numer = scaled.to_integer();
    if digits == 0 {
        return Some(numer.to_string());
    }
    let negative = numer.is_negative();
    let text = numer.abs().to_string();
    let padded = format!("{text:0>width$}", width = digits + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - digits);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if frac_part.is_empty() {
        Some(format!("{sign}{int_part}"))
    } else {
        Some(format!("{sign}{int_part}.{frac_part}"))
    }
}

fn bad_literal(s: &str) -> Error {
    Error::Parse(format!("invalid number `{s}`"))
}

fn parse_rational(s: &str) -> Result<Rational, Error> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad_literal(s))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad_literal(s))?;
        if q.is_zero() {
            return Err(bad_literal(s));
        }
        return Ok(Rational::new(p, q));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad_literal(s))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad_literal(s));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad_literal(s));
    }

    let numer: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad_literal(s))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Converts between scalar types. Exact targets read the source's shortest
/// decimal rendering, so `0.1f64` becomes exactly `1/10`.
pub fn convert<A: Scalar, B: Scalar>(a: &A) -> B {
    match B::MODE {
        Arithmetic::Float => B::from_f64(a.to_f64_lossy()).expect("finite float"),
        Arithmetic::Exact => {
            let text = format!("{a}");
            B::parse_literal(&text)
                .or_else(|_| B::from_f64(a.to_f64_lossy()).ok_or_else(|| bad_literal(&text)))
                .expect("scalar conversion")
        }
    }
}

/// `p / q` as a scalar.
pub fn ratio<S: Scalar>(p: i64, q: i64) -> S {
    S::from_int(p) / S::from_int(q)
}

pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(iter: I) -> S {
    iter.into_iter().fold(S::zero(), |acc, x| acc + x)
}
