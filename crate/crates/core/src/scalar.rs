//! Numeric backends shared by every module.
//!
//! Two backends exist: arbitrary-precision rationals ([`Rational`]) for
//! decidable sign tests, and `f64` for the EM iteration and quick numeric
//! screening. Generic code is written against [`Scalar`].

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Which arithmetic a value or matrix lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

/// Sign of a scalar after applying a zero band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

/// Result of a banded sign query: the sign plus whether a nonzero value was
/// swallowed by the zero band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandedSign {
    pub sign: Sign,
    pub marginal: bool,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn magnitude(&self) -> Self;

    /// Sign with `|v| <= band` mapped to zero. Exact values ignore the band.
    fn banded_sign(&self, band: f64) -> BandedSign;

    /// Whether `self` should count as zero for elimination purposes.
    /// `tol` is an absolute threshold and is ignored by exact backends.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Text form used by the shared matrix file format.
    fn to_text(&self) -> String;

    fn sign(&self) -> Sign {
        self.banded_sign(0.0).sign
    }

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Exact
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }

    fn banded_sign(&self, _band: f64) -> BandedSign {
        let sign = if self.is_zero() {
            Sign::Zero
        } else if self.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        };
        BandedSign {
            sign,
            marginal: false,
        }
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn to_text(&self) -> String {
        format_rational(self)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn magnitude(&self) -> Self {
        f64::abs(*self)
    }

    fn banded_sign(&self, band: f64) -> BandedSign {
        if f64::abs(*self) <= band {
            BandedSign {
                sign: Sign::Zero,
                marginal: *self != 0.0,
            }
        } else if *self > 0.0 {
            BandedSign {
                sign: Sign::Positive,
                marginal: false,
            }
        } else {
            BandedSign {
                sign: Sign::Negative,
                marginal: false,
            }
        }
    }

    fn is_negligible(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }

    fn to_text(&self) -> String {
        format_f64(*self)
    }
}

/// Rounds a finite float to the rational `round(x * den) / den`.
///
/// Used for the "promote" backend, where EM output is rationalized before an
/// exact test. Returns `None` for non-finite input.
pub fn rationalize(x: f64, den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let scaled = (x * den as f64).round();
    // exact conversion of an integral f64 into a BigInt
    let num = Rational::from_float(scaled)?.to_integer();
    Some(Rational::new(num, BigInt::from(den)))
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.125"` or `"1e-3"`
/// into an exact rational. Decimal literals are converted digit-exactly.
pub fn parse_rational(token: &str) -> Option<Rational> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Ok(i) = t.parse::<BigInt>() {
        return Some(Rational::from_integer(i));
    }
    parse_decimal(t)
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Some(value)
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Formats a float with 17 significant digits so that parsing it back is
/// bit-identical.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{:.16e}", x)
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

pub fn int(v: i64) -> Rational {
    Rational::from_i64(v)
}
