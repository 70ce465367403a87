//! Exact arithmetic in the signed cancellation meadow of the rationals.
//!
//! A [`Stalk`] is a normalized rational number. Every operation is total:
//! the inverse of zero is zero, so division by zero yields zero. The sign
//! operator returns a stalk (`-1`, `0` or `1`) so that the sign axioms can be
//! stated as plain equations between stalks.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// An element of the meadow of rational numbers.
///
/// The denominator is always positive and coprime to the numerator, so two
/// stalks are equal exactly when their representations are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Stalk(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StalkParseError {
    #[error("empty number literal")]
    Empty,
    #[error("invalid number literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Stalk {
    pub fn zero() -> Self {
        Stalk(BigRational::zero())
    }

    pub fn one() -> Self {
        Stalk(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Stalk(BigRational::from_integer(n.into()))
    }

    /// Builds `num/den`. Returns `None` when `den` is zero.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Option<Self> {
        let den = den.into();
        if den.is_zero() {
            return None;
        }
        Some(Stalk(BigRational::new(num.into(), den)))
    }

    /// Shorthand for small literals; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("zero denominator")
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Total inverse: `inv(0) = 0`.
    pub fn inv(&self) -> Stalk {
        if self.is_zero() {
            Stalk::zero()
        } else {
            Stalk(self.0.recip())
        }
    }

    /// Meadow division `a · inv(b)`; dividing by zero gives zero.
    pub fn meadow_div(&self, other: &Stalk) -> Stalk {
        Stalk(&self.0 * &other.inv().0)
    }

    pub fn sign(&self) -> Stalk {
        match self.0.cmp(&BigRational::zero()) {
            Ordering::Less => Stalk::from_integer(-1),
            Ordering::Equal => Stalk::zero(),
            Ordering::Greater => Stalk::one(),
        }
    }

    /// `1_x = x · x⁻¹`.
    pub fn one_of(&self) -> Stalk {
        self * &self.inv()
    }

    /// `0_x = 1 − 1_x`.
    pub fn zero_of(&self) -> Stalk {
        Stalk::one() - self.one_of()
    }

    /// `a ≤ b` defined through the sign operator: `s(s(b − a) + 1) = 1`.
    pub fn le(&self, other: &Stalk) -> bool {
        ((other - self).sign() + Stalk::one()).sign().is_one()
    }

    /// `a < b` defined as `s(b − a) = 1`.
    pub fn lt(&self, other: &Stalk) -> bool {
        (other - self).sign().is_one()
    }

    pub fn abs(&self) -> Stalk {
        Stalk(self.0.abs())
    }

    /// Arithmetic mean of two stalks.
    pub fn midpoint(&self, other: &Stalk) -> Stalk {
        (self + other) * Stalk::ratio(1, 2)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<BigRational> for Stalk {
    fn from(r: BigRational) -> Self {
        Stalk(r)
    }
}

impl From<i64> for Stalk {
    fn from(n: i64) -> Self {
        Stalk::from_integer(n)
    }
}

impl fmt::Display for Stalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Stalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Stalk {
    type Err = StalkParseError;

    /// Accepts `n`, `a/b` and decimal literals such as `0.4` or `-1.25`.
    /// Decimals are converted exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(StalkParseError::Empty);
        }
        let invalid = || StalkParseError::Invalid(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num = parse_decimal(num.trim()).ok_or_else(invalid)?;
            let den = parse_decimal(den.trim()).ok_or_else(invalid)?;
            if den.is_zero() {
                return Err(StalkParseError::ZeroDenominator(s.to_string()));
            }
            return Ok(Stalk(num.0 / den.0));
        }
        parse_decimal(s).ok_or_else(invalid)
    }
}

fn parse_decimal(s: &str) -> Option<Stalk> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(if negative { -num } else { num }, den);
    Some(Stalk(value))
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $trait<&Stalk> for &Stalk {
            type Output = Stalk;
            fn $method(self, rhs: &Stalk) -> Stalk {
                let ($a, $b) = (self, rhs);
                $body
            }
        }
        impl $trait<Stalk> for Stalk {
            type Output = Stalk;
            fn $method(self, rhs: Stalk) -> Stalk {
                let ($a, $b) = (&self, &rhs);
                $body
            }
        }
        impl $trait<&Stalk> for Stalk {
            type Output = Stalk;
            fn $method(self, rhs: &Stalk) -> Stalk {
                let ($a, $b) = (&self, rhs);
                $body
            }
        }
        impl $trait<Stalk> for &Stalk {
            type Output = Stalk;
            fn $method(self, rhs: Stalk) -> Stalk {
                let ($a, $b) = (self, &rhs);
                $body
            }
        }
    };
}

forward_binop!(Add, add, |a, b| Stalk(&a.0 + &b.0));
forward_binop!(Sub, sub, |a, b| Stalk(&a.0 - &b.0));
forward_binop!(Mul, mul, |a, b| Stalk(&a.0 * &b.0));
// Division is meadow division: x / 0 = 0.
forward_binop!(Div, div, |a, b| a.meadow_div(b));

impl Neg for Stalk {
    type Output = Stalk;
    fn neg(self) -> Stalk {
        Stalk(-self.0)
    }
}

impl Neg for &Stalk {
    type Output = Stalk;
    fn neg(self) -> Stalk {
        Stalk(-&self.0)
    }
}

impl AddAssign<&Stalk> for Stalk {
    fn add_assign(&mut self, rhs: &Stalk) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Stalk> for Stalk {
    fn sub_assign(&mut self, rhs: &Stalk) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Stalk> for Stalk {
    fn mul_assign(&mut self, rhs: &Stalk) {
        self.0 *= &rhs.0;
    }
}

impl std::iter::Sum for Stalk {
    fn sum<I: Iterator<Item = Stalk>>(iter: I) -> Stalk {
        iter.fold(Stalk::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Stalk> for Stalk {
    fn sum<I: Iterator<Item = &'a Stalk>>(iter: I) -> Stalk {
        iter.fold(Stalk::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}
