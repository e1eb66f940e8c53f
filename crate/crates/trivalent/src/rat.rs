//! Exact rational scalars.
//!
//! A thin wrapper around arbitrary-precision rationals that fixes the
//! conventions relied on everywhere else: values are always in lowest terms
//! with a positive denominator, the canonical zero is `0/1`, the text form is
//! `p/q` (with `/q` omitted when `q = 1`), and division by zero is an explicit
//! error rather than a panic deep inside a search.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// An exact rational number in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

/// Arithmetic failure, currently only division by zero.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithmeticError {
    #[error("division by zero")]
    DivisionByZero,
}

/// Parse failure for the `p/q` text form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer in rational literal: {0}")]
    BadInteger(String),
    #[error("zero denominator in rational literal")]
    ZeroDenominator,
}

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// `p/q` from machine integers. Panics on `q = 0`; use [`Rat::checked_div`]
    /// when the denominator is data rather than a literal.
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q != 0, "Rat::new with zero denominator");
        Rat(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_int(p: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(p)))
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

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat, ArithmeticError> {
        if rhs.is_zero() {
            Err(ArithmeticError::DivisionByZero)
        } else {
            Ok(Rat(&self.0 / &rhs.0))
        }
    }

    /// Multiplicative inverse; zero has none.
    pub fn recip(&self) -> Result<Rat, ArithmeticError> {
        Rat::one().checked_div(self)
    }

    /// True when the denominator is a product of powers of 2 and 3 only.
    ///
    /// All coefficients produced by the bundled derivation scripts stay in
    /// this set; the replayer asserts it as a cheap corruption tripwire.
    pub fn denominator_is_2_3_smooth(&self) -> bool {
        let mut d = self.0.denom().clone();
        for p in [2u32, 3u32] {
            let p = BigInt::from(p);
            while (&d % &p).is_zero() {
                d /= &p;
            }
        }
        d.is_one()
    }

    /// The value as an `i64` if it is an integer in range.
    pub fn to_integer(&self) -> Option<i64> {
        if self.0.denom().is_one() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

// Debug delegates to Display: `p/q` is the only useful rendering.
impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), Some(q.trim())),
            None => (s, None),
        };
        let num =
            BigInt::from_str(p).map_err(|_| ParseRatError::BadInteger(p.to_string()))?;
        let den = match q {
            Some(q) => BigInt::from_str(q).map_err(|_| ParseRatError::BadInteger(q.to_string()))?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(ParseRatError::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(num, den)))
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(p: i64) -> Self {
        Rat::from_int(p)
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);

impl Div for Rat {
    type Output = Rat;
    /// Panics on division by zero; prefer [`Rat::checked_div`] for data-driven
    /// denominators.
    fn div(self, rhs: Rat) -> Rat {
        self.checked_div(&rhs).expect("Rat division by zero")
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl<'a> Neg for &'a Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        let mut acc = Rat::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}
