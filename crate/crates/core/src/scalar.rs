//! Configurable-precision real scalars.
//!
//! Two precision levels are used throughout the crate: IEEE binary64
//! (`f64`, with gradual underflow) for the computations under study, and a
//! software float of at least 256 bits ([`Ext`]) that serves as a near-exact
//! reference. Both implement [`Real`], so the operator construction, assembly
//! and QR code is written once and instantiated at either level.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};

use crate::error::{Error, Result};

/// Binary software float with round-half-to-even.
pub type BigFloat = FBig<HalfEven, 2>;

/// Extended precision used when nothing else is requested.
pub const DEFAULT_EXTENDED_BITS: usize = 256;

/// Reference precision at the default width.
pub type Extended = Ext<DEFAULT_EXTENDED_BITS>;

/// Precision level of a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecisionLevel {
    /// IEEE-754 binary64 with subnormals.
    Working64,
    /// Software float with `bits` significand bits (at least 256).
    Extended { bits: usize },
}

impl PrecisionLevel {
    pub fn extended(bits: usize) -> Result<Self> {
        if bits < DEFAULT_EXTENDED_BITS {
            return Err(Error::UnsupportedPrecision(format!(
                "extended precision needs at least {DEFAULT_EXTENDED_BITS} bits, got {bits}"
            )));
        }
        Ok(PrecisionLevel::Extended { bits })
    }

    /// Significand bits, including the implicit leading bit.
    pub fn significand_bits(&self) -> usize {
        match self {
            PrecisionLevel::Working64 => 53,
            PrecisionLevel::Extended { bits } => *bits,
        }
    }
}

/// Gap between 1 and the next representable number at level `p`, i.e.
/// `2^(1 - bits)`. Exact as an `f64` for every supported width.
pub fn machine_epsilon(p: PrecisionLevel) -> f64 {
    let bits = p.significand_bits() as i32;
    2f64.powi(1 - bits)
}

/// Smallest positive subnormal. Only binary64 models subnormals.
pub fn min_subnormal(p: PrecisionLevel) -> Result<f64> {
    match p {
        PrecisionLevel::Working64 => Ok(f64::from_bits(1)),
        PrecisionLevel::Extended { .. } => Err(Error::UnsupportedPrecision(
            "extended precision does not model subnormals".into(),
        )),
    }
}

/// Real number type the numerical code is generic over.
pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const LEVEL: PrecisionLevel;

    fn zero() -> Self;
    fn one() -> Self;
    /// Exact embedding of a finite binary64 value.
    fn from_f64(x: f64) -> Self;
    /// Exact for integers the level can represent.
    fn from_i64(x: i64) -> Self;
    /// Nearest binary64 value.
    fn to_f64(&self) -> f64;
    /// Exact conversion to a software float.
    fn to_big(&self) -> BigFloat;
    /// Rounds a software float to this level.
    fn from_big(x: &BigFloat) -> Self;
    /// Parses a decimal literal, rounding once to nearest.
    fn parse_decimal(s: &str) -> Result<Self>;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn hypot(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;

    /// `num / den` evaluated with a single rounding.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn epsilon() -> Self {
        Self::from_f64(machine_epsilon(Self::LEVEL))
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Real for f64 {
    const LEVEL: PrecisionLevel = PrecisionLevel::Working64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_big(&self) -> BigFloat {
        BigFloat::try_from(*self).expect("finite binary64 value")
    }
    fn from_big(x: &BigFloat) -> Self {
        x.to_f64().value()
    }
    fn parse_decimal(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidProblem(format!("not a number: {s:?}")))?;
        if !v.is_finite() {
            return Err(Error::InvalidProblem(format!("not finite: {s:?}")));
        }
        Ok(v)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn hypot(&self, other: &Self) -> Self {
        f64::hypot(*self, *other)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// Software float with `BITS` significand bits.
///
/// Every constructor fixes the precision to `BITS`, so arithmetic between
/// two values rounds to `BITS` bits (round-half-to-even).
#[derive(Clone)]
pub struct Ext<const BITS: usize>(BigFloat);

impl<const BITS: usize> Ext<BITS> {
    pub fn from_bigfloat(x: BigFloat) -> Self {
        Ext(x.with_precision(BITS).value())
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.0
    }
}

impl<const BITS: usize> fmt::Debug for Ext<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext<{BITS}>({:e})", self.0.to_f64().value())
    }
}

impl<const BITS: usize> fmt::Display for Ext<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_decimal().value())
    }
}

impl<const BITS: usize> PartialEq for Ext<BITS> {
    fn eq(&self, other: &Self) -> bool {
        self.0.partial_cmp(&other.0) == Some(Ordering::Equal)
    }
}

impl<const BITS: usize> PartialOrd for Ext<BITS> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! ext_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign_method:ident, $op:tt) => {
        impl<const BITS: usize> $tr for Ext<BITS> {
            type Output = Self;
            #[inline]
            fn $method(self, rhs: Self) -> Self {
                Ext(&self.0 $op &rhs.0)
            }
        }
        impl<'a, const BITS: usize> $tr<&'a Ext<BITS>> for &'a Ext<BITS> {
            type Output = Ext<BITS>;
            #[inline]
            fn $method(self, rhs: &'a Ext<BITS>) -> Ext<BITS> {
                Ext(&self.0 $op &rhs.0)
            }
        }
        impl<const BITS: usize> $assign_tr for Ext<BITS> {
            #[inline]
            fn $assign_method(&mut self, rhs: Self) {
                self.0 = &self.0 $op &rhs.0;
            }
        }
    };
}

ext_binop!(Add, add, AddAssign, add_assign, +);
ext_binop!(Sub, sub, SubAssign, sub_assign, -);
ext_binop!(Mul, mul, MulAssign, mul_assign, *);

impl<const BITS: usize> Div for Ext<BITS> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        Ext(&self.0 / &rhs.0)
    }
}

impl<const BITS: usize> Neg for Ext<BITS> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Ext(-self.0)
    }
}

impl<const BITS: usize> Real for Ext<BITS> {
    const LEVEL: PrecisionLevel = PrecisionLevel::Extended { bits: BITS };

    fn zero() -> Self {
        Ext(BigFloat::ZERO.with_precision(BITS).value())
    }
    fn one() -> Self {
        Ext(BigFloat::ONE.with_precision(BITS).value())
    }
    fn from_f64(x: f64) -> Self {
        Ext(BigFloat::try_from(x)
            .expect("finite binary64 value")
            .with_precision(BITS)
            .value())
    }
    fn from_i64(x: i64) -> Self {
        Ext(BigFloat::from(x).with_precision(BITS).value())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn to_big(&self) -> BigFloat {
        self.0.clone()
    }
    fn from_big(x: &BigFloat) -> Self {
        Ext(x.clone().with_precision(BITS).value())
    }
    fn parse_decimal(s: &str) -> Result<Self> {
        parse_big(s, BITS).map(Ext)
    }
    fn abs(&self) -> Self {
        if self.0 < BigFloat::ZERO {
            Ext(-self.0.clone())
        } else {
            self.clone()
        }
    }
    fn sqrt(&self) -> Self {
        Ext(self.0.sqrt())
    }
    fn hypot(&self, other: &Self) -> Self {
        let sum = &(&self.0 * &self.0) + &(&other.0 * &other.0);
        Ext(sum.sqrt())
    }
    fn is_zero(&self) -> bool {
        self.0 == BigFloat::ZERO
    }
}

/// Parses a decimal literal into a binary float of `bits` bits.
pub fn parse_big(s: &str, bits: usize) -> Result<BigFloat> {
    let d = DBig::from_str(s.trim())
        .map_err(|_| Error::InvalidProblem(format!("not a number: {s:?}")))?;
    Ok(d.with_rounding::<HalfEven>()
        .with_base_and_precision::<2>(bits)
        .value())
}

/// Exact embedding of a binary64 value at a higher level.
pub fn promote<X: Real>(x: f64) -> X {
    X::from_f64(x)
}

/// Rounds to the nearest binary64 value.
pub fn demote<X: Real>(x: &X) -> f64 {
    x.to_f64()
}

pub fn promote_vec<X: Real>(v: &[f64]) -> Vec<X> {
    v.iter().map(|&x| X::from_f64(x)).collect()
}

/// Converts between any two levels by rounding to nearest.
pub fn convert<A: Real, B: Real>(x: &A) -> B {
    match A::LEVEL {
        PrecisionLevel::Working64 => B::from_f64(x.to_f64()),
        PrecisionLevel::Extended { .. } => B::from_big(&x.to_big()),
    }
}
