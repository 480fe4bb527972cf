//! Exact arbitrary-precision rational arithmetic and the small exact
//! linear-algebra kit used by every analysis in this crate.
//!
//! All verdicts in this library compare exact rational products against 1;
//! floating point only ever appears in display values and Monte-Carlo
//! summaries, never in a decision.

mod logsign;
mod solve;

pub use logsign::{ln_enclosure, log_linear_sign};
pub use solve::solve_linear;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Errors from exact-arithmetic constructors and operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("scale ratio must be strictly positive, got {0}")]
    NonPositiveScale(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("system has no unique solution")]
    NoUniqueSolution,
}

/// Exact rational number, always in canonical form: positive denominator,
/// gcd(|numerator|, denominator) = 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    /// Builds `num/den` in canonical form. Fails on a zero denominator.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, ExactError> {
        let den = den.into();
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rat(BigRational::new(num.into(), den)))
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    /// Shorthand for small rational constants in tests and generators.
    pub fn of(num: i64, den: i64) -> Self {
        Rat::new(num, den).expect("nonzero denominator")
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rat(self.0.recip()))
    }

    /// Exact integer power; negative exponents require a nonzero base.
    pub fn pow(&self, exp: i64) -> Result<Self, ExactError> {
        if exp < 0 && self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rat(self.0.pow(exp.to_i32().expect("exponent fits in i32"))))
    }

    /// Nearest-double view, for display and statistics only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fall back to a quotient of leading digits when numerator or
            // denominator overflows the f64 range.
            let n = self.numer();
            let d = self.denom();
            let shift = (n.bits().max(d.bits())).saturating_sub(900) as u32;
            let n = n >> shift;
            let d = d >> shift;
            n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
        })
    }

    /// Natural log of a positive rational as f64; statistics/display only.
    pub fn ln_f64(&self) -> f64 {
        debug_assert!(self.is_positive());
        ln_big(self.numer()) - ln_big(self.denom())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub(crate) fn from_inner(r: BigRational) -> Self {
        Rat(r)
    }
}

/// ln of a positive big integer without overflowing f64.
fn ln_big(n: &BigInt) -> f64 {
    debug_assert!(n.sign() == Sign::Plus);
    let bits = n.bits();
    if bits <= 52 {
        return (n.to_f64().unwrap()).ln();
    }
    let shift = bits - 52;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

macro_rules! forward_binop {
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
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
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

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, ExactError> {
        let s = s.trim();
        let parse_int =
            |t: &str| BigInt::from_str(t.trim()).map_err(|_| ExactError::Parse(s.to_string()));
        match s.split_once('/') {
            Some((n, d)) => {
                let den = parse_int(d)?;
                if den.is_zero() {
                    return Err(ExactError::DivisionByZero);
                }
                Ok(Rat(BigRational::new(parse_int(n)?, den)))
            }
            None => Ok(Rat(BigRational::from_integer(parse_int(s)?))),
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Extended positive scaling factor: the multiplicative carrier of edge
/// weights. `Finite(r)` holds a strictly positive ratio; `Infinite` encodes
/// a trajectory that never leaves its invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scale {
    Finite(Rat),
    Infinite,
}

impl Scale {
    /// Wraps a strictly positive ratio.
    pub fn finite(ratio: Rat) -> Result<Self, ExactError> {
        if !ratio.is_positive() {
            return Err(ExactError::NonPositiveScale(ratio.to_string()));
        }
        Ok(Scale::Finite(ratio))
    }

    pub fn one() -> Self {
        Scale::Finite(Rat::one())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Scale::Infinite)
    }

    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            Scale::Finite(r) => Some(r),
            Scale::Infinite => None,
        }
    }

    /// Total multiplication: anything times `Infinite` is `Infinite`.
    pub fn mul(&self, other: &Scale) -> Scale {
        match (self, other) {
            (Scale::Finite(a), Scale::Finite(b)) => Scale::Finite(a * b),
            _ => Scale::Infinite,
        }
    }

    /// `k`-th power with the empty-product convention `s^0 = Finite(1)`.
    pub fn pow(&self, k: u64) -> Scale {
        if k == 0 {
            return Scale::one();
        }
        match self {
            Scale::Finite(r) => Scale::Finite(r.pow(k as i64).expect("positive base")),
            Scale::Infinite => Scale::Infinite,
        }
    }

    /// Comparison against 1 for finite scales; `Infinite` compares greater.
    pub fn cmp_one(&self) -> Ordering {
        match self {
            Scale::Finite(r) => r.cmp(&Rat::one()),
            Scale::Infinite => Ordering::Greater,
        }
    }

    /// Float view of the logarithm; display and statistics only.
    pub fn log_f64(&self) -> f64 {
        match self {
            Scale::Finite(r) => r.ln_f64(),
            Scale::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Scale {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scale::Finite(r) => {
                use serde::ser::SerializeMap;
                let mut m = serializer.serialize_map(Some(1))?;
                m.serialize_entry("ratio", &r.to_string())?;
                m.end()
            }
            Scale::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Scale {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Ratio { ratio: Rat },
        }
        match Repr::deserialize(deserializer)? {
            Repr::Tag(s) if s == "inf" => Ok(Scale::Infinite),
            Repr::Tag(s) => Err(de::Error::custom(format!(
                "expected \"inf\" or {{\"ratio\":...}}, got {s:?}"
            ))),
            Repr::Ratio { ratio } => Scale::finite(ratio).map_err(de::Error::custom),
        }
    }
}

/// 2D point/vector with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vec2Q {
    pub x: Rat,
    pub y: Rat,
}

impl Vec2Q {
    pub fn new(x: Rat, y: Rat) -> Self {
        Vec2Q { x, y }
    }

    pub fn of(x: (i64, i64), y: (i64, i64)) -> Self {
        Vec2Q::new(Rat::of(x.0, x.1), Rat::of(y.0, y.1))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// max(|x|, |y|): the distance of the point from the equilibrium 0.
    pub fn inf_norm(&self) -> Rat {
        self.x.abs().max(self.y.abs())
    }

    pub fn scaled(&self, factor: &Rat) -> Vec2Q {
        Vec2Q::new(&self.x * factor, &self.y * factor)
    }

    pub fn add(&self, other: &Vec2Q) -> Vec2Q {
        Vec2Q::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn cross(&self, other: &Vec2Q) -> Rat {
        &(&self.x * &other.y) - &(&self.y * &other.x)
    }

    pub fn dot(&self, other: &Vec2Q) -> Rat {
        &(&self.x * &other.x) + &(&self.y * &other.y)
    }
}

impl Serialize for Vec2Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x.to_string(), self.y.to_string()].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vec2Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y] = <[Rat; 2]>::deserialize(deserializer)?;
        Ok(Vec2Q::new(x, y))
    }
}

/// Dense row-major matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rat>) -> Result<Self, ExactError> {
        if entries.len() != rows * cols {
            return Err(ExactError::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(RatMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zero(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.entries[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Rat {
        &mut self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Exact matrix product.
    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, ExactError> {
        if self.cols != other.rows {
            return Err(ExactError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RatMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let term = a * other.get(k, j);
                    let cell = out.get_mut(i, j);
                    *cell = &*cell + &term;
                }
            }
        }
        Ok(out)
    }
}

/// gcd helper for primitive integer directions.
pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    (a.unsigned_abs().gcd(&b.unsigned_abs())) as i64
}
