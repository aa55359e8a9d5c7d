//! Precision contexts and the `BigReal`/`BigComplex` value types.
//!
//! All arithmetic in the crate goes through these wrappers so that the
//! working precision is always explicit. A context is just a decimal
//! digit count; the binary precision handed to the backend is a fixed,
//! deterministic function of it, which keeps results reproducible.

use std::cmp::Ordering;
use std::fmt;

use rug::ops::{CompleteRound, Pow};
use rug::{Complex, Float, Integer};

use super::NumericsError;

/// Decimal working precision, threaded explicitly through every operation.
///
/// Two computations under equal contexts are bit-identical; there is no
/// global rounding state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
    bits: u32,
}

impl PrecisionContext {
    /// Minimum supported precision (a little above IEEE double).
    pub const MIN_DIGITS: u32 = 17;

    pub fn new(digits: u32) -> Result<Self, NumericsError> {
        if digits < Self::MIN_DIGITS {
            return Err(NumericsError::InvalidPrecision(digits));
        }
        // ceil(digits * log2(10)) in integer arithmetic, plus guard bits.
        // 3_321_929 / 10^6 > log2(10).
        let bits = ((digits as u64 * 3_321_929).div_ceil(1_000_000) + 32) as u32;
        Ok(Self { digits, bits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn zero(&self) -> BigReal {
        BigReal(Float::with_val(self.bits, 0))
    }

    pub fn one(&self) -> BigReal {
        BigReal(Float::with_val(self.bits, 1))
    }

    pub fn from_i64(&self, v: i64) -> BigReal {
        BigReal(Float::with_val(self.bits, v))
    }

    pub fn from_f64(&self, v: f64) -> BigReal {
        BigReal(Float::with_val(self.bits, v))
    }

    pub fn from_integer(&self, v: &Integer) -> BigReal {
        BigReal(Float::with_val(self.bits, v))
    }

    /// Parse a decimal string at context precision.
    pub fn parse(&self, s: &str) -> Result<BigReal, NumericsError> {
        Float::parse(s)
            .map(|incomplete| BigReal(Float::with_val(self.bits, incomplete)))
            .map_err(|_| NumericsError::InvalidPrecision(self.digits))
    }

    pub fn pi(&self) -> BigReal {
        use rug::float::Constant;
        BigReal(Float::with_val(self.bits, Constant::Pi))
    }

    pub fn two_pi(&self) -> BigReal {
        let mut p = self.pi();
        p.0 *= 2;
        p
    }

    /// `10^(-digits + offset)`, the crate-wide way of spelling tolerances.
    pub fn eps_at(&self, offset: i32) -> BigReal {
        let e = -(self.digits as i32) + offset;
        BigReal(Float::with_val(self.bits, 10).pow(e))
    }

    pub fn complex(&self, re: BigReal, im: BigReal) -> BigComplex {
        BigComplex(Complex::with_val(self.bits, (re.0, im.0)))
    }

    pub fn complex_zero(&self) -> BigComplex {
        BigComplex(Complex::with_val(self.bits, (0, 0)))
    }
}

/// A real number carried at the precision of its context.
#[derive(Clone, PartialEq)]
pub struct BigReal(pub(crate) Float);

impl BigReal {
    pub fn raw(&self) -> &Float {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn infinity(ctx: &PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.bits, rug::float::Special::Infinity))
    }

    pub fn sin(&self) -> Self {
        BigReal(self.0.clone().sin())
    }

    pub fn cos(&self) -> Self {
        BigReal(self.0.clone().cos())
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let prec = self.0.prec();
        let (s, c) = self.0.clone().sin_cos(Float::new(prec));
        (BigReal(s), BigReal(c))
    }

    /// Natural logarithm.
    pub fn ln(&self) -> Self {
        BigReal(self.0.clone().ln())
    }

    pub fn log10(&self) -> Self {
        BigReal(self.0.clone().log10())
    }

    pub fn exp(&self) -> Self {
        BigReal(self.0.clone().exp())
    }

    pub fn sqrt(&self) -> Self {
        BigReal(self.0.clone().sqrt())
    }

    pub fn abs(&self) -> Self {
        BigReal(self.0.clone().abs())
    }

    pub fn neg(&self) -> Self {
        BigReal(-self.0.clone())
    }

    pub fn recip(&self) -> Self {
        BigReal(self.0.clone().recip())
    }

    pub fn floor(&self) -> Self {
        BigReal(self.0.clone().floor())
    }

    pub fn square(&self) -> Self {
        BigReal(self.0.clone().square())
    }

    /// Real power with a real exponent, `self > 0`.
    pub fn pow(&self, exponent: &BigReal) -> Self {
        BigReal(self.0.clone().pow(&exponent.0))
    }

    pub fn pow_i(&self, exponent: i32) -> Self {
        BigReal(self.0.clone().pow(exponent))
    }

    pub fn min(&self, other: &BigReal) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max(&self, other: &BigReal) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Total order; panics on NaN (never produced under a valid context).
    pub fn cmp_total(&self, other: &BigReal) -> Ordering {
        self.0.partial_cmp(&other.0).expect("NaN in BigReal comparison")
    }

    /// Base-10 exponent estimate: `floor(log10(|x|))`, or `None` for zero.
    pub fn magnitude10(&self) -> Option<i64> {
        if self.0.is_zero() || !self.0.is_finite() {
            return None;
        }
        // exp10 = floor((exp2 - 1) * log10(2)) is within 1; refine cheaply.
        let exp2 = self.0.get_exp().unwrap() as f64;
        let guess = ((exp2 - 1.0) * std::f64::consts::LOG10_2).floor() as i64;
        let ten = Float::with_val(64, 10);
        for cand in [guess + 1, guess, guess - 1] {
            let lo = ten.clone().pow(cand);
            if self.0.clone().abs() >= lo {
                return Some(cand);
            }
        }
        Some(guess - 1)
    }

    /// Fixed-point decimal rendering with `decimals` digits after the point.
    ///
    /// Output is locale-free and deterministic, suitable for cache keys and
    /// CSV cells. Rounds to nearest.
    pub fn to_decimal(&self, decimals: usize) -> String {
        if !self.0.is_finite() {
            return if self.0.is_infinite() {
                if self.0.is_sign_negative() { "-inf".into() } else { "inf".into() }
            } else {
                "nan".into()
            };
        }
        let mut shifted = self.0.clone();
        let ten = Float::with_val(self.0.prec(), 10);
        shifted *= ten.pow(decimals as u32);
        let rounded = shifted.round();
        let int = rounded.to_integer().expect("finite value");
        let neg = int < 0;
        let digits = int.clone().abs().to_string();
        let digits = if digits.len() <= decimals {
            format!("{}{}", "0".repeat(decimals + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (whole, frac) = digits.split_at(digits.len() - decimals);
        let sign = if neg { "-" } else { "" };
        if decimals == 0 {
            format!("{sign}{whole}")
        } else {
            format!("{sign}{whole}.{frac}")
        }
    }

    /// Decimal string with enough digits that re-parsing at the same
    /// precision recovers the exact binary value.
    pub fn to_exact_string(&self) -> String {
        let sig = (self.0.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        self.to_significant(sig)
    }

    /// Rendering with `sig` significant digits: fixed notation for moderate
    /// exponents, otherwise `d.dddde±xx`.
    pub fn to_significant(&self, sig: usize) -> String {
        if self.0.is_zero() {
            return "0".into();
        }
        if !self.0.is_finite() {
            return self.to_decimal(0);
        }
        let mag = self.magnitude10().unwrap();
        if mag >= -9 && mag < 15 {
            let decimals = (sig as i64 - 1 - mag).max(0) as usize;
            self.to_decimal(decimals)
        } else {
            let (s, exp) = self.sci_parts(sig);
            format!("{s}e{exp}")
        }
    }

    fn sci_parts(&self, sig: usize) -> (String, i64) {
        let mag = self.magnitude10().unwrap();
        let prec = self.0.prec();
        let ten = Float::with_val(prec, 10);
        let mantissa = BigReal(self.0.clone() / ten.pow(mag as i32));
        (mantissa.to_decimal(sig.saturating_sub(1)), mag)
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({})", self.to_significant(20))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_significant(17))
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                let prec = self.0.prec().max(rhs.0.prec());
                BigReal((&self.0 $op &rhs.0).complete(prec))
            }
        }
        impl std::ops::$trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl std::ops::Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0.clone())
    }
}

impl std::ops::Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl std::ops::AddAssign<&BigReal> for BigReal {
    fn add_assign(&mut self, rhs: &BigReal) {
        self.0 += &rhs.0;
    }
}

impl std::ops::SubAssign<&BigReal> for BigReal {
    fn sub_assign(&mut self, rhs: &BigReal) {
        self.0 -= &rhs.0;
    }
}

impl std::ops::MulAssign<&BigReal> for BigReal {
    fn mul_assign(&mut self, rhs: &BigReal) {
        self.0 *= &rhs.0;
    }
}

impl std::ops::DivAssign<&BigReal> for BigReal {
    fn div_assign(&mut self, rhs: &BigReal) {
        self.0 /= &rhs.0;
    }
}

/// Complex value at context precision; used by the polynomial root finder
/// and the Pade pole analysis.
#[derive(Clone, PartialEq)]
pub struct BigComplex(pub(crate) Complex);

impl BigComplex {
    pub fn re(&self) -> BigReal {
        BigReal(self.0.real().clone())
    }

    pub fn im(&self) -> BigReal {
        BigReal(self.0.imag().clone())
    }

    pub fn parts(&self) -> (BigReal, BigReal) {
        (self.re(), self.im())
    }

    pub fn abs(&self) -> BigReal {
        BigReal(self.0.clone().abs().into_real_imag().0)
    }

    /// Argument (phase angle) in radians.
    pub fn arg(&self) -> BigReal {
        BigReal(self.0.clone().arg().into_real_imag().0)
    }

    pub fn conj(&self) -> BigComplex {
        BigComplex(self.0.clone().conj())
    }

    pub fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BigComplex({} + {}i)",
            self.re().to_significant(17),
            self.im().to_significant(17)
        )
    }
}

macro_rules! cbinop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &BigComplex) -> BigComplex {
                let prec = self.0.prec().0.max(rhs.0.prec().0);
                BigComplex((&self.0 $op &rhs.0).complete((prec, prec)))
            }
        }
    };
}

cbinop!(Add, add, +);
cbinop!(Sub, sub, -);
cbinop!(Mul, mul, *);
cbinop!(Div, div, /);

impl std::ops::Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex(-self.0.clone())
    }
}
