//! Arbitrary-precision real arithmetic and the adaptive quadrature kernel.
//!
//! [`HiReal`] wraps a binary big-float together with an explicit decimal
//! working precision. Arithmetic between two values carries the minimum of
//! the input precisions, so precision loss is always visible in the type's
//! `digits` field rather than silent.

mod quad;

pub use quad::{integrate, integrate_opts, IntegrateOptions, QuadratureResult};

use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Minimum decimal working precision for any internal computation.
pub const MIN_DIGITS: usize = 30;

const LOG2_10: f64 = std::f64::consts::LOG2_10;
/// Guard bits on top of the requested decimal precision (~9.6 extra digits).
const GUARD_BITS: usize = 32;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Binary precision backing `digits` decimal digits.
fn bits(digits: usize) -> usize {
    (digits as f64 * LOG2_10).ceil() as usize + GUARD_BITS
}

/// Arbitrary-precision real with explicit decimal working precision.
#[derive(Clone, Debug)]
pub struct HiReal {
    x: BigFloat,
    digits: usize,
}

impl HiReal {
    fn wrap(x: BigFloat, digits: usize) -> Self {
        debug_assert!(!x.is_nan(), "HiReal must never hold NaN");
        debug_assert!(!x.is_inf(), "HiReal must never hold Inf");
        HiReal { x, digits }
    }

    pub fn zero(digits: usize) -> Self {
        let digits = digits.max(MIN_DIGITS);
        Self::wrap(BigFloat::new(bits(digits)), digits)
    }

    pub fn from_i64(v: i64, digits: usize) -> Self {
        let digits = digits.max(MIN_DIGITS);
        Self::wrap(BigFloat::from_i64(v, bits(digits)), digits)
    }

    pub fn from_u64(v: u64, digits: usize) -> Self {
        let digits = digits.max(MIN_DIGITS);
        Self::wrap(BigFloat::from_u64(v, bits(digits)), digits)
    }

    pub fn from_f64(v: f64, digits: usize) -> Self {
        assert!(v.is_finite(), "HiReal::from_f64 requires a finite value");
        let digits = digits.max(MIN_DIGITS);
        Self::wrap(BigFloat::from_f64(v, bits(digits)), digits)
    }

    /// Parses a decimal string such as `-1.25e-40`.
    pub fn parse(s: &str, digits: usize) -> Result<Self> {
        let digits = digits.max(MIN_DIGITS);
        let x = with_consts(|cc| BigFloat::parse(s, Radix::Dec, bits(digits), RM, cc));
        if x.is_nan() || x.is_inf() {
            return Err(Error::Parse(format!("invalid decimal literal {s:?}")));
        }
        Ok(Self::wrap(x, digits))
    }

    /// Exact conversion of a big integer, rounded to the working precision.
    pub fn from_bigint(v: &BigInt, digits: usize) -> Result<Self> {
        Self::parse(&v.to_string(), digits)
    }

    /// `p/q` rounded to the working precision.
    pub fn from_rational(r: &BigRational, digits: usize) -> Result<Self> {
        let num = Self::from_bigint(r.numer(), digits)?;
        let den = Self::from_bigint(r.denom(), digits)?;
        if den.is_zero() {
            return Err(Error::Domain("rational with zero denominator".into()));
        }
        Ok(&num / &den)
    }

    pub fn pi(digits: usize) -> Self {
        let digits = digits.max(MIN_DIGITS);
        Self::wrap(with_consts(|cc| cc.pi(bits(digits), RM)), digits)
    }

    /// `10^e` at the given working precision (exact while it fits).
    pub fn pow10(e: i64, digits: usize) -> Self {
        let digits = digits.max(MIN_DIGITS);
        let p = bits(digits);
        let ten = BigFloat::from_u64(10, p);
        let mag = ten.powi(e.unsigned_abs() as usize, p, RM);
        let x = if e < 0 {
            BigFloat::from_u64(1, p).div(&mag, p, RM)
        } else {
            mag
        };
        Self::wrap(x, digits)
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    fn p(&self) -> usize {
        bits(self.digits)
    }

    /// Re-rounds the value to a new working precision (exact when raising).
    pub fn with_digits(&self, digits: usize) -> Self {
        let digits = digits.max(MIN_DIGITS);
        let mut x = self.x.clone();
        x.set_precision(bits(digits), RM).expect("set_precision");
        Self::wrap(x, digits)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.x.is_negative() && !self.x.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.x.is_positive() && !self.x.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.x.abs(), self.digits)
    }

    fn bin2(&self, rhs: &Self, f: impl FnOnce(&BigFloat, &BigFloat, usize) -> BigFloat) -> Self {
        let digits = self.digits.min(rhs.digits);
        Self::wrap(f(&self.x, &rhs.x, bits(digits)), digits)
    }

    pub fn add_r(&self, rhs: &Self) -> Self {
        self.bin2(rhs, |a, b, p| a.add(b, p, RM))
    }

    pub fn sub_r(&self, rhs: &Self) -> Self {
        self.bin2(rhs, |a, b, p| a.sub(b, p, RM))
    }

    pub fn mul_r(&self, rhs: &Self) -> Self {
        self.bin2(rhs, |a, b, p| a.mul(b, p, RM))
    }

    pub fn div_r(&self, rhs: &Self) -> Self {
        assert!(!rhs.is_zero(), "HiReal division by zero");
        self.bin2(rhs, |a, b, p| a.div(b, p, RM))
    }

    // Small-integer conveniences for formula code.
    pub fn muli(&self, k: i64) -> Self {
        Self::wrap(self.x.mul(&BigFloat::from_i64(k, self.p()), self.p(), RM), self.digits)
    }

    pub fn divi(&self, k: i64) -> Self {
        assert!(k != 0);
        Self::wrap(self.x.div(&BigFloat::from_i64(k, self.p()), self.p(), RM), self.digits)
    }

    pub fn addi(&self, k: i64) -> Self {
        Self::wrap(self.x.add(&BigFloat::from_i64(k, self.p()), self.p(), RM), self.digits)
    }

    pub fn subi(&self, k: i64) -> Self {
        Self::wrap(self.x.sub(&BigFloat::from_i64(k, self.p()), self.p(), RM), self.digits)
    }

    pub fn square(&self) -> Self {
        self.mul_r(self)
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero());
        Self::wrap(self.x.reciprocal(self.p(), RM), self.digits)
    }

    /// Square root; the argument must be non-negative.
    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of negative HiReal");
        Self::wrap(self.x.sqrt(self.p(), RM), self.digits)
    }

    pub fn sin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.x.sin(self.p(), RM, cc)), self.digits)
    }

    pub fn cos(&self) -> Self {
        Self::wrap(with_consts(|cc| self.x.cos(self.p(), RM, cc)), self.digits)
    }

    /// Arcsine; the argument must already be inside [-1, 1].
    pub fn asin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.x.asin(self.p(), RM, cc)), self.digits)
    }

    pub fn atan(&self) -> Self {
        Self::wrap(with_consts(|cc| self.x.atan(self.p(), RM, cc)), self.digits)
    }

    pub fn exp(&self) -> Self {
        Self::wrap(with_consts(|cc| self.x.exp(self.p(), RM, cc)), self.digits)
    }

    pub fn neg_r(&self) -> Self {
        Self::wrap(self.x.neg(), self.digits)
    }

    pub fn min_r(&self, rhs: &Self) -> Self {
        if self <= rhs {
            self.clone()
        } else {
            rhs.clone()
        }
    }

    pub fn max_r(&self, rhs: &Self) -> Self {
        if self >= rhs {
            self.clone()
        } else {
            rhs.clone()
        }
    }

    /// Base-2 exponent of the value (0.5 <= |m| < 1, value = m * 2^e), or
    /// None for zero.
    pub fn exponent2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            self.x.exponent().map(|e| e as i64)
        }
    }

    /// Decimal exponent estimate: |self| ~ 10^k with k within +-1.
    pub fn dec_exponent(&self) -> Option<i64> {
        self.exponent2().map(|e| (e as f64 / LOG2_10).floor() as i64)
    }

    /// Lossy conversion for sampling-grade consumers.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (words, n, sign, e, _) = self.x.as_raw_parts().expect("finite value");
        // value = sign * (mantissa / 2^n) * 2^e, words little-endian
        let nw = words.len();
        let mut acc = 0.0f64;
        for (i, w) in words.iter().enumerate().skip(nw.saturating_sub(2)) {
            let shift = e as i64 - (n as i64 - i as i64 * 64);
            acc += (*w as f64) * exp2i(shift);
        }
        if sign == Sign::Neg {
            -acc
        } else {
            acc
        }
    }

    /// Renders exactly `sig` significant decimal digits in normalized
    /// scientific form, e.g. `-7.500000e-2`. Zero renders as `0`.
    pub fn to_decimal_sig(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let (sign, mut digs, mut e10) = with_consts(|cc| {
            self.x
                .convert_to_radix(Radix::Dec, RoundingMode::None, cc)
                .expect("decimal conversion")
        });
        // strip leading zeros the converter may emit
        let lead = digs.iter().take_while(|&&d| d == 0).count();
        digs.drain(..lead);
        e10 -= lead as astro_float::Exponent;
        while digs.len() < sig + 1 {
            digs.push(0);
        }
        // round half-up at `sig` digits
        let mut keep: Vec<u8> = digs[..sig].to_vec();
        if digs[sig] >= 5 {
            let mut i = sig;
            loop {
                if i == 0 {
                    keep.insert(0, 1);
                    keep.pop();
                    e10 += 1;
                    break;
                }
                i -= 1;
                if keep[i] == 9 {
                    keep[i] = 0;
                } else {
                    keep[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::new();
        if sign == Sign::Neg {
            out.push('-');
        }
        out.push((b'0' + keep[0]) as char);
        if sig > 1 {
            out.push('.');
            for &d in &keep[1..] {
                out.push((b'0' + d) as char);
            }
        }
        // value = 0.d1d2... * 10^e10, so normalized exponent is e10 - 1
        out.push('e');
        out.push_str(&(e10 as i64 - 1).to_string());
        out
    }

    fn cmp_inner(&self, other: &Self) -> Ordering {
        match self.x.cmp(&other.x) {
            Some(v) if v < 0 => Ordering::Less,
            Some(v) if v > 0 => Ordering::Greater,
            Some(_) => Ordering::Equal,
            None => unreachable!("HiReal never holds NaN"),
        }
    }
}

/// 2^k as f64, saturating instead of overflowing.
fn exp2i(k: i64) -> f64 {
    if k > 1023 {
        f64::INFINITY
    } else if k < -1074 {
        0.0
    } else {
        f64::from_bits(if k >= -1022 {
            ((k + 1023) as u64) << 52
        } else {
            1u64 << (k + 1074) as u64
        })
    }
}

impl PartialEq for HiReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_inner(other) == Ordering::Equal
    }
}

impl PartialOrd for HiReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_inner(other))
    }
}

impl std::fmt::Display for HiReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_decimal_sig(self.digits))
    }
}

macro_rules! impl_bin_op {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl std::ops::$trait<&HiReal> for &HiReal {
            type Output = HiReal;
            fn $method(self, rhs: &HiReal) -> HiReal {
                self.$inner(rhs)
            }
        }
    };
}

impl_bin_op!(Add, add, add_r);
impl_bin_op!(Sub, sub, sub_r);
impl_bin_op!(Mul, mul, mul_r);
impl_bin_op!(Div, div, div_r);

impl std::ops::Neg for &HiReal {
    type Output = HiReal;
    fn neg(self) -> HiReal {
        self.neg_r()
    }
}

/// Arccosine with the domain contract used throughout the volume formulas:
/// arguments inside [-1, 1] are passed through, arguments outside by at most
/// `10^(-digits+5)` are clamped to the boundary, anything further out is a
/// domain error. Result lies in [0, pi].
pub fn arccos_hp(u: &HiReal) -> Result<HiReal> {
    let digits = u.digits();
    let one = HiReal::from_i64(1, digits);
    let band = HiReal::pow10(-(digits as i64) + 5, digits);
    let abs = u.abs();
    let v = if abs <= one {
        u.clone()
    } else if abs.sub_r(&one) <= band {
        if u.is_negative() {
            one.neg_r()
        } else {
            one
        }
    } else {
        return Err(Error::Domain(format!(
            "arccos argument {} outside [-1, 1] beyond the clamp band",
            u.to_decimal_sig(12)
        )));
    };
    Ok(HiReal::wrap(
        with_consts(|cc| v.x.acos(v.p(), RM, cc)),
        digits,
    ))
}

/// Arcsine with the same clamp-band contract as [`arccos_hp`].
pub fn arcsin_hp(u: &HiReal) -> Result<HiReal> {
    let digits = u.digits();
    let one = HiReal::from_i64(1, digits);
    let band = HiReal::pow10(-(digits as i64) + 5, digits);
    let abs = u.abs();
    let v = if abs <= one {
        u.clone()
    } else if abs.sub_r(&one) <= band {
        if u.is_negative() {
            one.neg_r()
        } else {
            one
        }
    } else {
        return Err(Error::Domain(format!(
            "arcsin argument {} outside [-1, 1] beyond the clamp band",
            u.to_decimal_sig(12)
        )));
    };
    Ok(v.asin())
}

/// Exact rational value of a decimal string as produced by
/// [`HiReal::to_decimal_sig`] (also accepts plain decimal literals).
pub fn decimal_str_to_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty decimal string".into()));
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    let negative = int_part.starts_with('-');
    let digits_str: String = int_part
        .trim_start_matches(['-', '+'])
        .chars()
        .chain(frac_part.chars())
        .collect();
    if digits_str.is_empty() || !digits_str.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad decimal mantissa in {s:?}")));
    }
    let mut num: BigInt = digits_str
        .parse()
        .map_err(|_| Error::Parse(format!("bad decimal mantissa in {s:?}")))?;
    if negative {
        num = -num;
    }
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    Ok(if shift >= 0 {
        BigRational::from_integer(num * ten.pow(shift as u32))
    } else {
        BigRational::new(num, ten.pow((-shift) as u32))
    })
}

/// Signed big integer nearest to `r` (ties away from zero).
pub fn rational_round(r: &BigRational) -> BigInt {
    r.round().to_integer()
}
