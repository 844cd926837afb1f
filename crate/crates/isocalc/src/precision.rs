//! Arbitrary-precision reals tagged with their decimal working precision.
//!
//! Thin layer over `astro_float::BigFloat`. A [`PrecisionCtx`] fixes the
//! binary working precision derived from a requested decimal digit count
//! plus guard digits, and every arithmetic call routes through a ctx so
//! the precision of intermediates is explicit at the call site.
//!
//! Decimal output always truncates toward zero. The digit string is
//! recovered from the binary mantissa with exact integer arithmetic, so a
//! printed value can be string-compared against truncated reference
//! constants without a rounded-up final digit getting in the way.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};

/// Guard digits carried by every working context on top of the requested
/// output digits.
pub const GUARD_DIGITS: u32 = 10;

/// Process-wide default output precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 64;

/// Hard ceiling on requested digits.
pub const MAX_DIGITS: u32 = 100_000;

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = 3.321928094887362;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

pub(crate) fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working-precision context: requested decimal digits plus the binary
/// precision actually used for arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionCtx {
    digits: u32,
    bits: usize,
}

impl PrecisionCtx {
    pub fn new(digits: u32) -> Result<Self> {
        if digits == 0 || digits > MAX_DIGITS {
            return Err(Error::InvalidParameter(format!(
                "digits must be in 1..={MAX_DIGITS}, got {digits}"
            )));
        }
        let bits = ((digits + GUARD_DIGITS) as f64 * LOG2_10).ceil() as usize + 8;
        Ok(Self { digits, bits })
    }

    /// Same requested digits, arithmetic carried out `extra` decimal digits
    /// wider. Used around cancellation-prone intermediates.
    pub fn boost(&self, extra: u32) -> Self {
        let digits = (self.digits + extra).min(MAX_DIGITS);
        let bits = ((digits + GUARD_DIGITS) as f64 * LOG2_10).ceil() as usize + 8;
        Self {
            digits: self.digits,
            bits: bits.max(self.bits),
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> usize {
        self.bits
    }
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        Self::new(DEFAULT_DIGITS).expect("default digits in range")
    }
}

/// An arbitrary-precision real remembering the decimal digit count it was
/// produced for.
#[derive(Clone)]
pub struct PrecisionReal {
    value: BigFloat,
    digits: u32,
}

impl PrecisionReal {
    pub(crate) fn from_raw(value: BigFloat, digits: u32) -> Self {
        Self { value, digits }
    }

    pub(crate) fn raw(&self) -> &BigFloat {
        &self.value
    }

    /// Re-tags a value computed in a boosted context with the caller's
    /// requested digits. The extra mantissa bits are kept.
    pub(crate) fn retag(self, ctx: &PrecisionCtx) -> Self {
        Self {
            value: self.value,
            digits: ctx.digits,
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    // ---- constructors ----

    pub fn zero(ctx: &PrecisionCtx) -> Self {
        Self::from_raw(BigFloat::from_u64(0, ctx.bits), ctx.digits)
    }

    pub fn one(ctx: &PrecisionCtx) -> Self {
        Self::from_raw(BigFloat::from_u64(1, ctx.bits), ctx.digits)
    }

    pub fn from_u64(v: u64, ctx: &PrecisionCtx) -> Self {
        Self::from_raw(BigFloat::from_u64(v, ctx.bits), ctx.digits)
    }

    pub fn from_i64(v: i64, ctx: &PrecisionCtx) -> Self {
        Self::from_raw(BigFloat::from_i64(v, ctx.bits), ctx.digits)
    }

    /// Exact conversion; precision is widened to hold every bit of `v`.
    pub fn from_bigint(v: &BigInt, ctx: &PrecisionCtx) -> Self {
        let mag = v.magnitude();
        let p = ctx.bits.max(mag.bits() as usize + 64);
        let mut acc = BigFloat::from_u64(0, p);
        let shift = BigFloat::from_u64(1u64 << 32, p);
        for limb in mag.to_u32_digits().iter().rev() {
            acc = acc.mul(&shift, p, RM);
            acc = acc.add(&BigFloat::from_u64(*limb as u64, p), p, RM);
        }
        if v.is_negative() {
            acc = acc.neg();
        }
        Self::from_raw(acc, ctx.digits)
    }

    pub fn from_ratio(r: &BigRational, ctx: &PrecisionCtx) -> Self {
        let num = Self::from_bigint(r.numer(), ctx);
        let den = Self::from_bigint(r.denom(), ctx);
        num.div(&den, ctx)
    }

    /// Parses a plain or scientific decimal literal.
    pub fn parse(s: &str, ctx: &PrecisionCtx) -> Result<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, astro_float::Radix::Dec, ctx.bits, RM, cc));
        if v.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "unparseable decimal literal {s:?}"
            )));
        }
        Ok(Self::from_raw(v, ctx.digits))
    }

    pub fn pi(ctx: &PrecisionCtx) -> Self {
        let v = with_consts(|cc| cc.pi(ctx.bits, RM));
        Self::from_raw(v, ctx.digits)
    }

    pub fn e(ctx: &PrecisionCtx) -> Self {
        let v = with_consts(|cc| cc.e(ctx.bits, RM));
        Self::from_raw(v, ctx.digits)
    }

    /// `10^exp` at working precision.
    pub fn pow10(exp: i64, ctx: &PrecisionCtx) -> Self {
        let ten = BigFloat::from_u64(10, ctx.bits);
        let mag = ten.powi(exp.unsigned_abs() as usize, ctx.bits, RM);
        let v = if exp < 0 {
            BigFloat::from_u64(1, ctx.bits).div(&mag, ctx.bits, RM)
        } else {
            mag
        };
        Self::from_raw(v, ctx.digits)
    }

    // ---- arithmetic ----

    pub fn add(&self, rhs: &Self, ctx: &PrecisionCtx) -> Self {
        Self::from_raw(self.value.add(&rhs.value, ctx.bits, RM), ctx.digits)
    }

    pub fn sub(&self, rhs: &Self, ctx: &PrecisionCtx) -> Self {
        Self::from_raw(self.value.sub(&rhs.value, ctx.bits, RM), ctx.digits)
    }

    pub fn mul(&self, rhs: &Self, ctx: &PrecisionCtx) -> Self {
        Self::from_raw(self.value.mul(&rhs.value, ctx.bits, RM), ctx.digits)
    }

    pub fn div(&self, rhs: &Self, ctx: &PrecisionCtx) -> Self {
        Self::from_raw(self.value.div(&rhs.value, ctx.bits, RM), ctx.digits)
    }

    pub fn mul_u64(&self, rhs: u64, ctx: &PrecisionCtx) -> Self {
        self.mul(&Self::from_u64(rhs, ctx), ctx)
    }

    pub fn div_u64(&self, rhs: u64, ctx: &PrecisionCtx) -> Self {
        self.div(&Self::from_u64(rhs, ctx), ctx)
    }

    pub fn neg(&self) -> Self {
        Self::from_raw(self.value.neg(), self.digits)
    }

    pub fn abs(&self) -> Self {
        Self::from_raw(self.value.abs(), self.digits)
    }

    pub fn recip(&self, ctx: &PrecisionCtx) -> Self {
        Self::from_raw(
            BigFloat::from_u64(1, ctx.bits).div(&self.value, ctx.bits, RM),
            ctx.digits,
        )
    }

    pub fn powi(&self, n: u64, ctx: &PrecisionCtx) -> Self {
        if n == 0 {
            return Self::one(ctx);
        }
        Self::from_raw(self.value.powi(n as usize, ctx.bits, RM), ctx.digits)
    }

    pub fn ln(&self, ctx: &PrecisionCtx) -> Result<Self> {
        if self.is_zero() || self.is_negative() {
            return Err(Error::Domain(format!(
                "ln requires a positive argument, got {}",
                self.to_sci(8)
            )));
        }
        let v = with_consts(|cc| self.value.ln(ctx.bits, RM, cc));
        Ok(Self::from_raw(v, ctx.digits))
    }

    pub fn exp(&self, ctx: &PrecisionCtx) -> Self {
        let v = with_consts(|cc| self.value.exp(ctx.bits, RM, cc));
        Self::from_raw(v, ctx.digits)
    }

    /// `ln(1 + 1/m)` for integer `m >= 1`, computed as `2·atanh(1/(2m+1))`.
    ///
    /// Evaluating `ln` at `1 + 1/m` directly would lose about `log10 m`
    /// digits to the rounding of the argument; the atanh form is evaluated
    /// at a perfectly-representable rational and keeps full relative
    /// accuracy.
    pub fn ln1p_recip(m: u64, ctx: &PrecisionCtx) -> Self {
        debug_assert!(m >= 1 && m < u64::MAX / 2);
        let t = Self::from_u64(2 * m + 1, ctx).recip(ctx);
        let a = with_consts(|cc| t.value.atanh(ctx.bits, RM, cc));
        Self::from_raw(
            a.mul(&BigFloat::from_u64(2, ctx.bits), ctx.bits, RM),
            ctx.digits,
        )
    }

    // ---- predicates and comparison ----

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative() && !self.value.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.value.is_nan() && !self.value.is_inf()
    }

    pub fn cmp(&self, rhs: &Self) -> Ordering {
        self.value
            .partial_cmp(&rhs.value)
            .expect("comparison of non-finite values")
    }

    pub fn lt(&self, rhs: &Self) -> bool {
        self.cmp(rhs) == Ordering::Less
    }

    pub fn le(&self, rhs: &Self) -> bool {
        self.cmp(rhs) != Ordering::Greater
    }

    pub fn gt(&self, rhs: &Self) -> bool {
        self.cmp(rhs) == Ordering::Greater
    }

    // ---- output ----

    /// Rough `f64` view for diagnostics and step-size heuristics.
    pub fn to_f64(&self) -> f64 {
        let Some((words, _, sign, e, _)) = self.value.as_raw_parts() else {
            return if self.value.is_inf_neg() {
                f64::NEG_INFINITY
            } else if self.value.is_inf_pos() {
                f64::INFINITY
            } else {
                f64::NAN
            };
        };
        if self.value.is_zero() {
            return 0.0;
        }
        let top = *words.last().expect("nonzero value has mantissa words") as f64;
        let v = top * 2f64.powi(e - 64);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Exact truncated digits: `(negative, digit string of length sig,
    /// exponent E)` with value = d1.d2...  × 10^E truncated toward zero.
    /// `None` for an exact zero.
    pub fn decimal_parts(&self, sig: u32) -> Result<Option<(bool, String, i64)>> {
        assert!(sig >= 1, "need at least one significant digit");
        if self.value.is_zero() {
            return Ok(None);
        }
        let (words, _, sign, e, _) = self
            .value
            .as_raw_parts()
            .ok_or_else(|| Error::Precision("cannot render a non-finite value".into()))?;
        let mut bytes = Vec::with_capacity(words.len() * 8);
        for w in words {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        let m = BigUint::from_bytes_le(&bytes);
        let n = (words.len() * 64) as i64;
        let s = e as i64 - n;
        let bitlen = m.bits() as i64 + s;
        if bitlen.unsigned_abs() > 400_000 {
            return Err(Error::Precision(format!(
                "decimal exponent out of supported range (2^{bitlen})"
            )));
        }
        let mut e10 = ((bitlen - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let ten = BigUint::from(10u32);
        for _ in 0..4 {
            let t = sig as i64 - 1 - e10;
            let mut num = m.clone();
            let mut den = BigUint::one();
            if s >= 0 {
                num <<= s as usize;
            } else {
                den <<= (-s) as usize;
            }
            if t >= 0 {
                num *= ten.pow(t as u32);
            } else {
                den *= ten.pow((-t) as u32);
            }
            let x = num / den;
            if x >= ten.pow(sig) {
                e10 += 1;
                continue;
            }
            if x < ten.pow(sig - 1) {
                e10 -= 1;
                continue;
            }
            return Ok(Some((sign == Sign::Neg, x.to_string(), e10)));
        }
        Err(Error::Precision(
            "decimal exponent estimate did not settle".into(),
        ))
    }

    /// Plain decimal string with `sig` significant digits, truncated toward
    /// zero. `0` prints as `"0"`.
    pub fn to_decimal(&self, sig: u32) -> String {
        match self.decimal_parts(sig) {
            Err(_) => "non-finite".into(),
            Ok(None) => "0".into(),
            Ok(Some((neg, d, e10))) => {
                let mut out = String::new();
                if neg {
                    out.push('-');
                }
                if e10 >= sig as i64 {
                    out.push_str(&d);
                    for _ in 0..(e10 - sig as i64 + 1) {
                        out.push('0');
                    }
                } else if e10 >= 0 {
                    let split = (e10 + 1) as usize;
                    out.push_str(&d[..split]);
                    if split < d.len() {
                        out.push('.');
                        out.push_str(&d[split..]);
                    }
                } else {
                    out.push_str("0.");
                    for _ in 0..(-e10 - 1) {
                        out.push('0');
                    }
                    out.push_str(&d);
                }
                out
            }
        }
    }

    /// Scientific notation with `sig` significant digits, truncated.
    pub fn to_sci(&self, sig: u32) -> String {
        match self.decimal_parts(sig) {
            Err(_) => "non-finite".into(),
            Ok(None) => "0".into(),
            Ok(Some((neg, d, e10))) => {
                let mut out = String::new();
                if neg {
                    out.push('-');
                }
                out.push_str(&d[..1]);
                if d.len() > 1 {
                    out.push('.');
                    out.push_str(&d[1..]);
                }
                out.push('e');
                out.push_str(&e10.to_string());
                out
            }
        }
    }
}

impl fmt::Display for PrecisionReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(self.digits))
    }
}

impl fmt::Debug for PrecisionReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PrecisionReal({} @{}d)",
            self.to_sci(self.digits.min(20)),
            self.digits
        )
    }
}

impl PartialEq for PrecisionReal {
    fn eq(&self, other: &Self) -> bool {
        self.value.partial_cmp(&other.value) == Some(Ordering::Equal)
    }
}
