//! Rigorous real arithmetic on rational-endpoint enclosures.
//!
//! A [`CertifiedReal`] is a closed interval `[lo, hi]` with exact rational
//! endpoints that is guaranteed to contain the true value. Arithmetic is exact
//! on the endpoints; [`CertifiedReal::round_outward`] trims endpoint size by
//! rounding away from the interior, so containment is never lost.
//!
//! Every decision the rest of the crate takes (signs, floors, comparisons
//! against thresholds) goes through [`certified_sign`] or [`certified_floor`],
//! which re-evaluate at increasing precision until the enclosure separates
//! from the decision boundary or the [`PrecisionPolicy`] cap is reached.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval with exact rational endpoints containing a real number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CertifiedReal {
    lo: BigRational,
    hi: BigRational,
}

/// Outcome of a certified sign decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertifiedSign {
    Negative,
    Positive,
    /// The enclosure still contained zero at `bits`, the policy's cap.
    ZeroUnprovable { bits: u32 },
}

/// Precision escalation schedule for certified decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub initial_bits: u32,
    pub max_bits: u32,
    pub escalation_factor: u32,
}

/// Environment variable holding `initial:max` precision overrides in bits.
pub const PRECISION_ENV: &str = "REPDIGIT_PRECISION";

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            initial_bits: 192,
            max_bits: 1 << 20,
            escalation_factor: 2,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(initial_bits: u32, max_bits: u32, escalation_factor: u32) -> Result<Self> {
        if initial_bits < 64 {
            return Err(Error::InvalidInput(format!(
                "initial_bits must be at least 64, got {initial_bits}"
            )));
        }
        if max_bits < initial_bits {
            return Err(Error::InvalidInput(format!(
                "max_bits {max_bits} is below initial_bits {initial_bits}"
            )));
        }
        if escalation_factor < 2 {
            return Err(Error::InvalidInput(
                "escalation_factor must be at least 2".into(),
            ));
        }
        Ok(PrecisionPolicy {
            initial_bits,
            max_bits,
            escalation_factor,
        })
    }

    /// Reads [`PRECISION_ENV`] (`"initial:max"`), falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(spec) => Self::parse(&spec),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let default = Self::default();
        let (initial, max) = match spec.split_once(':') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (spec.trim(), ""),
        };
        let parse = |s: &str, fallback: u32| -> Result<u32> {
            if s.is_empty() {
                return Ok(fallback);
            }
            s.parse()
                .map_err(|_| Error::Parse(format!("bad precision value `{s}` in {PRECISION_ENV}")))
        };
        Self::new(
            parse(initial, default.initial_bits)?,
            parse(max, default.max_bits)?,
            default.escalation_factor,
        )
    }

    /// The precision levels tried in order; the last one is `max_bits`.
    pub fn levels(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut bits = self.initial_bits;
        loop {
            out.push(bits);
            if bits >= self.max_bits {
                break;
            }
            bits = bits.saturating_mul(self.escalation_factor).min(self.max_bits);
        }
        out
    }
}

pub(crate) fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

pub(crate) fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub(crate) fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `v * 2^s` for any signed `s`.
pub(crate) fn scale_pow2(v: &BigRational, s: i64) -> BigRational {
    if s >= 0 {
        BigRational::new(v.numer() << (s as u64), v.denom().clone())
    } else {
        BigRational::new(v.numer().clone(), v.denom() << ((-s) as u64))
    }
}

/// Rough `log2 |v|`, exact to within one.
fn approx_log2(v: &BigRational) -> i64 {
    v.numer().bits() as i64 - v.denom().bits() as i64
}

fn round_to_bits(v: &BigRational, bits: u32, up: bool) -> BigRational {
    if v.is_zero() {
        return v.clone();
    }
    let s = bits as i64 - approx_log2(v);
    let scaled = scale_pow2(v, s);
    let n = if up {
        scaled.ceil().to_integer()
    } else {
        scaled.floor().to_integer()
    };
    scale_pow2(&BigRational::from_integer(n), -s)
}

/// Exact `floor(log10 |v|)` for nonzero `v`.
pub(crate) fn decimal_exponent(v: &BigRational) -> i64 {
    let a = v.abs();
    let ten = int(10);
    let mut e = (approx_log2(&a) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |e: i64| -> BigRational {
        if e >= 0 {
            int(num_traits::pow(BigInt::from(10), e as usize))
        } else {
            int(1) / int(num_traits::pow(BigInt::from(10), (-e) as usize))
        }
    };
    let mut p = pow10(e);
    while p > a {
        e -= 1;
        p = &p / &ten;
    }
    loop {
        let next = &p * &ten;
        if next > a {
            break;
        }
        e += 1;
        p = next;
    }
    e
}

fn pow10_rat(e: i64) -> BigRational {
    if e >= 0 {
        int(num_traits::pow(BigInt::from(10), e as usize))
    } else {
        int(1) / int(num_traits::pow(BigInt::from(10), (-e) as usize))
    }
}

/// Smallest number with `sig` significant decimal digits that is `>= x`.
///
/// Used to inflate constants the way hand-written bound chains do
/// (`9.76..e13` becomes `9.8e13`), without ever rounding inward.
pub fn round_up_significant(x: &BigRational, sig: u32) -> BigRational {
    if !x.is_positive() {
        return x.clone();
    }
    let e = decimal_exponent(x) - (sig as i64 - 1);
    let unit = pow10_rat(e);
    let m = (x / &unit).ceil();
    m * unit
}

/// Decimal string of `v` rounded to `sig` significant digits in the given
/// direction (`up` rounds toward +inf). Trailing zeros after the point are
/// trimmed; no exponent notation.
pub fn to_decimal_string(v: &BigRational, sig: u32, up: bool) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let e = decimal_exponent(v);
    let scale = sig as i64 - 1 - e;
    let scaled = v * pow10_rat(scale);
    let n = if up {
        scaled.ceil().to_integer()
    } else {
        scaled.floor().to_integer()
    };
    render_scaled(&n, scale)
}

fn render_scaled(n: &BigInt, scale: i64) -> String {
    let neg = n.is_negative();
    let digits = n.abs().to_string();
    let mut body = if scale <= 0 {
        let mut s = digits;
        s.push_str(&"0".repeat((-scale) as usize));
        s
    } else {
        let scale = scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac) = padded.split_at(padded.len() - scale);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    };
    if neg && body != "0" {
        body.insert(0, '-');
    }
    body
}

/// Scientific-notation rendering of `v` to `sig` significant digits
/// (round to nearest), e.g. `9.76143e13`.
pub fn to_scientific(v: &BigRational, sig: u32) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let mut e = decimal_exponent(v);
    let scale = sig as i64 - 1 - e;
    let scaled = v * pow10_rat(scale);
    let mut n = scaled.round().to_integer();
    let limit = num_traits::pow(BigInt::from(10), sig as usize);
    if n.abs() >= limit {
        n /= 10;
        e += 1;
    }
    let neg = n.is_negative();
    let digits = n.abs().to_string();
    let (lead, rest) = digits.split_at(1);
    let rest = rest.trim_end_matches('0');
    let mantissa = if rest.is_empty() {
        lead.to_string()
    } else {
        format!("{lead}.{rest}")
    };
    let sign = if neg { "-" } else { "" };
    if e == 0 {
        format!("{sign}{mantissa}")
    } else {
        format!("{sign}{mantissa}e{e}")
    }
}

/// Parses `-12.345e-6`-style decimal literals into exact rationals.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a decimal number: `{s}`"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let mut v = BigRational::from_integer(n) * pow10_rat(exp - frac.len() as i64);
    if neg {
        v = -v;
    }
    Ok(v)
}

/// Wire form of an enclosure: decimal endpoint strings, rounded outward.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: String,
    pub hi: String,
}

/// Significant digits used when serializing enclosures.
pub const ENCLOSURE_DIGITS: u32 = 120;

impl CertifiedReal {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInput(format!(
                "enclosure endpoints out of order: {lo} > {hi}"
            )));
        }
        Ok(CertifiedReal { lo, hi })
    }

    pub fn exact(v: BigRational) -> Self {
        CertifiedReal {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::exact(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        Self::exact(rat(n, d))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn is_subset_of(&self, other: &CertifiedReal) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn overlaps(&self, other: &CertifiedReal) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Sign if the enclosure excludes zero (or is exactly zero).
    pub fn sign_if_certain(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified comparison against an exact rational, if decidable.
    pub fn cmp_rational(&self, v: &BigRational) -> Option<Ordering> {
        if &self.lo > v {
            Some(Ordering::Greater)
        } else if &self.hi < v {
            Some(Ordering::Less)
        } else if self.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn floor_if_certain(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    pub fn ceil_hi(&self) -> BigInt {
        self.hi.ceil().to_integer()
    }

    /// Rounds endpoints away from the interior to about `bits` significant bits.
    pub fn round_outward(&self, bits: u32) -> Self {
        CertifiedReal {
            lo: round_to_bits(&self.lo, bits, false),
            hi: round_to_bits(&self.hi, bits, true),
        }
    }

    pub fn abs(&self) -> Self {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = std::cmp::max(-self.lo.clone(), self.hi.clone());
            CertifiedReal {
                lo: BigRational::zero(),
                hi: m,
            }
        } else if self.hi.is_negative() || self.hi.is_zero() {
            CertifiedReal {
                lo: -self.hi.clone(),
                hi: -self.lo.clone(),
            }
        } else {
            self.clone()
        }
    }

    pub fn max(&self, other: &CertifiedReal) -> Self {
        CertifiedReal {
            lo: std::cmp::max(&self.lo, &other.lo).clone(),
            hi: std::cmp::max(&self.hi, &other.hi).clone(),
        }
    }

    pub fn min(&self, other: &CertifiedReal) -> Self {
        CertifiedReal {
            lo: std::cmp::min(&self.lo, &other.lo).clone(),
            hi: std::cmp::min(&self.hi, &other.hi).clone(),
        }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &CertifiedReal) -> Self {
        CertifiedReal {
            lo: std::cmp::min(&self.lo, &other.lo).clone(),
            hi: std::cmp::max(&self.hi, &other.hi).clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if !self.lo.is_positive() && !self.hi.is_negative() {
            return if self.is_exact() {
                Err(Error::DivisionByZero)
            } else {
                // zero not excluded yet; more precision may fix it
                Err(Error::PrecisionExhausted { bits: 0 })
            };
        }
        Ok(CertifiedReal {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn checked_div(&self, other: &CertifiedReal) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        self * &CertifiedReal::exact(k.clone())
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = CertifiedReal::from_integer(1);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Enclosure of `min_z |x - z|` over integers `z`; always within `[0, 1/2]`.
    pub fn nearest_integer_distance(&self) -> Self {
        let half = rat(1, 2);
        if self.width() >= int(1) {
            return CertifiedReal {
                lo: BigRational::zero(),
                hi: half,
            };
        }
        let dist = |t: &BigRational| -> BigRational {
            let frac = t - t.floor();
            std::cmp::min(frac.clone(), int(1) - frac)
        };
        let (dl, dh) = (dist(&self.lo), dist(&self.hi));
        let has_integer = self.hi.floor() >= self.lo.ceil();
        let has_half = (&self.hi - &half).floor() >= (&self.lo - &half).ceil();
        let lo = if has_integer {
            BigRational::zero()
        } else {
            std::cmp::min(dl.clone(), dh.clone())
        };
        let hi = if has_half { half } else { std::cmp::max(dl, dh) };
        CertifiedReal { lo, hi }
    }

    /// Natural log of a positive enclosure, widened to a `2^-(bits+2)` grid.
    pub fn ln(&self, bits: u32) -> Result<Self> {
        if !self.lo.is_positive() {
            return if self.hi.is_positive() && !self.is_exact() {
                Err(Error::PrecisionExhausted { bits })
            } else {
                Err(Error::NonPositiveLog)
            };
        }
        if self.is_exact() && self.lo.is_one() {
            return Ok(CertifiedReal::from_integer(0));
        }
        let (lo, _) = ln_raw(&self.lo, bits);
        let (_, hi) = ln_raw(&self.hi, bits);
        Ok(pad_to_grid(&lo, &hi, bits))
    }

    /// Enclosure of `sqrt(self)` for a nonnegative enclosure.
    pub fn sqrt(&self, bits: u32) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::InvalidInput("square root of a negative enclosure".into()));
        }
        let (lo, _) = sqrt_bounds(&self.lo, bits);
        let (_, hi) = sqrt_bounds(&self.hi, bits);
        Ok(CertifiedReal { lo, hi })
    }

    pub fn to_enclosure(&self) -> Enclosure {
        Enclosure {
            lo: to_decimal_string(&self.lo, ENCLOSURE_DIGITS, false),
            hi: to_decimal_string(&self.hi, ENCLOSURE_DIGITS, true),
        }
    }

    pub fn from_enclosure(e: &Enclosure) -> Result<Self> {
        CertifiedReal::new(parse_decimal(&e.lo)?, parse_decimal(&e.hi)?)
    }
}

impl fmt::Display for CertifiedReal {
    /// `midpoint ± halfwidth`, six significant digits on the midpoint.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mid = to_scientific(&self.midpoint(), 6);
        if self.is_exact() {
            write!(f, "{mid}")
        } else {
            let half = self.width() / int(2);
            write!(f, "{mid} ± {}", to_scientific(&round_up_significant(&half, 2), 2))
        }
    }
}

impl Add for &CertifiedReal {
    type Output = CertifiedReal;
    fn add(self, rhs: &CertifiedReal) -> CertifiedReal {
        CertifiedReal {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &CertifiedReal {
    type Output = CertifiedReal;
    fn sub(self, rhs: &CertifiedReal) -> CertifiedReal {
        CertifiedReal {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Mul for &CertifiedReal {
    type Output = CertifiedReal;
    fn mul(self, rhs: &CertifiedReal) -> CertifiedReal {
        let cands = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = cands.iter().min().cloned().unwrap();
        let hi = cands.iter().max().cloned().unwrap();
        CertifiedReal { lo, hi }
    }
}

impl Neg for &CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        CertifiedReal {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, rhs: CertifiedReal) -> CertifiedReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CertifiedReal> for CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, rhs: &CertifiedReal) -> CertifiedReal {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        -&self
    }
}

/// `atanh(p/q) * 2^w` lies in `[s, s + err]` for `0 <= p/q <= 1/2`.
fn atanh_fixed(p: &BigInt, q: &BigInt, w: u64) -> (BigInt, BigInt) {
    let p2 = p * p;
    let q2 = q * q;
    let mut term = (p << w) / q;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !term.is_zero() {
        sum += &term / BigInt::from(2 * k + 1);
        term = term * &p2 / &q2;
        k += 1;
    }
    // truncation deficit <= 2k, tail after the last nonzero term <= 4(k+1)/3
    (sum, BigInt::from(4 * k + 8))
}

/// Raw enclosure `[lo, hi]` of `ln x` for rational `x > 0`, about `bits + 40`
/// fractional bits wide.
fn ln_raw(x: &BigRational, bits: u32) -> (BigRational, BigRational) {
    let (n, d) = (x.numer().clone(), x.denom().clone());
    let mut e: i64 = n.bits() as i64 - d.bits() as i64;
    let (mut yn, mut yd) = if e >= 0 {
        (n, d << (e as u64))
    } else {
        (n << ((-e) as u64), d)
    };
    if &yn * &yn > BigInt::from(2) * &yd * &yd {
        yd <<= 1u32;
        e += 1;
    } else if BigInt::from(2) * &yn * &yn < &yd * &yd {
        yn <<= 1u32;
        e -= 1;
    }
    let w = bits as u64 + 40 + (64 - e.unsigned_abs().leading_zeros()) as u64;
    let zp = &yn - &yd;
    let zq = &yn + &yd;
    let (s, err) = atanh_fixed(&zp.abs(), &zq, w);
    // ln y = 2 atanh(z)
    let (mut ly_lo, mut ly_hi): (BigInt, BigInt) = (&s * 2, (&s + &err) * 2);
    if zp.is_negative() {
        (ly_lo, ly_hi) = (-ly_hi, -ly_lo);
    }
    let (l2, l2err) = atanh_fixed(&BigInt::one(), &BigInt::from(3), w);
    let (l2_lo, l2_hi) = (&l2 * 2, (&l2 + &l2err) * 2);
    let eb = BigInt::from(e);
    let (e_lo, e_hi) = if e >= 0 {
        (&eb * &l2_lo, &eb * &l2_hi)
    } else {
        (&eb * &l2_hi, &eb * &l2_lo)
    };
    let den = pow2(w);
    (
        BigRational::new(e_lo + ly_lo, den.clone()),
        BigRational::new(e_hi + ly_hi, den),
    )
}

/// Pads a raw enclosure out to the `2^-(bits+2)` grid plus one grid step.
/// Any later enclosure computed at `2*bits` or more then nests inside.
fn pad_to_grid(lo: &BigRational, hi: &BigRational, bits: u32) -> CertifiedReal {
    let g = bits as i64 + 2;
    let step = scale_pow2(&int(1), -g);
    let lo = scale_pow2(&int(scale_pow2(lo, g).floor().to_integer()), -g) - &step;
    let hi = scale_pow2(&int(scale_pow2(hi, g).ceil().to_integer()), -g) + &step;
    CertifiedReal { lo, hi }
}

/// Enclosure of `ln x` for a positive rational, width at most `2^(1-bits)`.
pub fn enclose_log_rational(x: &BigRational, bits: u32) -> Result<CertifiedReal> {
    CertifiedReal::exact(x.clone()).ln(bits)
}

/// `[floor, ceil]`-style bounds on `sqrt(x)` with about `bits` relative bits.
fn sqrt_bounds(x: &BigRational, bits: u32) -> (BigRational, BigRational) {
    if x.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    // sqrt(n/d) = sqrt(n d 4^k) / (d 2^k)
    let k = bits as u64 + 8 + (x.denom().bits() / 2);
    let radicand = (x.numer() * x.denom()) << (2 * k);
    let s = radicand.sqrt();
    let den = x.denom() << k;
    let lo = BigRational::new(s.clone(), den.clone());
    let hi = if &s * &s == radicand {
        lo.clone()
    } else {
        BigRational::new(s + 1, den)
    };
    (lo, hi)
}

/// Enclosure of `sqrt(x)` for a nonnegative rational.
pub fn enclose_sqrt_rational(x: &BigRational, bits: u32) -> Result<CertifiedReal> {
    CertifiedReal::exact(x.clone()).sqrt(bits)
}

fn retryable(e: &Error) -> bool {
    matches!(e, Error::PrecisionExhausted { .. })
}

/// Decides the sign of a quantity, re-evaluating via `refine(bits)` along the
/// policy's schedule. Never guesses: an enclosure that still contains zero at
/// the cap yields [`CertifiedSign::ZeroUnprovable`].
pub fn certified_sign<F>(mut refine: F, policy: &PrecisionPolicy) -> Result<CertifiedSign>
where
    F: FnMut(u32) -> Result<CertifiedReal>,
{
    let mut last = policy.initial_bits;
    for bits in policy.levels() {
        last = bits;
        let x = match refine(bits) {
            Ok(x) => x,
            Err(e) if retryable(&e) => continue,
            Err(e) => return Err(e),
        };
        if x.lo.is_positive() {
            return Ok(CertifiedSign::Positive);
        }
        if x.hi.is_negative() {
            return Ok(CertifiedSign::Negative);
        }
    }
    Ok(CertifiedSign::ZeroUnprovable { bits: last })
}

/// Certified `floor(x)`, escalating precision while the enclosure straddles
/// an integer. Errors with [`Error::PrecisionExhausted`] at the cap.
pub fn certified_floor<F>(mut refine: F, policy: &PrecisionPolicy) -> Result<BigInt>
where
    F: FnMut(u32) -> Result<CertifiedReal>,
{
    let mut last = policy.initial_bits;
    for bits in policy.levels() {
        last = bits;
        let x = match refine(bits) {
            Ok(x) => x,
            Err(e) if retryable(&e) => continue,
            Err(e) => return Err(e),
        };
        if let Some(n) = x.floor_if_certain() {
            return Ok(n);
        }
    }
    Err(Error::PrecisionExhausted { bits: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        parse_decimal(s).unwrap()
    }

    fn enc(lo: &str, hi: &str) -> CertifiedReal {
        CertifiedReal::new(r(lo), r(hi)).unwrap()
    }

    #[test]
    fn log_of_ten_contains_reference() {
        let l = enclose_log_rational(&int(10), 64).unwrap();
        // ln 10 = 2.30258509299404568401799145468436420760110148862877...
        assert!(l.contains(&r("2.302585092994045684017991454684364")));
        assert!(l.width() <= scale_pow2(&int(1), -63));
    }

    #[test]
    fn log_of_one_is_exact_zero() {
        for bits in [64, 200, 1000] {
            let l = enclose_log_rational(&int(1), bits).unwrap();
            assert!(l.is_exact() && l.lo().is_zero());
        }
    }

    #[test]
    fn log_rejects_nonpositive() {
        assert_eq!(
            enclose_log_rational(&int(0), 64).unwrap_err(),
            Error::NonPositiveLog
        );
        assert_eq!(
            enclose_log_rational(&int(-3), 64).unwrap_err(),
            Error::NonPositiveLog
        );
    }

    #[test]
    fn log_small_and_large_arguments() {
        // ln(1/1000) = -6.907755278982137052539...
        let l = enclose_log_rational(&rat(1, 1000), 80).unwrap();
        assert!(l.contains(&r("-6.90775527898213705205397436405")));
        // ln(2^300) = 300 ln 2 = 207.944154167983592825169636437...
        let l = enclose_log_rational(&int(pow2(300)), 80).unwrap();
        assert!(l.contains(&r("207.944154167983592825169636437")));
    }

    #[test]
    fn sign_on_separated_enclosure() {
        let x = enc("0.24", "0.25");
        let s = certified_sign(|_| Ok(x.clone()), &PrecisionPolicy::default()).unwrap();
        assert_eq!(s, CertifiedSign::Positive);
        let s = certified_sign(|_| Ok(-&x), &PrecisionPolicy::default()).unwrap();
        assert_eq!(s, CertifiedSign::Negative);
    }

    #[test]
    fn sign_of_exact_zero_is_unprovable() {
        let policy = PrecisionPolicy::new(64, 1024, 2).unwrap();
        let mut calls = 0;
        let s = certified_sign(
            |bits| {
                calls += 1;
                let w = scale_pow2(&int(1), -(bits as i64));
                Ok(CertifiedReal::new(-w.clone(), w).unwrap())
            },
            &policy,
        )
        .unwrap();
        assert_eq!(s, CertifiedSign::ZeroUnprovable { bits: 1024 });
        assert_eq!(calls, policy.levels().len());
    }

    #[test]
    fn floor_simple_and_straddling() {
        let p = PrecisionPolicy::default();
        assert_eq!(
            certified_floor(|_| Ok(enc("1.30", "1.31")), &p).unwrap(),
            BigInt::from(1)
        );
        // straddles 3 at first, then resolves just below it
        let mut seen = Vec::new();
        let n = certified_floor(
            |bits| {
                seen.push(bits);
                if bits < 384 {
                    Ok(enc("2.999", "3.001"))
                } else {
                    Ok(enc("2.9999999999", "2.99999999995"))
                }
            },
            &p,
        )
        .unwrap();
        assert_eq!(n, BigInt::from(2));
        assert_eq!(seen, vec![192, 384]);
    }

    #[test]
    fn floor_of_unresolvable_integer_exhausts() {
        let p = PrecisionPolicy::new(64, 256, 2).unwrap();
        let e = certified_floor(
            |bits| {
                let w = scale_pow2(&int(1), -(bits as i64));
                Ok(CertifiedReal::new(int(3) - &w, int(3) + w).unwrap())
            },
            &p,
        )
        .unwrap_err();
        assert_eq!(e, Error::PrecisionExhausted { bits: 256 });
    }

    #[test]
    fn nearest_integer_distance_cases() {
        let d = CertifiedReal::exact(rat(7, 2)).nearest_integer_distance();
        assert_eq!(d, CertifiedReal::exact(rat(1, 2)));
        let d = CertifiedReal::from_integer(7).nearest_integer_distance();
        assert_eq!(d, CertifiedReal::from_integer(0));
        let d = enc("2.9", "3.2").nearest_integer_distance();
        assert_eq!(d, enc("0", "0.2"));
        let d = enc("-1.45", "-1.4").nearest_integer_distance();
        assert_eq!(d, enc("0.4", "0.45"));
        let d = enc("0.4", "0.7").nearest_integer_distance();
        assert_eq!(d, enc("0.3", "0.5"));
        let d = enc("0", "5").nearest_integer_distance();
        assert_eq!(d, enc("0", "0.5"));
    }

    #[test]
    fn division_by_enclosure_containing_zero() {
        let one = CertifiedReal::from_integer(1);
        assert_eq!(
            one.checked_div(&CertifiedReal::from_integer(0)).unwrap_err(),
            Error::DivisionByZero
        );
        assert!(matches!(
            one.checked_div(&enc("-0.1", "0.1")).unwrap_err(),
            Error::PrecisionExhausted { .. }
        ));
    }

    #[test]
    fn significant_rounding() {
        assert_eq!(round_up_significant(&r("9.76e13"), 2), r("9.8e13"));
        assert_eq!(round_up_significant(&r("9.8e13"), 2), r("9.8e13"));
        assert_eq!(round_up_significant(&r("98000000000001.386"), 2), r("9.9e13"));
        assert_eq!(round_up_significant(&r("6.8392e30"), 2), r("6.9e30"));
        assert_eq!(round_up_significant(&r("9.95"), 2), r("10"));
        assert_eq!(round_up_significant(&r("0.0123"), 2), r("0.013"));
    }

    #[test]
    fn decimal_rendering_round_trips_outward() {
        let third = rat(1, 3);
        let lo = to_decimal_string(&third, 10, false);
        let hi = to_decimal_string(&third, 10, true);
        assert_eq!(lo, "0.3333333333");
        assert_eq!(hi, "0.3333333334");
        assert!(r(&lo) <= third && third <= r(&hi));
        assert_eq!(to_decimal_string(&r("-2.5"), 5, true), "-2.5");
        assert_eq!(to_decimal_string(&r("123456"), 3, true), "124000");
        assert_eq!(to_scientific(&r("97614269810923.2"), 6), "9.76143e13");
        assert_eq!(to_scientific(&r("0.00412"), 3), "4.12e-3");
    }

    #[test]
    fn parse_decimal_forms() {
        assert_eq!(r("12.4"), rat(62, 5));
        assert_eq!(r("-0.5"), rat(-1, 2));
        assert_eq!(r("6.9e30"), int(num_traits::pow(BigInt::from(10), 29) * 69));
        assert_eq!(r(".25"), rat(1, 4));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("").is_err());
    }

    #[test]
    fn sqrt_encloses() {
        let s = enclose_sqrt_rational(&int(3), 100).unwrap();
        assert!(s.contains(&r("1.7320508075688772935274463415058723669428")));
        let s = enclose_sqrt_rational(&rat(9, 4), 100).unwrap();
        assert_eq!(s, CertifiedReal::exact(rat(3, 2)));
    }

    #[test]
    fn policy_levels_and_env_parse() {
        let p = PrecisionPolicy::default();
        let levels = p.levels();
        assert_eq!(levels.first(), Some(&192));
        assert_eq!(levels.last(), Some(&(1 << 20)));
        let p = PrecisionPolicy::parse("256:4096").unwrap();
        assert_eq!(p.levels(), vec![256, 512, 1024, 2048, 4096]);
        assert!(PrecisionPolicy::parse("32:64").is_err());
        assert!(PrecisionPolicy::parse("x").is_err());
    }
}
