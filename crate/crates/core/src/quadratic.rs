//! Exact arithmetic in real quadratic fields `Q(√D)`, Binet evaluation and
//! logarithmic heights.
//!
//! Elements are stored as `(a + b√D)/c` in canonical form: `c > 0`,
//! `gcd(a, b, c) = 1`, and rationals (`b = 0`) carry radicand 1 so they mix
//! freely with any field. Combining two irrationals from different fields
//! panics; nothing in this crate does that.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certified::{
    enclose_log_rational, enclose_sqrt_rational, int, scale_pow2, CertifiedReal,
};
use crate::error::{Error, Result};
use crate::recurrence::SequenceSpec;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    radicand: u64,
}

fn is_squarefree(d: u64) -> bool {
    let mut p = 2u64;
    while p.saturating_mul(p) <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Sign of `a + b√d` by exact integer comparison.
fn sign_of(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    let sa = a.cmp(&BigInt::zero());
    let sb = b.cmp(&BigInt::zero());
    if sb == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    let lhs = a * a;
    let rhs = b * b * BigInt::from(d);
    match lhs.cmp(&rhs) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

impl QuadraticNumber {
    /// `(a + b√radicand)/c`; the radicand must be squarefree and above 1
    /// unless `b = 0`.
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        radicand: u64,
    ) -> Result<Self> {
        let (a, b, c) = (a.into(), b.into(), c.into());
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if !b.is_zero() && (radicand < 2 || !is_squarefree(radicand)) {
            return Err(Error::InvalidInput(format!(
                "radicand {radicand} is not a squarefree integer above 1"
            )));
        }
        Ok(Self::canonical(a, b, c, radicand))
    }

    fn canonical(mut a: BigInt, mut b: BigInt, mut c: BigInt, radicand: u64) -> Self {
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        let radicand = if b.is_zero() { 1 } else { radicand };
        QuadraticNumber { a, b, c, radicand }
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::canonical(n.into(), BigInt::zero(), BigInt::one(), 1)
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::canonical(r.numer().clone(), BigInt::zero(), r.denom().clone(), 1)
    }

    /// `√d` itself.
    pub fn sqrt_of(d: u64) -> Result<Self> {
        Self::new(0, 1, 1, d)
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    /// 1 for rationals.
    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        (self.is_rational() && self.c.is_one()).then(|| self.a.clone())
    }

    /// Whether `self` and `other` lie in a common field (rationals lie in every one).
    pub fn same_field(&self, other: &Self) -> bool {
        self.radicand == 1 || other.radicand == 1 || self.radicand == other.radicand
    }

    fn join_radicand(&self, other: &Self) -> u64 {
        match (self.radicand, other.radicand) {
            (1, d) | (d, 1) => d,
            (d, e) if d == e => d,
            (d, e) => panic!("cannot combine elements of Q(√{d}) and Q(√{e})"),
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadraticNumber {
            a: self.a.clone(),
            b: -self.b.clone(),
            c: self.c.clone(),
            radicand: self.radicand,
        }
    }

    /// `x · x̄`, always rational.
    pub fn norm(&self) -> BigRational {
        let n = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.radicand);
        BigRational::new(n, &self.c * &self.c)
    }

    /// `x + x̄`.
    pub fn trace(&self) -> BigRational {
        BigRational::new(&self.a * 2, self.c.clone())
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b, self.radicand)
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // 1/x = c x̄' / (a^2 - D b^2)
        let n = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.radicand);
        Ok(Self::canonical(
            &self.c * &self.a,
            -(&self.c * &self.b),
            n,
            self.radicand,
        ))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// Exact integer power by repeated squaring; negative powers invert.
    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Exact trichotomy of `self^n` against the integer `y`.
    pub fn compare_to_integer_power(&self, n: u32, y: &BigInt) -> Ordering {
        let p = self.pow(n as i64).expect("nonnegative power");
        (&p - &Self::from_integer(y.clone())).signum()
    }

    /// Enclosure with relative width at most `2^-bits`.
    pub fn to_interval(&self, bits: u32) -> CertifiedReal {
        if let Some(r) = self.to_rational() {
            return CertifiedReal::exact(r);
        }
        let a = CertifiedReal::exact(int(self.a.clone()));
        let b = int(self.b.clone());
        let inv_c = BigRational::new(BigInt::one(), self.c.clone());
        let d = int(self.radicand);
        let mut w = bits + 16 + self.b.bits() as u32;
        loop {
            let s = enclose_sqrt_rational(&d, w).expect("positive radicand");
            let x = (&a + &s.scale(&b)).scale(&inv_c);
            let mag = std::cmp::min(x.lo().abs(), x.hi().abs());
            if x.sign_if_certain().is_some()
                && scale_pow2(&x.width(), bits as i64 + 8) <= mag
            {
                return x.round_outward(bits + 16);
            }
            w *= 2;
        }
    }

    /// Natural log of a positive element, absolute width at most `2^(1-bits)`.
    pub fn ln(&self, bits: u32) -> Result<CertifiedReal> {
        if self.signum() != Ordering::Greater {
            return Err(Error::NonPositiveLog);
        }
        match self.to_rational() {
            Some(r) => enclose_log_rational(&r, bits),
            None => self.to_interval(bits + 8).ln(bits),
        }
    }

    /// Content-free integer minimal polynomial, leading coefficient first and
    /// positive. Degree 1 for rationals.
    pub fn minimal_polynomial(&self) -> Vec<BigInt> {
        let coeffs = if self.is_rational() {
            vec![self.c.clone(), -self.a.clone()]
        } else {
            // c^2 X^2 - 2ac X + (a^2 - D b^2)
            vec![
                &self.c * &self.c,
                -(BigInt::from(2) * &self.a * &self.c),
                &self.a * &self.a - &self.b * &self.b * BigInt::from(self.radicand),
            ]
        };
        let content = coeffs.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        coeffs.into_iter().map(|x| x / &content).collect()
    }

    /// If `self = ± unit^j · base^e` for integers `j, e`, returns `(sign, j, e)`.
    ///
    /// `unit` must be positive, irrational and of norm ±1. The exponent of `base` is
    /// read off the norm, then `j` is located numerically and confirmed
    /// exactly.
    pub fn unit_power_relation(&self, unit: &Self, base: &BigInt) -> Option<(i8, i64, i64)> {
        if self.is_zero()
            || unit.is_rational()
            || unit.signum() != Ordering::Greater
            || base <= &BigInt::one()
        {
            return None;
        }
        let un = unit.norm();
        if un.abs() != BigRational::one() {
            return None;
        }
        let n = self.norm().abs();
        let b2 = base * base;
        // |N(self)| = base^(2e)
        let (num, den) = (n.numer().clone(), n.denom().clone());
        let (big, e_sign) = if den.is_one() { (num.clone(), 1) } else { (den.clone(), -1) };
        if !(den.is_one() || num.is_one()) {
            return None;
        }
        let mut e = 0i64;
        let mut acc = big;
        while acc > BigInt::one() {
            if !(&acc % &b2).is_zero() {
                return None;
            }
            acc /= &b2;
            e += 1;
        }
        let e = e * e_sign;
        let scaled = self
            .checked_div(&Self::from_integer(base.clone()).pow(e).ok()?)
            .ok()?;
        let sign: i8 = if scaled.signum() == Ordering::Less { -1 } else { 1 };
        let scaled = scaled.abs();
        let u = unit;
        let lu = u.ln(64).ok()?;
        let ls = scaled.ln(64).ok()?;
        let est = ls.checked_div(&lu).ok()?.midpoint().round().to_integer();
        let est: i64 = est.try_into().ok()?;
        for j in [est, est - 1, est + 1] {
            if u.pow(j).ok()? == scaled {
                return Some((sign, j, e));
            }
        }
        None
    }
}

impl PartialOrd for QuadraticNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let surd = |b: &BigInt| -> String {
            if b.abs().is_one() {
                format!("√{}", self.radicand)
            } else {
                format!("{}√{}", b.abs(), self.radicand)
            }
        };
        let num = match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => self.a.to_string(),
            (true, false) => {
                let s = surd(&self.b);
                if self.b.is_negative() { format!("-{s}") } else { s }
            }
            (false, false) => {
                let op = if self.b.is_negative() { '-' } else { '+' };
                format!("{} {op} {}", self.a, surd(&self.b))
            }
        };
        if self.c.is_one() {
            write!(f, "{num}")
        } else if !self.a.is_zero() && !self.b.is_zero() {
            write!(f, "({num})/{}", self.c)
        } else {
            write!(f, "{num}/{}", self.c)
        }
    }
}

impl Add for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn add(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        let d = self.join_radicand(rhs);
        QuadraticNumber::canonical(
            &self.a * &rhs.c + &rhs.a * &self.c,
            &self.b * &rhs.c + &rhs.b * &self.c,
            &self.c * &rhs.c,
            d,
        )
    }
}

impl Sub for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn sub(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        self + &(-rhs)
    }
}

impl Mul for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn mul(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        let d = self.join_radicand(rhs);
        QuadraticNumber::canonical(
            &self.a * &rhs.a + &self.b * &rhs.b * BigInt::from(d),
            &self.a * &rhs.b + &self.b * &rhs.a,
            &self.c * &rhs.c,
            d,
        )
    }
}

impl Neg for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        QuadraticNumber {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: self.c.clone(),
            radicand: self.radicand,
        }
    }
}

impl Neg for QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $m(self, rhs: QuadraticNumber) -> QuadraticNumber {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&QuadraticNumber> for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $m(self, rhs: &QuadraticNumber) -> QuadraticNumber {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `U_n = A·αⁿ + B·βⁿ` for a recurrence `U_{n+1} = p U_n − q U_{n−1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinetForm {
    pub alpha: QuadraticNumber,
    pub beta: QuadraticNumber,
    pub coeff_a: QuadraticNumber,
    pub coeff_b: QuadraticNumber,
}

/// Writes `n > 0` as `s² · d` with `d` squarefree.
fn squarefree_split(n: u128) -> Result<(u128, u64)> {
    let mut rest = n;
    let mut s: u128 = 1;
    let mut d: u128 = 1;
    let mut p: u128 = 2;
    while p * p <= rest {
        if p > (1 << 22) {
            return Err(Error::Unsupported(format!(
                "discriminant {n} too large to factor"
            )));
        }
        while rest.is_multiple_of(p * p) {
            rest /= p * p;
            s *= p;
        }
        if rest.is_multiple_of(p) {
            rest /= p;
            d *= p;
        }
        p += 1;
    }
    d *= rest;
    let d = u64::try_from(d)
        .map_err(|_| Error::Unsupported(format!("radicand of {n} exceeds 64 bits")))?;
    Ok((s, d))
}

impl BinetForm {
    pub fn from_recurrence(p: i64, q: i64, u0: &BigInt, u1: &BigInt) -> Result<Self> {
        let disc = (p as i128) * (p as i128) - 4 * (q as i128);
        if disc <= 0 {
            return Err(Error::InvalidInput(format!(
                "characteristic polynomial x^2 - {p}x + {q} has no distinct real roots"
            )));
        }
        let (s, d) = squarefree_split(disc as u128)?;
        let (alpha, beta) = if d == 1 {
            let s = BigInt::from(s);
            (
                QuadraticNumber::from_rational(&BigRational::new(BigInt::from(p) + &s, 2.into())),
                QuadraticNumber::from_rational(&BigRational::new(BigInt::from(p) - &s, 2.into())),
            )
        } else {
            (
                QuadraticNumber::new(p, BigInt::from(s), 2, d)?,
                QuadraticNumber::new(p, -BigInt::from(s), 2, d)?,
            )
        };
        let u0q = QuadraticNumber::from_integer(u0.clone());
        let u1q = QuadraticNumber::from_integer(u1.clone());
        let diff = &alpha - &beta;
        let coeff_a = (&u1q - &(&u0q * &beta)).checked_div(&diff)?;
        let coeff_b = (&(&u0q * &alpha) - &u1q).checked_div(&diff)?;
        Ok(BinetForm {
            alpha,
            beta,
            coeff_a,
            coeff_b,
        })
    }

    pub fn evaluate(&self, n: u64) -> QuadraticNumber {
        let n = n as i64;
        let a = &self.coeff_a * &self.alpha.pow(n).expect("nonnegative");
        let b = &self.coeff_b * &self.beta.pow(n).expect("nonnegative");
        a + b
    }
}

/// Evaluates the closed form exactly; the surd part must cancel.
pub fn binet_term(spec: &SequenceSpec, n: u64) -> Result<BigInt> {
    let v = spec.binet().evaluate(n);
    v.to_integer().ok_or_else(|| {
        Error::Internal(format!(
            "closed form of {} at n = {n} did not collapse to an integer: {v}",
            spec.name()
        ))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightKind {
    Exact,
    Estimate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightValue {
    pub value: CertifiedReal,
    pub kind: HeightKind,
}

/// `max(0, ln |x|)` for nonzero `x`.
fn log_plus(x: &QuadraticNumber, bits: u32) -> Result<CertifiedReal> {
    let ax = x.abs();
    if ax <= QuadraticNumber::one() {
        Ok(CertifiedReal::from_integer(0))
    } else {
        ax.ln(bits)
    }
}

/// Absolute logarithmic height from the minimal polynomial.
pub fn height_exact(x: &QuadraticNumber, bits: u32) -> Result<HeightValue> {
    let value = if x.is_zero() {
        CertifiedReal::from_integer(0)
    } else if x.is_rational() {
        let m = std::cmp::max(x.a.abs(), x.c.clone());
        enclose_log_rational(&int(m), bits)?
    } else {
        let lead = x.minimal_polynomial()[0].clone();
        let sum = enclose_log_rational(&int(lead), bits)?
            + log_plus(x, bits)?
            + log_plus(&x.conjugate(), bits)?;
        sum.scale(&BigRational::new(1.into(), 2.into()))
    };
    Ok(HeightValue {
        value,
        kind: HeightKind::Exact,
    })
}

/// Expression tree for height estimates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeightExpr {
    Leaf(QuadraticNumber),
    Add(Box<HeightExpr>, Box<HeightExpr>),
    Sub(Box<HeightExpr>, Box<HeightExpr>),
    Mul(Box<HeightExpr>, Box<HeightExpr>),
    Div(Box<HeightExpr>, Box<HeightExpr>),
    Pow(Box<HeightExpr>, i64),
    /// `base^g` for an unknown integer `g ≥ 0`; contributes `g·h(base)`.
    SymbolicPow(Box<HeightExpr>),
}

macro_rules! height_op {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl std::ops::$tr for HeightExpr {
            type Output = HeightExpr;
            fn $method(self, rhs: HeightExpr) -> HeightExpr {
                HeightExpr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

height_op!(Add, add, Add);
height_op!(Sub, sub, Sub);
height_op!(Mul, mul, Mul);
height_op!(Div, div, Div);

impl HeightExpr {
    pub fn leaf(x: QuadraticNumber) -> Self {
        HeightExpr::Leaf(x)
    }

    pub fn int(n: i64) -> Self {
        HeightExpr::Leaf(QuadraticNumber::from_integer(n))
    }

    pub fn pow(self, k: i64) -> Self {
        HeightExpr::Pow(Box::new(self), k)
    }

    pub fn symbolic_pow(self) -> Self {
        HeightExpr::SymbolicPow(Box::new(self))
    }

    /// Exact value; `None` if the tree has a symbolic power.
    pub fn eval(&self) -> Result<Option<QuadraticNumber>> {
        Ok(Some(match self {
            HeightExpr::Leaf(x) => x.clone(),
            HeightExpr::Add(l, r) => match (l.eval()?, r.eval()?) {
                (Some(l), Some(r)) => l + r,
                _ => return Ok(None),
            },
            HeightExpr::Sub(l, r) => match (l.eval()?, r.eval()?) {
                (Some(l), Some(r)) => l - r,
                _ => return Ok(None),
            },
            HeightExpr::Mul(l, r) => match (l.eval()?, r.eval()?) {
                (Some(l), Some(r)) => l * r,
                _ => return Ok(None),
            },
            HeightExpr::Div(l, r) => match (l.eval()?, r.eval()?) {
                (Some(l), Some(r)) => l.checked_div(&r)?,
                _ => return Ok(None),
            },
            HeightExpr::Pow(x, k) => match x.eval()? {
                Some(x) => x.pow(*k)?,
                None => return Ok(None),
            },
            HeightExpr::SymbolicPow(_) => return Ok(None),
        }))
    }
}

impl fmt::Display for HeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeightExpr::Leaf(x) => write!(f, "{x}"),
            HeightExpr::Add(l, r) => write!(f, "({l} + {r})"),
            HeightExpr::Sub(l, r) => write!(f, "({l} - {r})"),
            HeightExpr::Mul(l, r) => write!(f, "{l}·{r}"),
            HeightExpr::Div(l, r) => write!(f, "{l}/{r}"),
            HeightExpr::Pow(x, k) => write!(f, "({x})^{k}"),
            HeightExpr::SymbolicPow(x) => write!(f, "({x})^g"),
        }
    }
}

/// Height bound `constant + slope·g` where `g` is the symbolic exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineHeight {
    pub constant: CertifiedReal,
    pub slope: CertifiedReal,
}

/// Triangle-inequality height bound with a symbolic exponent allowed.
pub fn height_estimate_affine(expr: &HeightExpr, bits: u32) -> Result<AffineHeight> {
    let zero = || CertifiedReal::from_integer(0);
    Ok(match expr {
        HeightExpr::Leaf(x) => AffineHeight {
            constant: height_exact(x, bits)?.value,
            slope: zero(),
        },
        HeightExpr::Add(l, r) | HeightExpr::Sub(l, r) => {
            let (l, r) = (height_estimate_affine(l, bits)?, height_estimate_affine(r, bits)?);
            let log2 = enclose_log_rational(&int(2), bits)?;
            AffineHeight {
                constant: l.constant + r.constant + log2,
                slope: l.slope + r.slope,
            }
        }
        HeightExpr::Mul(l, r) | HeightExpr::Div(l, r) => {
            let (l, r) = (height_estimate_affine(l, bits)?, height_estimate_affine(r, bits)?);
            AffineHeight {
                constant: l.constant + r.constant,
                slope: l.slope + r.slope,
            }
        }
        HeightExpr::Pow(x, k) => {
            let h = height_estimate_affine(x, bits)?;
            let k = int(k.unsigned_abs());
            AffineHeight {
                constant: h.constant.scale(&k),
                slope: h.slope.scale(&k),
            }
        }
        HeightExpr::SymbolicPow(x) => {
            let h = height_estimate_affine(x, bits)?;
            if h.slope.sign_if_certain() != Some(Ordering::Equal) {
                return Err(Error::Unsupported("nested symbolic powers".into()));
            }
            AffineHeight {
                constant: zero(),
                slope: h.constant,
            }
        }
    })
}

/// Triangle-inequality height bound for a fully concrete expression.
pub fn height_estimate(expr: &HeightExpr, bits: u32) -> Result<HeightValue> {
    let h = height_estimate_affine(expr, bits)?;
    if h.slope.sign_if_certain() != Some(Ordering::Equal) {
        return Err(Error::InvalidInput(
            "expression has a symbolic exponent; use height_estimate_affine".into(),
        ));
    }
    Ok(HeightValue {
        value: h.constant,
        kind: HeightKind::Estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certified::parse_decimal;

    fn q(a: i64, b: i64, c: i64) -> QuadraticNumber {
        QuadraticNumber::new(a, b, c, 2).unwrap()
    }

    fn alpha() -> QuadraticNumber {
        q(3, 2, 1)
    }

    #[test]
    fn field_examples() {
        let (a, b) = (alpha(), q(3, -2, 1));
        assert_eq!(&a * &b, QuadraticNumber::one());
        assert_eq!(a.pow(0).unwrap(), QuadraticNumber::one());
        assert_eq!(a.pow(2).unwrap(), q(17, 12, 1));
        assert_eq!(a.pow(-1).unwrap(), b);
        assert_eq!(a.conjugate(), b);
        assert_eq!(a.norm(), BigRational::one());
    }

    #[test]
    fn canonical_form() {
        let x = QuadraticNumber::new(6, 4, -2, 2).unwrap();
        assert_eq!(x, q(-3, -2, 1));
        assert_eq!(QuadraticNumber::new(4, 0, 6, 2).unwrap().radicand(), 1);
        assert!(QuadraticNumber::new(1, 1, 1, 8).is_err());
        assert!(QuadraticNumber::new(1, 1, 0, 2).is_err());
        assert_eq!(
            QuadraticNumber::zero().recip().unwrap_err(),
            Error::DivisionByZero
        );
    }

    #[test]
    fn ordering_is_exact() {
        let a = alpha();
        assert_eq!(a.compare_to_integer_power(1, &6.into()), Ordering::Less);
        assert_eq!(a.compare_to_integer_power(0, &1.into()), Ordering::Equal);
        assert_eq!(a.compare_to_integer_power(2, &33.into()), Ordering::Greater);
        assert!(a > QuadraticNumber::from_integer(5));
        // 99 - 70√2 is tiny and positive
        assert_eq!(q(99, -70, 1).signum(), Ordering::Greater);
        assert_eq!(q(-99, 70, 1).signum(), Ordering::Less);
    }

    #[test]
    fn display() {
        assert_eq!(alpha().to_string(), "3 + 2√2");
        assert_eq!(q(0, 36, 9).to_string(), "4√2");
        assert_eq!(q(0, 4, 9).to_string(), "4√2/9");
        assert_eq!(q(1, -1, 2).to_string(), "(1 - √2)/2");
        assert_eq!(q(-7, 0, 3).to_string(), "-7/3");
    }

    #[test]
    fn minimal_polynomials() {
        assert_eq!(
            alpha().minimal_polynomial(),
            vec![BigInt::from(1), BigInt::from(-6), BigInt::from(1)]
        );
        // 4√2/9: 81 X^2 - 32
        assert_eq!(
            q(0, 4, 9).minimal_polynomial(),
            vec![BigInt::from(81), BigInt::from(0), BigInt::from(-32)]
        );
        assert_eq!(
            QuadraticNumber::from_rational(&BigRational::new((-3).into(), 4.into()))
                .minimal_polynomial(),
            vec![BigInt::from(4), BigInt::from(3)]
        );
    }

    #[test]
    fn log_alpha() {
        let l = alpha().ln(64).unwrap();
        assert!(l.contains(&parse_decimal("1.76274717403908605046521864995958").unwrap()));
        assert!(l.width() <= scale_pow2(&int(1), -63));
    }

    #[test]
    fn heights() {
        let h = height_exact(&alpha(), 128).unwrap().value;
        let half_log = alpha().ln(128).unwrap().scale(&BigRational::new(1.into(), 2.into()));
        assert!(h.overlaps(&half_log));
        let h10 = height_exact(&QuadraticNumber::from_integer(10), 128).unwrap().value;
        assert!(h10.contains(&parse_decimal("2.302585092994045684017991454684364207601").unwrap()));
        let h1 = height_exact(&QuadraticNumber::one(), 128).unwrap().value;
        assert!(h1.is_exact() && h1.lo().is_zero());
    }

    #[test]
    fn estimates_match_hand_values() {
        let six_two = parse_decimal("6.2").unwrap();
        let e = HeightExpr::leaf(q(0, 36, 1)) / HeightExpr::int(9);
        let h = height_estimate(&e, 128).unwrap();
        assert_eq!(h.kind, HeightKind::Estimate);
        assert!(h.value.hi() < &six_two);
        let e = HeightExpr::int(18) / HeightExpr::int(9);
        let h = height_estimate(&e, 128).unwrap();
        assert!(h.value.hi() < &parse_decimal("5.1").unwrap());
        assert!(h.value.lo() > &parse_decimal("5.08").unwrap());
        let g = QuadraticNumber::from_rational(&BigRational::new(7.into(), 3.into()));
        let h = height_estimate(&HeightExpr::leaf(g.clone()).pow(1), 128).unwrap();
        assert_eq!(h.value, height_exact(&g, 128).unwrap().value);
    }

    #[test]
    fn symbolic_power_is_affine() {
        // 1 - α^{-g}: slope h(α^{-1}) = log α / 2, constant log 2
        let e = HeightExpr::int(1) - HeightExpr::leaf(alpha().pow(-1).unwrap()).symbolic_pow();
        let h = height_estimate_affine(&e, 128).unwrap();
        let half_log = alpha().ln(128).unwrap().scale(&BigRational::new(1.into(), 2.into()));
        assert!(h.slope.overlaps(&half_log));
        assert!(h.constant.overlaps(&enclose_log_rational(&int(2), 128).unwrap()));
        assert!(height_estimate(&e, 128).is_err());
    }

    #[test]
    fn binet_forms() {
        let bal = crate::recurrence::balancing();
        let luc = crate::recurrence::lucas_balancing();
        assert_eq!(binet_term(&bal, 3).unwrap(), BigInt::from(35));
        assert_eq!(binet_term(&bal, 0).unwrap(), BigInt::from(0));
        assert_eq!(binet_term(&luc, 4).unwrap(), BigInt::from(577));
        assert_eq!(bal.binet().coeff_a, q(0, 1, 8));
        assert_eq!(luc.binet().coeff_a, q(1, 0, 2));
        assert_eq!(luc.binet().coeff_b, q(1, 0, 2));
    }

    #[test]
    fn unit_relations() {
        let a = alpha();
        let ten = BigInt::from(10);
        let x = a.pow(-3).unwrap() * QuadraticNumber::from_integer(100);
        assert_eq!(x.unit_power_relation(&a, &ten), Some((1, -3, 2)));
        assert_eq!(QuadraticNumber::one().unit_power_relation(&a, &ten), Some((1, 0, 0)));
        let y = -(a.pow(2).unwrap());
        assert_eq!(y.unit_power_relation(&a, &ten), Some((-1, 2, 0)));
        assert_eq!(q(0, 4, 9).unit_power_relation(&a, &ten), None);
        let z = QuadraticNumber::from_rational(&BigRational::new(1.into(), 10.into()));
        assert_eq!(z.unit_power_relation(&a, &ten), Some((1, 0, -1)));
    }
}
