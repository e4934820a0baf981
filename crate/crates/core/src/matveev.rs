//! Lower bounds for linear forms in logarithms and the bookkeeping around them.
//!
//! For `Γ = γ_1^{b_1} ⋯ γ_l^{b_l} − 1 ≠ 0` over a real field of degree `d_L`,
//! Matveev's theorem gives
//!
//! ```text
//! log|Γ| > −1.4·30^{l+3}·l^{4.5}·d_L²·(1 + log d_L)·(1 + log D)·A_1⋯A_l
//! ```
//!
//! with `D ≥ max|b_j|` and `A_j ≥ max(d_L·h(γ_j), |log γ_j|, 0.16)`.
//! [`matveev_coefficient`] evaluates everything except `(1 + log D)`. The
//! remaining helpers turn that into explicit exponent bounds the way hand
//! proofs do, but with every inequality certified.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certified::{
    enclose_log_rational, enclose_sqrt_rational, int, rat, round_up_significant, CertifiedReal,
};
use crate::error::{Error, Result};
use crate::quadratic::QuadraticNumber;

/// Significant figures kept when constants are inflated between steps.
pub const ROUNDING_DIGITS: u32 = 2;

/// One `A_j`, meaning `value · (1 + log n)^log_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AEntry {
    pub label: String,
    pub value: CertifiedReal,
    pub log_power: u32,
}

impl AEntry {
    pub fn new(label: impl Into<String>, value: CertifiedReal) -> Self {
        AEntry {
            label: label.into(),
            value,
            log_power: 0,
        }
    }

    pub fn with_log_power(mut self, p: u32) -> Self {
        self.log_power = p;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentBound {
    /// Kept as a variable, e.g. `n`, until a concrete bound is known.
    Symbolic(String),
    Concrete(String),
}

impl fmt::Display for ExponentBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentBound::Symbolic(s) | ExponentBound::Concrete(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFormProblem {
    pub degree: u32,
    pub entries: Vec<AEntry>,
    pub exponent_bound: ExponentBound,
    /// Free-form descriptions of the `γ_j` and `b_j`, for reports.
    pub gamma_meta: Vec<String>,
}

fn min_a() -> BigRational {
    rat(4, 25)
}

impl LinearFormProblem {
    pub fn new(
        degree: u32,
        entries: Vec<AEntry>,
        exponent_bound: ExponentBound,
        gamma_meta: Vec<String>,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidInput("field degree must be positive".into()));
        }
        if entries.is_empty() {
            return Err(Error::InvalidInput("a linear form needs at least one term".into()));
        }
        for e in &entries {
            if e.value.lo() < &min_a() {
                return Err(Error::HypothesisNotMet(format!(
                    "A for {} is {}, below the 0.16 floor",
                    e.label, e.value
                )));
            }
        }
        Ok(LinearFormProblem {
            degree,
            entries,
            exponent_bound,
            gamma_meta,
        })
    }

    pub fn l(&self) -> u32 {
        self.entries.len() as u32
    }

    /// Total power of `(1 + log n)` contributed by the `A_j`.
    pub fn a_log_power(&self) -> u32 {
        self.entries.iter().map(|e| e.log_power).sum()
    }
}

/// `1.4·30^{l+3}·l^{4.5}·d_L²·(1 + log d_L)·∏A_j`.
pub fn matveev_coefficient(p: &LinearFormProblem, bits: u32) -> Result<CertifiedReal> {
    let l = p.l();
    let d = p.degree;
    let base = rat(7, 5)
        * int(num_traits::pow(BigInt::from(30), (l + 3) as usize))
        * int(num_traits::pow(BigInt::from(l), 4))
        * int(d * d);
    let sqrt_l = enclose_sqrt_rational(&int(l), bits + 16)?;
    let log_d = enclose_log_rational(&int(d), bits + 16)?;
    let mut c = CertifiedReal::exact(base) * sqrt_l * (CertifiedReal::from_integer(1) + log_d);
    for e in &p.entries {
        c = c * &e.value;
    }
    Ok(c.round_outward(bits))
}

/// `quantity · root_log < plus_term + constant·(1 + log n)^log_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundExpression {
    pub constant: CertifiedReal,
    pub log_power: u32,
    pub plus_term: CertifiedReal,
    pub root_log: CertifiedReal,
}

impl BoundExpression {
    /// Upper bound for the bounded quantity at a given `n` (enclosure of the
    /// right-hand side divided by `root_log`).
    pub fn evaluate_at(&self, n: &BigInt, bits: u32) -> Result<CertifiedReal> {
        let one = CertifiedReal::from_integer(1);
        let lf = one + enclose_log_rational(&int(n.clone()), bits)?;
        let rhs = &self.plus_term + &(&self.constant * &lf.powi(self.log_power));
        rhs.checked_div(&self.root_log)
    }
}

impl fmt::Display for BoundExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = crate::certified::to_scientific(self.constant.hi(), 6);
        let tail = match self.log_power {
            0 => String::new(),
            1 => "·(1 + log n)".to_string(),
            p => format!("·(1 + log n)^{p}"),
        };
        if self.plus_term.sign_if_certain() == Some(Ordering::Equal) {
            write!(f, "< {c}{tail}")
        } else {
            write!(f, "< {} + {c}{tail}", self.plus_term)
        }
    }
}

/// Outcome of folding a Matveev lower bound with an upper bound `rhs/B^w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainBound {
    pub coefficient_rounded: BigRational,
    pub log_rhs: CertifiedReal,
    pub bound: BoundExpression,
}

/// Combines `log|Γ| > −C(1 + log n)^p` with `|Γ| < rhs/B^w` into
/// `w·log B < C'(1 + log n)^p`, where `C' = ⌈⌈C⌉ + log rhs⌉` in two
/// significant figures (`(1 + log n)^p ≥ 1` absorbs the additive term).
pub fn chain_gap_bound(
    c: &CertifiedReal,
    rhs_constant: &BigInt,
    root_log: &CertifiedReal,
    log_power: u32,
    bits: u32,
) -> Result<ChainBound> {
    if c.lo().is_negative() {
        return Err(Error::InvalidInput("Matveev coefficient must be nonnegative".into()));
    }
    if !rhs_constant.is_positive() {
        return Err(Error::InvalidInput("right-hand constant must be positive".into()));
    }
    if log_power == 0 && !c.hi().is_zero() {
        return Err(Error::InvalidInput("log power must be at least 1".into()));
    }
    let rounded = round_up_significant(c.hi(), ROUNDING_DIGITS);
    let log_rhs = enclose_log_rational(&int(rhs_constant.clone()), bits)?;
    let folded = round_up_significant(&(&rounded + log_rhs.hi()), ROUNDING_DIGITS);
    Ok(ChainBound {
        coefficient_rounded: rounded,
        log_rhs,
        bound: BoundExpression {
            constant: CertifiedReal::exact(folded),
            log_power,
            plus_term: CertifiedReal::from_integer(0),
            root_log: root_log.clone(),
        },
    })
}

/// `L < 2^r·H·(log H)^r` whenever `L/(log L)^r < H` and `H > (4r²)^r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma2Bound {
    pub r: u32,
    pub h: CertifiedReal,
    pub log_h: CertifiedReal,
    pub enclosure: CertifiedReal,
    /// Ceiling of the enclosure's upper end.
    pub bound: BigInt,
}

pub fn lemma2_solve(r: u32, h: &CertifiedReal, bits: u32) -> Result<Lemma2Bound> {
    if r == 0 {
        return Err(Error::InvalidInput("r must be at least 1".into()));
    }
    let threshold = int(num_traits::pow(BigInt::from(4 * r * r), r as usize));
    if h.lo() <= &threshold {
        return Err(Error::HypothesisNotMet(format!(
            "H > (4r^2)^r fails: H = {h}, (4·{r}^2)^{r} = {threshold}"
        )));
    }
    let log_h = h.ln(bits)?;
    let enclosure = (CertifiedReal::from_integer(num_traits::pow(BigInt::from(2), r as usize))
        * h
        * log_h.powi(r))
    .round_outward(bits);
    let bound = enclosure.ceil_hi();
    Ok(Lemma2Bound {
        r,
        h: h.clone(),
        log_h,
        enclosure,
        bound,
    })
}

/// Certifies `x·root_log > K(1 + log x)^p` for every `x ≥ m` (`p ≤ 2`):
/// the inequality at `m` plus a positive derivative from `m` on.
pub fn verify_bound_directly(
    k: &CertifiedReal,
    root_log: &CertifiedReal,
    p: u32,
    m: &BigInt,
    bits: u32,
) -> Result<bool> {
    if p > 2 {
        return Err(Error::Unsupported("direct verification needs p ≤ 2".into()));
    }
    if !m.is_positive() {
        return Ok(false);
    }
    let mq = CertifiedReal::from_integer(m.clone());
    let lf = CertifiedReal::from_integer(1) + enclose_log_rational(&int(m.clone()), bits)?;
    let value = &mq * root_log - k * &lf.powi(p);
    let slope = &mq * root_log - &(k * &CertifiedReal::from_integer(p)) * &lf.powi(p.saturating_sub(1));
    Ok(value.lo().is_positive() && slope.lo().is_positive())
}

/// The step `|e^z − 1| < y < 1/2 ⇒ |z| < 2y`. Returns the multiplier 2 once
/// `y < 1/2` is certified.
pub fn linearize_exponential(y_bound: &CertifiedReal) -> Result<u32> {
    if y_bound.hi() < &rat(1, 2) {
        Ok(2)
    } else {
        Err(Error::HypothesisNotMet(format!(
            "linearization needs y < 1/2, got y = {y_bound}"
        )))
    }
}

/// Smallest `g ≥ 0` with `rhs/base^g < 1/2`, by exact comparison.
pub fn min_linearizable_exponent(rhs: &BigRational, base: &QuadraticNumber) -> Result<u32> {
    if base <= &QuadraticNumber::one() {
        return Err(Error::InvalidInput("base must exceed 1".into()));
    }
    let target = QuadraticNumber::from_rational(&(rhs * int(2)));
    let mut g = 0u32;
    let mut p = QuadraticNumber::one();
    while p <= target {
        p = &p * base;
        g += 1;
    }
    Ok(g)
}

/// [`linearize_exponential`] for `y = rhs/base^g`, decided exactly. On
/// failure the error names the smallest exponent that would work.
pub fn linearize_power(rhs: &BigRational, base: &QuadraticNumber, g: u32) -> Result<u32> {
    let need = min_linearizable_exponent(rhs, base)?;
    if g >= need {
        Ok(2)
    } else {
        Err(Error::HypothesisNotMet(format!(
            "{rhs}/({base})^{g} is not below 1/2; the smallest admissible exponent is {need}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonvanishingCertificate {
    pub statement: String,
    pub verdict: bool,
}

/// Shows `base^{-n}·10^k·coefficient ≠ 1` for every `n ≥ min_exponent`.
///
/// Vanishing forces `coefficient·10^k = base^n`; conjugating and dividing
/// gives `ρ := coefficient/conj(coefficient) = ±base^{2n}` for a unit base.
/// If `ρ` is not `±base^j` with a matching sign and `j = 2n` reachable, the
/// form cannot vanish.
pub fn certify_nonvanishing(
    coefficient: &QuadraticNumber,
    base: &QuadraticNumber,
    min_exponent: u64,
) -> Result<NonvanishingCertificate> {
    if coefficient.is_zero() {
        return Err(Error::InvalidInput("zero coefficient: the form is degenerate".into()));
    }
    if base.is_rational() {
        return Err(Error::Unsupported("base must be a quadratic irrational".into()));
    }
    if !coefficient.is_rational() && coefficient.radicand() != base.radicand() {
        return Err(Error::Unsupported(format!(
            "coefficient {coefficient} lies outside Q(√{})",
            base.radicand()
        )));
    }
    let norm = base.norm();
    let unit_sign: i8 = if norm == BigRational::one() {
        1
    } else if norm == -BigRational::one() {
        -1
    } else {
        return Err(Error::Unsupported(format!("base {base} is not a unit")));
    };
    let rho = coefficient.checked_div(&coefficient.conjugate())?;
    let relation = rho.unit_power_relation(base, &BigInt::from(10));
    let min_exponent = min_exponent.max(1);
    let (verdict, why) = match relation {
        None => (true, format!("ρ = {rho} is not ± a power of {base}")),
        Some((_, _, e)) if e != 0 => (true, format!("ρ = {rho} carries a power of 10")),
        Some((s, j, _)) => {
            if j < 0 || j % 2 != 0 {
                (true, format!("ρ = ±({base})^{j} and {j} is not an even nonnegative exponent"))
            } else if (j as u64) < 2 * min_exponent {
                (true, format!("ρ = ±({base})^{j} needs n = {} < {min_exponent}", j / 2))
            } else {
                let n = j / 2;
                let expected: i8 = if unit_sign == -1 && n % 2 == 1 { -1 } else { 1 };
                if expected != s {
                    (true, format!("ρ = {rho} has the wrong sign for n = {n}"))
                } else {
                    (false, format!("ρ = ({base})^{j} allows vanishing at n = {n}"))
                }
            }
        }
    };
    Ok(NonvanishingCertificate {
        statement: format!(
            "({base})^(-n)·10^k·({coefficient}) − 1 ≠ 0 for n ≥ {min_exponent}: {why}"
        ),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certified::parse_decimal;

    fn alpha() -> QuadraticNumber {
        QuadraticNumber::new(3, 2, 1, 2).unwrap()
    }

    fn dec(s: &str) -> BigRational {
        parse_decimal(s).unwrap()
    }

    fn stage1(a3: &str) -> LinearFormProblem {
        let la = alpha().ln(128).unwrap();
        let l10 = enclose_log_rational(&int(10), 128).unwrap();
        LinearFormProblem::new(
            2,
            vec![
                AEntry::new("alpha", la),
                AEntry::new("10", l10.scale(&int(2))),
                AEntry::new("lambda", CertifiedReal::exact(dec(a3))),
            ],
            ExponentBound::Symbolic("n".into()),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn coefficient_checkpoints() {
        let c = matveev_coefficient(&stage1("12.4"), 128).unwrap();
        assert_eq!(round_up_significant(c.hi(), 2), dec("9.8e13"));
        let c = matveev_coefficient(&stage1("10.2"), 128).unwrap();
        assert_eq!(round_up_significant(c.hi(), 2), dec("8.1e13"));
        let c = matveev_coefficient(&stage1("1e14"), 128).unwrap();
        assert_eq!(round_up_significant(c.hi(), 2), dec("7.9e26"));
    }

    #[test]
    fn a_floor_enforced() {
        let e = LinearFormProblem::new(
            2,
            vec![AEntry::new("tiny", CertifiedReal::exact(dec("0.1")))],
            ExponentBound::Concrete("5".into()),
            vec![],
        );
        assert!(matches!(e, Err(Error::HypothesisNotMet(_))));
    }

    #[test]
    fn chain_examples() {
        let la = alpha().ln(128).unwrap();
        let b = chain_gap_bound(&CertifiedReal::exact(dec("9.8e13")), &4.into(), &la, 1, 128)
            .unwrap();
        assert_eq!(b.bound.constant, CertifiedReal::exact(dec("9.9e13")));
        let b = chain_gap_bound(&CertifiedReal::exact(dec("8.1e13")), &3.into(), &la, 1, 128)
            .unwrap();
        assert_eq!(b.bound.constant, CertifiedReal::exact(dec("8.2e13")));
        let b = chain_gap_bound(&CertifiedReal::from_integer(0), &1.into(), &la, 1, 128).unwrap();
        assert_eq!(b.bound.constant, CertifiedReal::from_integer(0));
    }

    #[test]
    fn lemma2_examples() {
        let la = alpha().ln(256).unwrap();
        let h = CertifiedReal::exact(dec("8e26")).checked_div(&la).unwrap();
        let b = lemma2_solve(2, &h, 256).unwrap();
        assert!(b.bound < BigInt::from(69) * num_traits::pow(BigInt::from(10), 29));
        assert_eq!(round_up_significant(&int(b.bound.clone()), 2), dec("6.9e30"));
        let h = CertifiedReal::exact(dec("6.8e26")).checked_div(&la).unwrap();
        let b = lemma2_solve(2, &h, 256).unwrap();
        assert_eq!(round_up_significant(&int(b.bound), 2), dec("5.8e30"));
        let b = lemma2_solve(1, &CertifiedReal::from_integer(300), 128).unwrap();
        assert_eq!(b.bound, BigInt::from(3423));
        assert!(matches!(
            lemma2_solve(2, &CertifiedReal::from_integer(256), 128),
            Err(Error::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn direct_verification() {
        let la = alpha().ln(128).unwrap();
        let k = CertifiedReal::exact(dec("8e26"));
        let m: BigInt = dec("6.9e30").to_integer();
        assert!(verify_bound_directly(&k, &la, 2, &m, 128).unwrap());
        assert!(!verify_bound_directly(&k, &la, 2, &BigInt::from(10).pow(20u32), 128).unwrap());
    }

    #[test]
    fn linearization_examples() {
        let a = alpha();
        let y = CertifiedReal::exact(int(4)).checked_div(&a.pow(2).unwrap().to_interval(64)).unwrap();
        assert_eq!(linearize_exponential(&y).unwrap(), 2);
        let y = CertifiedReal::exact(int(3)).checked_div(&a.pow(2).unwrap().to_interval(64)).unwrap();
        assert_eq!(linearize_exponential(&y).unwrap(), 2);
        assert_eq!(linearize_power(&int(4), &a, 2).unwrap(), 2);
        let e = linearize_power(&int(4), &a, 1).unwrap_err();
        assert!(e.to_string().contains("smallest admissible exponent is 2"), "{e}");
        let y = CertifiedReal::exact(int(4)).checked_div(&a.to_interval(64)).unwrap();
        assert!(linearize_exponential(&y).is_err());
    }

    #[test]
    fn nonvanishing_examples() {
        let a = alpha();
        for d in 1..=9 {
            let c = QuadraticNumber::new(0, 4 * d, 9, 2).unwrap();
            assert!(certify_nonvanishing(&c, &a, 1).unwrap().verdict);
            let c = QuadraticNumber::new(2 * d, 0, 9, 2).unwrap();
            assert!(certify_nonvanishing(&c, &a, 1).unwrap().verdict);
        }
        assert!(certify_nonvanishing(&QuadraticNumber::zero(), &a, 1).is_err());
        // a coefficient that really is a power of α: α^2·10^0 vanishes at n = 2
        let c = a.pow(2).unwrap();
        assert!(!certify_nonvanishing(&c, &a, 1).unwrap().verdict);
        // ... unless n ≥ 3 is known
        assert!(certify_nonvanishing(&c, &a, 3).unwrap().verdict);
    }
}
