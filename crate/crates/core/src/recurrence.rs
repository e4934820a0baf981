//! Binary recurrences, repdigits and the small-range exhaustive search.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic::BinetForm;

/// `U_{n+1} = p·U_n − q·U_{n−1}` with initial terms `u0`, `u1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSpec {
    name: String,
    coeff_p: i64,
    coeff_q: i64,
    u0: BigInt,
    u1: BigInt,
    binet: BinetForm,
}

/// How many leading terms are checked for monotonicity at construction.
const MONOTONE_CHECK_TERMS: u64 = 64;

impl SequenceSpec {
    pub fn new(
        name: impl Into<String>,
        coeff_p: i64,
        coeff_q: i64,
        u0: impl Into<BigInt>,
        u1: impl Into<BigInt>,
    ) -> Result<Self> {
        let (u0, u1) = (u0.into(), u1.into());
        let binet = BinetForm::from_recurrence(coeff_p, coeff_q, &u0, &u1)?;
        let spec = SequenceSpec {
            name: name.into(),
            coeff_p,
            coeff_q,
            u0,
            u1,
            binet,
        };
        if coeff_p >= 2 && spec.u1 > spec.u0 && !spec.u0.is_negative() {
            let t = spec.terms(MONOTONE_CHECK_TERMS);
            if let Some(n) = (2..t.len()).find(|&i| t[i] <= t[i - 1]) {
                return Err(Error::InvalidInput(format!(
                    "{} is not strictly increasing: U_{} <= U_{}",
                    spec.name,
                    n,
                    n - 1
                )));
            }
        }
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coeff_p(&self) -> i64 {
        self.coeff_p
    }

    pub fn coeff_q(&self) -> i64 {
        self.coeff_q
    }

    pub fn u0(&self) -> &BigInt {
        &self.u0
    }

    pub fn u1(&self) -> &BigInt {
        &self.u1
    }

    pub fn binet(&self) -> &BinetForm {
        &self.binet
    }

    /// `U_n` by straight iteration.
    pub fn term(&self, n: u64) -> BigInt {
        match n {
            0 => self.u0.clone(),
            _ => {
                let (p, q) = (BigInt::from(self.coeff_p), BigInt::from(self.coeff_q));
                let (mut prev, mut cur) = (self.u0.clone(), self.u1.clone());
                for _ in 1..n {
                    let next = &p * &cur - &q * &prev;
                    prev = std::mem::replace(&mut cur, next);
                }
                cur
            }
        }
    }

    /// `[U_0, ..., U_n_max]`.
    pub fn terms(&self, n_max: u64) -> Vec<BigInt> {
        let (p, q) = (BigInt::from(self.coeff_p), BigInt::from(self.coeff_q));
        let mut out = Vec::with_capacity(n_max as usize + 1);
        out.push(self.u0.clone());
        if n_max >= 1 {
            out.push(self.u1.clone());
        }
        for i in 2..=n_max as usize {
            let next = &p * &out[i - 1] - &q * &out[i - 2];
            out.push(next);
        }
        out
    }

    fn known(&self) -> Option<KnownSequence> {
        let key = (self.coeff_p, self.coeff_q, &self.u0, &self.u1);
        if key == (6, 1, &BigInt::zero(), &BigInt::one()) {
            Some(KnownSequence::Balancing)
        } else if key == (6, 1, &BigInt::one(), &BigInt::from(3)) {
            Some(KnownSequence::LucasBalancing)
        } else {
            None
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: U(n+1) = {}·U(n) - {}·U(n-1), U(0) = {}, U(1) = {}",
            self.name, self.coeff_p, self.coeff_q, self.u0, self.u1
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KnownSequence {
    Balancing,
    LucasBalancing,
}

/// Balancing numbers 0, 1, 6, 35, 204, ...
pub fn balancing() -> SequenceSpec {
    SequenceSpec::new("balancing", 6, 1, 0, 1).expect("valid recurrence")
}

/// Lucas-balancing numbers 1, 3, 17, 99, 577, ...
pub fn lucas_balancing() -> SequenceSpec {
    SequenceSpec::new("lucas-balancing", 6, 1, 1, 3).expect("valid recurrence")
}

/// `d·(10^k − 1)/9`, the number written with `k` copies of the digit `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Repdigit {
    digit: u8,
    length: u32,
    value: BigInt,
}

impl Repdigit {
    pub fn new(digit: u8, length: u32) -> Result<Self> {
        Ok(Repdigit {
            digit,
            length,
            value: repdigit_value(digit, length)?,
        })
    }

    pub fn digit(&self) -> u8 {
        self.digit
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    /// Single-digit repdigits are excluded by the usual `k ≥ 2` convention.
    pub fn is_trivial(&self) -> bool {
        self.length == 1
    }
}

pub fn repdigit_value(d: u8, k: u32) -> Result<BigInt> {
    if !(1..=9).contains(&d) {
        return Err(Error::InvalidInput(format!("digit {d} is outside 1..=9")));
    }
    if k < 1 {
        return Err(Error::InvalidInput("repdigit length must be at least 1".into()));
    }
    Ok((num_traits::pow(BigInt::from(10), k as usize) - 1) / 9 * d)
}

/// `(d, k)` if every decimal digit of `n` equals `d`.
pub fn classify_repdigit(n: &BigInt) -> Option<(u8, u32)> {
    if !n.is_positive() {
        return None;
    }
    let s = n.to_string();
    let first = s.as_bytes()[0];
    s.bytes()
        .all(|b| b == first)
        .then(|| (first - b'0', s.len() as u32))
}

/// A witness `U_n − U_m = d·(10^k − 1)/9`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SearchSolution {
    pub n: u64,
    pub m: u64,
    pub d: u8,
    pub k: u32,
}

impl fmt::Display for SearchSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m={} d={} k={}", self.n, self.m, self.d, self.k)
    }
}

/// Every `0 ≤ m < n ≤ n_max` with `U_n − U_m` a repdigit of length `≥ k_min`,
/// sorted by `(n, m)`.
pub fn exhaustive_search(
    spec: &SequenceSpec,
    n_max: u64,
    k_min: u32,
) -> Result<Vec<SearchSolution>> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    if !(1..=2).contains(&k_min) {
        return Err(Error::InvalidInput(format!("k_min must be 1 or 2, got {k_min}")));
    }
    let terms = spec.terms(n_max);
    let mut found: Vec<SearchSolution> = (1..=n_max)
        .into_par_iter()
        .flat_map_iter(|n| {
            let terms = &terms;
            (0..n).filter_map(move |m| {
                let diff = &terms[n as usize] - &terms[m as usize];
                classify_repdigit(&diff)
                    .filter(|&(_, k)| k >= k_min)
                    .map(|(d, k)| SearchSolution { n, m, d, k })
            })
        })
        .collect();
    found.sort();
    Ok(found)
}

/// Checks `α^(n−1) ≤ B_n < α^n` (balancing) or `α^n < 2C_n < α^(n+1)`
/// (Lucas-balancing) for `1 ≤ n ≤ n_max`, exactly.
pub fn check_growth_envelope(spec: &SequenceSpec, n_max: u64) -> Result<bool> {
    let kind = spec.known().ok_or_else(|| {
        Error::Unsupported(format!(
            "no growth envelope is known for {}",
            spec.name()
        ))
    })?;
    let alpha = &spec.binet().alpha;
    let n_max = u32::try_from(n_max)
        .map_err(|_| Error::InvalidInput("n_max too large".into()))?;
    let terms = spec.terms(n_max as u64);
    let ok = (1..=n_max).all(|n| {
        let u = &terms[n as usize];
        match kind {
            KnownSequence::Balancing => {
                alpha.compare_to_integer_power(n - 1, u) != Ordering::Greater
                    && alpha.compare_to_integer_power(n, u) == Ordering::Greater
            }
            KnownSequence::LucasBalancing => {
                let two_c = u * 2;
                alpha.compare_to_integer_power(n, &two_c) == Ordering::Less
                    && alpha.compare_to_integer_power(n + 1, &two_c) == Ordering::Greater
            }
        }
    });
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_examples() {
        let b = balancing();
        let l = lucas_balancing();
        assert_eq!(b.term(1), BigInt::from(1));
        assert_eq!(b.term(3), BigInt::from(35));
        assert_eq!(b.term(4), BigInt::from(204));
        assert_eq!(l.term(2), BigInt::from(17));
        assert_eq!(b.terms(4), b.terms(10)[..5].to_vec());
    }

    #[test]
    fn repdigit_examples() {
        assert_eq!(repdigit_value(5, 3).unwrap(), BigInt::from(555));
        assert_eq!(repdigit_value(1, 1).unwrap(), BigInt::from(1));
        assert_eq!(repdigit_value(9, 4).unwrap(), BigInt::from(9999));
        assert!(repdigit_value(0, 3).is_err());
        assert!(repdigit_value(10, 3).is_err());
        assert!(repdigit_value(3, 0).is_err());
        assert_eq!(classify_repdigit(&555.into()), Some((5, 3)));
        assert_eq!(classify_repdigit(&10.into()), None);
        assert_eq!(classify_repdigit(&9999.into()), Some((9, 4)));
        assert_eq!(classify_repdigit(&0.into()), None);
        assert!(Repdigit::new(7, 1).unwrap().is_trivial());
    }

    #[test]
    fn search_examples() {
        assert!(exhaustive_search(&balancing(), 50, 2).unwrap().is_empty());
        assert!(exhaustive_search(&lucas_balancing(), 50, 2).unwrap().is_empty());
        let trivial = exhaustive_search(&balancing(), 50, 1).unwrap();
        assert!(trivial.contains(&SearchSolution { n: 2, m: 1, d: 5, k: 1 }));
        assert!(exhaustive_search(&balancing(), 0, 2).is_err());
        assert!(exhaustive_search(&balancing(), 5, 3).is_err());
    }

    #[test]
    fn envelopes() {
        assert!(check_growth_envelope(&balancing(), 50).unwrap());
        assert!(check_growth_envelope(&lucas_balancing(), 1).unwrap());
        assert!(check_growth_envelope(&balancing(), 200).unwrap());
        let pell = SequenceSpec::new("pell", 2, -1, 0, 1).unwrap();
        assert!(matches!(
            check_growth_envelope(&pell, 5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn construction_rejects_complex_roots() {
        assert!(SequenceSpec::new("bad", 1, 1, 0, 1).is_err());
        assert!(SequenceSpec::new("bad", 2, 1, 0, 1).is_err());
    }
}
