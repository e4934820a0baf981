//! Continued fractions of certified reals and the Baker–Davenport reduction.
//!
//! The reduction (in the Dujella–Pethő form) takes
//! `0 < |uτ − v + μ| < A·B^(−w)` with `0 < u ≤ M` and a convergent `p/q` of
//! `τ` with `q > 6M`. If `ε = ‖μq‖ − M‖τq‖ > 0` then
//! `w < log(Aq/ε)/log B`. Every quantity in that statement is certified here;
//! labels where `μ` is secretly `j + bτ` (so that `ε` can never be positive)
//! are detected exactly and bounded with the homogeneous best-approximation
//! property instead.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::certified::{certified_floor, int, CertifiedReal, PrecisionPolicy};
use crate::error::{Error, Result};
use crate::expr::RealExpr;
use crate::quadratic::QuadraticNumber;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFractionExpansion {
    pub partial_quotients: Vec<BigInt>,
    /// `(p_i, q_i)` for each quotient.
    pub convergents: Vec<(BigInt, BigInt)>,
    pub source: String,
    /// The expansion of an exact rational ran out before the requested depth.
    pub terminated: bool,
    pub bits_used: u32,
}

impl ContinuedFractionExpansion {
    pub fn q(&self, i: usize) -> Option<&BigInt> {
        self.convergents.get(i).map(|(_, q)| q)
    }

    pub fn p(&self, i: usize) -> Option<&BigInt> {
        self.convergents.get(i).map(|(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_quotients.is_empty()
    }

    /// Smallest index whose denominator exceeds `threshold`, if expanded.
    pub fn first_exceeding(&self, threshold: &BigInt) -> Option<usize> {
        self.convergents.iter().position(|(_, q)| q > threshold)
    }
}

fn convergents_of(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .map(|a| {
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, p.clone());
            q2 = std::mem::replace(&mut q1, q.clone());
            (p, q)
        })
        .collect()
}

/// Expands the enclosure `[lo, hi]` while both endpoints agree. Returns the
/// shared quotients and whether the value was an exact rational that ran out.
fn expand_enclosure(x: &CertifiedReal, want: usize) -> (Vec<BigInt>, bool) {
    let (mut lo, mut hi) = (x.lo().clone(), x.hi().clone());
    let exact = lo == hi;
    let mut out = Vec::new();
    while out.len() < want {
        let a = lo.floor().to_integer();
        if hi.floor().to_integer() != a {
            break;
        }
        let ai = int(a.clone());
        out.push(a);
        let (fl, fh) = (&lo - &ai, &hi - &ai);
        if exact && fl.is_zero() {
            return (out, true);
        }
        if fl.is_zero() || fh.is_zero() {
            break;
        }
        (lo, hi) = (fh.recip(), fl.recip());
    }
    (out, false)
}

/// Convergents `(p_i, q_i)` certified by the enclosure `x` alone: as many
/// as its endpoints share (at most `want`).
pub fn certified_convergents(x: &CertifiedReal, want: usize) -> Vec<(BigInt, BigInt)> {
    convergents_of(&expand_enclosure(x, want).0)
}

/// The first `count + 1` partial quotients of `τ` with their convergents,
/// each quotient certified by the enclosure of `τ`.
pub fn cf_expand(
    tau: &RealExpr,
    count: usize,
    policy: &PrecisionPolicy,
) -> Result<ContinuedFractionExpansion> {
    let want = count + 1;
    let mut last = policy.initial_bits;
    for bits in policy.levels() {
        last = bits;
        let x = match tau.eval(bits) {
            Ok(x) => x,
            Err(Error::PrecisionExhausted { .. }) => continue,
            Err(e) => return Err(e),
        };
        let (quotients, terminated) = expand_enclosure(&x, want);
        if quotients.len() == want || terminated {
            return Ok(ContinuedFractionExpansion {
                convergents: convergents_of(&quotients),
                partial_quotients: quotients,
                source: tau.to_string(),
                terminated,
                bits_used: bits,
            });
        }
    }
    Err(Error::PrecisionExhausted { bits: last })
}

/// Smallest `i` with `q_i > threshold`, expanding as deep as needed.
pub fn find_denominator_exceeding(
    tau: &RealExpr,
    threshold: &BigInt,
    policy: &PrecisionPolicy,
) -> Result<(usize, BigInt)> {
    let mut depth = 16;
    loop {
        let cf = cf_expand(tau, depth, policy)?;
        if let Some(i) = cf.first_exceeding(threshold) {
            return Ok((i, cf.convergents[i].1.clone()));
        }
        if cf.terminated {
            return Err(Error::NoAdmissibleConvergent(format!(
                "{} is rational with every denominator at most {threshold}",
                cf.source
            )));
        }
        depth *= 2;
    }
}

/// One member of the `μ` family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuLabel {
    pub label: String,
    pub mu: RealExpr,
    /// `Some((j, b))` when `μ = j + b·τ` exactly.
    pub relation: Option<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionProblem {
    pub tau: RealExpr,
    pub labels: Vec<MuLabel>,
    pub a: BigRational,
    pub b: QuadraticNumber,
    pub m: BigInt,
    pub max_retries: usize,
    /// What `w` stands for, for reports (`n - m`, `n`).
    pub w_name: String,
}

/// Further convergents tried after the first admissible one.
pub const DEFAULT_RETRIES: usize = 10;

impl ReductionProblem {
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_positive() {
            return Err(Error::InvalidInput(format!("A must be positive, got {}", self.a)));
        }
        if self.b <= QuadraticNumber::one() {
            return Err(Error::InvalidInput(format!("B must exceed 1, got {}", self.b)));
        }
        if self.m < BigInt::one() {
            return Err(Error::InvalidInput(format!("M must be at least 1, got {}", self.m)));
        }
        if self.labels.is_empty() {
            return Err(Error::InvalidInput("the μ family is empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelKind {
    /// Lemma applied with `ε = ‖μq‖ − M‖τq‖ > 0`.
    Inhomogeneous { epsilon: CertifiedReal },
    /// `μ = j + bτ`: bounded through `|u'τ − v'| ≥ ‖q_N τ‖` for `0 < |u'| < q_{N+1}`.
    Homogeneous {
        index: usize,
        q: BigInt,
        q_next: BigInt,
        distance: CertifiedReal,
        j: i64,
        shift: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelRecord {
    pub label: String,
    pub mu: CertifiedReal,
    pub kind: LabelKind,
    pub w_bound: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttemptRecord {
    pub index: usize,
    pub q: BigInt,
    /// `(label, reason)` for labels whose `ε` was not certifiably positive.
    pub failing: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutcome {
    pub q_index: usize,
    pub q_used: BigInt,
    pub p_used: BigInt,
    pub tau: CertifiedReal,
    pub epsilon_min: Option<CertifiedReal>,
    pub epsilon_min_label: Option<String>,
    pub w_bound: BigInt,
    pub labels: Vec<LabelRecord>,
    pub attempts: Vec<AttemptRecord>,
}

impl ReductionOutcome {
    pub fn per_label_epsilon(&self) -> BTreeMap<String, CertifiedReal> {
        self.labels
            .iter()
            .filter_map(|r| match &r.kind {
                LabelKind::Inhomogeneous { epsilon } => Some((r.label.clone(), epsilon.clone())),
                LabelKind::Homogeneous { .. } => None,
            })
            .collect()
    }
}

impl fmt::Display for ReductionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q_{} = {}", self.q_index, self.q_used)?;
        if let (Some(e), Some(l)) = (&self.epsilon_min, &self.epsilon_min_label) {
            write!(f, ", min ε = {e} (at {l})")?;
        }
        write!(f, ", w ≤ {}", self.w_bound)
    }
}

/// Precision at which stored enclosures (τ, μ) are recorded.
pub const RECORD_BITS: u32 = 420;

enum Sign {
    Positive(CertifiedReal),
    Negative(CertifiedReal),
    Unresolved(u32),
}

fn certify_positive<F>(mut refine: F, policy: &PrecisionPolicy) -> Result<Sign>
where
    F: FnMut(u32) -> Result<CertifiedReal>,
{
    let mut last = policy.initial_bits;
    for bits in policy.levels() {
        last = bits;
        let x = match refine(bits) {
            Ok(x) => x,
            Err(Error::PrecisionExhausted { .. }) => continue,
            Err(e) => return Err(e),
        };
        if x.lo().is_positive() {
            return Ok(Sign::Positive(x));
        }
        if x.hi().is_negative() || (x.is_exact() && x.lo().is_zero()) {
            return Ok(Sign::Negative(x));
        }
    }
    Ok(Sign::Unresolved(last))
}

/// `floor(log(numer/den)/log B)`.
fn w_floor(
    numer: &BigRational,
    den: &dyn Fn(u32) -> Result<CertifiedReal>,
    b: &QuadraticNumber,
    policy: &PrecisionPolicy,
) -> Result<BigInt> {
    certified_floor(
        |bits| {
            let ratio = CertifiedReal::exact(numer.clone()).checked_div(&den(bits)?)?;
            ratio.ln(bits)?.checked_div(&b.ln(bits)?)
        },
        policy,
    )
}

struct TauCache {
    q: BigInt,
    m: BigRational,
    base: (u32, CertifiedReal, CertifiedReal),
}

impl TauCache {
    fn new(tau: &RealExpr, q: &BigInt, m: &BigInt, bits: u32) -> Result<Self> {
        let m = int(m.clone());
        let (t, term) = Self::compute(tau, q, &m, bits)?;
        Ok(TauCache {
            q: q.clone(),
            m,
            base: (bits, t, term),
        })
    }

    fn compute(
        tau: &RealExpr,
        q: &BigInt,
        m: &BigRational,
        bits: u32,
    ) -> Result<(CertifiedReal, CertifiedReal)> {
        let t = tau.eval(bits + q.bits() as u32 + 16)?;
        let tq = &t * &CertifiedReal::from_integer(q.clone());
        let term = tq.nearest_integer_distance().scale(m);
        Ok((t, term))
    }

    /// `M‖τq‖` at `bits`.
    fn term(&self, tau: &RealExpr, bits: u32) -> Result<CertifiedReal> {
        if bits == self.base.0 {
            Ok(self.base.2.clone())
        } else {
            Ok(Self::compute(tau, &self.q, &self.m, bits)?.1)
        }
    }
}

fn epsilon(
    mu: &RealExpr,
    tau: &RealExpr,
    cache: &TauCache,
    bits: u32,
) -> Result<CertifiedReal> {
    let m = mu.eval(bits + cache.q.bits() as u32 + 16)?;
    let mq = &m * &CertifiedReal::from_integer(cache.q.clone());
    Ok(mq.nearest_integer_distance() - cache.term(tau, bits)?)
}

/// Runs the reduction, retrying later convergents while some `ε` fails.
pub fn reduce(problem: &ReductionProblem, policy: &PrecisionPolicy) -> Result<ReductionOutcome> {
    problem.validate()?;
    let six_m = &problem.m * 6;
    let (first, _) = find_denominator_exceeding(&problem.tau, &six_m, policy)?;
    let max_shift = problem
        .labels
        .iter()
        .filter_map(|l| l.relation.map(|(_, b)| b.unsigned_abs()))
        .max()
        .unwrap_or(0);
    let cf = cf_expand(&problem.tau, first + problem.max_retries + 1, policy)?;
    let tau_record = problem.tau.eval(RECORD_BITS)?;

    // homogeneous labels do not depend on q; bound them once
    let homogeneous: Vec<(usize, LabelRecord)> = problem
        .labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.relation.map(|r| (i, l, r)))
        .map(|(i, l, (j, shift))| {
            homogeneous_record(problem, &cf, l, j, shift, max_shift, policy).map(|r| (i, r))
        })
        .collect::<Result<_>>()?;

    let mut attempts = Vec::new();
    for index in first..=first + problem.max_retries {
        let Some((p, q)) = cf.convergents.get(index).cloned() else {
            break;
        };
        let cache = TauCache::new(&problem.tau, &q, &problem.m, policy.initial_bits)?;
        let results: Vec<(usize, Result<Sign>)> = problem
            .labels
            .par_iter()
            .enumerate()
            .filter(|(_, l)| l.relation.is_none())
            .map(|(i, l)| {
                let s = certify_positive(|bits| epsilon(&l.mu, &problem.tau, &cache, bits), policy);
                (i, s)
            })
            .collect();
        let mut failing = Vec::new();
        let mut eps: Vec<(usize, CertifiedReal)> = Vec::new();
        for (i, r) in results {
            match r? {
                Sign::Positive(e) => eps.push((i, e)),
                Sign::Negative(e) => failing.push((
                    problem.labels[i].label.clone(),
                    format!("ε = {e} is not positive"),
                )),
                Sign::Unresolved(bits) => failing.push((
                    problem.labels[i].label.clone(),
                    format!("sign of ε undecided at {bits} bits"),
                )),
            }
        }
        attempts.push(AttemptRecord {
            index,
            q: q.clone(),
            failing: failing.clone(),
        });
        if !failing.is_empty() {
            continue;
        }
        let aq = &problem.a * int(q.clone());
        let inhomogeneous: Vec<(usize, LabelRecord)> = eps
            .into_par_iter()
            .map(|(i, e)| {
                let l = &problem.labels[i];
                let den = |bits: u32| epsilon(&l.mu, &problem.tau, &cache, bits);
                let w = w_floor(&aq, &den, &problem.b, policy)?;
                Ok((
                    i,
                    LabelRecord {
                        label: l.label.clone(),
                        mu: l.mu.eval(RECORD_BITS)?,
                        kind: LabelKind::Inhomogeneous { epsilon: e },
                        w_bound: w,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        let mut labels: Vec<(usize, LabelRecord)> =
            inhomogeneous.into_iter().chain(homogeneous.iter().cloned()).collect();
        labels.sort_by_key(|(i, _)| *i);
        let labels: Vec<LabelRecord> = labels.into_iter().map(|(_, r)| r).collect();
        let w_bound = labels
            .iter()
            .map(|r| r.w_bound.clone())
            .max()
            .expect("non-empty family");
        let mut min: Option<(CertifiedReal, String)> = None;
        for r in &labels {
            if let LabelKind::Inhomogeneous { epsilon } = &r.kind {
                if min.as_ref().is_none_or(|(m, _)| epsilon.midpoint() < m.midpoint()) {
                    min = Some((epsilon.clone(), r.label.clone()));
                }
            }
        }
        return Ok(ReductionOutcome {
            q_index: index,
            q_used: q,
            p_used: p,
            tau: tau_record,
            epsilon_min: min.as_ref().map(|(e, _)| e.clone()),
            epsilon_min_label: min.map(|(_, l)| l),
            w_bound,
            labels,
            attempts,
        });
    }
    let summary: Vec<String> = attempts
        .iter()
        .map(|a| format!("q_{}: {} failing label(s)", a.index, a.failing.len()))
        .collect();
    Err(Error::NoAdmissibleConvergent(format!(
        "ε not certified positive at any of q_{first}..q_{}: {}",
        first + problem.max_retries,
        summary.join("; ")
    )))
}

fn homogeneous_record(
    problem: &ReductionProblem,
    cf: &ContinuedFractionExpansion,
    l: &MuLabel,
    j: i64,
    shift: i64,
    max_shift: u64,
    policy: &PrecisionPolicy,
) -> Result<LabelRecord> {
    // |u'| = |u + shift| ≤ M + |shift| must stay below q_{N+1}
    let reach = &problem.m + BigInt::from(max_shift.max(shift.unsigned_abs()));
    let n = cf
        .convergents
        .iter()
        .skip(1)
        .position(|(_, q)| q > &reach)
        .ok_or_else(|| {
            Error::NoAdmissibleConvergent(format!(
                "no convergent denominator above {reach} for homogeneous label {}",
                l.label
            ))
        })?;
    let q = cf.convergents[n].1.clone();
    let q_next = cf.convergents[n + 1].1.clone();
    let distance = |bits: u32| -> Result<CertifiedReal> {
        let t = problem.tau.eval(bits + q.bits() as u32 + 16)?;
        Ok((&t * &CertifiedReal::from_integer(q.clone())).nearest_integer_distance())
    };
    let d = match certify_positive(distance, policy)? {
        Sign::Positive(d) => d,
        _ => {
            return Err(Error::Internal(format!(
                "‖q_{n}·τ‖ not certified positive for label {}",
                l.label
            )))
        }
    };
    let w = w_floor(&problem.a, &distance, &problem.b, policy)?;
    Ok(LabelRecord {
        label: l.label.clone(),
        mu: l.mu.eval(RECORD_BITS)?,
        kind: LabelKind::Homogeneous {
            index: n,
            q,
            q_next,
            distance: d,
            j,
            shift,
        },
        w_bound: w,
    })
}

/// Whether `w` stands for the gap `n − m` or for `n` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Gap,
    Absolute,
}

impl Stage {
    pub fn w_name(self) -> &'static str {
        match self {
            Stage::Gap => "n - m",
            Stage::Absolute => "n",
        }
    }
}

/// `⌈2·rhs/log α⌉`, the constant `A` after linearizing and dividing by
/// `log α`.
pub fn reduction_constant(rhs: &BigInt, alpha: &QuadraticNumber, bits: u32) -> Result<BigInt> {
    let v = CertifiedReal::from_integer(rhs * 2).checked_div(&alpha.ln(bits)?)?;
    Ok(v.ceil_hi())
}

/// Assembles `|kτ − n + μ| < A·α^(−w)` with `τ = log base/log α` and
/// `μ = log λ/log α` for each labelled `λ`.
pub fn build_lambda_inequality(
    stage: Stage,
    lambdas: &[(String, QuadraticNumber)],
    alpha: &QuadraticNumber,
    base: u32,
    rhs: &BigInt,
    m: &BigInt,
) -> Result<ReductionProblem> {
    let base_q = QuadraticNumber::from_integer(base);
    let labels = lambdas
        .iter()
        .map(|(label, lambda)| {
            if lambda.signum() != std::cmp::Ordering::Greater {
                return Err(Error::InvalidInput(format!(
                    "λ for {label} must be positive, got {lambda}"
                )));
            }
            let relation = lambda
                .unit_power_relation(alpha, &BigInt::from(base))
                .map(|(_, j, e)| (j, e));
            Ok(MuLabel {
                label: label.clone(),
                mu: RealExpr::log_ratio(lambda.clone(), alpha.clone()),
                relation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReductionProblem {
        tau: RealExpr::log_ratio(base_q, alpha.clone()),
        labels,
        a: int(reduction_constant(rhs, alpha, 128)?),
        b: alpha.clone(),
        m: m.clone(),
        max_retries: DEFAULT_RETRIES,
        w_name: stage.w_name().to_string(),
    })
}
