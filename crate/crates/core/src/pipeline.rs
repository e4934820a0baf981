//! The full argument for one configuration, end to end.
//!
//! [`run_proof`] performs, in order: the small search, the residual audit,
//! the exponent and linearization checks, nonvanishing, the two Matveev
//! stages, the log-power solver, the two reductions and a closing search. Each stage
//! records what it used in a [`ProofCertificate`]; a failing stage stops the
//! run and the certificate's verdict becomes `not-proven` with the reason.
//! [`revalidate`](crate::revalidate::revalidate) replays the recorded
//! relations without trusting the producer.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::certified::{
    int, parse_decimal, round_up_significant, to_decimal_string,
    to_scientific, CertifiedReal, Enclosure, PrecisionPolicy,
};
use crate::config::{ConfigEcho, ProblemConfig};
use crate::error::{Error, Result};
use crate::matveev::{
    certify_nonvanishing, chain_gap_bound, lemma2_solve, matveev_coefficient,
    min_linearizable_exponent, verify_bound_directly, AEntry, ExponentBound, LinearFormProblem,
    NonvanishingCertificate, ROUNDING_DIGITS,
};
use crate::quadratic::{height_estimate_affine, height_exact, HeightExpr, QuadraticNumber};
use crate::recurrence::{exhaustive_search, SearchSolution};
use crate::reduction::{build_lambda_inequality, reduce, LabelKind, ReductionOutcome, Stage};

pub const CERT_VERSION: &str = "cert-v1";

/// Explicit part of the residual audit: `m < AUDIT_M`, gaps `< AUDIT_G`.
pub const AUDIT_M: u32 = 12;
pub const AUDIT_G: u32 = 12;

pub(crate) fn dec(r: &BigRational) -> String {
    to_decimal_string(r, 60, true)
}

pub(crate) fn undec(s: &str) -> Result<BigRational> {
    parse_decimal(s)
}

pub(crate) fn round2(x: &BigRational) -> BigRational {
    round_up_significant(x, ROUNDING_DIGITS)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Proven,
    NotProven,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub status: Verdict,
    pub statement: String,
    pub solutions: Vec<SearchSolution>,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub method: String,
    pub configured_rhs_stage1: String,
    pub configured_rhs_stage2: String,
    pub stage1_sup: String,
    pub stage1_sup_enclosure: Enclosure,
    pub stage2_sup: String,
    pub stage2_sup_enclosure: Enclosure,
    pub rhs_stage1: String,
    pub rhs_stage2: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentRecord {
    pub statement: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizationRecord {
    /// Smallest gap with `rhs_stage1/α^gap < 1/2`.
    pub stage1_min_gap: u32,
    /// Smallest `n` with `rhs_stage2/α^n < 1/2`.
    pub stage2_min_n: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonvanishingRecord {
    pub stage: u8,
    pub label: String,
    pub certificate: NonvanishingCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AEntryRecord {
    pub label: String,
    pub value: Enclosure,
    pub log_power: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightRecord {
    pub label: String,
    pub expression: String,
    pub constant: Enclosure,
    pub slope: Option<Enclosure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatveevRecord {
    pub stage: u8,
    pub degree: u32,
    pub l: u32,
    pub gammas: Vec<String>,
    pub exponent_bound: ExponentBound,
    pub heights: Vec<HeightRecord>,
    /// Stage 2 only: the largest affine constant, rounded up.
    pub height_constant_rounded: Option<String>,
    /// Stage 2 only: slope of the height in `g`, divided by `log α`.
    pub slope_ratio: Option<Enclosure>,
    /// Stage 2 only: the stage-1 constant bounding `g·log α`.
    pub upstream_constant: Option<String>,
    pub height_rounded: String,
    pub a_entries: Vec<AEntryRecord>,
    pub coefficient: Enclosure,
    pub coefficient_rounded: String,
    pub rhs: String,
    pub log_rhs: Enclosure,
    pub constant: String,
    pub log_power: u32,
    pub root_log: Enclosure,
    pub statement: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2Record {
    pub r: u32,
    pub h: Enclosure,
    pub log_h: Enclosure,
    pub bound_enclosure: Enclosure,
    pub bound_ceiling: String,
    pub m: String,
    pub direct_check: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneousEntry {
    pub index: usize,
    pub q: String,
    pub q_next: String,
    pub distance: Enclosure,
    pub j: i64,
    pub shift: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub label: String,
    pub lambda: String,
    pub mu: Enclosure,
    pub epsilon: Option<Enclosure>,
    pub homogeneous: Option<HomogeneousEntry>,
    pub w_bound: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptEntry {
    pub index: usize,
    pub q: String,
    pub failing: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionRecord {
    pub stage: u8,
    pub w_name: String,
    pub tau: Enclosure,
    pub rhs: String,
    pub a: String,
    pub m: String,
    pub q_index: usize,
    pub q: String,
    pub p: String,
    pub epsilon_min: Option<Enclosure>,
    pub epsilon_min_label: Option<String>,
    pub w_bound: String,
    pub labels: Vec<LabelEntry>,
    pub attempts: Vec<AttemptEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureRecord {
    pub searched_to: u64,
    pub solutions: Vec<SearchSolution>,
}

/// Everything a run used and concluded. Summary fields at the top mirror
/// values inside the nested records; revalidation checks they agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub version: String,
    pub config: ConfigEcho,
    pub conventions: Vec<String>,
    pub q_stage1: Option<String>,
    pub q_stage2: Option<String>,
    pub epsilon_stage1: Option<Enclosure>,
    pub epsilon_stage2: Option<Enclosure>,
    pub gap_bound: Option<u64>,
    pub n_bound: Option<u64>,
    pub lemma2_bound: Option<String>,
    pub small_search: Vec<SearchSolution>,
    pub residuals: Option<ResidualRecord>,
    pub exponent_bound: Option<ExponentRecord>,
    pub linearization: Option<LinearizationRecord>,
    pub nonvanishing: Vec<NonvanishingRecord>,
    pub stage1_matveev: Option<MatveevRecord>,
    pub stage2_matveev: Option<MatveevRecord>,
    pub lemma2: Option<Lemma2Record>,
    pub reduction1: Option<ReductionRecord>,
    pub reduction2: Option<ReductionRecord>,
    pub closure: Option<ClosureRecord>,
    pub verdict: VerdictRecord,
}

impl ProofCertificate {
    pub fn is_proven(&self) -> bool {
        self.verdict.status == Verdict::Proven
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("certificate: {e}")))
    }
}

// ---------------------------------------------------------------------------
// residual audit

/// Exact suprema of the two residual ratios, and the right-hand constants
/// actually used (`max(configured, ⌈sup⌉)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualAudit {
    pub configured: (BigInt, BigInt),
    pub stage1_sup: QuadraticNumber,
    pub stage2_sup: QuadraticNumber,
    pub rhs_stage1: BigInt,
    pub rhs_stage2: BigInt,
}

fn q_int(n: impl Into<BigInt>) -> QuadraticNumber {
    QuadraticNumber::from_integer(n)
}

fn ceil_quadratic(x: &QuadraticNumber) -> BigInt {
    // the ceiling is decided exactly by integer comparison
    let mut n = x.to_interval(64).floor_if_certain().unwrap_or_else(|| x.to_interval(64).ceil_hi());
    while &q_int(n.clone()) < x {
        n += 1;
    }
    while &q_int(&n - 1) >= x {
        n -= 1;
    }
    n
}

/// Bounds
/// `r₁ = |U_m − Bβⁿ − d/9| / (|A|α^m)` over `n > m ≥ 0` and
/// `r₂ = |d/9 + Bβ^{m+g} − Bβ^m| / (|A|(1 − α^{−g}))` over `m ≥ 0, g ≥ 1`.
/// A finite block is evaluated exactly; the rest is covered by monotone
/// triangle-inequality tails.
pub fn audit_residuals(cfg: &ProblemConfig) -> Result<ResidualAudit> {
    let binet = cfg.sequence.binet();
    let (alpha, beta) = (&binet.alpha, &binet.beta);
    let one = QuadraticNumber::one();
    if alpha <= &one || beta.abs() >= one {
        return Err(Error::Unsupported(format!(
            "the residual audit needs α > 1 > |β|, got α = {alpha}, β = {beta}"
        )));
    }
    let a_abs = binet.coeff_a.abs();
    let b = &binet.coeff_b;
    let b_abs = b.abs();
    let beta_abs = beta.abs();
    let nine = q_int(cfg.base - 1);
    let digit = |d: u8| q_int(d).checked_div(&nine);
    let dmax = digit(cfg.digits.1)?;
    let pw = |x: &QuadraticNumber, k: u32| x.pow(k as i64);

    let mut s1 = QuadraticNumber::zero();
    for m in 0..AUDIT_M {
        let um = q_int(cfg.sequence.term(m as u64));
        let den = &a_abs * &pw(alpha, m)?;
        for d in cfg.digit_range() {
            let dq = digit(d)?;
            for n in m + 1..=m + AUDIT_G {
                let r = (&(&um - &(b * &pw(beta, n)?)) - &dq).abs().checked_div(&den)?;
                s1 = s1.max(r);
            }
            let tail = (&(&um - &dq).abs() + &(&b_abs * &pw(&beta_abs, m + AUDIT_G + 1)?))
                .checked_div(&den)?;
            s1 = s1.max(tail);
        }
    }
    let far = (&(&b_abs * &(&pw(&beta_abs, AUDIT_M)? + &pw(&beta_abs, AUDIT_M + 1)?)) + &dmax)
        .checked_div(&(&a_abs * &pw(alpha, AUDIT_M)?))?;
    s1 = s1.max(&one + &far);

    let mut s2 = QuadraticNumber::zero();
    for g in 1..AUDIT_G {
        let den = &a_abs * &(&one - &alpha.pow(-(g as i64))?);
        for m in 0..AUDIT_M {
            for d in cfg.digit_range() {
                let v = &(&digit(d)? + &(b * &pw(beta, m + g)?)) - &(b * &pw(beta, m)?);
                s2 = s2.max(v.abs().checked_div(&den)?);
            }
        }
    }
    // m ≥ AUDIT_M with any g ≥ 1
    let tail_m = (&dmax + &(&b_abs * &(&pw(&beta_abs, AUDIT_M)? + &pw(&beta_abs, AUDIT_M + 1)?)))
        .checked_div(&(&a_abs * &(&one - &alpha.pow(-1)?)))?;
    // g ≥ AUDIT_G with m < AUDIT_M: only β^(m+g) still varies
    let den_g = &a_abs * &(&one - &alpha.pow(-(AUDIT_G as i64))?);
    for m in 0..AUDIT_M {
        for d in cfg.digit_range() {
            let head = (&digit(d)? - &(b * &pw(beta, m)?)).abs();
            let v = &head + &(&b_abs * &pw(&beta_abs, m + AUDIT_G)?);
            s2 = s2.max(v.checked_div(&den_g)?);
        }
    }
    s2 = s2.max(tail_m);

    Ok(ResidualAudit {
        configured: (cfg.rhs_stage1.clone(), cfg.rhs_stage2.clone()),
        rhs_stage1: cfg.rhs_stage1.clone().max(ceil_quadratic(&s1)),
        rhs_stage2: cfg.rhs_stage2.clone().max(ceil_quadratic(&s2)),
        stage1_sup: s1,
        stage2_sup: s2,
    })
}

impl ResidualAudit {
    pub fn record(&self) -> ResidualRecord {
        ResidualRecord {
            method: format!(
                "exact maximum over m < {AUDIT_M}, gap < {AUDIT_G} (stage 1: n ≤ m + {AUDIT_G}), \
                 monotone triangle-inequality tails beyond"
            ),
            configured_rhs_stage1: self.configured.0.to_string(),
            configured_rhs_stage2: self.configured.1.to_string(),
            stage1_sup: self.stage1_sup.to_string(),
            stage1_sup_enclosure: self.stage1_sup.to_interval(128).to_enclosure(),
            stage2_sup: self.stage2_sup.to_string(),
            stage2_sup_enclosure: self.stage2_sup.to_interval(128).to_enclosure(),
            rhs_stage1: self.rhs_stage1.to_string(),
            rhs_stage2: self.rhs_stage2.to_string(),
        }
    }
}

/// `D = n` is admissible for the exponent vector `(−n, k, 1)` once
/// `U_n < 10ⁿ` for every `n > limit`: then `10^{k−1} ≤ U_n − U_m < 10ⁿ`.
/// With `α < 10` it suffices that `|A|α^{n₀} + |B| < 10^{n₀}` at
/// `n₀ = limit + 1`, because `(10/α)ⁿ` increases.
pub fn exponent_bound_check(cfg: &ProblemConfig) -> Result<ExponentRecord> {
    let binet = cfg.sequence.binet();
    let n0 = cfg.small_search_limit + 1;
    let n0i = i64::try_from(n0).map_err(|_| Error::InvalidInput("limit too large".into()))?;
    let lhs = &(&binet.coeff_a.abs() * &binet.alpha.pow(n0i)?) + &binet.coeff_b.abs();
    let ten_pow = q_int(num_traits::pow(BigInt::from(cfg.base), n0 as usize));
    let holds = binet.alpha < q_int(cfg.base) && binet.coeff_a.signum() == Ordering::Greater && lhs < ten_pow;
    Ok(ExponentRecord {
        statement: format!(
            "α = {} < {base}, A > 0 and |A|·α^{n0} + |B| < {base}^{n0}, so k ≤ n and D = n for n > {}",
            binet.alpha,
            cfg.small_search_limit,
            base = cfg.base
        ),
        holds,
    })
}

pub fn linearization_check(
    cfg: &ProblemConfig,
    audit: &ResidualAudit,
) -> Result<LinearizationRecord> {
    let alpha = &cfg.sequence.binet().alpha;
    Ok(LinearizationRecord {
        stage1_min_gap: min_linearizable_exponent(&int(audit.rhs_stage1.clone()), alpha)?,
        stage2_min_n: min_linearizable_exponent(&int(audit.rhs_stage2.clone()), alpha)?,
    })
}

pub fn stage1_label(d: u8) -> String {
    format!("d={d}")
}

pub fn stage2_label(d: u8, g: u32) -> String {
    format!("d={d},g={g}")
}

/// Inverse of [`stage1_label`] / [`stage2_label`].
pub fn parse_label(label: &str) -> Option<(u8, Option<u32>)> {
    let rest = label.strip_prefix("d=")?;
    match rest.split_once(",g=") {
        Some((d, g)) => Some((d.parse().ok()?, Some(g.parse().ok()?))),
        None => Some((rest.parse().ok()?, None)),
    }
}

/// The `(label, λ)` pairs of stage 1 or, with `gap_bound`, stage 2.
pub fn stage_lambdas(
    cfg: &ProblemConfig,
    gap_bound: Option<u32>,
) -> Result<Vec<(String, QuadraticNumber)>> {
    let mut out = Vec::new();
    match gap_bound {
        None => {
            for d in cfg.digit_range() {
                out.push((stage1_label(d), cfg.lambda3(d)));
            }
        }
        Some(gmax) => {
            for g in 1..=gmax {
                for d in cfg.digit_range() {
                    out.push((stage2_label(d, g), cfg.lambda3_gap(d, g)?));
                }
            }
        }
    }
    Ok(out)
}

pub fn nonvanishing_records(
    cfg: &ProblemConfig,
    stage: u8,
    lambdas: &[(String, QuadraticNumber)],
) -> Result<Vec<NonvanishingRecord>> {
    let alpha = &cfg.sequence.binet().alpha;
    lambdas
        .iter()
        .map(|(label, lambda)| {
            Ok(NonvanishingRecord {
                stage,
                label: label.clone(),
                certificate: certify_nonvanishing(lambda, alpha, cfg.small_search_limit + 1)?,
            })
        })
        .collect()
}

pub(crate) fn stage1_height_expr(cfg: &ProblemConfig, d: u8) -> HeightExpr {
    let num = &q_int(d) * &cfg.binet_divisor;
    HeightExpr::leaf(num) / HeightExpr::int(cfg.base as i64 - 1)
}

pub(crate) fn stage2_height_expr(cfg: &ProblemConfig, d: u8) -> Result<HeightExpr> {
    let inv = cfg.sequence.binet().alpha.recip()?;
    Ok(stage1_height_expr(cfg, d) / (HeightExpr::int(1) - HeightExpr::leaf(inv).symbolic_pow()))
}

struct Shared {
    alpha: QuadraticNumber,
    log_alpha: CertifiedReal,
    a1: CertifiedReal,
    a2: CertifiedReal,
    bits: u32,
}

impl Shared {
    fn new(cfg: &ProblemConfig, bits: u32) -> Result<Self> {
        let alpha = cfg.sequence.binet().alpha.clone();
        let degree = CertifiedReal::from_integer(2);
        let log_alpha = alpha.ln(bits)?;
        let floor = CertifiedReal::from_ratio(4, 25);
        let a1 = (&degree * &height_exact(&alpha, bits)?.value)
            .max(&log_alpha.abs())
            .max(&floor);
        let base = q_int(cfg.base);
        let a2 = (&degree * &height_exact(&base, bits)?.value)
            .max(&base.ln(bits)?.abs())
            .max(&floor);
        Ok(Shared {
            alpha,
            log_alpha,
            a1,
            a2,
            bits,
        })
    }
}

fn a_records(entries: &[AEntry]) -> Vec<AEntryRecord> {
    entries
        .iter()
        .map(|e| AEntryRecord {
            label: e.label.clone(),
            value: e.value.to_enclosure(),
            log_power: e.log_power,
        })
        .collect()
}

fn stage1_matveev(cfg: &ProblemConfig, sh: &Shared, rhs: &BigInt) -> Result<MatveevRecord> {
    let bits = sh.bits;
    let mut heights = Vec::new();
    let mut hmax = BigRational::zero();
    let mut log_max = CertifiedReal::from_integer(0);
    for d in cfg.digit_range() {
        let e = stage1_height_expr(cfg, d);
        let h = height_estimate_affine(&e, bits)?;
        hmax = hmax.max(h.constant.hi().clone());
        log_max = log_max.max(&cfg.lambda3(d).ln(bits)?.abs());
        heights.push(HeightRecord {
            label: stage1_label(d),
            expression: e.to_string(),
            constant: h.constant.to_enclosure(),
            slope: None,
        });
    }
    let h_rounded = round2(&hmax);
    let a3 = CertifiedReal::exact(int(2) * &h_rounded)
        .max(&log_max)
        .max(&CertifiedReal::from_ratio(4, 25));
    let entries = vec![
        AEntry::new("alpha", sh.a1.clone()),
        AEntry::new("base", sh.a2.clone()),
        AEntry::new("lambda", a3),
    ];
    finish_matveev(1, cfg, sh, entries, heights, h_rounded, None, None, None, rhs, 1)
}

fn stage2_matveev(
    cfg: &ProblemConfig,
    sh: &Shared,
    rhs: &BigInt,
    k1: &BigRational,
) -> Result<MatveevRecord> {
    let bits = sh.bits;
    let mut heights = Vec::new();
    let mut cmax = BigRational::zero();
    let mut slope = CertifiedReal::from_integer(0);
    for d in cfg.digit_range() {
        let e = stage2_height_expr(cfg, d)?;
        let h = height_estimate_affine(&e, bits)?;
        cmax = cmax.max(h.constant.hi().clone());
        slope = slope.max(&h.slope);
        heights.push(HeightRecord {
            label: stage1_label(d),
            expression: e.to_string(),
            constant: h.constant.to_enclosure(),
            slope: Some(h.slope.to_enclosure()),
        });
    }
    let c0 = round2(&cmax);
    let ratio = slope.checked_div(&sh.log_alpha)?.round_outward(bits);
    // h ≤ c0 + slope·g and g·log α < K1(1 + log n), so h < (c0 + ratio·K1)(1 + log n)
    let h_rounded = round2(&(&c0 + ratio.hi() * k1));
    let a3 = CertifiedReal::exact(int(2) * &h_rounded);
    let entries = vec![
        AEntry::new("alpha", sh.a1.clone()),
        AEntry::new("base", sh.a2.clone()),
        AEntry::new("lambda", a3).with_log_power(1),
    ];
    finish_matveev(
        2,
        cfg,
        sh,
        entries,
        heights,
        h_rounded,
        Some(c0),
        Some(ratio),
        Some(k1.clone()),
        rhs,
        2,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_matveev(
    stage: u8,
    cfg: &ProblemConfig,
    sh: &Shared,
    entries: Vec<AEntry>,
    heights: Vec<HeightRecord>,
    h_rounded: BigRational,
    c0: Option<BigRational>,
    ratio: Option<CertifiedReal>,
    upstream: Option<BigRational>,
    rhs: &BigInt,
    log_power: u32,
) -> Result<MatveevRecord> {
    let a_entries = a_records(&entries);
    let gammas = vec![
        format!("γ1 = {}, b1 = -n", sh.alpha),
        format!("γ2 = {}, b2 = k", cfg.base),
        if stage == 1 {
            "γ3 = d·divisor/(base - 1), b3 = 1".to_string()
        } else {
            "γ3 = d·divisor/((base - 1)(1 - α^-g)), b3 = 1".to_string()
        },
    ];
    let problem = LinearFormProblem::new(
        2,
        entries,
        ExponentBound::Symbolic("n".into()),
        gammas.clone(),
    )?;
    let c = matveev_coefficient(&problem, sh.bits)?;
    let total = 1 + problem.a_log_power();
    debug_assert_eq!(total, log_power);
    let chain = chain_gap_bound(&c, rhs, &sh.log_alpha, total, sh.bits)?;
    let constant = chain.bound.constant.hi().clone();
    let quantity = if stage == 1 { "(n - m)" } else { "n" };
    let tail = if total == 1 {
        "(1 + log n)".to_string()
    } else {
        format!("(1 + log n)^{total}")
    };
    Ok(MatveevRecord {
        stage,
        degree: 2,
        l: problem.l(),
        gammas,
        exponent_bound: problem.exponent_bound.clone(),
        heights,
        height_constant_rounded: c0.as_ref().map(dec),
        slope_ratio: ratio.map(|r| r.to_enclosure()),
        upstream_constant: upstream.as_ref().map(dec),
        height_rounded: dec(&h_rounded),
        a_entries,
        coefficient: c.to_enclosure(),
        coefficient_rounded: dec(&chain.coefficient_rounded),
        rhs: rhs.to_string(),
        log_rhs: chain.log_rhs.to_enclosure(),
        constant: dec(&constant),
        log_power: total,
        root_log: sh.log_alpha.to_enclosure(),
        statement: format!(
            "{quantity}·log α < {}·{tail}",
            to_scientific(&constant, 2)
        ),
    })
}

fn lemma2_stage(k2: &BigRational, sh: &Shared) -> Result<Lemma2Record> {
    let h = CertifiedReal::exact(k2.clone())
        .checked_div(&sh.log_alpha)?
        .round_outward(sh.bits);
    let l2 = lemma2_solve(2, &h, sh.bits)?;
    let m = round2(&int(l2.bound.clone())).to_integer();
    let direct = verify_bound_directly(&CertifiedReal::exact(k2.clone()), &sh.log_alpha, 2, &m, sh.bits)?;
    Ok(Lemma2Record {
        r: 2,
        h: h.to_enclosure(),
        log_h: l2.log_h.to_enclosure(),
        bound_enclosure: l2.enclosure.to_enclosure(),
        bound_ceiling: l2.bound.to_string(),
        m: m.to_string(),
        direct_check: direct,
    })
}

fn reduction_record(
    stage: u8,
    out: &ReductionOutcome,
    lambdas: &[(String, QuadraticNumber)],
    rhs: &BigInt,
    a: &BigRational,
    m: &BigInt,
    w_name: &str,
) -> ReductionRecord {
    let labels = out
        .labels
        .iter()
        .map(|r| {
            let lambda = lambdas
                .iter()
                .find(|(l, _)| *l == r.label)
                .map(|(_, v)| v.to_string())
                .unwrap_or_default();
            let (epsilon, homogeneous) = match &r.kind {
                LabelKind::Inhomogeneous { epsilon } => (Some(epsilon.to_enclosure()), None),
                LabelKind::Homogeneous {
                    index,
                    q,
                    q_next,
                    distance,
                    j,
                    shift,
                } => (
                    None,
                    Some(HomogeneousEntry {
                        index: *index,
                        q: q.to_string(),
                        q_next: q_next.to_string(),
                        distance: distance.to_enclosure(),
                        j: *j,
                        shift: *shift,
                    }),
                ),
            };
            LabelEntry {
                label: r.label.clone(),
                lambda,
                mu: r.mu.to_enclosure(),
                epsilon,
                homogeneous,
                w_bound: r.w_bound.to_string(),
            }
        })
        .collect();
    ReductionRecord {
        stage,
        w_name: w_name.to_string(),
        tau: out.tau.to_enclosure(),
        rhs: rhs.to_string(),
        a: dec(a),
        m: m.to_string(),
        q_index: out.q_index,
        q: out.q_used.to_string(),
        p: out.p_used.to_string(),
        epsilon_min: out.epsilon_min.as_ref().map(|e| e.to_enclosure()),
        epsilon_min_label: out.epsilon_min_label.clone(),
        w_bound: out.w_bound.to_string(),
        labels,
        attempts: out
            .attempts
            .iter()
            .map(|a| AttemptEntry {
                index: a.index,
                q: a.q.to_string(),
                failing: a.failing.iter().map(|(l, why)| format!("{l}: {why}")).collect(),
            })
            .collect(),
    }
}

fn run_reduction(
    stage: u8,
    cfg: &ProblemConfig,
    lambdas: &[(String, QuadraticNumber)],
    rhs: &BigInt,
    m: &BigInt,
    policy: &PrecisionPolicy,
) -> Result<ReductionRecord> {
    let st = if stage == 1 { Stage::Gap } else { Stage::Absolute };
    let alpha = &cfg.sequence.binet().alpha;
    let problem = build_lambda_inequality(st, lambdas, alpha, cfg.base, rhs, m)?;
    let out = reduce(&problem, policy)?;
    Ok(reduction_record(stage, &out, lambdas, rhs, &problem.a, m, st.w_name()))
}

fn to_u64(s: &str, what: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::Internal(format!("{what} = {s} does not fit in 64 bits")))
}

pub fn conventions() -> Vec<String> {
    vec![
        "indices satisfy n > m ≥ 0; U_0 is a valid term".into(),
        "repdigits are d·(10^k − 1)/9 with 1 ≤ d ≤ 9".into(),
        "constants are rounded up to 2 significant figures between steps".into(),
        "enclosures are closed intervals with decimal endpoints rounded outward".into(),
    ]
}

fn empty_certificate(cfg: &ProblemConfig) -> ProofCertificate {
    ProofCertificate {
        version: CERT_VERSION.into(),
        config: cfg.echo(),
        conventions: conventions(),
        q_stage1: None,
        q_stage2: None,
        epsilon_stage1: None,
        epsilon_stage2: None,
        gap_bound: None,
        n_bound: None,
        lemma2_bound: None,
        small_search: Vec::new(),
        residuals: None,
        exponent_bound: None,
        linearization: None,
        nonvanishing: Vec::new(),
        stage1_matveev: None,
        stage2_matveev: None,
        lemma2: None,
        reduction1: None,
        reduction2: None,
        closure: None,
        verdict: VerdictRecord {
            status: Verdict::NotProven,
            statement: String::new(),
            solutions: Vec::new(),
            diagnostics: Vec::new(),
        },
    }
}

fn statement(cfg: &ProblemConfig) -> String {
    format!(
        "every solution of U_n − U_m = d·(10^k − 1)/9 with U = {}, n > m ≥ 0, 1 ≤ d ≤ 9, k ≥ {} is listed",
        cfg.name(),
        cfg.k_min
    )
}

fn stages(cfg: &ProblemConfig, policy: &PrecisionPolicy, cert: &mut ProofCertificate) -> Result<()> {
    let bits = policy.initial_bits.max(192);
    let limit = cfg.small_search_limit;

    cert.small_search = exhaustive_search(&cfg.sequence, limit, cfg.k_min)?;
    if !cert.small_search.is_empty() {
        return Err(solutions_exist(&cert.small_search, limit));
    }

    if cfg.sequence.binet().alpha.is_rational() {
        return Err(Error::Unsupported("the dominant root must be a quadratic irrational".into()));
    }
    let audit = audit_residuals(cfg)?;
    cert.residuals = Some(audit.record());

    let exp = exponent_bound_check(cfg)?;
    let exp_ok = exp.holds;
    cert.exponent_bound = Some(exp);
    if !exp_ok {
        return Err(Error::HypothesisNotMet("the exponent bound D = n is not certified".into()));
    }

    let lin = linearization_check(cfg, &audit)?;
    let n2 = lin.stage2_min_n as u64;
    cert.linearization = Some(lin.clone());
    if n2 > limit + 1 {
        return Err(Error::HypothesisNotMet(format!(
            "stage 2 linearizes only for n ≥ {n2}, beyond the search limit {limit}"
        )));
    }

    let lambdas1 = stage_lambdas(cfg, None)?;
    cert.nonvanishing = nonvanishing_records(cfg, 1, &lambdas1)?;
    check_nonvanishing(&cert.nonvanishing)?;

    let sh = Shared::new(cfg, bits)?;
    let s1 = stage1_matveev(cfg, &sh, &audit.rhs_stage1)?;
    let k1 = undec(&s1.constant)?;
    cert.stage1_matveev = Some(s1);
    let s2 = stage2_matveev(cfg, &sh, &audit.rhs_stage2, &k1)?;
    let k2 = undec(&s2.constant)?;
    cert.stage2_matveev = Some(s2);

    let l2 = lemma2_stage(&k2, &sh)?;
    let direct = l2.direct_check;
    let m: BigInt = l2.m.parse().expect("integer");
    cert.lemma2_bound = Some(l2.m.clone());
    cert.lemma2 = Some(l2);
    if !direct {
        return Err(Error::HypothesisNotMet(format!(
            "n·log α > K(1 + log n)^2 not certified from n = {m} on"
        )));
    }

    let r1 = run_reduction(1, cfg, &lambdas1, &audit.rhs_stage1, &m, policy)?;
    let w1 = to_u64(&r1.w_bound, "gap bound")?;
    let gap_bound = w1.max(lin.stage1_min_gap.saturating_sub(1) as u64).max(1);
    cert.q_stage1 = Some(r1.q.clone());
    cert.epsilon_stage1 = r1.epsilon_min.clone();
    cert.gap_bound = Some(gap_bound);
    cert.reduction1 = Some(r1);

    let gmax = u32::try_from(gap_bound).map_err(|_| Error::Internal("gap bound too large".into()))?;
    let lambdas2 = stage_lambdas(cfg, Some(gmax))?;
    let nv2 = nonvanishing_records(cfg, 2, &lambdas2)?;
    cert.nonvanishing.extend(nv2);
    check_nonvanishing(&cert.nonvanishing)?;

    let r2 = run_reduction(2, cfg, &lambdas2, &audit.rhs_stage2, &m, policy)?;
    let n_bound = to_u64(&r2.w_bound, "n bound")?;
    cert.q_stage2 = Some(r2.q.clone());
    cert.epsilon_stage2 = r2.epsilon_min.clone();
    cert.n_bound = Some(n_bound);
    cert.reduction2 = Some(r2);

    let searched_to = n_bound.max(limit);
    let solutions = exhaustive_search(&cfg.sequence, searched_to, cfg.k_min)?;
    cert.closure = Some(ClosureRecord {
        searched_to,
        solutions: solutions.clone(),
    });
    cert.verdict.solutions = solutions.clone();
    if !solutions.is_empty() {
        return Err(solutions_exist(&solutions, searched_to));
    }
    Ok(())
}

fn solutions_exist(solutions: &[SearchSolution], searched_to: u64) -> Error {
    let s = &solutions[0];
    Error::HypothesisNotMet(format!(
        "{} solution(s) exist up to n = {searched_to}, e.g. U_{} − U_{} = {}·(10^{} − 1)/9",
        solutions.len(),
        s.n,
        s.m,
        s.d,
        s.k
    ))
}

fn check_nonvanishing(records: &[NonvanishingRecord]) -> Result<()> {
    match records.iter().find(|r| !r.certificate.verdict) {
        Some(r) => Err(Error::HypothesisNotMet(format!(
            "nonvanishing fails for {} (stage {}): {}",
            r.label, r.stage, r.certificate.statement
        ))),
        None => Ok(()),
    }
}

/// Runs every stage and returns the certificate; never panics on a failed
/// stage, which instead yields a `not-proven` verdict with diagnostics.
pub fn run_proof(cfg: &ProblemConfig, policy: &PrecisionPolicy) -> ProofCertificate {
    let mut cert = empty_certificate(cfg);
    cert.verdict.statement = statement(cfg);
    match stages(cfg, policy, &mut cert) {
        Ok(()) => cert.verdict.status = Verdict::Proven,
        Err(e) => {
            cert.verdict.status = Verdict::NotProven;
            if cert.closure.is_none() {
                cert.verdict.solutions = cert.small_search.clone();
            }
            cert.verdict.diagnostics.push(e.to_string());
        }
    }
    cert
}

fn enc_str(e: &Enclosure) -> String {
    match CertifiedReal::from_enclosure(e) {
        Ok(x) => x.to_string(),
        Err(_) => format!("[{}, {}]", e.lo, e.hi),
    }
}

fn sci(s: &str) -> String {
    undec(s).map(|v| to_scientific(&v, 2)).unwrap_or_else(|_| s.to_string())
}

/// Human-readable rendering; deterministic for a given certificate.
pub fn render_text(cert: &ProofCertificate) -> String {
    let mut s = String::new();
    let c = &cert.config;
    let _ = writeln!(s, "Repdigit differences for {} ({})", c.name, cert.version);
    let _ = writeln!(
        s,
        "  U_(n+1) = {}·U_n − {}·U_(n−1), U_0 = {}, U_1 = {}",
        c.p, c.q, c.u0, c.u1
    );
    for conv in &cert.conventions {
        let _ = writeln!(s, "  convention: {conv}");
    }
    let _ = writeln!(s, "\nsmall search (n ≤ {}):", c.small_search_limit);
    for sol in &cert.small_search {
        let _ = writeln!(s, "  n = {}, m = {}, d = {}, k = {}", sol.n, sol.m, sol.d, sol.k);
    }
    if cert.small_search.is_empty() {
        let _ = writeln!(s, "  no solutions");
    }
    if let Some(r) = &cert.residuals {
        let _ = writeln!(s, "\nresiduals: sup r1 = {} ≈ {}, sup r2 = {} ≈ {}",
            r.stage1_sup, enc_str(&r.stage1_sup_enclosure), r.stage2_sup, enc_str(&r.stage2_sup_enclosure));
        let _ = writeln!(s, "  right-hand constants used: {} and {}", r.rhs_stage1, r.rhs_stage2);
    }
    if let Some(e) = &cert.exponent_bound {
        let _ = writeln!(s, "exponent bound: {} [{}]", e.statement, if e.holds { "ok" } else { "fails" });
    }
    if let Some(l) = &cert.linearization {
        let _ = writeln!(s, "linearization: stage 1 from gap {}, stage 2 from n = {}", l.stage1_min_gap, l.stage2_min_n);
    }
    if !cert.nonvanishing.is_empty() {
        let ok = cert.nonvanishing.iter().filter(|r| r.certificate.verdict).count();
        let _ = writeln!(s, "nonvanishing: {ok}/{} forms certified", cert.nonvanishing.len());
    }
    for m in [&cert.stage1_matveev, &cert.stage2_matveev].into_iter().flatten() {
        let _ = writeln!(s, "\nMatveev, stage {}:", m.stage);
        for a in &m.a_entries {
            let pw = if a.log_power > 0 { "·(1 + log n)" } else { "" };
            let _ = writeln!(s, "  A_{} = {}{pw}", a.label, enc_str(&a.value));
        }
        let _ = writeln!(s, "  height bound {}", sci(&m.height_rounded));
        let _ = writeln!(s, "  C = {} → {}", enc_str(&m.coefficient), sci(&m.coefficient_rounded));
        let _ = writeln!(s, "  {}", m.statement);
    }
    if let Some(l) = &cert.lemma2 {
        let _ = writeln!(s, "\nlog-power bound: H = {}, n < {} (direct check {})",
            enc_str(&l.h), sci(&l.m), if l.direct_check { "ok" } else { "fails" });
    }
    for r in [&cert.reduction1, &cert.reduction2].into_iter().flatten() {
        let _ = writeln!(s, "\nreduction, stage {} (w = {}):", r.stage, r.w_name);
        let _ = writeln!(s, "  A = {}, M = {}, q_{} = {}", r.a, sci(&r.m), r.q_index, r.q);
        if let (Some(e), Some(l)) = (&r.epsilon_min, &r.epsilon_min_label) {
            let _ = writeln!(s, "  min ε = {} at {l}", enc_str(e));
        }
        let homogeneous: Vec<&str> = r
            .labels
            .iter()
            .filter(|l| l.homogeneous.is_some())
            .map(|l| l.label.as_str())
            .collect();
        if !homogeneous.is_empty() {
            let _ = writeln!(s, "  homogeneous labels: {}", homogeneous.join(" "));
        }
        if r.attempts.len() > 1 {
            let _ = writeln!(s, "  convergents tried: {}", r.attempts.len());
        }
        let _ = writeln!(s, "  {} ≤ {}", r.w_name, r.w_bound);
    }
    if let Some(cl) = &cert.closure {
        let _ = writeln!(s, "\nclosing search to n = {}: {} solution(s)", cl.searched_to, cl.solutions.len());
    }
    let status = match cert.verdict.status {
        Verdict::Proven => "PROVEN",
        Verdict::NotProven => "NOT PROVEN",
    };
    let _ = writeln!(s, "\nverdict: {status}: {}", cert.verdict.statement);
    for d in &cert.verdict.diagnostics {
        let _ = writeln!(s, "  diagnostic: {d}");
    }
    s
}
