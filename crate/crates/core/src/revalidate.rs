//! Independent re-checking of a stored certificate.
//!
//! Nothing produced by the run is trusted except the logarithm enclosures it
//! recorded (`log α`, `log 10` through `τ`, `log H`, the `μ` values). Every
//! relation between stored numbers is re-derived with exact rational
//! arithmetic, the algebraic parts (residual audit, nonvanishing, λ values,
//! the searches) are recomputed from the echoed configuration, and summary
//! fields are compared with the nested records they mirror. Any edit to a
//! stored constant breaks at least one of these relations.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::certified::{int, rat, round_up_significant, CertifiedReal, Enclosure};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::matveev::{
    AEntry, LinearFormProblem, ROUNDING_DIGITS,
};
use crate::pipeline::{
    audit_residuals, exponent_bound_check, linearization_check, nonvanishing_records,
    parse_label, stage1_height_expr, stage2_height_expr, stage_lambdas, MatveevRecord, ProofCertificate, ReductionRecord, Verdict,
    CERT_VERSION,
};
use crate::quadratic::{height_estimate_affine, height_exact, QuadraticNumber};
use crate::recurrence::exhaustive_search;
use crate::reduction::certified_convergents;

const BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RevalidationReport {
    pub checks: Vec<Check>,
}

impl RevalidationReport {
    pub fn all_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    fn push(&mut self, name: impl Into<String>, r: Result<bool>, detail: impl Into<String>) {
        let (pass, detail) = match r {
            Ok(p) => (p, detail.into()),
            Err(e) => (false, format!("{}: {e}", detail.into())),
        };
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail,
        });
    }
}

impl fmt::Display for RevalidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.pass { "ok  " } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        let bad = self.failures().len();
        write!(f, "{} checks, {bad} failing", self.checks.len())
    }
}

fn r(s: &str) -> Result<BigRational> {
    crate::certified::parse_decimal(s)
}

fn bi(s: &str) -> Result<BigInt> {
    s.parse()
        .map_err(|_| Error::Parse(format!("not an integer: `{s}`")))
}

fn enc(e: &Enclosure) -> Result<CertifiedReal> {
    CertifiedReal::from_enclosure(e)
}

fn round2(x: &BigRational) -> BigRational {
    round_up_significant(x, ROUNDING_DIGITS)
}

fn need<'a, T>(x: &'a Option<T>, what: &str) -> Result<&'a T> {
    x.as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{what} is missing")))
}

/// Fixed rational bracket around `log 2`; the only logarithm revalidation
/// relies on that it did not find in the certificate.
fn ln2() -> CertifiedReal {
    CertifiedReal::new(rat(693147180559945u64, 10u64.pow(15)), rat(693147180559946u64, 10u64.pow(15)))
        .expect("ordered")
}

/// `log x` bracketed through the bit length: `2^(b−1) ≤ x < 2^b`.
fn log_bracket(x: &BigInt) -> CertifiedReal {
    let b = x.bits();
    let l = ln2();
    CertifiedReal::new(l.lo() * int(b.saturating_sub(1)), l.hi() * int(b)).expect("ordered")
}

/// Rational lower bound for `alpha^k`.
fn alpha_pow_lo(alpha: &QuadraticNumber, k: i64) -> Result<BigRational> {
    Ok(alpha.pow(k)?.to_interval(BITS).lo().clone())
}

/// Replays every relation recorded in `cert`.
pub fn revalidate(cert: &ProofCertificate) -> RevalidationReport {
    let mut rep = RevalidationReport::default();
    rep.push(
        "version",
        Ok(cert.version == CERT_VERSION),
        format!("{} (expected {CERT_VERSION})", cert.version),
    );
    let cfg = match ProblemConfig::from_echo(&cert.config) {
        Ok(c) => c,
        Err(e) => {
            rep.push("config", Err(e), "echoed configuration");
            return rep;
        }
    };
    rep.push("config", Ok(cfg.echo() == cert.config), "echo parses back unchanged");

    rep.push(
        "small search",
        exhaustive_search(&cfg.sequence, cfg.small_search_limit, cfg.k_min)
            .map(|s| s == cert.small_search),
        format!("recomputed up to n = {}", cfg.small_search_limit),
    );

    let proven = cert.verdict.status == Verdict::Proven;
    if proven {
        rep.push(
            "proven has no diagnostics",
            Ok(cert.verdict.diagnostics.is_empty()),
            format!("{} diagnostic(s)", cert.verdict.diagnostics.len()),
        );
    } else {
        rep.push(
            "not-proven carries a reason",
            Ok(!cert.verdict.diagnostics.is_empty()),
            format!("{} diagnostic(s)", cert.verdict.diagnostics.len()),
        );
    }

    if let Err(e) = check_chain(&cfg, cert, &mut rep, proven) {
        rep.push("certificate structure", Err(e), "incomplete record");
    } else if cert.stage1_matveev.is_some() {
        if let Err(e) = check_leaves(&cfg, cert, &mut rep) {
            rep.push("leaf values", Err(e), "incomplete record");
        }
    }
    rep
}

fn check_chain(
    cfg: &ProblemConfig,
    cert: &ProofCertificate,
    rep: &mut RevalidationReport,
    proven: bool,
) -> Result<()> {
    let alpha = cfg.sequence.binet().alpha.clone();

    // residuals: exact algebra, recomputed outright
    let Some(res) = &cert.residuals else {
        if proven {
            return Err(Error::InvalidInput("residual audit missing".into()));
        }
        return Ok(());
    };
    let audit = audit_residuals(cfg)?;
    rep.push(
        "residual audit",
        Ok(audit.record() == *res),
        format!("sup r1 = {}, sup r2 = {}", res.stage1_sup, res.stage2_sup),
    );
    let rhs1 = bi(&res.rhs_stage1)?;
    let rhs2 = bi(&res.rhs_stage2)?;

    if let Some(e) = &cert.exponent_bound {
        rep.push(
            "exponent bound",
            exponent_bound_check(cfg).map(|x| x == *e && x.holds),
            e.statement.clone(),
        );
    }
    let lin = need(&cert.linearization, "linearization")?;
    rep.push(
        "linearization",
        linearization_check(cfg, &audit).map(|x| x == *lin),
        format!("gap ≥ {}, n ≥ {}", lin.stage1_min_gap, lin.stage2_min_n),
    );
    rep.push(
        "stage-2 linearization covered",
        Ok(lin.stage2_min_n as u64 <= cfg.small_search_limit + 1),
        format!("n ≥ {} vs search limit {}", lin.stage2_min_n, cfg.small_search_limit),
    );

    let nv1: Vec<_> = cert.nonvanishing.iter().filter(|r| r.stage == 1).cloned().collect();
    rep.push(
        "nonvanishing, stage 1",
        nonvanishing_records(cfg, 1, &stage_lambdas(cfg, None)?)
            .map(|x| x == nv1 && x.iter().all(|r| r.certificate.verdict)),
        format!("{} forms", nv1.len()),
    );

    let s1 = need(&cert.stage1_matveev, "stage-1 Matveev record")?;
    let s2 = need(&cert.stage2_matveev, "stage-2 Matveev record")?;
    let root_log = enc(&s1.root_log)?;
    rep.push(
        "log α consistent",
        Ok(s2.root_log == s1.root_log && root_log.lo().is_positive()),
        "stored log α agrees between stages",
    );
    let a_base = s1
        .a_entries
        .iter()
        .find(|a| a.label == "base")
        .map(|a| enc(&a.value))
        .transpose()?
        .ok_or_else(|| Error::InvalidInput("no A entry for the base".into()))?;
    check_matveev(rep, s1, &rhs1, None, &root_log)?;
    let k1 = r(&s1.constant)?;
    check_matveev(rep, s2, &rhs2, Some(&k1), &root_log)?;
    let k2 = r(&s2.constant)?;

    let l2 = need(&cert.lemma2, "log-power record")?;
    let h = enc(&l2.h)?;
    let log_h = enc(&l2.log_h)?;
    let bound = enc(&l2.bound_enclosure)?;
    let four_r2_r = int(num_traits::pow(BigInt::from(4 * l2.r * l2.r), l2.r as usize));
    let recomputed = CertifiedReal::exact(k2.clone()).checked_div(&root_log)?;
    rep.push(
        "log-power H",
        Ok(l2.r == 2 && recomputed.overlaps(&h) && h.lo() > &four_r2_r),
        format!("H ⊇ K2/log α and H > (4r²)^r = {four_r2_r}"),
    );
    rep.push(
        "log-power log H",
        Ok(log_h.lo().is_positive()
            && log_h.overlaps(&log_bracket(&h.lo().floor().to_integer()).hull(&log_bracket(&h.hi().ceil().to_integer())))),
        "stored log H lies in the bit-length bracket of H",
    );
    let two_r = int(num_traits::pow(BigInt::from(2), l2.r as usize));
    let product = (CertifiedReal::exact(two_r) * &h) * log_h.powi(l2.r);
    let ceiling = bi(&l2.bound_ceiling)?;
    let m = bi(&l2.m)?;
    rep.push(
        "log-power bound",
        Ok(product.overlaps(&bound)
            && int(ceiling.clone()) >= *product.hi()
            && int(ceiling.clone() - 1) < *product.hi()),
        format!("2^r·H·(log H)^r ≤ {ceiling}"),
    );
    rep.push(
        "M rounding",
        Ok(int(m.clone()) == round2(&int(ceiling.clone()))),
        format!("M = {m}"),
    );
    rep.push(
        "M direct check",
        Ok(l2.direct_check && direct_check(&k2, &root_log, &m)),
        "n·log α > K2(1 + log n)^2 from M on, with log M bracketed by bit length",
    );
    rep.push(
        "summary lemma2_bound",
        Ok(cert.lemma2_bound.as_deref() == Some(l2.m.as_str())),
        "matches the nested record",
    );

    let red1 = need(&cert.reduction1, "stage-1 reduction")?;
    check_reduction(rep, cfg, red1, 1, None, &rhs1, &m, &root_log, &a_base, &alpha)?;
    let w1: u64 = bi(&red1.w_bound)?.try_into().map_err(|_| Error::Parse("w".into()))?;
    let gap = w1.max(lin.stage1_min_gap.saturating_sub(1) as u64).max(1);
    rep.push(
        "gap bound",
        Ok(cert.gap_bound == Some(gap)),
        format!("max(w = {w1}, linearization gap − 1) = {gap}"),
    );
    rep.push(
        "summary stage 1",
        Ok(cert.q_stage1.as_deref() == Some(red1.q.as_str())
            && cert.epsilon_stage1 == red1.epsilon_min),
        "q_stage1 and epsilon_stage1 match the nested record",
    );

    let gmax = u32::try_from(gap).map_err(|_| Error::Parse("gap".into()))?;
    let nv2: Vec<_> = cert.nonvanishing.iter().filter(|r| r.stage == 2).cloned().collect();
    rep.push(
        "nonvanishing, stage 2",
        nonvanishing_records(cfg, 2, &stage_lambdas(cfg, Some(gmax))?)
            .map(|x| x == nv2 && x.iter().all(|r| r.certificate.verdict)),
        format!("{} forms", nv2.len()),
    );

    let red2 = need(&cert.reduction2, "stage-2 reduction")?;
    check_reduction(rep, cfg, red2, 2, Some(gmax), &rhs2, &m, &root_log, &a_base, &alpha)?;
    rep.push(
        "reductions share M",
        Ok(red1.m == red2.m),
        "both reductions use the same M",
    );
    let n_bound: u64 = bi(&red2.w_bound)?.try_into().map_err(|_| Error::Parse("n".into()))?;
    rep.push(
        "summary stage 2",
        Ok(cert.n_bound == Some(n_bound)
            && cert.q_stage2.as_deref() == Some(red2.q.as_str())
            && cert.epsilon_stage2 == red2.epsilon_min),
        "n_bound, q_stage2 and epsilon_stage2 match the nested record",
    );

    let cl = need(&cert.closure, "closure")?;
    let to = n_bound.max(cfg.small_search_limit);
    let sols = exhaustive_search(&cfg.sequence, to, cfg.k_min)?;
    rep.push(
        "closure search",
        Ok(cl.searched_to == to && cl.solutions == sols && cert.verdict.solutions == sols),
        format!("recomputed up to n = {to}: {} solution(s)", sols.len()),
    );
    rep.push(
        "verdict",
        Ok(proven == sols.is_empty()),
        format!("{:?} with {} solution(s)", cert.verdict.status, sols.len()),
    );
    Ok(())
}

fn check_matveev(
    rep: &mut RevalidationReport,
    rec: &MatveevRecord,
    rhs: &BigInt,
    k1: Option<&BigRational>,
    root_log: &CertifiedReal,
) -> Result<()> {
    let stage = if k1.is_some() { 2 } else { 1 };
    let tag = format!("stage-{stage} Matveev");
    rep.push(
        format!("{tag} shape"),
        Ok(rec.stage == stage && rec.degree == 2 && rec.l as usize == rec.a_entries.len()),
        format!("stage {}, degree {}, l = {}", rec.stage, rec.degree, rec.l),
    );
    let h_rounded = r(&rec.height_rounded)?;
    match k1 {
        None => {
            let hmax = rec
                .heights
                .iter()
                .map(|h| enc(&h.constant).map(|c| c.hi().clone()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or_else(BigRational::zero);
            rep.push(
                format!("{tag} height"),
                Ok(h_rounded == round2(&hmax)),
                format!("h = {}", rec.height_rounded),
            );
        }
        Some(k1) => {
            let c0 = r(need(&rec.height_constant_rounded, "height constant")?)?;
            let ratio = enc(need(&rec.slope_ratio, "slope ratio")?)?;
            let cmax = rec
                .heights
                .iter()
                .map(|h| enc(&h.constant).map(|c| c.hi().clone()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or_else(BigRational::zero);
            let slope = rec
                .heights
                .iter()
                .map(|h| enc(need(&h.slope, "height slope")?))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .reduce(|a, b| a.max(&b))
                .ok_or_else(|| Error::InvalidInput("no heights".into()))?;
            rep.push(
                format!("{tag} slope ratio"),
                Ok(slope.checked_div(root_log)?.overlaps(&ratio)),
                "ratio = max slope / log α",
            );
            let upstream = r(need(&rec.upstream_constant, "upstream constant")?)?;
            rep.push(
                format!("{tag} upstream"),
                Ok(&upstream == k1),
                "uses the stage-1 constant exactly",
            );
            rep.push(
                format!("{tag} height"),
                Ok(c0 == round2(&cmax) && h_rounded == round2(&(&c0 + ratio.hi() * k1))),
                format!("h = {} + ratio·K1 → {}", rec.height_constant_rounded.as_deref().unwrap_or(""), rec.height_rounded),
            );
        }
    }
    let entries = rec
        .a_entries
        .iter()
        .map(|a| Ok(AEntry::new(a.label.clone(), enc(&a.value)?).with_log_power(a.log_power)))
        .collect::<Result<Vec<_>>>()?;
    let lambda = entries
        .iter()
        .find(|e| e.label == "lambda")
        .ok_or_else(|| Error::InvalidInput("no lambda entry".into()))?;
    rep.push(
        format!("{tag} A3"),
        Ok(lambda.value.lo() >= &(int(2) * &h_rounded)
            && lambda.log_power == u32::from(k1.is_some())),
        "A3 ≥ 2·h",
    );
    let problem = LinearFormProblem::new(rec.degree, entries, rec.exponent_bound.clone(), rec.gammas.clone())?;
    let c = coefficient(&problem)?;
    let stored = enc(&rec.coefficient)?;
    rep.push(
        format!("{tag} coefficient"),
        Ok(c.overlaps(&stored)),
        format!("C recomputed from the stored A_j: {c}"),
    );
    let rounded = r(&rec.coefficient_rounded)?;
    rep.push(
        format!("{tag} rounding"),
        Ok(rounded == round2(c.hi()) && rounded >= *stored.hi()),
        format!("C ≤ {}", rec.coefficient_rounded),
    );
    let log_rhs = enc(&rec.log_rhs)?;
    let rhs_ok = rec.rhs == rhs.to_string()
        && log_bracket(rhs).overlaps(&log_rhs);
    let k = r(&rec.constant)?;
    rep.push(
        format!("{tag} chain"),
        Ok(rhs_ok
            && k == round2(&(&rounded + log_rhs.hi()))
            && rec.log_power == 1 + problem.a_log_power()),
        format!("K = ⌈C + log {}⌉ = {}", rec.rhs, rec.constant),
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_reduction(
    rep: &mut RevalidationReport,
    cfg: &ProblemConfig,
    red: &ReductionRecord,
    stage: u8,
    gap_bound: Option<u32>,
    rhs: &BigInt,
    m: &BigInt,
    root_log: &CertifiedReal,
    a_base: &CertifiedReal,
    alpha: &QuadraticNumber,
) -> Result<()> {
    let tag = format!("reduction {stage}");
    let tau = enc(&red.tau)?;
    let q = bi(&red.q)?;
    let p = bi(&red.p)?;
    let a = r(&red.a)?;
    let mq = int(m.clone());
    let stored_m = bi(&red.m)?;
    rep.push(format!("{tag} M"), Ok(&stored_m == m), format!("M = {}", red.m));
    rep.push(
        format!("{tag} rhs"),
        Ok(red.rhs == rhs.to_string()),
        format!("rhs = {}", red.rhs),
    );
    // A = ⌈2·rhs/log α⌉, checked on both sides with the stored log α
    let two_rhs = int(rhs * 2);
    let a_ok = a.is_integer()
        && &a * root_log.lo() >= two_rhs
        && (&a - BigRational::one()) * root_log.hi() < two_rhs;
    rep.push(format!("{tag} A"), Ok(a_ok), format!("A = {}", red.a));
    rep.push(
        format!("{tag} τ"),
        Ok((&tau * root_log).scale(&int(2)).overlaps(a_base)),
        "2τ·log α agrees with the stored A for the base (2·log 10)",
    );
    // convergent: coprime, and |τ − p/q| < 1/q²
    let diff = (&tau - &CertifiedReal::exact(BigRational::new(p.clone(), q.clone()))).abs();
    rep.push(
        format!("{tag} convergent"),
        Ok(p.gcd(&q).is_one()
            && diff.hi() < &BigRational::new(BigInt::one(), &q * &q)
            && q > m * 6),
        format!("q_{} = {} > 6M", red.q_index, red.q),
    );

    check_convergents(rep, &tag, red, stage, &tau, m)?;

    let lambdas = stage_lambdas(cfg, gap_bound)?;
    let labels: BTreeSet<&str> = red.labels.iter().map(|l| l.label.as_str()).collect();
    let expected: BTreeSet<&str> = lambdas.iter().map(|(l, _)| l.as_str()).collect();
    rep.push(
        format!("{tag} family"),
        Ok(labels == expected && labels.len() == red.labels.len()),
        format!("{} labels", red.labels.len()),
    );

    let big_q = CertifiedReal::from_integer(q.clone());
    let tau_term = (&tau * &big_q).nearest_integer_distance().scale(&mq);
    let aq = &a * int(q.clone());
    let mut w_max = BigInt::from(-1);
    let mut eps_min: Option<(CertifiedReal, String)> = None;
    let mut bad = Vec::new();
    for l in &red.labels {
        let w = bi(&l.w_bound)?;
        w_max = w_max.max(w.clone());
        let Some((d, g)) = parse_label(&l.label) else {
            bad.push(format!("{}: unparsable label", l.label));
            continue;
        };
        let lambda = match g {
            Some(g) => cfg.lambda3_gap(d, g)?,
            None => cfg.lambda3(d),
        };
        let mu = enc(&l.mu)?;
        if lambda.to_string() != l.lambda || !mu_floor_matches(&mu, &lambda, alpha)? {
            bad.push(format!("{}: λ or μ does not match the configuration", l.label));
            continue;
        }
        let wi = i64::try_from(&w).map_err(|_| Error::Parse("w".into()))?;
        match (&l.epsilon, &l.homogeneous) {
            (Some(e), None) => {
                let stored = enc(e)?;
                let eps = (&mu * &big_q).nearest_integer_distance() - &tau_term;
                // α^{w+1}·ε > A·q: no larger w can satisfy the reduction inequality
                let sound = eps.lo().is_positive()
                    && stored.overlaps(&eps)
                    && alpha_pow_lo(alpha, wi + 1)? * stored.lo().max(eps.lo()) > aq;
                // α^w·ε ≤ A·q: w is the floor itself, not an inflated value
                let tight = alpha.pow(wi)?.to_interval(BITS).hi() * stored.lo() <= aq;
                if !sound || !tight {
                    bad.push(format!("{}: ε or w inconsistent", l.label));
                }
                if eps_min.as_ref().is_none_or(|(m, _)| stored.midpoint() < m.midpoint()) {
                    eps_min = Some((stored, l.label.clone()));
                }
            }
            (None, Some(h)) => {
                let hq = bi(&h.q)?;
                let q_next = bi(&h.q_next)?;
                let dist = enc(&h.distance)?;
                let recomputed = (&tau * &CertifiedReal::from_integer(hq)).nearest_integer_distance();
                let ten_b = QuadraticNumber::from_integer(cfg.base).pow(h.shift)?;
                let exact = alpha.pow(h.j)? * ten_b == lambda;
                let shifted = CertifiedReal::from_integer(h.j) + tau.scale(&int(h.shift));
                let ok = exact
                    && shifted.overlaps(&mu)
                    && q_next > m + BigInt::from(h.shift.unsigned_abs())
                    && dist.lo().is_positive()
                    && dist.overlaps(&recomputed)
                    && alpha_pow_lo(alpha, wi + 1)? * dist.lo() > a;
                if !ok {
                    bad.push(format!("{}: homogeneous bound inconsistent", l.label));
                }
            }
            _ => bad.push(format!("{}: neither ε nor a homogeneous record", l.label)),
        }
    }
    rep.push(
        format!("{tag} labels"),
        Ok(bad.is_empty()),
        if bad.is_empty() {
            "every ε and w re-derived".to_string()
        } else {
            bad.join("; ")
        },
    );
    rep.push(
        format!("{tag} w"),
        Ok(bi(&red.w_bound)? == w_max),
        format!("{} ≤ {}", red.w_name, red.w_bound),
    );
    let (emin, elabel) = match eps_min {
        Some((e, l)) => (Some(e.to_enclosure()), Some(l)),
        None => (None, None),
    };
    rep.push(
        format!("{tag} min ε"),
        Ok(emin == red.epsilon_min && elabel == red.epsilon_min_label),
        format!("at {}", red.epsilon_min_label.as_deref().unwrap_or("-")),
    );
    Ok(())
}

/// `1.4·30^{l+3}·l^{4.5}·d²·(1 + log d)·∏A_j` from the stored `A_j`, with
/// `√l` bracketed by exact squaring and `log d` by [`ln2`] (`d = 2` only).
fn coefficient(p: &LinearFormProblem) -> Result<CertifiedReal> {
    if p.degree != 2 {
        return Err(Error::Unsupported("revalidation handles degree-2 fields".into()));
    }
    let l = p.l();
    let base = rat(7, 5)
        * int(num_traits::pow(BigInt::from(30), (l + 3) as usize))
        * int(num_traits::pow(BigInt::from(l), 4))
        * int(4);
    let sqrt_l = sqrt_bracket(l);
    let mut c = CertifiedReal::exact(base) * sqrt_l * (CertifiedReal::from_integer(1) + ln2());
    for e in &p.entries {
        c = c * &e.value;
    }
    Ok(c)
}

/// `√l` between consecutive multiples of `10^-30`, certified by squaring.
fn sqrt_bracket(l: u32) -> CertifiedReal {
    let scale = num_traits::pow(BigInt::from(10), 30);
    let target = BigInt::from(l) * &scale * &scale;
    let lo = target.sqrt();
    let hi = if &lo * &lo == target { lo.clone() } else { &lo + 1 };
    CertifiedReal::new(
        BigRational::new(lo, scale.clone()),
        BigRational::new(hi, scale),
    )
    .expect("ordered")
}

/// `x·log α > K(1 + log x)²` at `x = m` and increasing from there, with
/// `log m ≤ bits(m)·log 2`.
fn direct_check(k: &BigRational, root_log: &CertifiedReal, m: &BigInt) -> bool {
    if !m.is_positive() {
        return false;
    }
    let lf = int(1) + log_bracket(m).hi();
    let lhs = int(m.clone()) * root_log.lo();
    lhs > k * &lf * &lf && lhs > int(2) * k * &lf
}

/// `⌊μ⌋ = j` exactly when `α^j ≤ λ < α^(j+1)`; an algebraic check on the
/// stored `μ = log λ/log α`.
fn mu_floor_matches(mu: &CertifiedReal, lambda: &QuadraticNumber, alpha: &QuadraticNumber) -> Result<bool> {
    let (Some(a), Some(b)) = (mu.lo().floor().to_integer().try_into().ok(), mu.hi().floor().to_integer().try_into().ok()) else {
        return Ok(false);
    };
    let (a, b): (i64, i64) = (a, b);
    if a != b {
        // μ straddles an integer, so λ must sit between α^a and α^(a+2)
        return Ok(&alpha.pow(a)? <= lambda && lambda < &alpha.pow(a + 2)?);
    }
    Ok(&alpha.pow(a)? <= lambda && lambda < &alpha.pow(a + 1)?)
}

/// The convergents named in a reduction record, re-expanded from the stored
/// `τ` enclosure: the chosen index, the retry trail and the homogeneous
/// indices must all be the ones the rules pick.
fn check_convergents(
    rep: &mut RevalidationReport,
    tag: &str,
    red: &ReductionRecord,
    stage: u8,
    tau: &CertifiedReal,
    m: &BigInt,
) -> Result<()> {
    let hom: Vec<_> = red.labels.iter().filter_map(|l| l.homogeneous.as_ref()).collect();
    let deepest = hom
        .iter()
        .map(|h| h.index + 1)
        .chain(red.attempts.iter().map(|a| a.index))
        .chain([red.q_index])
        .max()
        .unwrap_or(0);
    let cv = certified_convergents(tau, deepest + 2);
    if cv.len() <= deepest {
        rep.push(format!("{tag} trail"), Ok(false), "τ enclosure too narrow for the recorded indices");
        return Ok(());
    }
    let six_m = m * 6;
    let first = cv.iter().position(|(_, q)| q > &six_m);
    let indices: Vec<usize> = red.attempts.iter().map(|a| a.index).collect();
    let consecutive = indices.windows(2).all(|w| w[1] == w[0] + 1);
    let trail_ok = red.stage == stage
        && Some(indices.first().copied().unwrap_or(usize::MAX)) == first
        && consecutive
        && indices.last() == Some(&red.q_index)
        && red.attempts.iter().all(|a| a.q == cv[a.index].1.to_string())
        && red.attempts.iter().rev().skip(1).all(|a| !a.failing.is_empty())
        && red.attempts.last().is_some_and(|a| a.failing.is_empty())
        && cv[red.q_index].0.to_string() == red.p
        && cv[red.q_index].1.to_string() == red.q;
    rep.push(
        format!("{tag} trail"),
        Ok(trail_ok),
        format!("first q > 6M at index {first:?}, used q_{} after {} attempt(s)", red.q_index, indices.len()),
    );
    if !hom.is_empty() {
        let max_shift = hom.iter().map(|h| h.shift.unsigned_abs()).max().unwrap_or(0);
        let reach = m + BigInt::from(max_shift);
        let n = cv.iter().skip(1).position(|(_, q)| q > &reach);
        let ok = hom.iter().all(|h| {
            Some(h.index) == n
                && cv[h.index].1.to_string() == h.q
                && cv[h.index + 1].1.to_string() == h.q_next
        });
        rep.push(
            format!("{tag} homogeneous indices"),
            Ok(ok),
            format!("q_(N+1) > M + {max_shift} first at N = {n:?}"),
        );
    }
    Ok(())
}

const LEAF_BITS: u32 = 128;

/// Stored logarithms and heights against fresh evaluations. Nothing here is
/// searched or reduced again; each leaf is one transcendental evaluation.
fn check_leaves(cfg: &ProblemConfig, cert: &ProofCertificate, rep: &mut RevalidationReport) -> Result<()> {
    let alpha = cfg.sequence.binet().alpha.clone();
    let base = QuadraticNumber::from_integer(cfg.base);
    let log_alpha = alpha.ln(LEAF_BITS)?;
    let log_base = base.ln(LEAF_BITS)?;
    let floor = CertifiedReal::from_ratio(4, 25);
    let two = CertifiedReal::from_integer(2);
    let a_alpha = (&two * &height_exact(&alpha, LEAF_BITS)?.value).max(&log_alpha).max(&floor);
    let a_base = (&two * &height_exact(&base, LEAF_BITS)?.value).max(&log_base).max(&floor);

    for (stage, rec) in [(1u8, cert.stage1_matveev.as_ref()), (2, cert.stage2_matveev.as_ref())] {
        let Some(rec) = rec else { continue };
        let tag = format!("leaf: stage-{stage}");
        rep.push(format!("{tag} log α"), Ok(enc(&rec.root_log)?.overlaps(&log_alpha)), "128-bit log α");
        let a = |label: &str| -> Result<CertifiedReal> {
            rec.a_entries
                .iter()
                .find(|e| e.label == label)
                .ok_or_else(|| Error::InvalidInput(format!("no A entry {label}")))
                .and_then(|e| enc(&e.value))
        };
        rep.push(
            format!("{tag} A entries"),
            Ok(a("alpha")?.overlaps(&a_alpha) && a("base")?.overlaps(&a_base)),
            "A for α and for the base",
        );
        let rhs = bi(&rec.rhs)?;
        let log_rhs = CertifiedReal::from_integer(rhs).ln(LEAF_BITS)?;
        rep.push(format!("{tag} log rhs"), Ok(enc(&rec.log_rhs)?.overlaps(&log_rhs)), format!("log {}", rec.rhs));

        let mut ok = rec.heights.len() == cfg.digit_range().count();
        let mut log_max = CertifiedReal::from_integer(0);
        for (h, d) in rec.heights.iter().zip(cfg.digit_range()) {
            let e = if stage == 1 { stage1_height_expr(cfg, d) } else { stage2_height_expr(cfg, d)? };
            let fresh = height_estimate_affine(&e, LEAF_BITS)?;
            ok &= h.label == stage1_label_of(d) && h.expression == e.to_string();
            ok &= enc(&h.constant)?.overlaps(&fresh.constant);
            ok &= match (&h.slope, stage) {
                (None, 1) => true,
                (Some(s), 2) => enc(s)?.overlaps(&fresh.slope),
                _ => false,
            };
            log_max = log_max.max(&cfg.lambda3(d).ln(LEAF_BITS)?.abs());
        }
        rep.push(format!("{tag} heights"), Ok(ok), format!("{} height estimates", rec.heights.len()));
        if stage == 1 {
            let h = r(&rec.height_rounded)?;
            let want = CertifiedReal::exact(int(2) * h).max(&log_max).max(&floor);
            rep.push(format!("{tag} A for λ"), Ok(a("lambda")?.overlaps(&want)), "max(2h, |log λ|, 0.16)");
        }
    }

    if let Some(l2) = &cert.lemma2 {
        let fresh = enc(&l2.h)?.ln(LEAF_BITS)?;
        rep.push("leaf: log-power log H", Ok(enc(&l2.log_h)?.overlaps(&fresh)), "log H");
    }

    let tau = log_base.checked_div(&log_alpha)?;
    for (stage, red) in [(1u8, cert.reduction1.as_ref()), (2, cert.reduction2.as_ref())] {
        let Some(red) = red else { continue };
        let gap = if stage == 2 {
            Some(u32::try_from(*need(&cert.gap_bound, "gap bound")?).map_err(|_| Error::Parse("gap".into()))?)
        } else {
            None
        };
        let lambdas = stage_lambdas(cfg, gap)?;
        let mut ok = enc(&red.tau)?.overlaps(&tau) && lambdas.len() == red.labels.len();
        for ((label, lambda), entry) in lambdas.iter().zip(&red.labels) {
            let mu = lambda.ln(LEAF_BITS)?.checked_div(&log_alpha)?;
            ok &= *label == entry.label && enc(&entry.mu)?.overlaps(&mu);
        }
        rep.push(
            format!("leaf: reduction {stage} τ and μ"),
            Ok(ok),
            format!("τ and {} values of μ", red.labels.len()),
        );
    }
    Ok(())
}

fn stage1_label_of(d: u8) -> String {
    crate::pipeline::stage1_label(d)
}
