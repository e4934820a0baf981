use std::sync::OnceLock;

use serde_json::Value;

use baker_repdigit::certified::PrecisionPolicy;
use baker_repdigit::config::{ProblemConfig, BALANCING_CONFIG};
use baker_repdigit::pipeline::{render_text, run_proof, ProofCertificate, Verdict};
use baker_repdigit::recurrence::SearchSolution;
use baker_repdigit::revalidate::revalidate;

fn balancing() -> &'static ProofCertificate {
    static CERT: OnceLock<ProofCertificate> = OnceLock::new();
    CERT.get_or_init(|| {
        let cfg = ProblemConfig::builtin("balancing").unwrap();
        run_proof(&cfg, &PrecisionPolicy::default())
    })
}

#[test]
fn balancing_chain_is_internally_consistent() {
    let c = balancing();
    assert!(c.is_proven(), "{:?}", c.verdict.diagnostics);
    let m = c.lemma2_bound.as_deref().unwrap();
    assert_eq!(m, "6900000000000000000000000000000");
    let r1 = c.reduction1.as_ref().unwrap();
    let r2 = c.reduction2.as_ref().unwrap();
    assert_eq!(r1.m, m);
    assert_eq!(r2.m, m);
    assert_eq!(c.q_stage1.as_deref(), Some(r1.q.as_str()));
    // the stage-2 family covers every gap up to the stage-1 bound
    let gap = c.gap_bound.unwrap();
    let max_g = r2
        .labels
        .iter()
        .filter_map(|l| l.label.split("g=").nth(1)?.parse::<u64>().ok())
        .max()
        .unwrap();
    assert_eq!(max_g, gap);
    let closure = c.closure.as_ref().unwrap();
    assert_eq!(closure.searched_to, c.n_bound.unwrap().max(50));
    assert!(closure.solutions.is_empty());
}

#[test]
fn structured_certificate_round_trips() {
    let c = balancing();
    let json = c.to_json();
    assert_eq!(&ProofCertificate::from_json(&json).unwrap(), c);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["version"], "cert-v1");
    assert_eq!(v["small_search"], Value::Array(vec![]));
    assert_eq!(v["q_stage1"], "82660367338512336905381670798737");
    // enclosures are lo/hi decimal strings
    assert!(v["epsilon_stage1"]["lo"].is_string());
    assert!(v["epsilon_stage1"]["hi"].is_string());
}

#[test]
fn text_rendering_carries_the_constants() {
    let text = render_text(balancing());
    for needle in ["6.9e30", "82660367338512336905381670798737", "n - m ≤ 43", "no solutions", "verdict: PROVEN"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn revalidation_passes_then_catches_edits() {
    let c = balancing();
    let report = revalidate(c);
    assert!(report.all_pass(), "{report}");

    let mut t = c.clone();
    t.lemma2_bound = Some("6800000000000000000000000000000".into());
    assert!(!revalidate(&t).all_pass());

    let mut t = c.clone();
    t.n_bound = t.n_bound.map(|n| n - 1);
    assert!(!revalidate(&t).all_pass());

    let mut t = c.clone();
    t.verdict.status = Verdict::NotProven;
    assert!(!revalidate(&t).all_pass());

    let mut t = c.clone();
    let r1 = t.reduction1.as_mut().unwrap();
    r1.q_index += 1;
    assert!(!revalidate(&t).all_pass());
}

#[test]
fn admitting_trivial_repdigits_with_a_tiny_search_is_not_proven() {
    let text = BALANCING_CONFIG
        .replace("limit = 50", "limit = 5")
        .replace("k_min = 2", "k_min = 1");
    let cfg = ProblemConfig::parse(&text).unwrap();
    let c = run_proof(&cfg, &PrecisionPolicy::default());
    assert_eq!(c.verdict.status, Verdict::NotProven);
    assert!(c.verdict.solutions.contains(&SearchSolution { n: 2, m: 1, d: 5, k: 1 }));
    assert!(!c.verdict.diagnostics.is_empty());
    // the revalidator accepts a truthful not-proven certificate
    assert!(revalidate(&c).all_pass(), "{}", revalidate(&c));
}

#[test]
fn residual_audit_raises_configured_constants_when_needed() {
    let c = balancing();
    let r = c.residuals.as_ref().unwrap();
    assert_eq!(r.configured_rhs_stage1, "4");
    assert_eq!(r.rhs_stage1, "6");
    assert_eq!(r.rhs_stage2, "8");
}
