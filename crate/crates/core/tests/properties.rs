use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use baker_repdigit::certified::{
    certified_floor, enclose_log_rational, CertifiedReal, PrecisionPolicy,
};
use baker_repdigit::config::ProblemConfig;
use baker_repdigit::expr::RealExpr;
use baker_repdigit::matveev::{
    lemma2_solve, linearize_exponential, matveev_coefficient, AEntry, ExponentBound, LinearFormProblem,
};
use baker_repdigit::quadratic::{binet_term, height_estimate, height_exact, HeightExpr, QuadraticNumber};
use baker_repdigit::recurrence::{
    balancing, classify_repdigit, exhaustive_search, lucas_balancing, repdigit_value, SearchSolution,
};
use baker_repdigit::reduction::{build_lambda_inequality, reduce, Stage};

fn rational() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..5_000).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn positive_rational() -> impl Strategy<Value = BigRational> {
    (1i64..1_000_000, 1i64..1_000_000).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn quadratic() -> impl Strategy<Value = QuadraticNumber> {
    (-50i64..50, -50i64..50, 1i64..20).prop_map(|(a, b, c)| QuadraticNumber::new(a, b, c, 2).unwrap())
}

fn nonzero_quadratic() -> impl Strategy<Value = QuadraticNumber> {
    quadratic().prop_filter("nonzero", |x| !x.is_zero())
}

#[test]
fn closed_form_agrees_with_recurrence() {
    for spec in [balancing(), lucas_balancing()] {
        let terms = spec.terms(200);
        for (n, t) in terms.iter().enumerate() {
            assert_eq!(&binet_term(&spec, n as u64).unwrap(), t, "{} at n = {n}", spec.name());
        }
    }
}

#[test]
fn balancing_cassini_identity() {
    let b = balancing().terms(101);
    for n in 1..=100 {
        assert_eq!(&b[n + 1] * &b[n - 1], &b[n] * &b[n] - 1, "n = {n}");
    }
}

/// Same search, different loop order: `m` outer, `n` inner, descending.
fn reversed_search(spec: &baker_repdigit::recurrence::SequenceSpec, n_max: u64, k_min: u32) -> BTreeSet<SearchSolution> {
    let terms = spec.terms(n_max);
    let mut out = BTreeSet::new();
    for m in (0..n_max).rev() {
        for n in (m + 1..=n_max).rev() {
            let diff = &terms[n as usize] - &terms[m as usize];
            if let Some((d, k)) = classify_repdigit(&diff) {
                if k >= k_min {
                    out.insert(SearchSolution { n, m, d, k });
                }
            }
        }
    }
    out
}

#[test]
fn search_independent_of_loop_order() {
    for spec in [balancing(), lucas_balancing()] {
        for k_min in [1, 2] {
            let forward: BTreeSet<_> = exhaustive_search(&spec, 60, k_min).unwrap().into_iter().collect();
            assert_eq!(forward, reversed_search(&spec, 60, k_min));
        }
    }
}

#[test]
fn trivial_repdigits_show_up_with_k_min_one() {
    let sols = exhaustive_search(&balancing(), 50, 1).unwrap();
    assert!(sols.contains(&SearchSolution { n: 2, m: 1, d: 5, k: 1 }));
}

#[test]
fn log_enclosures_nest() {
    for x in [2, 3, 10, 17, 1000, 123_456_789] {
        let x = BigRational::from_integer(x.into());
        for bits in [64, 128, 256] {
            let coarse = enclose_log_rational(&x, bits).unwrap();
            let fine = enclose_log_rational(&x, 2 * bits).unwrap();
            assert!(fine.is_subset_of(&coarse), "log {x} at {bits}/{} bits", 2 * bits);
        }
    }
}

#[test]
fn matveev_coefficient_is_monotone() {
    let a = |v: i64| AEntry::new("x", CertifiedReal::from_integer(v));
    let mk = |vals: &[i64]| {
        LinearFormProblem::new(2, vals.iter().map(|&v| a(v)).collect(), ExponentBound::Symbolic("n".into()), vec![])
            .unwrap()
    };
    let base = matveev_coefficient(&mk(&[1, 2, 3]), 128).unwrap();
    for bigger in [mk(&[2, 2, 3]), mk(&[1, 3, 3]), mk(&[1, 2, 4]), mk(&[1, 2, 3, 1])] {
        let c = matveev_coefficient(&bigger, 128).unwrap();
        assert!(c.lo() >= base.hi());
    }
}

#[test]
fn lemma2_bound_dominates_grid_search() {
    // ten values of H per r, spread geometrically above the (4r²)^r threshold
    let cases = (0..10).map(|i| (1u32, 5 * 3i64.pow(i))).chain((0..10).map(|i| (2u32, 257 * 2i64.pow(i))));
    for (r, h) in cases {
        let l2 = lemma2_solve(r, &CertifiedReal::from_integer(h), 128).unwrap();
        let bound = l2.bound.to_string().parse::<f64>().unwrap();
        // every L on a fine geometric grid with L/(log L)^r < H must lie below the bound
        let mut l = 3.0f64;
        while l < 1e12 {
            if l / l.ln().powi(r as i32) < h as f64 {
                assert!(l < bound, "r = {r}, H = {h}: L = {l} exceeds {bound}");
            }
            l *= 1.001;
        }
    }
}

#[test]
fn reduction_is_deterministic_and_monotone_in_m() {
    let alpha = balancing().binet().alpha.clone();
    let lambdas: Vec<_> = (1..=9i64)
        .map(|d| (format!("d={d}"), QuadraticNumber::new(0, 4 * d, 9, 2).unwrap()))
        .collect();
    let policy = PrecisionPolicy::default();
    let mut last_index = 0;
    for m in ["1000", "1000000", "1000000000000", "6900000000000000000000000000000"] {
        let m: BigInt = m.parse().unwrap();
        let p = build_lambda_inequality(Stage::Gap, &lambdas, &alpha, 10, &BigInt::from(6), &m).unwrap();
        let a = reduce(&p, &policy).unwrap();
        let b = reduce(&p, &policy).unwrap();
        assert_eq!(a, b);
        assert!(a.q_index >= last_index);
        last_index = a.q_index;
    }
}

#[test]
fn builtin_configs_round_trip() {
    for name in ["balancing", "lucas-balancing"] {
        let cfg = ProblemConfig::builtin(name).unwrap();
        let again = ProblemConfig::parse(&cfg.to_config_text()).unwrap();
        assert_eq!(cfg.echo(), again.echo());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn log_of_product_is_sum_of_logs(x in positive_rational(), y in positive_rational()) {
        let lhs = enclose_log_rational(&(&x * &y), 128).unwrap();
        let rhs = &enclose_log_rational(&x, 128).unwrap() + &enclose_log_rational(&y, 128).unwrap();
        prop_assert!(lhs.overlaps(&rhs));
    }

    #[test]
    fn nearest_integer_distance_is_shift_invariant(x in rational(), n in -1000i64..1000) {
        let a = CertifiedReal::exact(x.clone()).nearest_integer_distance();
        let b = CertifiedReal::exact(x + BigRational::from_integer(n.into())).nearest_integer_distance();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn certified_floor_agrees_with_four_times_precision(n in 2i64..10_000, d in 2i64..10_000) {
        let tau = RealExpr::log_ratio(QuadraticNumber::from_integer(n), QuadraticNumber::from_integer(d));
        // exact ratios such as log 100/log 10 never certify; cap the escalation
        let policy = PrecisionPolicy::new(192, 1536, 2).unwrap();
        if let Ok(f) = certified_floor(|bits| tau.eval(bits), &policy) {
            let fine = tau.eval(4 * policy.initial_bits).unwrap();
            let f_rat = BigRational::from_integer(f.clone());
            prop_assert!(fine.hi() >= &f_rat);
            prop_assert!(fine.lo() < &(f_rat + BigRational::one()));
        }
    }

    #[test]
    fn repdigits_round_trip(d in 1u8..=9, k in 1u32..60) {
        let v = repdigit_value(d, k).unwrap();
        prop_assert_eq!(classify_repdigit(&v), Some((d, k)));
    }

    #[test]
    fn non_repdigits_are_rejected(n in 10u64..1_000_000_000) {
        let s = n.to_string();
        let all_same = s.bytes().all(|b| b == s.as_bytes()[0]);
        prop_assert_eq!(classify_repdigit(&BigInt::from(n)).is_some(), all_same);
    }

    #[test]
    fn conjugation_is_multiplicative(x in quadratic(), y in quadratic()) {
        prop_assert_eq!((&x * &y).conjugate(), &x.conjugate() * &y.conjugate());
        prop_assert_eq!((&x + &y).conjugate(), &x.conjugate() + &y.conjugate());
    }

    #[test]
    fn height_is_symmetric_under_inversion(x in nonzero_quadratic()) {
        let h = height_exact(&x, 128).unwrap().value;
        let hr = height_exact(&x.recip().unwrap(), 128).unwrap().value;
        prop_assert!(h.overlaps(&hr));
    }

    #[test]
    fn height_estimate_dominates_exact(
        leaves in proptest::collection::vec(nonzero_quadratic(), 2..5),
        ops in proptest::collection::vec(0u8..4, 4),
        k in 1i64..4,
    ) {
        let mut e = HeightExpr::leaf(leaves[0].clone());
        for (leaf, op) in leaves[1..].iter().zip(&ops) {
            let rhs = HeightExpr::leaf(leaf.clone());
            e = match op {
                0 => e + rhs,
                1 => e - rhs,
                2 => e * rhs,
                _ => e / rhs,
            };
        }
        let e = e.pow(k);
        if let Ok(Some(v)) = e.eval() {
            if !v.is_zero() {
                let est = height_estimate(&e, 128).unwrap().value;
                let exact = height_exact(&v, 128).unwrap().value;
                prop_assert!(est.hi() >= exact.lo(), "{} gives {} < {}", e, est, exact);
            }
        }
    }

    #[test]
    fn linearization_fact_holds(z in -0.69f64..0.69) {
        let y = (z.exp() - 1.0).abs();
        prop_assume!(y > 0.0 && y < 0.5);
        // y·(1 + 1e-9) keeps the float y strictly above |e^z − 1|
        let y_up = BigRational::from_float(y * (1.0 + 1e-9)).unwrap();
        let mult = linearize_exponential(&CertifiedReal::exact(y_up)).unwrap();
        prop_assert!(z.abs() < f64::from(mult) * y);
    }

    #[test]
    fn interval_ops_contain_exact_results(x in rational(), y in rational()) {
        let (xi, yi) = (CertifiedReal::exact(x.clone()), CertifiedReal::exact(y.clone()));
        prop_assert!((&xi * &yi).contains(&(&x * &y)));
        prop_assert!((&xi - &yi).contains(&(&x - &y)));
        if !y.is_zero() {
            prop_assert!(xi.checked_div(&yi).unwrap().contains(&(&x / &y)));
        }
        prop_assert!(xi.abs().lo() >= &BigRational::zero());
        prop_assert_eq!(xi.abs().contains(&x.abs()), true);
    }
}
