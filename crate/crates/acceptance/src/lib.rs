//! Seeded oracles behind the property criterion of the acceptance run. Each
//! one returns `Err` with the first counterexample it meets, so a failure
//! line can show it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use baker_repdigit::certified::{CertifiedReal, PrecisionPolicy};
use baker_repdigit::expr::RealExpr;
use baker_repdigit::quadratic::{height_exact, QuadraticNumber};
use baker_repdigit::recurrence::balancing;
use baker_repdigit::reduction::{build_lambda_inequality, cf_expand, reduce, Stage};

pub type Check = std::result::Result<(), String>;

pub fn alpha() -> QuadraticNumber {
    balancing().binet().alpha.clone()
}

fn random_rational(rng: &mut StdRng) -> BigRational {
    let num: i64 = rng.gen_range(-1_000_000..=1_000_000);
    let den: i64 = rng.gen_range(1..=100_000);
    BigRational::new(num.into(), den.into())
}

/// An enclosure around `x` with random, possibly zero, slack on each side.
fn around(x: &BigRational, rng: &mut StdRng) -> CertifiedReal {
    let mut slack = || {
        if rng.gen_bool(0.25) {
            BigRational::zero()
        } else {
            BigRational::new(rng.gen_range(0..1000i64).into(), BigInt::from(rng.gen_range(1..1_000_000i64)))
        }
    };
    CertifiedReal::new(x - slack(), x + slack()).expect("lo ≤ hi")
}

/// `x ∘ y` lies in `X ∘ Y` whenever `x ∈ X`, `y ∈ Y`, for `+ − × ÷`, and
/// survives outward rounding.
pub fn interval_containment(cases: usize, seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    for i in 0..cases {
        let (x, y) = (random_rational(&mut rng), random_rational(&mut rng));
        let (xi, yi) = (around(&x, &mut rng), around(&y, &mut rng));
        let bits = rng.gen_range(8..200);
        let mut results = vec![
            ("+", &xi + &yi, &x + &y),
            ("-", &xi - &yi, &x - &y),
            ("*", &xi * &yi, &x * &y),
        ];
        if let Ok(q) = xi.checked_div(&yi) {
            results.push(("/", q, &x / &y));
        }
        for (op, enc, exact) in results {
            if !enc.contains(&exact) || !enc.round_outward(bits).contains(&exact) {
                return Err(format!("case {i}: {x} {op} {y} = {exact} escapes {enc}"));
            }
        }
    }
    Ok(())
}

/// `h(x^k) = |k|·h(x)` for `x ∈ {α, 10}` and `k ∈ {−3..3} \ {0}`.
pub fn height_power_identity() -> Check {
    for x in [alpha(), QuadraticNumber::from_integer(10)] {
        let h = height_exact(&x, 256).map_err(|e| e.to_string())?.value;
        for k in (-3i64..=3).filter(|&k| k != 0) {
            let hk = height_exact(&x.pow(k).map_err(|e| e.to_string())?, 256)
                .map_err(|e| e.to_string())?
                .value;
            let want = h.scale(&BigRational::from_integer(k.abs().into()));
            if !hk.overlaps(&want) {
                return Err(format!("h(({x})^{k}) = {hk}, expected {want}"));
            }
        }
    }
    Ok(())
}

/// Convergents of `log 10/log α`: coprime, alternating around `τ`, and
/// `|q_i τ − p_i| < 1/q_{i+1}`.
pub fn convergent_properties(depth: usize) -> Check {
    let tau = RealExpr::log_ratio(QuadraticNumber::from_integer(10), alpha());
    let cf = cf_expand(&tau, depth, &PrecisionPolicy::default()).map_err(|e| e.to_string())?;
    let t = tau.eval(1024).map_err(|e| e.to_string())?;
    let pairs = &cf.convergents;
    for (i, (p, q)) in pairs.iter().enumerate() {
        if !p.gcd(q).is_one() {
            return Err(format!("gcd(p_{i}, q_{i}) ≠ 1"));
        }
        let diff = &CertifiedReal::from_integer(q.clone()) * &t - CertifiedReal::from_integer(p.clone());
        // even convergents sit below τ, odd ones above
        let side_ok = if i % 2 == 0 { diff.lo().is_positive() } else { diff.hi().is_negative() };
        if !side_ok {
            return Err(format!("p_{i}/q_{i} is on the wrong side of τ: q τ − p = {diff}"));
        }
        if let Some((_, q_next)) = pairs.get(i + 1) {
            let bound = BigRational::new(BigInt::one(), q_next.clone());
            if diff.abs().hi() >= &bound {
                return Err(format!("|q_{i} τ − p_{i}| = {diff} is not below 1/q_{}", i + 1));
            }
        }
    }
    Ok(())
}

/// Builds the balancing stage-1 family with `M = m_bound`, reduces it, then
/// checks by brute force over `1 ≤ u ≤ M` that `w = w_bound + 1` is
/// impossible: `|uτ − v + μ| ≥ A·α^{−(w_bound + 1)}` for every `v`.
pub fn lemma1_exclusion(m_bound: u64) -> Check {
    let alpha = alpha();
    let lambdas: Vec<(String, QuadraticNumber)> = (1..=9u8)
        .map(|d| {
            let lam = QuadraticNumber::new(0, 4 * i64::from(d), 9, 2).expect("valid");
            (format!("d={d}"), lam)
        })
        .collect();
    let problem = build_lambda_inequality(Stage::Gap, &lambdas, &alpha, 10, &BigInt::from(6), &m_bound.into())
        .map_err(|e| e.to_string())?;
    let outcome = reduce(&problem, &PrecisionPolicy::default()).map_err(|e| e.to_string())?;
    let bits = 256;
    let tau = problem.tau.eval(bits).map_err(|e| e.to_string())?;
    let w = u32::try_from(&outcome.w_bound + 1u32).map_err(|_| "w bound out of range".to_string())?;
    let cutoff = CertifiedReal::exact(problem.a.clone())
        .checked_div(&alpha.pow(i64::from(w)).map_err(|e| e.to_string())?.to_interval(bits))
        .map_err(|e| e.to_string())?;
    for label in &problem.labels {
        let mu = label.mu.eval(bits).map_err(|e| e.to_string())?;
        for u in 1..=m_bound {
            let x = &(&tau * &CertifiedReal::from_integer(u)) + &mu;
            let dist = x.nearest_integer_distance();
            if dist.lo() < cutoff.hi() {
                return Err(format!(
                    "{}: u = {u} gives ‖uτ + μ‖ = {dist}, not excluded at w = {w} (cutoff {cutoff})",
                    label.label
                ));
            }
        }
    }
    Ok(())
}
