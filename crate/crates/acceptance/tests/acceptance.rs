//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; the process exits non-zero if any
//! criterion fails.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use baker_repdigit::certified::PrecisionPolicy;
use baker_repdigit::checkpoints::{published_checkpoints, Checkpoint, Q62, Q64, Q65};
use baker_repdigit::config::ProblemConfig;
use baker_repdigit::expr::RealExpr;
use baker_repdigit::pipeline::ProofCertificate;
use baker_repdigit::quadratic::{binet_term, QuadraticNumber};
use baker_repdigit::recurrence::check_growth_envelope;
use baker_repdigit::cli;
use baker_repdigit::reduction::cf_expand;
use repdigit_acceptance as oracles;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn published() -> &'static [Checkpoint] {
    static CELL: OnceLock<Vec<Checkpoint>> = OnceLock::new();
    CELL.get_or_init(|| {
        published_checkpoints(&PrecisionPolicy::default())
            .expect("checkpoint run")
            .0
    })
}

/// Every checkpoint whose tag starts with one of `prefixes`.
fn checkpoints_matching(prefixes: &[&str]) -> Outcome {
    let rows: Vec<&Checkpoint> = published()
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.tag.starts_with(p)))
        .collect();
    let failing: Vec<String> = rows.iter().filter(|c| !c.pass).map(|c| c.to_string()).collect();
    let shown: Vec<String> = rows.iter().map(|c| format!("{} = {}", c.tag, c.actual)).collect();
    if rows.is_empty() {
        return outcome(false, "no checkpoints matched");
    }
    if failing.is_empty() {
        outcome(true, shown.join("; "))
    } else {
        outcome(false, failing.join("; "))
    }
}

/// Runs the command-line front end in process and captures its output.
fn run_cli(args: &[&str]) -> (i32, String, Duration) {
    let start = Instant::now();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("baker-repdigit").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), start.elapsed())
}

fn criterion_1() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for seq in ["balancing", "lucas-balancing"] {
        let (code, stdout, took) = run_cli(&["search", "--sequence", seq, "--n-max", "50", "--k-min", "2"]);
        let last = stdout.lines().last().unwrap_or("").to_string();
        pass &= code == 0 && last == "0 solutions" && took < Duration::from_secs(5);
        details.push(format!("{seq}: `{last}` in {took:.2?}"));
    }
    outcome(pass, details.join(", "))
}

fn criterion_2() -> Outcome {
    let bal = ProblemConfig::builtin("balancing").expect("builtin");
    let luc = ProblemConfig::builtin("lucas-balancing").expect("builtin");
    let first = |cfg: &ProblemConfig| -> Vec<String> { (0..5).map(|n| cfg.sequence.term(n).to_string()).collect() };
    let mut pass = first(&bal) == ["0", "1", "6", "35", "204"] && first(&luc) == ["1", "3", "17", "99", "577"];
    for cfg in [&bal, &luc] {
        let terms = cfg.sequence.terms(200);
        pass &= (0..=200u64).all(|n| binet_term(&cfg.sequence, n).ok().as_ref() == Some(&terms[n as usize]));
    }
    outcome(
        pass,
        format!(
            "B0..B4 = {}, C0..C4 = {}, recurrence and closed form agree to n = 200",
            first(&bal).join(" "),
            first(&luc).join(" ")
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    for name in ["balancing", "lucas-balancing"] {
        let cfg = ProblemConfig::builtin(name).expect("builtin");
        pass &= check_growth_envelope(&cfg.sequence, 200).unwrap_or(false);
    }
    outcome(pass, "both envelopes hold for 1 ≤ n ≤ 200")
}

fn criterion_4() -> Outcome {
    checkpoints_matching(&["h(α)", "height estimate"])
}

fn criterion_5() -> Outcome {
    checkpoints_matching(&["Matveev coefficient"])
}

fn criterion_6() -> Outcome {
    checkpoints_matching(&["log-power bound"])
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let tau = RealExpr::log_ratio(
        QuadraticNumber::from_integer(10),
        baker_repdigit::recurrence::balancing().binet().alpha.clone(),
    );
    let cf = match cf_expand(&tau, 65, &PrecisionPolicy::default()) {
        Ok(cf) => cf,
        Err(e) => return outcome(false, e.to_string()),
    };
    let took = start.elapsed();
    let got: Vec<String> = [62, 64, 65].iter().map(|&i| cf.q(i).map(|q| q.to_string()).unwrap_or_default()).collect();
    let pass = got == [Q62, Q64, Q65] && took < Duration::from_secs(10);
    outcome(pass, format!("q62 = {}, q64 = {}, q65 = {} in {took:.2?}", got[0], got[1], got[2]))
}

fn criterion_8() -> Outcome {
    checkpoints_matching(&["min ε", "gap bound", "n bound"])
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    let runs: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = ["balancing", "lucas-balancing"]
            .into_iter()
            .flat_map(|name| [name, name])
            .map(|name| s.spawn(move || (name, run_cli(&["prove", "--config", name, "--format", "json"]))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("prove thread")).collect()
    });
    for pair in runs.chunks(2) {
        let (name, (code_a, json_a, _)) = &pair[0];
        let (_, (code_b, json_b, _)) = &pair[1];
        let proven = ProofCertificate::from_json(json_a).map(|c| c.is_proven()).unwrap_or(false);
        let same = json_a == json_b;
        pass &= *code_a == 0 && *code_b == 0 && proven && same;
        details.push(format!(
            "prove {name}: exit {code_a}, {}, {}",
            if proven { "proven" } else { "not proven" },
            if same { "byte-identical" } else { "runs differ" }
        ));
    }
    let (code, stdout, _) = run_cli(&["verify-paper"]);
    let summary = stdout.lines().last().unwrap_or("").to_string();
    pass &= code == 0;
    details.push(format!("verify-paper: exit {code}, {summary}"));
    let took = start.elapsed();
    pass &= took < Duration::from_secs(120);
    details.push(format!("{took:.1?} total"));
    outcome(pass, details.join("; "))
}

type Suite = (&'static str, Box<dyn Fn() -> oracles::Check>);

fn criterion_10() -> Outcome {
    let suites: [Suite; 4] = [
        ("interval containment (10^4 cases)", Box::new(|| oracles::interval_containment(10_000, 0x5eed))),
        ("height power identity", Box::new(oracles::height_power_identity)),
        ("convergent alternation/gcd", Box::new(|| oracles::convergent_properties(80))),
        ("reduction exclusion (u ≤ 10^3)", Box::new(|| oracles::lemma1_exclusion(1000))),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, suite) in suites.iter() {
        match suite() {
            Ok(()) => details.push(format!("{name} ok")),
            Err(e) => {
                pass = false;
                details.push(format!("{name} FAILED: {e}"));
            }
        }
    }
    outcome(pass, details.join(", "))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "exhaustive search", criterion_1),
        (2, "sequence values", criterion_2),
        (3, "growth envelopes", criterion_3),
        (4, "heights", criterion_4),
        (5, "Matveev checkpoints", criterion_5),
        (6, "log-power bounds", criterion_6),
        (7, "continued fraction", criterion_7),
        (8, "reductions", criterion_8),
        (9, "end-to-end", criterion_9),
        (10, "property suites", criterion_10),
    ];
    // both proofs are shared by 4, 5, 6 and 8; start them before criterion 1
    let warm = std::thread::spawn(|| {
        published();
    });
    let mut failed = 0;
    for (n, name, check) in criteria {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} criterion {n} ({name}): {}", o.detail);
    }
    let _ = warm.join();
    println!("{} criteria, {failed} failing", criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
