use std::path::PathBuf;
use std::process::{Command, Output};

use baker_repdigit::checkpoints::Q62;
use baker_repdigit::config::BALANCING_CONFIG;

const BIN: &str = env!("CARGO_BIN_EXE_baker-repdigit");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("REPDIGIT_PRECISION")
        .output()
        .expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("baker-repdigit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn small_config() -> String {
    BALANCING_CONFIG
        .replace("limit = 50", "limit = 5")
        .replace("k_min = 2", "k_min = 1")
}

#[test]
fn search_finds_nothing_up_to_fifty() {
    for seq in ["balancing", "lucas-balancing"] {
        let o = run(&["search", "--sequence", seq, "--n-max", "50", "--k-min", "2"]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim_end(), "0 solutions");
    }
}

#[test]
fn search_lists_trivial_repdigits() {
    let o = run(&["search", "--sequence", "balancing", "--n-max", "10", "--k-min", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "n=2 m=1 d=5 k=1"), "{out}");
    assert!(out.trim_end().ends_with("solutions"));
}

#[test]
fn cf_last_line_ends_with_q62() {
    let o = run(&["cf", "--depth", "62"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().last().unwrap().ends_with(Q62), "{out}");
}

#[test]
fn cf_accepts_a_custom_tau() {
    let o = run(&["cf", "--depth", "5", "--tau", "log(2)/log(3)"]);
    assert_eq!(o.status.code(), Some(0));
    // log 2/log 3 = [0; 1, 1, 1, 2, 2, ...]
    let quotients: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap().trim_start_matches("a=").to_string())
        .collect();
    assert_eq!(quotients, ["0", "1", "1", "1", "2", "2"]);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["frobnicate"],
        vec!["search", "--colour", "blue"],
        vec!["search", "--k-min", "3"],
        vec!["cf"],
        vec!["prove", "--config", "balancing", "--format", "yaml"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verify-paper"));
}

#[test]
fn malformed_config_names_the_field() {
    let cases = [
        ("divisor = 4*sqrt2", "divisor = 2", "sequence.divisor"),
        ("p = 6", "p = six", "sequence.p"),
        ("k_min = 1", "k_min = 7", "search.k_min"),
        ("name = balancing", "colour = red", "sequence.colour"),
        ("digits = 1..9", "digits = 0..9", "equation.digits"),
        ("lambda3 = 4*d*sqrt2/9", "lambda3 = 4*d*sqrt2/7", "equation.lambda3"),
    ];
    for (i, (from, to, field)) in cases.iter().enumerate() {
        let cfg = small_config().replace(from, to);
        let path = scratch(&format!("bad{i}.ini"), &cfg);
        let o = run(&["prove", "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{to}");
        assert!(stderr(&o).contains(&format!("`{field}`")), "{to}: {}", stderr(&o));
    }
}

#[test]
fn small_search_limit_with_trivial_repdigits_is_not_proven() {
    let path = scratch("small.ini", &small_config());
    let o = run(&["prove", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("NOT PROVEN"), "{out}");
    assert!(out.contains("n = 2, m = 1, d = 5, k = 1"), "{out}");
    assert!(out.contains("solution(s) exist up to n = 5"), "{out}");
}

#[test]
fn bad_precision_override_is_a_usage_error() {
    let o = Command::new(BIN)
        .args(["search"])
        .env("REPDIGIT_PRECISION", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("REPDIGIT_PRECISION"));
}

#[test]
fn heights_cover_every_digit() {
    let o = run(&["heights", "--config", "balancing"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("h(α) = 8.81374e-1"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("d=")).count(), 9);
}

#[test]
fn matveev_from_flags_and_file_agree() {
    let flags = run(&[
        "matveev", "--degree", "2", "--a", "log(3+2*sqrt2)", "--a", "2*log(10)", "--a", "62/5",
    ]);
    assert_eq!(flags.status.code(), Some(0));
    assert!(stdout(&flags).contains("9.8e13"), "{}", stdout(&flags));
    let file = scratch(
        "matveev.ini",
        "[form]\ndegree = 2\nexponent_bound = n\n[a]\nalpha = log(3+2*sqrt2)\nbase = 2*log(10)\nlambda = 62/5\n",
    );
    let from_file = run(&["matveev", "--problem", file.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    let c = |o: &Output| stdout(o).lines().find(|l| l.starts_with("C = ")).unwrap().to_string();
    assert_eq!(c(&flags), c(&from_file));
}

#[test]
fn matveev_rejects_a_below_the_floor() {
    let o = run(&["matveev", "--degree", "2", "--a", "1/10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("0.16"));
}

#[test]
fn reduce_from_problem_file() {
    let file = scratch(
        "reduce.ini",
        "[reduction]\nalpha = 3 + 2*sqrt2\nbase = 10\nrhs = 6\nm = 6900000000000000000000000000000\nstage = gap\n\
         [lambda]\nd1 = 4*sqrt2/9\nd5 = 20*sqrt2/9\nd9 = 4*sqrt2\n",
    );
    let o = run(&["reduce", "--problem", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains(Q62), "{out}");
    assert_eq!(out.lines().last(), Some("n - m ≤ 43"));

    let broken = scratch("reduce-bad.ini", "[reduction]\nalpha = 3 + 2*sqrt2\nbase = 10\nrhs = 6\nm = 1000\nstage = sideways\n");
    let o = run(&["reduce", "--problem", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`reduction.stage`"));
}

#[test]
fn prove_writes_a_certificate_that_revalidates_and_catches_tampering() {
    let dir = scratch("placeholder", "").parent().unwrap().to_path_buf();
    let cert = dir.join("balancing.json");
    let o = run(&["prove", "--config", "balancing", "--format", "json", "--output", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("proven"));

    let json = std::fs::read_to_string(&cert).unwrap();
    assert!(json.contains(&format!("\"q_stage1\": \"{Q62}\"")));
    assert!(json.contains("\"small_search\": []"));
    assert!(json.contains("\"version\": \"cert-v1\""));

    let o = run(&["revalidate", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("0 failing"));

    let tampered = dir.join("tampered.json");
    std::fs::write(&tampered, json.replacen("\"gap_bound\": 43", "\"gap_bound\": 42", 1)).unwrap();
    let o = run(&["revalidate", tampered.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}
