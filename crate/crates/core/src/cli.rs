//! Command-line front end. The binary is a thin wrapper around [`run`], which
//! takes the argument list and the output sink so it can be driven in tests.
//!
//! Exit codes: 0 for success or a proven verdict, 1 for not-proven or a
//! checkpoint mismatch, 2 for usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::certified::{round_up_significant, to_scientific, CertifiedReal, PrecisionPolicy};
use crate::checkpoints::published_checkpoints;
use crate::config::{IniDocument, ProblemConfig, BUILTIN_NAMES};
use crate::error::{Error, Result};
use crate::expr::{parse_exact, RealExpr};
use crate::matveev::{matveev_coefficient, AEntry, ExponentBound, LinearFormProblem, ROUNDING_DIGITS};
use crate::pipeline::{render_text, run_proof, ProofCertificate};
use crate::quadratic::{height_estimate, height_exact, HeightExpr, QuadraticNumber};
use crate::recurrence::exhaustive_search;
use crate::reduction::{build_lambda_inequality, cf_expand, reduce, Stage};
use crate::revalidate::revalidate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_PROVEN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "baker-repdigit",
    version,
    about = "Certified bounds for repdigits as differences of recurrence terms",
    after_help = "Precision can be overridden with REPDIGIT_PRECISION=initial_bits:max_bits."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive search for U_n - U_m = d(10^k - 1)/9 with n ≤ n-max.
    Search {
        /// A built-in name or a config file.
        #[arg(long, default_value = "balancing")]
        sequence: String,
        #[arg(long, default_value_t = 50)]
        n_max: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
        k_min: u32,
    },
    /// Exact heights and triangle-inequality estimates for the λ coefficients.
    Heights {
        #[arg(long)]
        config: Option<String>,
    },
    /// Matveev coefficient of a linear form, from flags or a problem file.
    Matveev {
        #[arg(long, conflicts_with_all = ["degree", "a"])]
        problem: Option<PathBuf>,
        #[arg(long)]
        degree: Option<u32>,
        /// `value` or `value@power`, where value is an expression such as
        /// `log(3+2*sqrt2)` or `62/5` and power is the (1 + log n) exponent.
        #[arg(long = "a", num_args = 1)]
        a: Vec<String>,
    },
    /// Continued-fraction convergents of τ, by default log 10 / log(3 + 2√2).
    Cf {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        tau: Option<String>,
    },
    /// One reduction step from a problem file.
    Reduce {
        #[arg(long)]
        problem: PathBuf,
    },
    /// The complete proof chain for a configuration.
    Prove {
        #[arg(long)]
        config: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Both built-in proofs, diffed against the published checkpoints.
    VerifyPaper,
    /// Re-check the recorded relations of a JSON certificate.
    Revalidate { certificate: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let policy = match PrecisionPolicy::from_env() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, &policy, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("i/o: {e}"))
}

fn dispatch(cmd: Command, policy: &PrecisionPolicy, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Search { sequence, n_max, k_min } => {
            let cfg = ProblemConfig::load(&sequence)?;
            let sols = exhaustive_search(&cfg.sequence, n_max, k_min)?;
            for s in &sols {
                writeln!(out, "{s}").map_err(io)?;
            }
            let noun = if sols.len() == 1 { "solution" } else { "solutions" };
            writeln!(out, "{} {noun}", sols.len()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Heights { config } => {
            let names: Vec<String> = match config {
                Some(c) => vec![c],
                None => BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
            };
            for name in names {
                heights(&ProblemConfig::load(&name)?, out)?;
            }
            Ok(EXIT_OK)
        }
        Command::Matveev { problem, degree, a } => {
            let p = match problem {
                Some(path) => matveev_problem_file(&read(&path)?)?,
                None => {
                    let degree = degree.ok_or_else(|| Error::config("degree", "required without --problem"))?;
                    if a.is_empty() {
                        return Err(Error::config("a", "at least one --a is required"));
                    }
                    let entries = a
                        .iter()
                        .enumerate()
                        .map(|(i, s)| a_entry(&format!("a{}", i + 1), s))
                        .collect::<Result<Vec<_>>>()?;
                    LinearFormProblem::new(degree, entries, ExponentBound::Symbolic("D".into()), vec![])?
                }
            };
            let c = matveev_coefficient(&p, policy.initial_bits)?;
            let power = 1 + p.a_log_power();
            writeln!(out, "degree {}, l = {}", p.degree, p.l()).map_err(io)?;
            for e in &p.entries {
                writeln!(out, "A[{}] = {} (log power {})", e.label, e.value, e.log_power).map_err(io)?;
            }
            writeln!(out, "C = {c}").map_err(io)?;
            let rounded = round_up_significant(c.hi(), ROUNDING_DIGITS);
            writeln!(
                out,
                "log|Γ| > -{}·(1 + log {})^{power}",
                to_scientific(&rounded, 2),
                p.exponent_bound
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Cf { depth, tau } => {
            let tau = match tau {
                Some(t) => RealExpr::parse(&t)?,
                None => RealExpr::log_ratio(
                    QuadraticNumber::from_integer(10),
                    crate::recurrence::balancing().binet().alpha.clone(),
                ),
            };
            let cf = cf_expand(&tau, depth, policy)?;
            writeln!(out, "τ = {tau}").map_err(io)?;
            for i in 0..cf.len() {
                writeln!(
                    out,
                    "{i} a={} p={} q={}",
                    cf.partial_quotients[i],
                    cf.p(i).expect("in range"),
                    cf.q(i).expect("in range")
                )
                .map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Reduce { problem } => {
            let p = reduction_problem_file(&read(&problem)?)?;
            let outcome = reduce(&p, policy)?;
            writeln!(out, "τ = {}", p.tau).map_err(io)?;
            for rec in &outcome.labels {
                writeln!(out, "{}: {} ≤ {}", rec.label, p.w_name, rec.w_bound).map_err(io)?;
            }
            writeln!(out, "{outcome}").map_err(io)?;
            writeln!(out, "{} ≤ {}", p.w_name, outcome.w_bound).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Prove { config, format, output } => {
            let cfg = ProblemConfig::load(&config)?;
            let cert = run_proof(&cfg, policy);
            let body = match format {
                Format::Json => cert.to_json(),
                Format::Text => render_text(&cert),
            };
            match output {
                Some(path) => {
                    std::fs::write(&path, body).map_err(io)?;
                    writeln!(out, "{}: certificate written to {}", verdict_word(&cert), path.display())
                        .map_err(io)?;
                }
                None => out.write_all(body.as_bytes()).map_err(io)?,
            }
            Ok(if cert.is_proven() { EXIT_OK } else { EXIT_NOT_PROVEN })
        }
        Command::VerifyPaper => {
            let (checks, _, _) = published_checkpoints(policy)?;
            let failing = checks.iter().filter(|c| !c.pass).count();
            for c in &checks {
                writeln!(out, "{c}").map_err(io)?;
            }
            writeln!(out, "{} checkpoints, {failing} failing", checks.len()).map_err(io)?;
            Ok(if failing == 0 { EXIT_OK } else { EXIT_NOT_PROVEN })
        }
        Command::Revalidate { certificate } => {
            let cert = ProofCertificate::from_json(&read(&certificate)?)?;
            let report = revalidate(&cert);
            write!(out, "{report}").map_err(io)?;
            Ok(if report.all_pass() { EXIT_OK } else { EXIT_NOT_PROVEN })
        }
    }
}

fn verdict_word(c: &ProofCertificate) -> &'static str {
    if c.is_proven() {
        "proven"
    } else {
        "not proven"
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn heights(cfg: &ProblemConfig, out: &mut dyn Write) -> Result<()> {
    let bits = 128;
    let alpha = cfg.sequence.binet().alpha.clone();
    let base = QuadraticNumber::from_integer(cfg.base);
    writeln!(out, "[{}]", cfg.name()).map_err(io)?;
    writeln!(out, "h(α) = {} (α = {alpha})", height_exact(&alpha, bits)?.value).map_err(io)?;
    writeln!(out, "h({}) = {}", cfg.base, height_exact(&base, bits)?.value).map_err(io)?;
    for d in cfg.digit_range() {
        let lambda = cfg.lambda3(d);
        let expr = HeightExpr::leaf(&QuadraticNumber::from_integer(d) * &cfg.binet_divisor)
            / HeightExpr::int(cfg.base as i64 - 1);
        writeln!(
            out,
            "d={d}: λ = {lambda}, h = {}, estimate {} ≤ {}",
            height_exact(&lambda, bits)?.value,
            expr,
            height_estimate(&expr, bits)?.value
        )
        .map_err(io)?;
    }
    Ok(())
}

fn value_expr(field: &str, s: &str) -> Result<CertifiedReal> {
    let e = RealExpr::parse(s).map_err(|e| Error::config(field, e.to_string()))?;
    e.eval(192).map_err(|e| Error::config(field, e.to_string()))
}

fn a_entry(label: &str, spec: &str) -> Result<AEntry> {
    let (value, power) = match spec.split_once('@') {
        Some((v, p)) => (
            v,
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::config(label, format!("bad log power `{p}`")))?,
        ),
        None => (spec, 0),
    };
    Ok(AEntry::new(label, value_expr(label, value.trim())?).with_log_power(power))
}

/// ```text
/// [form]
/// degree = 2
/// exponent_bound = n
/// [a]
/// alpha = log(3+2*sqrt2)
/// base = 2*log(10)
/// lambda = 62/5
/// ```
/// An entry may end in `@p` to carry the factor `(1 + log n)^p`.
fn matveev_problem_file(text: &str) -> Result<LinearFormProblem> {
    let doc = IniDocument::parse(text)?;
    for (s, _) in &doc.sections {
        if s != "form" && s != "a" {
            return Err(Error::config(s.clone(), "unknown section"));
        }
    }
    let degree = doc
        .get("form", "degree")
        .ok_or_else(|| Error::config("form.degree", "missing"))?
        .parse::<u32>()
        .map_err(|_| Error::config("form.degree", "expected a positive integer"))?;
    let bound = doc.get("form", "exponent_bound").unwrap_or("D").to_string();
    let entries = doc
        .section("a")
        .ok_or_else(|| Error::config("a", "missing section"))?
        .iter()
        .map(|(k, v)| a_entry(&format!("a.{k}"), v))
        .collect::<Result<Vec<_>>>()?;
    LinearFormProblem::new(degree, entries, ExponentBound::Symbolic(bound), vec![])
}

/// ```text
/// [reduction]
/// alpha = 3 + 2*sqrt2
/// base = 10
/// rhs = 6
/// m = 6900000000000000000000000000000
/// stage = gap            # or absolute
/// [lambda]
/// d1 = 4*sqrt2/9
/// ```
fn reduction_problem_file(text: &str) -> Result<crate::reduction::ReductionProblem> {
    let doc = IniDocument::parse(text)?;
    for (s, _) in &doc.sections {
        if s != "reduction" && s != "lambda" {
            return Err(Error::config(s.clone(), "unknown section"));
        }
    }
    if let Some(entries) = doc.section("reduction") {
        for (k, _) in entries {
            if !["alpha", "base", "rhs", "m", "stage"].contains(&k.as_str()) {
                return Err(Error::config(format!("reduction.{k}"), "unknown key"));
            }
        }
    }
    let get = |k: &str| -> Result<&str> {
        doc.get("reduction", k).ok_or_else(|| Error::config(format!("reduction.{k}"), "missing"))
    };
    let alpha = parse_exact(get("alpha")?).map_err(|e| Error::config("reduction.alpha", e.to_string()))?;
    let base: u32 = get("base")?
        .parse()
        .map_err(|_| Error::config("reduction.base", "expected a positive integer"))?;
    let rhs: BigInt = get("rhs")?
        .parse()
        .map_err(|_| Error::config("reduction.rhs", "expected an integer"))?;
    let m: BigInt = get("m")?
        .parse()
        .map_err(|_| Error::config("reduction.m", "expected an integer"))?;
    let stage = match get("stage")? {
        "gap" => Stage::Gap,
        "absolute" => Stage::Absolute,
        other => return Err(Error::config("reduction.stage", format!("expected gap or absolute, got `{other}`"))),
    };
    let lambdas = doc
        .section("lambda")
        .ok_or_else(|| Error::config("lambda", "missing section"))?
        .iter()
        .map(|(k, v)| {
            parse_exact(v)
                .map(|x| (k.clone(), x))
                .map_err(|e| Error::config(format!("lambda.{k}"), e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    if alpha.to_interval(64).hi() <= &BigRational::from_integer(1.into()) {
        return Err(Error::config("reduction.alpha", "must exceed 1"));
    }
    build_lambda_inequality(stage, &lambdas, &alpha, base, &rhs, &m)
}
