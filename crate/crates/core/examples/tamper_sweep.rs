//! Perturbs every numeric leaf of a certificate, one at a time, and reports
//! any perturbation that `revalidate` fails to notice.
//!
//! ```text
//! cargo run --release --example tamper_sweep -- balancing
//! cargo run --release --example tamper_sweep -- path/to/certificate.json
//! ```
//!
//! Integers are bumped by one; decimals are scaled by `1 + 10^-6` and nudged
//! by `10^-9`; enclosures move both ends. Long arrays are sampled at their
//! first and last four entries.

use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::Value;

use baker_repdigit::certified::{parse_decimal, to_decimal_string, PrecisionPolicy};
use baker_repdigit::config::{ProblemConfig, BUILTIN_NAMES};
use baker_repdigit::pipeline::{run_proof, ProofCertificate};
use baker_repdigit::revalidate::revalidate;

fn leaves(v: &Value, path: String, out: &mut Vec<String>) {
    match v {
        Value::Object(m) if m.len() == 2 && m.contains_key("lo") && m.contains_key("hi") => out.push(path),
        Value::Object(m) => {
            for (k, x) in m {
                leaves(x, format!("{path}/{k}"), out);
            }
        }
        Value::Array(a) => {
            let n = a.len();
            for (i, x) in a.iter().enumerate() {
                if n <= 12 || i < 4 || i + 4 >= n {
                    leaves(x, format!("{path}/{i}"), out);
                }
            }
        }
        Value::String(s) if parse_decimal(s).is_ok() => out.push(path),
        Value::Number(_) => out.push(path),
        _ => {}
    }
}

fn bump(s: &str) -> String {
    let v = parse_decimal(s).expect("decimal leaf");
    if v.is_integer() {
        return (v.to_integer() + 1u32).to_string();
    }
    let w = &v * BigRational::new(1_000_001.into(), 1_000_000.into()) + BigRational::new(1.into(), 1_000_000_000.into());
    to_decimal_string(&w, 120, true)
}

fn perturbed(root: &Value, path: &str) -> Value {
    let mut v = root.clone();
    let x = v.pointer_mut(path).expect("path from the same document");
    match x {
        Value::Object(m) => {
            for k in ["lo", "hi"] {
                let s = m[k].as_str().expect("decimal string").to_string();
                m[k] = Value::String(bump(&s));
            }
        }
        Value::String(s) => *s = bump(s),
        Value::Number(n) => *x = Value::from(n.as_u64().expect("unsigned") + 1),
        _ => unreachable!("only numeric leaves are collected"),
    }
    v
}

fn main() {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "balancing".into());
    let text = if BUILTIN_NAMES.contains(&arg.as_str()) {
        let cfg = ProblemConfig::builtin(&arg).expect("built-in");
        run_proof(&cfg, &PrecisionPolicy::default()).to_json()
    } else {
        std::fs::read_to_string(&arg).expect("readable certificate")
    };
    let root: Value = serde_json::from_str(&text).expect("JSON certificate");
    let mut paths = Vec::new();
    leaves(&root, String::new(), &mut paths);

    let missed: Vec<&String> = paths
        .par_iter()
        .filter(|p| match serde_json::from_value::<ProofCertificate>(perturbed(&root, p)) {
            Ok(c) => revalidate(&c).all_pass(),
            Err(_) => false,
        })
        .collect();
    for p in &missed {
        println!("UNDETECTED {p}");
    }
    println!("{} perturbations, {} undetected", paths.len(), missed.len());
    if !missed.is_empty() {
        std::process::exit(1);
    }
}
