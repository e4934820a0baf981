//! Problem configuration files.
//!
//! A line-oriented format with `[section]` headers and `key = value` pairs.
//! Exact quantities are integers or surd expressions (`4*sqrt2`); decimal
//! literals are rejected so that a configuration always means one exact
//! problem.
//!
//! ```text
//! [sequence]
//! name = balancing
//! p = 6
//! q = 1
//! u0 = 0
//! u1 = 1
//! divisor = 4*sqrt2
//!
//! [equation]
//! base = 10
//! digits = 1..9
//! lambda3 = 4*d*sqrt2/9
//! rhs_stage1 = 4
//! rhs_stage2 = 4
//!
//! [search]
//! limit = 50
//! k_min = 2
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::parse_exact_with;
use crate::quadratic::{binet_term, QuadraticNumber};
use crate::recurrence::SequenceSpec;

/// Parsed `[section]` / `key = value` document, order preserved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IniDocument {
    pub sections: Vec<(String, Vec<(String, String)>)>,
}

impl IniDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = IniDocument::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                doc.sections.push((name.trim().to_string(), Vec::new()));
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    no + 1
                )));
            };
            let Some((_, entries)) = doc.sections.last_mut() else {
                return Err(Error::Parse(format!(
                    "line {}: `{}` appears before any [section]",
                    no + 1,
                    k.trim()
                )));
            };
            let key = k.trim().to_string();
            if entries.iter().any(|(e, _)| *e == key) {
                return Err(Error::Parse(format!("line {}: duplicate key `{key}`", no + 1)));
            }
            entries.push((key, v.trim().to_string()));
        }
        Ok(doc)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .filter(|(s, _)| s == section)
            .flat_map(|(_, e)| e.iter())
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn section(&self, section: &str) -> Option<&[(String, String)]> {
        self.sections
            .iter()
            .find(|(s, _)| s == section)
            .map(|(_, e)| e.as_slice())
    }

    /// Rejects sections and keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[(&str, &[&str])]) -> Result<()> {
        for (s, entries) in &self.sections {
            let Some((_, keys)) = allowed.iter().find(|(a, _)| a == s) else {
                return Err(Error::config(s.clone(), "unknown section"));
            };
            for (k, _) in entries {
                if !keys.contains(&k.as_str()) {
                    return Err(Error::config(format!("{s}.{k}"), "unknown key"));
                }
            }
        }
        Ok(())
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("sequence", &["name", "p", "q", "u0", "u1", "divisor"]),
    (
        "equation",
        &["base", "digits", "lambda3", "rhs_stage1", "rhs_stage2"],
    ),
    ("search", &["limit", "k_min"]),
];

pub const BALANCING_CONFIG: &str = "\
[sequence]
name = balancing
p = 6
q = 1
u0 = 0
u1 = 1
divisor = 4*sqrt2

[equation]
base = 10
digits = 1..9
lambda3 = 4*d*sqrt2/9
rhs_stage1 = 4
rhs_stage2 = 4

[search]
limit = 50
k_min = 2
";

pub const LUCAS_BALANCING_CONFIG: &str = "\
[sequence]
name = lucas-balancing
p = 6
q = 1
u0 = 1
u1 = 3
divisor = 2

[equation]
base = 10
digits = 1..9
lambda3 = 2*d/9
rhs_stage1 = 3
rhs_stage2 = 3

[search]
limit = 50
k_min = 2
";

/// Names accepted by [`ProblemConfig::builtin`].
pub const BUILTIN_NAMES: &[&str] = &["balancing", "lucas-balancing"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemConfig {
    pub sequence: SequenceSpec,
    /// `U_n = (αⁿ ∓ βⁿ)/divisor`, i.e. the dominant Binet coefficient is `1/divisor`.
    pub binet_divisor: QuadraticNumber,
    pub base: u32,
    pub digits: (u8, u8),
    pub lambda3_template: Option<String>,
    pub rhs_stage1: BigInt,
    pub rhs_stage2: BigInt,
    pub small_search_limit: u64,
    pub k_min: u32,
}

/// Flat, serializable echo of a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub name: String,
    pub p: i64,
    pub q: i64,
    pub u0: String,
    pub u1: String,
    pub divisor: String,
    pub base: u32,
    pub digits: [u8; 2],
    pub lambda3: Option<String>,
    pub rhs_stage1: String,
    pub rhs_stage2: String,
    pub small_search_limit: u64,
    pub k_min: u32,
}

fn req<'a>(doc: &'a IniDocument, section: &str, key: &str) -> Result<&'a str> {
    doc.get(section, key)
        .ok_or_else(|| Error::config(format!("{section}.{key}"), "missing"))
}

fn int_field<T: std::str::FromStr>(doc: &IniDocument, section: &str, key: &str) -> Result<T> {
    let raw = req(doc, section, key)?;
    raw.parse().map_err(|_| {
        Error::config(
            format!("{section}.{key}"),
            format!("expected an integer, got `{raw}`"),
        )
    })
}

fn surd_string(x: &QuadraticNumber) -> String {
    if x.is_rational() {
        return x.to_string();
    }
    let surd = if x.b().is_one() {
        format!("sqrt{}", x.radicand())
    } else {
        format!("{}*sqrt{}", x.b(), x.radicand())
    };
    let num = if x.a().is_zero_like() {
        surd
    } else {
        format!("({} + {surd})", x.a())
    };
    if x.c().is_one() {
        num
    } else {
        format!("{num}/{}", x.c())
    }
}

trait ZeroLike {
    fn is_zero_like(&self) -> bool;
}

impl ZeroLike for BigInt {
    fn is_zero_like(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = IniDocument::parse(text)?;
        doc.check_keys(KEYS)?;
        let name = req(&doc, "sequence", "name")?.to_string();
        let p: i64 = int_field(&doc, "sequence", "p")?;
        let q: i64 = int_field(&doc, "sequence", "q")?;
        let u0: BigInt = int_field(&doc, "sequence", "u0")?;
        let u1: BigInt = int_field(&doc, "sequence", "u1")?;
        let sequence = SequenceSpec::new(name, p, q, u0, u1)
            .map_err(|e| Error::config("sequence", e.to_string()))?;
        let divisor_src = req(&doc, "sequence", "divisor")?;
        let binet_divisor = parse_exact_with(divisor_src, &HashMap::new())
            .map_err(|e| Error::config("sequence.divisor", e.to_string()))?;

        let base: u32 = int_field(&doc, "equation", "base")?;
        if base != 10 {
            return Err(Error::config("equation.base", "only base 10 is supported"));
        }
        let digits_src = req(&doc, "equation", "digits")?;
        let digits = digits_src
            .split_once("..")
            .and_then(|(a, b)| Some((a.trim().parse::<u8>().ok()?, b.trim().parse::<u8>().ok()?)))
            .filter(|&(a, b)| 1 <= a && a <= b && b <= 9)
            .ok_or_else(|| {
                Error::config("equation.digits", format!("expected `a..b` within 1..9, got `{digits_src}`"))
            })?;
        let rhs_stage1: BigInt = int_field(&doc, "equation", "rhs_stage1")?;
        let rhs_stage2: BigInt = int_field(&doc, "equation", "rhs_stage2")?;
        for (k, v) in [("rhs_stage1", &rhs_stage1), ("rhs_stage2", &rhs_stage2)] {
            if !v.is_positive() {
                return Err(Error::config(format!("equation.{k}"), "must be positive"));
            }
        }
        let small_search_limit: u64 = int_field(&doc, "search", "limit")?;
        if small_search_limit < 1 {
            return Err(Error::config("search.limit", "must be at least 1"));
        }
        let k_min: u32 = match doc.get("search", "k_min") {
            Some(_) => int_field(&doc, "search", "k_min")?,
            None => 2,
        };
        if !(1..=2).contains(&k_min) {
            return Err(Error::config("search.k_min", "must be 1 or 2"));
        }
        let cfg = ProblemConfig {
            sequence,
            binet_divisor,
            base,
            digits,
            lambda3_template: doc.get("equation", "lambda3").map(str::to_string),
            rhs_stage1,
            rhs_stage2,
            small_search_limit,
            k_min,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "balancing" => Self::parse(BALANCING_CONFIG),
            "lucas-balancing" | "lucas_balancing" => Self::parse(LUCAS_BALANCING_CONFIG),
            other => Err(Error::InvalidInput(format!(
                "unknown built-in configuration `{other}` (known: {})",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }

    /// A built-in name, or a path to a configuration file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if BUILTIN_NAMES.contains(&name_or_path) || name_or_path == "lucas_balancing" {
            return Self::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!(
                "`{name_or_path}` is neither a built-in configuration ({}) nor a readable file: {e}",
                BUILTIN_NAMES.join(", ")
            ))
        })?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let binet = self.sequence.binet();
        if !self.binet_divisor.same_field(&binet.alpha) {
            return Err(Error::config(
                "sequence.divisor",
                format!("{} does not lie in the field of α = {}", self.binet_divisor, binet.alpha),
            ));
        }
        if (&binet.coeff_a * &self.binet_divisor) != QuadraticNumber::one() {
            return Err(Error::config(
                "sequence.divisor",
                format!(
                    "the dominant Binet coefficient is {}, so the divisor should be its inverse",
                    binet.coeff_a
                ),
            ));
        }
        for n in 0..=10 {
            let closed = binet_term(&self.sequence, n)
                .map_err(|e| Error::config("sequence", e.to_string()))?;
            if closed != self.sequence.term(n) {
                return Err(Error::config(
                    "sequence",
                    format!("closed form disagrees with the recurrence at n = {n}"),
                ));
            }
        }
        if let Some(t) = &self.lambda3_template {
            for d in self.digits.0..=self.digits.1 {
                let mut vars = HashMap::new();
                vars.insert("d".to_string(), QuadraticNumber::from_integer(d));
                let v = parse_exact_with(t, &vars)
                    .map_err(|e| Error::config("equation.lambda3", e.to_string()))?;
                if v != self.lambda3(d) {
                    return Err(Error::config(
                        "equation.lambda3",
                        format!(
                            "template gives {v} at d = {d}, but the Binet data give {}",
                            self.lambda3(d)
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        self.sequence.name()
    }

    pub fn digit_range(&self) -> std::ops::RangeInclusive<u8> {
        self.digits.0..=self.digits.1
    }

    /// `d·divisor/(base − 1)`: the coefficient in `1 − α^(−n)·10^k·λ`.
    pub fn lambda3(&self, d: u8) -> QuadraticNumber {
        let num = &QuadraticNumber::from_integer(d) * &self.binet_divisor;
        num.checked_div(&QuadraticNumber::from_integer(self.base - 1))
            .expect("base above 1")
    }

    /// `λ/(1 − α^(−g))`, the coefficient once `m = n − g` is factored out.
    pub fn lambda3_gap(&self, d: u8, g: u32) -> Result<QuadraticNumber> {
        let alpha = &self.sequence.binet().alpha;
        let factor = &QuadraticNumber::one() - &alpha.pow(-(g as i64))?;
        self.lambda3(d).checked_div(&factor)
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            name: self.name().to_string(),
            p: self.sequence.coeff_p(),
            q: self.sequence.coeff_q(),
            u0: self.sequence.u0().to_string(),
            u1: self.sequence.u1().to_string(),
            divisor: surd_string(&self.binet_divisor),
            base: self.base,
            digits: [self.digits.0, self.digits.1],
            lambda3: self.lambda3_template.clone(),
            rhs_stage1: self.rhs_stage1.to_string(),
            rhs_stage2: self.rhs_stage2.to_string(),
            small_search_limit: self.small_search_limit,
            k_min: self.k_min,
        }
    }

    /// Configuration text that parses back to an equal configuration.
    pub fn to_config_text(&self) -> String {
        let e = self.echo();
        let mut s = String::new();
        let _ = writeln!(s, "[sequence]");
        let _ = writeln!(s, "name = {}", e.name);
        let _ = writeln!(s, "p = {}", e.p);
        let _ = writeln!(s, "q = {}", e.q);
        let _ = writeln!(s, "u0 = {}", e.u0);
        let _ = writeln!(s, "u1 = {}", e.u1);
        let _ = writeln!(s, "divisor = {}", e.divisor);
        let _ = writeln!(s, "\n[equation]");
        let _ = writeln!(s, "base = {}", e.base);
        let _ = writeln!(s, "digits = {}..{}", e.digits[0], e.digits[1]);
        if let Some(t) = &e.lambda3 {
            let _ = writeln!(s, "lambda3 = {t}");
        }
        let _ = writeln!(s, "rhs_stage1 = {}", e.rhs_stage1);
        let _ = writeln!(s, "rhs_stage2 = {}", e.rhs_stage2);
        let _ = writeln!(s, "\n[search]");
        let _ = writeln!(s, "limit = {}", e.small_search_limit);
        let _ = writeln!(s, "k_min = {}", e.k_min);
        s
    }

    pub fn from_echo(e: &ConfigEcho) -> Result<Self> {
        let mut text = String::new();
        let _ = writeln!(text, "[sequence]\nname = {}\np = {}\nq = {}\nu0 = {}\nu1 = {}\ndivisor = {}",
            e.name, e.p, e.q, e.u0, e.u1, e.divisor);
        let _ = writeln!(text, "[equation]\nbase = {}\ndigits = {}..{}", e.base, e.digits[0], e.digits[1]);
        if let Some(t) = &e.lambda3 {
            let _ = writeln!(text, "lambda3 = {t}");
        }
        let _ = writeln!(text, "rhs_stage1 = {}\nrhs_stage2 = {}", e.rhs_stage1, e.rhs_stage2);
        let _ = writeln!(text, "[search]\nlimit = {}\nk_min = {}", e.small_search_limit, e.k_min);
        Self::parse(&text)
    }
}
