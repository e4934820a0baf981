//! Re-evaluable real expressions over quadratic numbers and their logarithms.
//!
//! A [`RealExpr`] is a recipe rather than a value: [`RealExpr::eval`] can be
//! called at any precision, which is what the certified decision procedures
//! need when they escalate. Expressions parse from a small infix syntax:
//!
//! ```text
//! log(10)/log(3 + 2*sqrt2)
//! log(4*d*sqrt2/9) / log(3+2sqrt2)      with d bound by the caller
//! ```
//!
//! Constant subexpressions fold exactly, so `log(...)` always sees an exact
//! element of `Q(√D)`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::certified::CertifiedReal;
use crate::error::{Error, Result};
use crate::quadratic::QuadraticNumber;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealExpr {
    Exact(QuadraticNumber),
    Log(QuadraticNumber),
    Add(Box<RealExpr>, Box<RealExpr>),
    Sub(Box<RealExpr>, Box<RealExpr>),
    Mul(Box<RealExpr>, Box<RealExpr>),
    Div(Box<RealExpr>, Box<RealExpr>),
    Neg(Box<RealExpr>),
}

/// Extra bits carried by leaves so that a few arithmetic steps still land
/// near the requested precision.
const GUARD_BITS: u32 = 32;

impl RealExpr {
    pub fn exact(x: QuadraticNumber) -> Self {
        RealExpr::Exact(x)
    }

    pub fn integer(n: i64) -> Self {
        RealExpr::Exact(QuadraticNumber::from_integer(n))
    }

    pub fn log(x: QuadraticNumber) -> Self {
        RealExpr::Log(x)
    }

    /// `log(x)/log(y)`.
    pub fn log_ratio(x: QuadraticNumber, y: QuadraticNumber) -> Self {
        RealExpr::Div(Box::new(RealExpr::Log(x)), Box::new(RealExpr::Log(y)))
    }

    pub fn as_exact(&self) -> Option<&QuadraticNumber> {
        match self {
            RealExpr::Exact(x) => Some(x),
            _ => None,
        }
    }

    /// Enclosure of the value; precision is roughly `bits` for well-scaled
    /// expressions. Division by an enclosure that still straddles zero
    /// reports [`Error::PrecisionExhausted`] so callers escalate.
    pub fn eval(&self, bits: u32) -> Result<CertifiedReal> {
        let w = bits + GUARD_BITS;
        let v = self.eval_raw(w)?;
        if v.is_exact() {
            return Ok(v);
        }
        Ok(v.round_outward(bits + GUARD_BITS / 2))
    }

    fn eval_raw(&self, w: u32) -> Result<CertifiedReal> {
        Ok(match self {
            RealExpr::Exact(x) => x.to_interval(w),
            RealExpr::Log(x) => x.ln(w)?,
            RealExpr::Add(l, r) => l.eval_raw(w)? + r.eval_raw(w)?,
            RealExpr::Sub(l, r) => l.eval_raw(w)? - r.eval_raw(w)?,
            RealExpr::Mul(l, r) => l.eval_raw(w)? * r.eval_raw(w)?,
            RealExpr::Div(l, r) => {
                let den = r.eval_raw(w)?;
                match l.eval_raw(w)?.checked_div(&den) {
                    Err(Error::PrecisionExhausted { .. }) => {
                        return Err(Error::PrecisionExhausted { bits: w })
                    }
                    other => other?,
                }
            }
            RealExpr::Neg(x) => -x.eval_raw(w)?,
        })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::parse_with(src, &HashMap::new())
    }

    /// Parses with named integer variables (for templates such as `4*d*sqrt2/9`).
    pub fn parse_with(src: &str, vars: &HashMap<String, QuadraticNumber>) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
            src,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }
}

fn surd_string(x: &QuadraticNumber) -> String {
    let c = x.c();
    let num = if x.is_rational() {
        x.a().to_string()
    } else {
        let sign = if x.b().is_negative() { '-' } else { '+' };
        format!("{} {sign} {}*sqrt{}", x.a(), x.b().abs(), x.radicand())
    };
    match (c.is_one(), x.is_rational()) {
        (true, _) => num,
        (false, true) => format!("{num}/{c}"),
        (false, false) => format!("({num})/{c}"),
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealExpr::Exact(x) => write!(f, "({})", surd_string(x)),
            RealExpr::Log(x) => write!(f, "log({})", surd_string(x)),
            RealExpr::Add(l, r) => write!(f, "({l} + {r})"),
            RealExpr::Sub(l, r) => write!(f, "({l} - {r})"),
            RealExpr::Mul(l, r) => write!(f, "({l}*{r})"),
            RealExpr::Div(l, r) => write!(f, "({l}/{r})"),
            RealExpr::Neg(x) => write!(f, "-{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sqrt(u64),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(Error::Parse(format!(
                    "decimal literal in `{src}`; exact quantities take integers only"
                )));
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Int(s.parse().expect("digits")));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            match s.strip_prefix("sqrt") {
                Some(rest) if !rest.is_empty() => {
                    let d = rest
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad surd `{s}` in `{src}`")))?;
                    out.push(Tok::Sqrt(d));
                }
                _ => out.push(Tok::Ident(s)),
            }
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected `{c}` in `{src}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    vars: &'a HashMap<String, QuadraticNumber>,
    src: &'a str,
}

fn combine(op: char, l: RealExpr, r: RealExpr) -> Result<RealExpr> {
    // exact folding stays inside one quadratic field; mixed fields fall back
    // to an interval-evaluated tree
    match (l.as_exact(), r.as_exact()) {
        (Some(a), Some(b)) if a.same_field(b) => {
            return Ok(RealExpr::Exact(match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a.checked_div(b)?,
                _ => unreachable!(),
            }))
        }
        _ => {}
    }
    let (l, r) = (Box::new(l), Box::new(r));
    Ok(match op {
        '+' => RealExpr::Add(l, r),
        '-' => RealExpr::Sub(l, r),
        '*' => RealExpr::Mul(l, r),
        '/' => RealExpr::Div(l, r),
        _ => unreachable!(),
    })
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at token {} in `{}`", self.pos, self.src))
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<RealExpr> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = combine(op, acc, rhs)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RealExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek_op() {
                Some(op @ ('*' | '/')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = combine(op, acc, rhs)?;
                }
                // implicit product: `2sqrt2`, `3 log(2)`, `2(1+sqrt2)`
                Some('(') => {
                    let rhs = self.unary()?;
                    acc = combine('*', acc, rhs)?;
                }
                None if matches!(
                    self.tokens.get(self.pos),
                    Some(Tok::Sqrt(_)) | Some(Tok::Ident(_))
                ) =>
                {
                    let rhs = self.unary()?;
                    acc = combine('*', acc, rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RealExpr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            let x = self.unary()?;
            return Ok(match x {
                RealExpr::Exact(q) => RealExpr::Exact(-q),
                other => RealExpr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<RealExpr> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek_op() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let k = match self.tokens.get(self.pos) {
            Some(Tok::Int(k)) => i64::try_from(k).map_err(|_| self.error("exponent too large"))?,
            _ => return Err(self.error("expected integer exponent")),
        };
        self.pos += 1;
        let k = if neg { -k } else { k };
        match base {
            RealExpr::Exact(q) => Ok(RealExpr::Exact(q.pow(k)?)),
            _ => Err(self.error("powers apply to exact quantities only")),
        }
    }

    fn atom(&mut self) -> Result<RealExpr> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Tok::Int(n)) => Ok(RealExpr::Exact(QuadraticNumber::from_integer(n))),
            Some(Tok::Sqrt(d)) => Ok(RealExpr::Exact(QuadraticNumber::sqrt_of(d)?)),
            Some(Tok::Op('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) if name == "log" || name == "ln" => {
                self.expect('(')?;
                let e = self.expr()?;
                self.expect(')')?;
                match e {
                    RealExpr::Exact(q) => {
                        if q.signum() != std::cmp::Ordering::Greater {
                            return Err(Error::NonPositiveLog);
                        }
                        Ok(RealExpr::Log(q))
                    }
                    _ => Err(self.error("log takes an exact argument")),
                }
            }
            Some(Tok::Ident(name)) => match self.vars.get(&name) {
                Some(v) => Ok(RealExpr::Exact(v.clone())),
                None => {
                    self.pos -= 1;
                    Err(self.error(&format!("unknown name `{name}`")))
                }
            },
            _ => {
                self.pos -= 1;
                Err(self.error("expected a number, surd, name, `log(` or `(`"))
            }
        }
    }
}

/// Parses an exact quantity, e.g. `4*sqrt2` or `(3 + 2sqrt2)^-1`.
pub fn parse_exact(src: &str) -> Result<QuadraticNumber> {
    parse_exact_with(src, &HashMap::new())
}

pub fn parse_exact_with(
    src: &str,
    vars: &HashMap<String, QuadraticNumber>,
) -> Result<QuadraticNumber> {
    match RealExpr::parse_with(src, vars)? {
        RealExpr::Exact(q) => Ok(q),
        _ => Err(Error::Parse(format!("`{src}` is not an exact quantity"))),
    }
}

/// A rational as an exact quantity, if it is one.
pub fn exact_rational(q: &QuadraticNumber) -> Option<BigRational> {
    q.to_rational()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certified::parse_decimal;

    #[test]
    fn folds_constants() {
        let x = parse_exact("3 + 2*sqrt2").unwrap();
        assert_eq!(x, QuadraticNumber::new(3, 2, 1, 2).unwrap());
        assert_eq!(parse_exact("3+2sqrt2").unwrap(), x);
        assert_eq!(parse_exact("(3 + 2sqrt2)^-1").unwrap(), x.pow(-1).unwrap());
        assert_eq!(
            parse_exact("4*sqrt2/9").unwrap(),
            QuadraticNumber::new(0, 4, 9, 2).unwrap()
        );
        assert_eq!(parse_exact("-(1 - sqrt2)").unwrap().to_string(), "-1 + √2");
    }

    #[test]
    fn variables() {
        let mut vars = HashMap::new();
        vars.insert("d".to_string(), QuadraticNumber::from_integer(9));
        assert_eq!(
            parse_exact_with("4*d*sqrt2/9", &vars).unwrap(),
            QuadraticNumber::new(0, 4, 1, 2).unwrap()
        );
        assert!(parse_exact("4*d").is_err());
    }

    #[test]
    fn tau_evaluates() {
        let tau = RealExpr::parse("log(10)/log(3+2sqrt2)").unwrap();
        let v = tau.eval(128).unwrap();
        assert!(v.contains(&parse_decimal("1.30624806943697849096984754443384932011721519223848681177658").unwrap()));
        assert!(v.width() < parse_decimal("1e-35").unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RealExpr::parse("1.5").is_err());
        assert!(RealExpr::parse("log(0)").is_err());
        assert!(RealExpr::parse("log(-2)").is_err());
        assert!(RealExpr::parse("(1 + 2").is_err());
        assert!(RealExpr::parse("2 $ 3").is_err());
        assert!(RealExpr::parse("log(log(2))").is_err());
        assert!(RealExpr::parse("sqrt8").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "log(10)/log(3+2sqrt2)",
            "log(4*sqrt2/9)/log(3+2*sqrt2)",
            "1 - log(2)",
            "(1 - sqrt2)/2",
            "-log(3)",
        ] {
            let e = RealExpr::parse(src).unwrap();
            let again = RealExpr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }
}
