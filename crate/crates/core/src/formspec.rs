//! A small expression language for building forms, e.g. `E4^3 - E6^2`,
//! `E4 / Delta`, `3*FrickeE(4) - 2*FrickeE(4)`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' ['-'] INT)?
//! atom   := INT | IDENT | IDENT '(' INT ')' | '(' expr ')'
//! ```
//!
//! Construction is exact; the result is converted to big floats afterwards
//! when the configuration asks for it.

use std::collections::HashMap;

use rug::{Integer, Rational};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::generators::{delta, e2p, eisenstein, fricke_eisenstein, j_invariant, ModularForm};
use crate::level::Level;
use crate::qseries::{CoefficientDomain, QSeries};

/// A form described by an expression, with the data needed to build it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormSpec {
    pub text: String,
    pub level: Level,
    pub truncation: usize,
    #[serde(skip)]
    pub domain: CoefficientDomain,
}

impl FormSpec {
    pub fn new(text: impl Into<String>, level: Level, config: &RunConfig) -> FormSpec {
        FormSpec {
            text: text.into(),
            level,
            truncation: config.truncation,
            domain: config.coefficient_domain(),
        }
    }

    pub fn build(&self) -> Result<ModularForm> {
        let tokens = lex(&self.text)?;
        let mut p = Parser {
            tokens,
            at: 0,
            level: self.level,
            n: self.truncation,
            cache: HashMap::new(),
        };
        let value = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(parse_error(t.pos, format!("unexpected {}", t.kind.describe())));
        }
        let form = match value {
            Value::Form(f) => f,
            Value::Scalar(c) => ModularForm::new(
                0,
                self.level,
                QSeries::constant(CoefficientDomain::ExactRational, &c, self.truncation),
                c.to_string(),
            )?,
        };
        let form = form.with_label(self.text.trim());
        match self.domain {
            CoefficientDomain::ExactRational => Ok(form),
            CoefficientDomain::BigFloat { precision_bits } => form.to_float(precision_bits),
        }
    }
}

/// Parses and evaluates `text` at `level` with the truncation and domain of `config`.
pub fn parse_form_spec(text: &str, level: Level, config: &RunConfig) -> Result<ModularForm> {
    FormSpec::new(text, level, config).build()
}

fn parse_error(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Int(Integer),
    Ident(String),
    Op(char),
    Open,
    Close,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Int(i) => format!("integer {i}"),
            Kind::Ident(s) => format!("identifier `{s}`"),
            Kind::Op(c) => format!("`{c}`"),
            Kind::Open => "`(`".into(),
            Kind::Close => "`)`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    /// Byte offset into the source text.
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &text[start..i];
            Kind::Int(digits.parse().map_err(|_| parse_error(start, "bad integer"))?)
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Kind::Ident(text[start..i].to_string())
        } else {
            i += 1;
            match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Kind::Op(c as char),
                b'(' => Kind::Open,
                b')' => Kind::Close,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(parse_error(start, format!("unexpected character `{ch}`")));
                }
            }
        };
        out.push(Token { kind, pos: start });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(Rational),
    Form(ModularForm),
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    level: Level,
    n: usize,
    cache: HashMap<String, ModularForm>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map_or(0, |t| t.pos + 1)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.at)
            .cloned()
            .ok_or_else(|| parse_error(self.end_pos(), "unexpected end of input"))?;
        self.at += 1;
        Ok(t)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token { kind: Kind::Op(c), .. }) if ops.contains(c) => {
                let c = *c;
                self.at += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            acc = self.add(acc, rhs, op == '-')?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        loop {
            let pos = self.peek().map(|t| t.pos);
            let Some(op) = self.eat_op(&['*', '/']) else {
                return Ok(acc);
            };
            let rhs = self.unary()?;
            acc = if op == '*' {
                mul(acc, rhs)?
            } else {
                self.div(acc, rhs, pos.unwrap_or(0))?
            };
        }
    }

    fn unary(&mut self) -> Result<Value> {
        match self.eat_op(&['+', '-']) {
            Some('-') => Ok(match self.unary()? {
                Value::Scalar(c) => Value::Scalar(-c),
                Value::Form(f) => Value::Form(f.scale(&Rational::from(-1))),
            }),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        let Some(pos) = self.peek().map(|t| t.pos) else {
            return Ok(base);
        };
        if self.eat_op(&['^']).is_none() {
            return Ok(base);
        }
        let negative = self.eat_op(&['-']).is_some();
        let t = self.next()?;
        let Kind::Int(e) = t.kind else {
            return Err(parse_error(t.pos, "exponent must be an integer"));
        };
        let e = e
            .to_i64()
            .filter(|e| *e <= 4096)
            .ok_or_else(|| parse_error(t.pos, "exponent too large"))?;
        let e = if negative { -e } else { e };
        match base {
            Value::Scalar(c) => {
                if c == 0 && e < 0 {
                    return Err(parse_error(pos, "zero raised to a negative power"));
                }
                let mut r = Rational::from(1);
                for _ in 0..e.unsigned_abs() {
                    r *= &c;
                }
                Ok(Value::Scalar(if e < 0 { r.recip() } else { r }))
            }
            Value::Form(f) => {
                if e >= 0 {
                    return Ok(Value::Form(f.pow(e)?));
                }
                Ok(Value::Form(reciprocal(&f)?.pow(-e)?))
            }
        }
    }

    fn atom(&mut self) -> Result<Value> {
        let t = self.next()?;
        match t.kind {
            Kind::Int(i) => Ok(Value::Scalar(Rational::from(i))),
            Kind::Open => {
                let v = self.expr()?;
                let close = self.next()?;
                if close.kind != Kind::Close {
                    return Err(parse_error(close.pos, format!("expected `)`, found {}", close.kind.describe())));
                }
                Ok(v)
            }
            Kind::Ident(name) => {
                let arg = if matches!(self.peek(), Some(Token { kind: Kind::Open, .. })) {
                    self.at += 1;
                    let a = self.next()?;
                    let Kind::Int(k) = a.kind else {
                        return Err(parse_error(a.pos, "expected an integer weight"));
                    };
                    let close = self.next()?;
                    if close.kind != Kind::Close {
                        return Err(parse_error(close.pos, "expected `)`"));
                    }
                    Some(k.to_i64().ok_or_else(|| parse_error(a.pos, "weight too large"))?)
                } else {
                    None
                };
                self.generator(&name, arg, t.pos).map(Value::Form)
            }
            other => Err(parse_error(t.pos, format!("unexpected {}", other.describe()))),
        }
    }

    fn generator(&mut self, name: &str, arg: Option<i64>, pos: usize) -> Result<ModularForm> {
        let key = match arg {
            Some(k) => format!("{name}({k})"),
            None => name.to_string(),
        };
        if let Some(f) = self.cache.get(&key) {
            return Ok(f.clone());
        }
        let unknown = || Error::UnknownGenerator {
            name: key.clone(),
            level: self.level.get(),
        };
        let n = self.n;
        let f = match (name, arg, self.level.get()) {
            ("FrickeE", Some(k), p) if p > 1 => fricke_eisenstein(k, self.level, n)?,
            ("FrickeE", None, _) => return Err(parse_error(pos, "FrickeE needs a weight, e.g. FrickeE(4)")),
            ("E2p", None, _) => e2p(self.level, n)?,
            (_, Some(_), _) => return Err(unknown()),
            (_, None, p) if p > 1 => return Err(unknown()),
            ("Delta", None, _) => delta(n)?,
            ("j", None, _) => j_invariant(n)?,
            _ => {
                let k = eisenstein_weight(name).ok_or_else(unknown)?;
                eisenstein(k, n)?
            }
        };
        self.cache.insert(key, f.clone());
        Ok(f)
    }

    fn add(&self, a: Value, b: Value, negate: bool) -> Result<Value> {
        let b = if negate {
            match b {
                Value::Scalar(c) => Value::Scalar(-c),
                Value::Form(f) => Value::Form(f.scale(&Rational::from(-1))),
            }
        } else {
            b
        };
        Ok(match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y),
            (Value::Form(f), Value::Form(g)) => Value::Form(f.add(&g)?),
            (Value::Scalar(c), Value::Form(f)) => Value::Form(self.add_constant(&f, &c, true)?),
            (Value::Form(f), Value::Scalar(c)) => Value::Form(self.add_constant(&f, &c, false)?),
        })
    }

    /// Integers are weight-0 constants, so they only combine with weight-0 forms.
    fn add_constant(&self, f: &ModularForm, c: &Rational, scalar_left: bool) -> Result<ModularForm> {
        if f.weight() != 0 {
            let (left, right) = if scalar_left { (0, f.weight()) } else { (f.weight(), 0) };
            return Err(Error::WeightMismatch { left, right });
        }
        let width = f.series().precision().max(1) as usize;
        let series = f
            .series()
            .add(&QSeries::constant(CoefficientDomain::ExactRational, c, width))?;
        Ok(f.with_series(series))
    }

    fn div(&self, a: Value, b: Value, pos: usize) -> Result<Value> {
        if let Value::Scalar(c) = &b {
            if *c == 0 {
                return Err(parse_error(pos, "division by zero"));
            }
        }
        Ok(match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x / y),
            (Value::Form(f), Value::Scalar(c)) => Value::Form(f.scale(&c.recip())),
            (Value::Scalar(c), Value::Form(f)) => Value::Form(reciprocal(&f)?.scale(&c)),
            (Value::Form(f), Value::Form(g)) => Value::Form(f.div(&g)?),
        })
    }
}

fn mul(a: Value, b: Value) -> Result<Value> {
    Ok(match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
        (Value::Scalar(c), Value::Form(f)) | (Value::Form(f), Value::Scalar(c)) => Value::Form(f.scale(&c)),
        (Value::Form(f), Value::Form(g)) => Value::Form(f.mul(&g)?),
    })
}

fn reciprocal(f: &ModularForm) -> Result<ModularForm> {
    ModularForm::new(-f.weight(), f.level(), f.series().inv()?, format!("1/{}", f.label()))
}

/// `E4`, `E_12`, ... → the weight.
fn eisenstein_weight(name: &str) -> Option<i64> {
    let rest = name.strip_prefix('E')?;
    let digits = rest.strip_prefix('_').unwrap_or(rest);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> RunConfig {
        RunConfig {
            truncation: n,
            ..RunConfig::default()
        }
    }

    fn parse(text: &str, p: u32) -> Result<ModularForm> {
        parse_form_spec(text, Level::new(p).unwrap(), &cfg(40))
    }

    #[test]
    fn discriminant_from_eisenstein() {
        let f = parse("E4^3 - E6^2", 1).unwrap();
        assert_eq!(f.weight(), 12);
        let d = delta(40).unwrap().into_series().scale(&Rational::from(1728));
        assert!(f.series().agrees_with(&d).unwrap());
        assert_eq!(f.series().valuation(), 1);
        assert_eq!(f.label(), "E4^3 - E6^2");
    }

    #[test]
    fn weakly_holomorphic_quotient() {
        let f = parse("E4 / Delta", 1).unwrap();
        assert_eq!(f.weight(), -8);
        assert_eq!(f.series().valuation(), -1);
        let g = parse("E4 * Delta^-1", 1).unwrap();
        assert!(f.series().agrees_with(g.series()).unwrap());
    }

    #[test]
    fn mixed_weight_addition_rejected() {
        assert!(matches!(
            parse("E4 + E6", 1),
            Err(Error::WeightMismatch { left: 4, right: 6 })
        ));
        assert!(matches!(parse("E4 - 1", 1), Err(Error::WeightMismatch { left: 4, right: 0 })));
    }

    #[test]
    fn constants_and_scalars() {
        let f = parse("E4*(j - 2000)", 1).unwrap();
        assert_eq!(f.weight(), 4);
        assert_eq!(f.series().valuation(), -1);
        assert_eq!(f.series().rational_coeff(-1).unwrap(), 1);
        // q^0: 744 - 2000 + 240
        assert_eq!(f.series().rational_coeff(0).unwrap(), 744 - 2000 + 240);
        let g = parse("-(2*E4)/4 + E_4/2", 1).unwrap();
        assert!(g.series().is_zero());
        let h = parse("3/4", 1).unwrap();
        assert_eq!(h.weight(), 0);
        assert_eq!(h.series().rational_coeff(0).unwrap(), Rational::from((3, 4)));
        let e = parse("E_12", 1).unwrap();
        assert_eq!(e.weight(), 12);
    }

    #[test]
    fn level_rules() {
        assert!(matches!(parse("FrickeE(4)", 1), Err(Error::UnknownGenerator { .. })));
        assert!(matches!(parse("E4", 5), Err(Error::UnknownGenerator { level: 5, .. })));
        assert!(matches!(parse("Delta", 2), Err(Error::UnknownGenerator { .. })));
        let f = parse("FrickeE(4)^2 - FrickeE(8)", 7).unwrap();
        assert_eq!(f.weight(), 8);
        assert_eq!(f.level().get(), 7);
        let e = parse("E2p", 3).unwrap();
        assert_eq!(e.weight(), 2);
        assert!(matches!(parse("Foo", 1), Err(Error::UnknownGenerator { .. })));
        assert!(matches!(parse("E5", 1), Err(Error::InvalidWeight { .. })));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let pos = |t: &str| match parse(t, 1) {
            Err(Error::Parse { position, .. }) => position,
            other => panic!("{t}: {other:?}"),
        };
        assert_eq!(pos("E4 + "), 4);
        assert_eq!(pos("E4 $ E6"), 3);
        assert_eq!(pos("(E4"), 2);
        assert_eq!(pos("E4^E6"), 3);
        assert_eq!(pos("E4 E6"), 3);
        assert_eq!(pos("E4/0"), 2);
        assert_eq!(pos("FrickeE"), 0);
    }

    #[test]
    fn float_domain_conversion() {
        let c = RunConfig {
            truncation: 16,
            domain: crate::config::DomainChoice::Float,
            ..RunConfig::default()
        };
        let f = parse_form_spec("E4", Level::ONE, &c).unwrap();
        assert_eq!(f.series().domain(), CoefficientDomain::BigFloat { precision_bits: 192 });
        assert_eq!(f.series().coeff_f64(1).unwrap(), 240.0);
    }
}
