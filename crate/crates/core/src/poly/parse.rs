//! Text input for polynomials and rational functions.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := ["+"|"-"] term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := ["-"] atom ["^" ["-"] integer]
//! atom   := integer | name | "(" expr ")"
//! ```
//!
//! Juxtaposition is rejected. In polynomial mode a divisor must be a nonzero
//! constant and exponents nonnegative.

use num_bigint::BigInt;

use super::coeff::{Domain, Rat};
use super::polynomial::Polynomial;
use super::rational::RationalFunction;
use super::vars::VarTable;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            Tok::Int(text[start..i].parse().expect("digits"))
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Name(text[start..i].to_string())
        } else {
            i += 1;
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(err(start, format!("unexpected character `{c}`"))),
            }
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    vars: &'a VarTable,
    domain: Domain,
    polynomial_only: bool,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = match self.peek() {
            Some(Tok::Plus) => {
                self.bump();
                self.term()?
            }
            Some(Tok::Minus) => {
                self.bump();
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = &acc + &t;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = &acc - &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.bump();
                    let f = self.factor()?;
                    if f.is_zero() {
                        return Err(err(pos, "division by zero"));
                    }
                    if self.polynomial_only && !f.is_constant() {
                        return Err(err(pos, "division by a non-constant in a polynomial"));
                    }
                    acc = acc.checked_div(&f)?;
                }
                Some(Tok::Int(_)) | Some(Tok::Name(_)) | Some(Tok::LParen) => {
                    return Err(err(self.pos(), "implicit multiplication is not allowed; use `*`"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RationalFunction> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let pos = self.pos();
            let negative = if let Some(Tok::Minus) = self.peek() {
                self.bump();
                true
            } else {
                false
            };
            let e = match self.bump() {
                Some(Tok::Int(v)) => v,
                _ => return Err(err(pos, "expected an integer exponent")),
            };
            let e: i32 = i32::try_from(&e).map_err(|_| err(pos, "exponent too large"))?;
            let e = if negative { -e } else { e };
            if e < 0 && self.polynomial_only {
                return Err(err(pos, "negative exponent in a polynomial"));
            }
            if e < 0 && base.is_zero() {
                return Err(err(pos, "zero raised to a negative power"));
            }
            if let Some(Tok::Caret) = self.peek() {
                return Err(err(self.pos(), "chained exponents are ambiguous; add parentheses"));
            }
            return base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalFunction> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(v)) => {
                let r = Rat::from_bigint(v);
                let c = self.domain.from_rat(&r)?;
                Ok(RationalFunction::constant(self.nvars(), self.domain, c))
            }
            Some(Tok::Name(name)) => match self.vars.lookup(&name) {
                Some(i) => Ok(RationalFunction::var(self.nvars(), self.domain, i)),
                None => Err(Error::UnknownVariable(name)),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(self.toks.get(self.at - 1).map(|t| t.0).unwrap_or(self.end), "expected `)`")),
                }
            }
            Some(t) => Err(err(pos, format!("unexpected token {t:?}"))),
            None => Err(err(pos, "unexpected end of input")),
        }
    }
}

fn run(text: &str, vars: &VarTable, domain: Domain, polynomial_only: bool) -> Result<RationalFunction> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(err(0, "empty expression"));
    }
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        vars,
        domain,
        polynomial_only,
    };
    let value = p.expr()?;
    if p.at < p.toks.len() {
        return Err(err(p.pos(), "unexpected trailing input"));
    }
    Ok(value)
}

/// Parses a polynomial over QQ.
pub fn parse(text: &str, vars: &VarTable) -> Result<Polynomial> {
    parse_in(text, vars, Domain::Rational)
}

/// Parses a polynomial over the given domain.
pub fn parse_in(text: &str, vars: &VarTable, domain: Domain) -> Result<Polynomial> {
    let r = run(text, vars, domain, true)?;
    Ok(r.as_polynomial().expect("polynomial mode yields polynomials"))
}

/// Parses a rational function over QQ; `/` and negative exponents are allowed.
pub fn parse_rational(text: &str, vars: &VarTable) -> Result<RationalFunction> {
    run(text, vars, Domain::Rational, false)
}

/// Canonical rendering: descending grevlex, explicit `*` and `^`.
pub fn render(p: &Polynomial, vars: &VarTable) -> String {
    render_with(p, vars.names())
}

pub fn render_with<S: AsRef<str>>(p: &Polynomial, names: &[S]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, t) in p.terms().iter().enumerate() {
        let neg = t.coeff.is_negative();
        let mag = match &t.coeff {
            super::coeff::Coefficient::Rational(r) => r.abs().to_string(),
            other => other.to_string(),
        };
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in t.mono.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(names[i].as_ref().to_string()),
                _ => factors.push(format!("{}^{e}", names[i].as_ref())),
            }
        }
        if factors.is_empty() {
            out.push_str(&mag);
        } else {
            if mag != "1" {
                out.push_str(&mag);
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

pub fn render_rational(f: &RationalFunction, vars: &VarTable) -> String {
    if f.den().is_one() {
        return render(f.num(), vars);
    }
    format!("({})/({})", render(f.num(), vars), render(f.den(), vars))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_determinant() {
        let v = VarTable::symmetric("s", 2);
        let p = parse("s11*s22 - s12^2", &v).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(render(&p, &v), "-s12^2 + s11*s22");
        assert_eq!(parse(&render(&p, &v), &v).unwrap(), p);
    }

    #[test]
    fn zero() {
        let v = VarTable::indexed("x", 2);
        assert!(parse("0", &v).unwrap().is_zero());
    }

    #[test]
    fn collider_equation() {
        let v = VarTable::symmetric("k", 3);
        let p = parse("k13*k23 - k12*k33", &v).unwrap();
        assert!(p.is_homogeneous());
        assert_eq!(p.total_degree(), Some(2));
    }

    #[test]
    fn errors_carry_positions() {
        let v = VarTable::indexed("x", 2);
        assert!(matches!(parse("2 x1", &v), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse("x1 + y", &v), Err(Error::UnknownVariable(_))));
        assert!(matches!(parse("x1 +", &v), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse("x1/x2", &v), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse("(x1", &v), Err(Error::Parse { .. })));
    }

    #[test]
    fn rational_coefficients() {
        let v = VarTable::indexed("x", 1);
        let p = parse("1/2*x1^2 - 3/4", &v).unwrap();
        assert_eq!(render(&p, &v), "1/2*x1^2 - 3/4");
        assert_eq!(parse(&render(&p, &v), &v).unwrap(), p);
    }

    #[test]
    fn rational_function_input() {
        let v = VarTable::indexed("u", 2);
        let f = parse_rational("u1/(u1^2 - u1*u2)", &v).unwrap();
        assert_eq!(render_rational(&f, &v), "(1)/(u1 - u2)");
    }
}
