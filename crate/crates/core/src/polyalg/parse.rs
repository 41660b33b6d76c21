//! Recursive-descent parser for the polynomial grammar
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := rational | var ('^' nonneg-int)? | '(' expr ')' | '-' factor
//! rational := int ('/' posint)?
//! var      := [A-Za-z][A-Za-z0-9_]*
//! ```

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{Poly, Rational, Vars};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token {
                tok,
                line: l0,
                column: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n: BigInt = s.parse().expect("digits parse as integer");
            out.push(Token {
                tok: Tok::Int(n),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                column: c0,
            });
            continue;
        }
        return Err(err(l0, c0, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    vars: Vars,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc += &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly> {
        let t = self.bump();
        match t.tok {
            Tok::Int(n) => {
                if self.peek().tok == Tok::Slash {
                    self.bump();
                    let d = self.bump();
                    match d.tok {
                        Tok::Int(d) if !d.is_zero() => {
                            Ok(Poly::constant(&self.vars, Rational::new(n, d)))
                        }
                        Tok::Int(_) => Err(err(d.line, d.column, "zero denominator")),
                        _ => Err(err(
                            d.line,
                            d.column,
                            "expected positive integer denominator",
                        )),
                    }
                } else {
                    Ok(Poly::constant(&self.vars, Rational::from_integer(n)))
                }
            }
            Tok::Ident(name) => {
                let idx =
                    self.vars.iter().position(|v| *v == name).ok_or_else(|| {
                        err(t.line, t.column, format!("unknown variable `{name}`"))
                    })?;
                let base = Poly::var(&self.vars, idx);
                if self.peek().tok == Tok::Caret {
                    self.bump();
                    let e = self.bump();
                    match e.tok {
                        Tok::Int(k) => {
                            let k = k
                                .to_u32()
                                .ok_or_else(|| err(e.line, e.column, "exponent too large"))?;
                            Ok(base.pow(k))
                        }
                        _ => Err(err(
                            e.line,
                            e.column,
                            "expected nonnegative integer exponent",
                        )),
                    }
                } else {
                    Ok(base)
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(err(close.line, close.column, "expected `)`"));
                }
                Ok(inner)
            }
            Tok::Minus => Ok(-self.factor()?),
            Tok::End => Err(err(t.line, t.column, "unexpected end of input")),
            other => Err(err(t.line, t.column, format!("unexpected token {other:?}"))),
        }
    }
}

pub(super) fn parse_poly(text: &str, vars: Option<&Vars>) -> Result<Poly> {
    let toks = lex(text)?;
    let vars: Vars = match vars {
        Some(v) => v.clone(),
        None => {
            let mut names: Vec<String> = Vec::new();
            for t in &toks {
                if let Tok::Ident(n) = &t.tok {
                    if !names.contains(n) {
                        names.push(n.clone());
                    }
                }
            }
            names.into()
        }
    };
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        vars,
    };
    let out = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(err(t.line, t.column, format!("trailing input {:?}", t.tok)));
    }
    Ok(out)
}

/// Parses `-?int('/'posint)?`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let bad = || err(1, 1, format!("malformed rational `{text}`"));
    let (n, d) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(n) || d.is_some_and(|d| !digits(d)) {
        return Err(bad());
    }
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = match d {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if d.is_zero() {
        return Err(bad());
    }
    let r = Rational::new(n, d);
    Ok(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{make_vars, ratio};

    #[test]
    fn grammar_instance() {
        let p = Poly::parse("3/2*x^2*y - 1").unwrap();
        assert_eq!(p.num_terms(), 2);
    }

    #[test]
    fn negative_exponent_rejected() {
        match Poly::parse("x^-1") {
            Err(Error::Parse {
                line: 1, column: 3, ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn implicit_multiplication_rejected() {
        assert!(Poly::parse("2x").is_err());
        assert!(Poly::parse("x y").is_err());
    }

    #[test]
    fn division_only_in_literals() {
        assert!(Poly::parse("x/2").is_err());
        assert!(Poly::parse("1/0").is_err());
        assert!(Poly::parse("(1/2)*x").is_ok());
    }

    #[test]
    fn unknown_variable_in_fixed_list() {
        let v = make_vars(&["x"]);
        match Poly::parse_in("x +\n  y", &v) {
            Err(Error::Parse {
                line: 2, column: 3, ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unary_minus_and_parens() {
        let v = make_vars(&["x", "y"]);
        let a = Poly::parse_in("-(x - y)*-2", &v).unwrap();
        let b = Poly::parse_in("2*x - 2*y", &v).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("0").unwrap(), ratio(0, 1));
        for bad in ["", "1/", "/2", "1/0", "1.5", "--1", "1/-2", "x"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }
}
