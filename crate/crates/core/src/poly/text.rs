//! Text grammar for polynomials.
//!
//! ```text
//! poly   := term ('+' term)*
//! term   := coeff ('*' factor)* | factor ('*' factor)*
//! factor := var ('^' exponent)?
//! ```
//!
//! Coefficients are decimal integers in `[0, p)`; whitespace is
//! insignificant. There is no subtraction: negatives are written via their
//! reduced representative (e.g. `2*y^3` over F_3). Printing emits terms in
//! descending monomial order using the same grammar, so parsing a printed
//! polynomial reproduces it exactly.

use thiserror::Error;

use super::{Monomial, Poly};
use crate::zpfield::FpElem;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("polynomial syntax error at column {col}: {msg}")]
pub struct PolyParseError {
    pub col: usize,
    pub msg: String,
}

struct Lexer<'a> {
    input: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Number(u64),
    Ident(String),
    Plus,
    Star,
    Caret,
    End,
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer {
            input: input.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> PolyParseError {
        PolyParseError {
            col: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self
            .input
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<Token, PolyParseError> {
        self.skip_ws();
        let Some(&c) = self.input.get(self.pos) else {
            return Ok(Token::End);
        };
        match c {
            b'+' => {
                self.pos += 1;
                Ok(Token::Plus)
            }
            b'*' => {
                self.pos += 1;
                Ok(Token::Star)
            }
            b'^' => {
                self.pos += 1;
                Ok(Token::Caret)
            }
            b'0'..=b'9' => {
                let start = self.pos;
                while self.input.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
                s.parse::<u64>()
                    .map(Token::Number)
                    .map_err(|_| self.err("number too large"))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .input
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
                Ok(Token::Ident(
                    std::str::from_utf8(&self.input[start..self.pos])
                        .unwrap()
                        .to_string(),
                ))
            }
            other => Err(self.err(format!("unexpected character {:?}", other as char))),
        }
    }

    fn peek(&mut self) -> Result<Token, PolyParseError> {
        let save = self.pos;
        let tok = self.next();
        self.pos = save;
        tok
    }
}

pub(super) fn parse_poly(input: &str, p: u64, vars: &[String]) -> Result<Poly, PolyParseError> {
    let mut lex = Lexer::new(input);
    let mut poly = Poly::zero(p, vars.len());
    loop {
        let (coeff, mono) = parse_term(&mut lex, p, vars)?;
        poly.add_term(mono, coeff);
        match lex.next()? {
            Token::Plus => continue,
            Token::End => break,
            other => return Err(lex.err(format!("expected '+' or end of input, got {other:?}"))),
        }
    }
    Ok(poly)
}

fn parse_term(lex: &mut Lexer, p: u64, vars: &[String]) -> Result<(u64, Monomial), PolyParseError> {
    let mut coeff: u64 = 1;
    let mut mono = Monomial::one(vars.len());
    let mut factors = 0usize;
    match lex.peek()? {
        Token::Number(n) => {
            lex.next()?;
            if n >= p {
                return Err(lex.err(format!("coefficient {n} out of range for modulus {p}")));
            }
            coeff = n;
            // A bare coefficient is a complete term unless '*' follows.
            if lex.peek()? != Token::Star {
                return Ok((coeff, mono));
            }
        }
        Token::Ident(_) => {
            parse_factor(lex, vars, &mut mono)?;
            factors += 1;
        }
        other => return Err(lex.err(format!("expected a term, got {other:?}"))),
    }
    while lex.peek()? == Token::Star {
        lex.next()?;
        parse_factor(lex, vars, &mut mono)?;
        factors += 1;
    }
    if coeff != 1 && factors == 0 {
        // unreachable by construction, kept for clarity
        return Ok((coeff, mono));
    }
    Ok((coeff, mono))
}

fn parse_factor(
    lex: &mut Lexer,
    vars: &[String],
    mono: &mut Monomial,
) -> Result<(), PolyParseError> {
    match lex.next()? {
        Token::Ident(name) => {
            let Some(index) = vars.iter().position(|v| *v == name) else {
                return Err(lex.err(format!("unknown variable {name:?}")));
            };
            let exp = if lex.peek()? == Token::Caret {
                lex.next()?;
                match lex.next()? {
                    Token::Number(n) => {
                        u32::try_from(n).map_err(|_| lex.err("exponent too large"))?
                    }
                    other => return Err(lex.err(format!("expected exponent, got {other:?}"))),
                }
            } else {
                1
            };
            mono.0[index] = mono.0[index]
                .checked_add(exp)
                .ok_or_else(|| lex.err("exponent overflow"))?;
            Ok(())
        }
        other => Err(lex.err(format!("expected a variable, got {other:?}"))),
    }
}

pub(super) fn print_poly(f: &Poly, vars: &[String]) -> String {
    assert_eq!(vars.len(), f.nvars(), "variable name count mismatch");
    if f.is_zero() {
        return "0".to_string();
    }
    let mut rendered: Vec<String> = Vec::new();
    let terms: Vec<(&Monomial, FpElem)> = f.terms().collect();
    for (mono, coeff) in terms.into_iter().rev() {
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in mono.0.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(vars[i].clone()),
                _ => factors.push(format!("{}^{}", vars[i], e)),
            }
        }
        if factors.is_empty() {
            rendered.push(format!("{}", coeff.value()));
        } else if coeff.value() == 1 {
            rendered.push(factors.join("*"));
        } else {
            rendered.push(format!("{}*{}", coeff.value(), factors.join("*")));
        }
    }
    rendered.join("+")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_examples() {
        let vars = names(&["x", "y"]);
        let f = Poly::parse("x^2 + 2*x*y + y^2", 3, &vars).unwrap();
        assert_eq!(f.num_terms(), 3);
        assert_eq!(f.to_text(&vars), "x^2+2*x*y+y^2");
        let g = Poly::parse("0", 3, &vars).unwrap();
        assert!(g.is_zero());
        assert_eq!(g.to_text(&vars), "0");
        let c = Poly::parse("2", 3, &vars).unwrap();
        assert_eq!(c.num_terms(), 1);
        assert_eq!(c.to_text(&vars), "2");
    }

    #[test]
    fn repeated_factors_accumulate() {
        let vars = names(&["x"]);
        let f = Poly::parse("x*x*x", 5, &vars).unwrap();
        assert_eq!(f, Poly::parse("x^3", 5, &vars).unwrap());
        let g = Poly::parse("x+x", 5, &vars).unwrap();
        assert_eq!(g, Poly::parse("2*x", 5, &vars).unwrap());
    }

    #[test]
    fn descending_print_order() {
        let vars = names(&["x", "y"]);
        let f = Poly::parse("y^3+x^2", 5, &vars).unwrap();
        // y^3 has higher total degree, so it prints first.
        assert_eq!(f.to_text(&vars), "y^3+x^2");
        let g = Poly::parse("y^2+x^2+x*y", 5, &vars).unwrap();
        assert_eq!(g.to_text(&vars), "x^2+x*y+y^2");
    }

    #[test]
    fn rejects_malformed_input() {
        let vars = names(&["x", "y"]);
        assert!(Poly::parse("x^2 - y", 3, &vars).is_err());
        assert!(
            Poly::parse("3*x", 3, &vars).is_err(),
            "coefficient not reduced"
        );
        assert!(Poly::parse("z", 3, &vars).is_err(), "unknown variable");
        assert!(Poly::parse("x^", 3, &vars).is_err());
        assert!(Poly::parse("x y", 3, &vars).is_err(), "missing '*'");
        assert!(Poly::parse("", 3, &vars).is_err());
        assert!(Poly::parse("(x)", 3, &vars).is_err());
        let err = Poly::parse("x + $", 3, &vars).unwrap_err();
        assert_eq!(err.col, 5);
    }

    #[test]
    fn exponent_zero_is_one() {
        let vars = names(&["x"]);
        let f = Poly::parse("x^0", 7, &vars).unwrap();
        assert_eq!(f.to_text(&vars), "1");
    }
}
