//! A small expression language shared by germ generators, constraint
//! relations and polynomial forms.
//!
//! Grammar: `+ - * / ^`, parentheses, integer literals, identifiers and calls
//! `f(args)`. `^` takes an integer exponent (optionally negative). Built-in
//! calls are `zeta(n)`, `zeta(n, k)` and `pow(expr, r)` for rational `r`.
//! Unicode `−`, `·` and `×` are accepted.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::cyclotomic::{CycloElem, Rational, Scalar};
use crate::error::{Error, Result};
use crate::jets::Jet;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(String, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eq,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {}
            '+' => out.push((Tok::Plus, col)),
            '-' | '−' => out.push((Tok::Minus, col)),
            '*' | '·' | '×' => out.push((Tok::Star, col)),
            '/' => out.push((Tok::Slash, col)),
            '^' => out.push((Tok::Caret, col)),
            '(' => out.push((Tok::LParen, col)),
            ')' => out.push((Tok::RParen, col)),
            ',' => out.push((Tok::Comma, col)),
            '=' => out.push((Tok::Eq, col)),
            d if d.is_ascii_digit() => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..=i].iter().collect();
                out.push((Tok::Num(s.parse().unwrap()), col));
            }
            a if a.is_alphabetic() || a == '_' => {
                let start = i;
                while i + 1 < chars.len() && (chars[i + 1].is_alphanumeric() || chars[i + 1] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..=i].iter().collect()), col));
            }
            other => return Err(Error::parse(col, format!("unexpected character {other:?}"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let col = self.col();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(Error::parse(col, format!("expected {want:?}, found {t:?}"))),
            None => Err(Error::parse(col, format!("expected {want:?}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let exp = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), exp))
    }

    fn exponent(&mut self) -> Result<i64> {
        let col = self.col();
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.bump();
        }
        let neg = self.peek() == Some(&Tok::Minus);
        if neg {
            self.bump();
        }
        let n = match self.bump() {
            Some(Tok::Num(n)) => i64::try_from(n)
                .map_err(|_| Error::parse(col, "exponent too large"))?,
            _ => return Err(Error::parse(col, "exponent must be an integer literal")),
        };
        if paren {
            self.expect(Tok::RParen)?;
        }
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Expr::Num(n)),
            Some(Tok::Ident(name)) => {
                if self.peek() != Some(&Tok::LParen) {
                    return Ok(Expr::Var(name));
                }
                self.bump();
                let mut args = vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Expr::Call(name, args))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(t) => Err(Error::parse(col, format!("unexpected token {t:?}"))),
            None => Err(Error::parse(col, "unexpected end of input")),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some((t, c)) => Err(Error::parse(*c, format!("unexpected trailing token {t:?}"))),
        }
    }
}

fn parser(src: &str) -> Result<Parser> {
    Ok(Parser {
        toks: tokenize(src)?,
        pos: 0,
        end_col: src.chars().count() + 1,
    })
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = parser(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses `lhs = rhs`.
pub fn parse_relation(src: &str) -> Result<(Expr, Expr)> {
    let mut p = parser(src)?;
    let lhs = p.expr()?;
    p.expect(Tok::Eq)?;
    let rhs = p.expr()?;
    p.finish()?;
    Ok((lhs, rhs))
}

/// Named scalars available to an expression.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub scalars: BTreeMap<String, Scalar>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with(mut self, name: &str, value: Scalar) -> Self {
        self.scalars.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Scalar> {
        self.scalars.get(name)
    }
}

fn arg_u32(e: &Expr, env: &Env) -> Result<i64> {
    let v = eval_scalar(e, env)?;
    v.as_rational()
        .filter(Rational::is_integer)
        .and_then(|q| i64::try_from(q.numer().clone()).ok())
        .ok_or_else(|| Error::domain("expected an integer argument"))
}

/// Evaluates the built-in `zeta(n)` / `zeta(n, k)`.
fn eval_zeta(args: &[Expr], env: &Env) -> Result<Scalar> {
    let n = match args.first() {
        Some(a) => arg_u32(a, env)?,
        None => return Err(Error::domain("zeta needs a conductor")),
    };
    if n < 1 || n > 100_000 {
        return Err(Error::domain(format!("zeta: bad conductor {n}")));
    }
    let k = match args.get(1) {
        Some(a) => arg_u32(a, env)?,
        None => 1,
    };
    if args.len() > 2 {
        return Err(Error::domain("zeta takes at most two arguments"));
    }
    Ok(CycloElem::zeta_pow(n as u32, k))
}

pub(crate) fn rational_arg(e: &Expr, env: &Env) -> Result<Rational> {
    eval_scalar(e, env)?
        .as_rational()
        .ok_or_else(|| Error::domain("exponent must be rational"))
}

pub fn eval_scalar(e: &Expr, env: &Env) -> Result<Scalar> {
    Ok(match e {
        Expr::Num(n) => CycloElem::from_rational(&Rational::from(n.clone()), 1),
        Expr::Var(name) => env
            .get(name)
            .cloned()
            .ok_or_else(|| Error::domain(format!("unknown scalar {name:?}")))?,
        Expr::Neg(a) => -eval_scalar(a, env)?,
        Expr::Add(a, b) => eval_scalar(a, env)? + eval_scalar(b, env)?,
        Expr::Sub(a, b) => eval_scalar(a, env)? - eval_scalar(b, env)?,
        Expr::Mul(a, b) => eval_scalar(a, env)? * eval_scalar(b, env)?,
        Expr::Div(a, b) => eval_scalar(a, env)?.checked_div(&eval_scalar(b, env)?)?,
        Expr::Pow(a, k) => eval_scalar(a, env)?.pow(*k)?,
        Expr::Call(name, args) => match name.as_str() {
            "zeta" => eval_zeta(args, env)?,
            "pow" if args.len() == 2 => {
                let r = rational_arg(&args[1], env)?;
                if !r.is_integer() {
                    return Err(Error::domain("pow of a scalar needs an integer exponent"));
                }
                let k = i64::try_from(r.numer().clone())
                    .map_err(|_| Error::domain("exponent too large"))?;
                eval_scalar(&args[0], env)?.pow(k)?
            }
            _ => return Err(Error::domain(format!("unknown function {name:?}"))),
        },
    })
}

/// Evaluates an expression in the variable `z` as a jet of the given order.
pub fn eval_jet(e: &Expr, env: &Env, order: usize) -> Result<Jet> {
    Ok(match e {
        Expr::Var(name) if name == "z" => Jet::identity(order, 1),
        Expr::Num(_) | Expr::Var(_) => Jet::constant(&eval_scalar(e, env)?, order),
        Expr::Neg(a) => -&eval_jet(a, env, order)?,
        Expr::Add(a, b) => &eval_jet(a, env, order)? + &eval_jet(b, env, order)?,
        Expr::Sub(a, b) => &eval_jet(a, env, order)? - &eval_jet(b, env, order)?,
        Expr::Mul(a, b) => &eval_jet(a, env, order)? * &eval_jet(b, env, order)?,
        Expr::Div(a, b) => {
            let num = eval_jet(a, env, order)?;
            let den = eval_jet(b, env, order)?;
            &num * &den.mul_inverse()?
        }
        Expr::Pow(a, k) => {
            let base = eval_jet(a, env, order)?;
            if *k < 0 {
                base.mul_inverse()?.pow((-*k) as u32)
            } else {
                base.pow(*k as u32)
            }
        }
        Expr::Call(name, args) => match name.as_str() {
            "pow" if args.len() == 2 => {
                let r = rational_arg(&args[1], env)?;
                eval_jet(&args[0], env, order)?.rational_power(&r)?
            }
            _ => Jet::constant(&eval_scalar(e, env)?, order),
        },
    })
}

/// Parses and evaluates a germ expression in one step.
pub fn jet_from_str(src: &str, env: &Env, order: usize) -> Result<Jet> {
    eval_jet(&parse(src)?, env, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse("1 + 2*3^2 - -4/2").unwrap();
        let v = eval_scalar(&e, &Env::new()).unwrap();
        assert_eq!(v, CycloElem::from_int(21));
        let e = parse("2^-1").unwrap();
        assert_eq!(
            eval_scalar(&e, &Env::new()).unwrap().as_rational().unwrap(),
            Rational::new(1, 2).unwrap()
        );
    }

    #[test]
    fn parse_errors_carry_columns() {
        match parse("1 + * 2") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("(1 + 2").is_err());
        assert!(parse("1 $ 2").is_err());
        assert!(parse("z^x").is_err());
    }

    #[test]
    fn relation_with_named_root() {
        let (l, r) = parse_relation("a = 1/(1-a)").unwrap();
        let env = Env::new().with("a", CycloElem::zeta(6));
        assert_eq!(eval_scalar(&l, &env).unwrap(), eval_scalar(&r, &env).unwrap());
        assert!(eval_scalar(&l, &Env::new()).is_err());
    }

    #[test]
    fn germ_expressions() {
        let env = Env::new().with("a", CycloElem::zeta(6));
        let f = jet_from_str("z/(a+z)", &env, 3).unwrap();
        let ia = CycloElem::zeta(6).inv().unwrap();
        assert_eq!(f.coeff(1), ia);
        assert_eq!(f.coeff(2), -ia.pow(2).unwrap());
        let g = jet_from_str("z*pow(1 - z^2, -1/2)", &env, 5).unwrap();
        assert_eq!(g.coeff(5).as_rational().unwrap(), Rational::new(3, 8).unwrap());
        let h = jet_from_str("zeta(8)·z", &env, 3).unwrap();
        assert_eq!(h.coeff(1), CycloElem::zeta(8));
        assert!(jet_from_str("1/z", &env, 3).is_err());
        assert!(jet_from_str("pow(2 + z, 1/2)", &env, 3).is_err());
    }
}
