//! Small expression language for parameter values, couplings and
//! potentials: rationals, decimals, `i`, identifiers, `+ - * / ^`,
//! parentheses, `sqrt(..)` and implicit multiplication (`3/4 i`, `2x`).

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::multi::MultiPoly;
use crate::scalar::{grat_i, parse_decimal, AlgNum, GRat, Rat};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Op(char),
}

#[derive(Clone, Debug)]
pub enum Expr {
    Num(Rat),
    I,
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Sqrt(Box<Expr>),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            // scientific exponent only when followed by a digit
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let lit: String = chars[start..k].iter().collect();
            out.push(Tok::Num(parse_decimal(&lit)?));
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push(Tok::Ident(chars[start..k].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            k += 1;
        } else {
            return Err(Error::Input(format!("unexpected character `{c}` in `{s}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Input(format!("{what} in expression `{}`", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::Op('('))) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let paren = self.eat('(');
            let e = match self.peek().cloned() {
                Some(Tok::Num(n)) if n.is_integer() && n >= Rat::zero() => {
                    self.pos += 1;
                    n.to_integer().try_into().map_err(|_| self.err("exponent too large"))?
                }
                _ => return Err(self.err("exponent must be a nonnegative integer")),
            };
            if paren && !self.eat(')') {
                return Err(self.err("missing `)`"));
            }
            Ok(Expr::Pow(Box::new(base), e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "i" {
                    Ok(Expr::I)
                } else if name == "sqrt" {
                    if !self.eat('(') {
                        return Err(self.err("expected `(` after sqrt"));
                    }
                    let inner = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.err("missing `)`"));
                    }
                    Ok(Expr::Sqrt(Box::new(inner)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("missing `)`"));
                }
                Ok(inner)
            }
            _ => Err(self.err("unexpected end or operator")),
        }
    }
}

pub fn parse_expr(s: &str) -> Result<Expr> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Input("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0, src: s };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl Expr {
    /// Polynomial value; division only by nonzero constants, `sqrt` only of
    /// perfect rational squares.
    pub fn to_poly(&self) -> Result<MultiPoly> {
        Ok(match self {
            Expr::Num(n) => MultiPoly::from_rat(n.clone()),
            Expr::I => MultiPoly::constant(grat_i()),
            Expr::Var(v) => MultiPoly::var(v),
            Expr::Neg(a) => -a.to_poly()?,
            Expr::Add(a, b) => a.to_poly()? + b.to_poly()?,
            Expr::Sub(a, b) => a.to_poly()? - b.to_poly()?,
            Expr::Mul(a, b) => a.to_poly()? * b.to_poly()?,
            Expr::Div(a, b) => {
                let d = b
                    .to_poly()?
                    .as_constant()
                    .ok_or_else(|| Error::Input("division by a non-constant".into()))?;
                if d.is_zero() {
                    return Err(Error::Input("division by zero".into()));
                }
                a.to_poly()?.scale(&(GRat::one() / d))
            }
            Expr::Pow(a, e) => a.to_poly()?.pow(*e),
            Expr::Sqrt(_) => {
                let v = self.to_alg()?;
                MultiPoly::constant(v.as_grat().ok_or_else(|| {
                    Error::Input("irrational square root cannot appear in a polynomial entry".into())
                })?)
            }
        })
    }

    /// Constant value in the square-root extension of the Gaussian rationals.
    pub fn to_alg(&self) -> Result<AlgNum> {
        Ok(match self {
            Expr::Num(n) => AlgNum::from_rat(n.clone()),
            Expr::I => AlgNum::from_grat(grat_i()),
            Expr::Var(v) => return Err(Error::Input(format!("`{v}` is not a constant"))),
            Expr::Neg(a) => -a.to_alg()?,
            Expr::Add(a, b) => a.to_alg()? + b.to_alg()?,
            Expr::Sub(a, b) => a.to_alg()? - b.to_alg()?,
            Expr::Mul(a, b) => a.to_alg()? * b.to_alg()?,
            Expr::Div(a, b) => {
                let d = b
                    .to_alg()?
                    .as_grat()
                    .ok_or_else(|| Error::Input("division by an irrational value".into()))?;
                if d.is_zero() {
                    return Err(Error::Input("division by zero".into()));
                }
                a.to_alg()? * AlgNum::from_grat(GRat::one() / d)
            }
            Expr::Pow(a, e) => {
                let b = a.to_alg()?;
                (0..*e).fold(AlgNum::one(), |acc, _| acc * b.clone())
            }
            Expr::Sqrt(a) => {
                let v = a.to_alg()?;
                let r = v
                    .as_rat()
                    .ok_or_else(|| Error::Input("sqrt argument must be a real rational".into()))?;
                AlgNum::sqrt_rat(&r)?
            }
        })
    }
}

/// Parses a polynomial expression such as `2 - 6*b + b^4` or `i*x^3`.
pub fn parse_poly(s: &str) -> Result<MultiPoly> {
    parse_expr(s)?.to_poly()
}

/// Parses a constant such as `3/4*sqrt(2)` or `1/2-1/3 i`.
pub fn parse_value(s: &str) -> Result<AlgNum> {
    parse_expr(s)?.to_alg()
}

/// Parses a Gaussian-rational constant; irrational values are rejected.
pub fn parse_grat(s: &str) -> Result<GRat> {
    parse_value(s)?
        .as_grat()
        .ok_or_else(|| Error::Input(format!("`{s}` is not a Gaussian rational")))
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let g = parse_grat(s)?;
    if !g.im.is_zero() {
        return Err(Error::Input(format!("`{s}` is not real")));
    }
    Ok(g.re)
}
