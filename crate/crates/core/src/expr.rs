//! Scalar expressions in prefix s-expression syntax.
//!
//! ```text
//! (+ (* 1/2 x (^ y 2)) (sin z) -3)
//! ```
//!
//! Operators: `+ - * /`, `^` (rational exponent), `sin`, `cos`, `exp`,
//! `sqrt`; the nullary symbol `pi`; numbers as integers, `p/q` or decimals.

use crate::func::Func;
use crate::poly::{AtomKind, Gen, Poly};
use crate::rational::{fmt_q, parse_q, q, Q};
use num_traits::{One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Q),
    Var(usize),
    Pi,
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Q),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected end of input")]
    Eof,
    #[error("unexpected {found:?} at byte {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("unknown symbol {name:?} at byte {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("operator {op} expects {expected} arguments at byte {pos}")]
    Arity { pos: usize, op: String, expected: &'static str },
    #[error("exponent must be a rational number at byte {pos}")]
    Exponent { pos: usize },
    #[error("trailing input at byte {pos}")]
    Trailing { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(usize),
    Close(usize),
    Sym(usize, String),
}

fn tokenize(s: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push(Tok::Open(i));
                i += 1;
            }
            b')' => {
                out.push(Tok::Close(i));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                out.push(Tok::Sym(start, s[start..i].to_string()));
            }
        }
    }
    out
}

impl Expr {
    pub fn parse(s: &str, vars: &[String]) -> Result<Expr, ParseError> {
        let toks = tokenize(s);
        let mut pos = 0;
        let e = parse_tok(&toks, &mut pos, vars)?;
        if pos < toks.len() {
            let p = match &toks[pos] {
                Tok::Open(p) | Tok::Close(p) | Tok::Sym(p, _) => *p,
            };
            return Err(ParseError::Trailing { pos: p });
        }
        Ok(e)
    }

    pub fn to_func(&self) -> Func {
        match self {
            Expr::Num(c) => Func::constant(c.clone()),
            Expr::Var(i) => Func::var(*i),
            Expr::Pi => Func::pi(),
            Expr::Add(xs) => xs.iter().fold(Func::zero(), |acc, x| acc.add(&x.to_func())),
            Expr::Mul(xs) => xs.iter().fold(Func::one(), |acc, x| acc.mul(&x.to_func())),
            Expr::Neg(x) => x.to_func().neg(),
            Expr::Sub(a, b) => a.to_func().sub(&b.to_func()),
            Expr::Div(a, b) => a.to_func().div(&b.to_func()),
            Expr::Pow(a, e) => a.to_func().pow_q(e),
            Expr::Sin(a) => a.to_func().sin(),
            Expr::Cos(a) => a.to_func().cos(),
            Expr::Exp(a) => a.to_func().exp(),
            Expr::Sqrt(a) => a.to_func().pow_q(&Q::new(1.into(), 2.into())),
        }
    }

    pub fn from_func(f: &Func) -> Expr {
        let num = poly_expr(&f.num);
        match f.den.as_constant() {
            Some(c) if c.is_one() => num,
            _ => Expr::Div(Box::new(num), Box::new(poly_expr(&f.den))),
        }
    }

    pub fn display<'a>(&'a self, vars: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { e: self, vars }
    }
}

fn parse_tok(toks: &[Tok], pos: &mut usize, vars: &[String]) -> Result<Expr, ParseError> {
    let Some(t) = toks.get(*pos) else {
        return Err(ParseError::Eof);
    };
    *pos += 1;
    match t {
        Tok::Close(p) => Err(ParseError::Unexpected { pos: *p, found: ")".into() }),
        Tok::Sym(p, s) => symbol(*p, s, vars),
        Tok::Open(p) => {
            let Some(Tok::Sym(op_pos, op)) = toks.get(*pos) else {
                return Err(match toks.get(*pos) {
                    None => ParseError::Eof,
                    Some(Tok::Open(q)) | Some(Tok::Close(q)) => ParseError::Unexpected { pos: *q, found: "(".into() },
                    Some(Tok::Sym(..)) => unreachable!(),
                });
            };
            let (op_pos, op) = (*op_pos, op.clone());
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match toks.get(*pos) {
                    None => return Err(ParseError::Eof),
                    Some(Tok::Close(_)) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => args.push(parse_tok(toks, pos, vars)?),
                }
            }
            build(*p, op_pos, &op, args)
        }
    }
}

fn symbol(p: usize, s: &str, vars: &[String]) -> Result<Expr, ParseError> {
    if let Some(i) = vars.iter().position(|v| v == s) {
        return Ok(Expr::Var(i));
    }
    if s == "pi" {
        return Ok(Expr::Pi);
    }
    if let Some(c) = parse_q(s) {
        return Ok(Expr::Num(c));
    }
    Err(ParseError::UnknownSymbol { pos: p, name: s.to_string() })
}

fn build(_open: usize, op_pos: usize, op: &str, mut args: Vec<Expr>) -> Result<Expr, ParseError> {
    let arity = |expected: &'static str, ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(ParseError::Arity { pos: op_pos, op: op.to_string(), expected })
        }
    };
    let unary = |args: &mut Vec<Expr>| -> Result<Box<Expr>, ParseError> {
        if args.len() != 1 {
            return Err(ParseError::Arity { pos: op_pos, op: op.to_string(), expected: "1" });
        }
        Ok(Box::new(args.pop().unwrap()))
    };
    match op {
        "+" => Ok(Expr::Add(args)),
        "*" => Ok(Expr::Mul(args)),
        "-" => match args.len() {
            1 => Ok(Expr::Neg(Box::new(args.pop().unwrap()))),
            2 => {
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                Ok(Expr::Sub(Box::new(a), Box::new(b)))
            }
            _ => Err(ParseError::Arity { pos: op_pos, op: op.into(), expected: "1 or 2" }),
        },
        "/" => {
            arity("2", args.len() == 2)?;
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            Ok(Expr::Div(Box::new(a), Box::new(b)))
        }
        "^" | "pow" => {
            arity("2", args.len() == 2)?;
            let e = match args.pop().unwrap() {
                Expr::Num(c) => c,
                Expr::Neg(inner) => match *inner {
                    Expr::Num(c) => -c,
                    _ => return Err(ParseError::Exponent { pos: op_pos }),
                },
                _ => return Err(ParseError::Exponent { pos: op_pos }),
            };
            Ok(Expr::Pow(Box::new(args.pop().unwrap()), e))
        }
        "sin" => Ok(Expr::Sin(unary(&mut args)?)),
        "cos" => Ok(Expr::Cos(unary(&mut args)?)),
        "exp" => Ok(Expr::Exp(unary(&mut args)?)),
        "sqrt" => Ok(Expr::Sqrt(unary(&mut args)?)),
        "neg" => Ok(Expr::Neg(unary(&mut args)?)),
        _ => Err(ParseError::UnknownSymbol { pos: op_pos, name: op.to_string() }),
    }
}

fn gen_expr(g: &Gen) -> Expr {
    match g {
        Gen::Var(i) => Expr::Var(*i as usize),
        Gen::Atom(a) => {
            let arg = Box::new(Expr::from_func(&a.arg));
            match a.kind {
                AtomKind::Sin => Expr::Sin(arg),
                AtomKind::Cos => Expr::Cos(arg),
                AtomKind::Exp => Expr::Exp(arg),
                AtomKind::Root(qq) => Expr::Pow(arg, Q::new(1.into(), (qq as i64).into())),
                AtomKind::Pi => Expr::Pi,
            }
        }
    }
}

fn poly_expr(p: &Poly) -> Expr {
    if p.is_zero() {
        return Expr::Num(Q::zero());
    }
    let mut terms: Vec<Expr> = p
        .terms
        .iter()
        .map(|(m, c)| {
            let mut factors = Vec::new();
            if !c.is_one() || m.is_one() {
                factors.push(Expr::Num(c.clone()));
            }
            for (g, e) in &m.0 {
                let base = gen_expr(g);
                factors.push(if *e == 1 { base } else { Expr::Pow(Box::new(base), q(*e as i64)) });
            }
            if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                Expr::Mul(factors)
            }
        })
        .collect();
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Add(terms)
    }
}

pub struct ExprDisplay<'a> {
    e: &'a Expr,
    vars: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.e, self.vars)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, vars: &[String]) -> fmt::Result {
    let list = |f: &mut fmt::Formatter<'_>, op: &str, xs: &[&Expr]| -> fmt::Result {
        write!(f, "({op}")?;
        for x in xs {
            f.write_str(" ")?;
            write_expr(f, x, vars)?;
        }
        f.write_str(")")
    };
    match e {
        Expr::Num(c) => f.write_str(&fmt_q(c)),
        Expr::Var(i) => match vars.get(*i) {
            Some(name) => f.write_str(name),
            None => write!(f, "x{i}"),
        },
        Expr::Pi => f.write_str("pi"),
        Expr::Add(xs) => list(f, "+", &xs.iter().collect::<Vec<_>>()),
        Expr::Mul(xs) => list(f, "*", &xs.iter().collect::<Vec<_>>()),
        Expr::Neg(a) => list(f, "-", &[a]),
        Expr::Sub(a, b) => list(f, "-", &[a, b]),
        Expr::Div(a, b) => list(f, "/", &[a, b]),
        Expr::Pow(a, c) => {
            f.write_str("(^ ")?;
            write_expr(f, a, vars)?;
            write!(f, " {})", fmt_q(c))
        }
        Expr::Sin(a) => list(f, "sin", &[a]),
        Expr::Cos(a) => list(f, "cos", &[a]),
        Expr::Exp(a) => list(f, "exp", &[a]),
        Expr::Sqrt(a) => list(f, "sqrt", &[a]),
    }
}

/// Parses straight to a [`Func`].
pub fn parse_func(s: &str, vars: &[String]) -> Result<Func, ParseError> {
    Ok(Expr::parse(s, vars)?.to_func())
}

/// Canonical s-expression of a [`Func`].
pub fn func_to_string(f: &Func, vars: &[String]) -> String {
    Expr::from_func(f).display(vars).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    #[test]
    fn parse_print_round_trip_is_stable() {
        let vars = names();
        for s in [
            "(+ (* 1/2 x (^ y 2)) (sin z) -3)",
            "(/ (- (^ x 2) (^ y 2)) (sqrt (+ (^ x 2) (^ y 2))))",
            "(* (exp x) (cos (* 2 y)))",
            "(- z (* 1/2 (- (* x y) (* y x))))",
            "pi",
        ] {
            let f = parse_func(s, &vars).unwrap();
            let printed = func_to_string(&f, &vars);
            let again = parse_func(&printed, &vars).unwrap();
            assert_eq!(func_to_string(&again, &vars), printed, "{s}");
            assert!(again.sub(&f).is_zero() || (again.eval(&[0.3, 0.5, 0.7]) - f.eval(&[0.3, 0.5, 0.7])).abs() < 1e-14);
        }
    }

    #[test]
    fn errors_carry_positions() {
        let vars = names();
        assert!(matches!(Expr::parse("(+ x w)", &vars), Err(ParseError::UnknownSymbol { pos: 5, .. })));
        assert!(matches!(Expr::parse("(sin x y)", &vars), Err(ParseError::Arity { .. })));
        assert!(matches!(Expr::parse("(+ x", &vars), Err(ParseError::Eof)));
        assert!(matches!(Expr::parse("x y", &vars), Err(ParseError::Trailing { pos: 2 })));
        assert!(matches!(Expr::parse("(^ x y)", &vars), Err(ParseError::Exponent { .. })));
    }

    #[test]
    fn evaluation() {
        let vars = names();
        let f = parse_func("(+ (* 1/2 x (^ y 2)) (sin z) -3)", &vars).unwrap();
        let v = f.eval(&[2.0, 3.0, 0.5]);
        assert!((v - (9.0 + 0.5f64.sin() - 3.0)).abs() < 1e-14);
    }
}
