//! The operator expression language and its canonical printer.
//!
//! Grammar:
//!
//! ```text
//! expr     := term (("+"|"-") term)*
//! term     := factor ("*" factor)*
//! factor   := "-"? atom ("^" int)?
//! atom     := rational | ident | "(" expr ")"
//! ident    := ("x"|"d") positive-int
//! rational := int ("/" positive-int)?
//! ```
//!
//! `*` is noncommutative and left-associative; `^` binds to the nearest
//! atom. Evaluation lowers multiplication to the Leibniz product, so
//! "d1*x1" is x1 d1 + 1. Atoms evaluate exactly; when a product or inverse
//! genuinely has an infinite tail the evaluator retries with the session
//! window, which is what the window is for.

use num::{BigInt, One, Signed, Zero};

use crate::bound::{Ext, Fin};
use crate::error::{Error, Result};
use crate::psdo::{PsdOp, RingType};
use crate::rational::{rat_to_string, Rat};

/// Session parameters: variable count, truncation window, output mode.
#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub n: usize,
    /// Per-variable x-exactness caps.
    pub xmax: Vec<i64>,
    /// Per-variable d-exactness floors (<= 0).
    pub dfloor: Vec<i64>,
    pub seed: u64,
    pub json: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { n: 1, xmax: vec![6], dfloor: vec![-6], seed: 0, json: false }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.xmax.len() != self.n || self.dfloor.len() != self.n {
            return Err(Error::Config(
                "xmax and dfloor must have one entry per variable".into(),
            ));
        }
        if self.dfloor.iter().any(|&f| f > 0) {
            return Err(Error::Config("d-floors must be <= 0".into()));
        }
        Ok(())
    }

    pub fn xhi(&self) -> Vec<Ext> {
        self.xmax.iter().map(|&v| Fin(v)).collect()
    }

    pub fn floors(&self) -> Vec<Ext> {
        self.dfloor.iter().map(|&v| Fin(v)).collect()
    }

    /// Imposes the session window on an operator.
    pub fn clamp(&self, op: &PsdOp) -> PsdOp {
        op.truncate(&self.xhi(), &self.floors())
    }
}

/// Expression tree over rational literals, variables, derivations, and
/// the arithmetic connectives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Rational(Rat),
    Var(usize),
    Deriv(usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i64),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(char, usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

const EXPONENT_LIMIT: i64 = 64;

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

fn syntax(col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line: 1, col: col + 1, msg: msg.into() }
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        while lx.pos < lx.src.len() {
            let c = lx.src[lx.pos];
            let at = lx.pos;
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    lx.pos += 1;
                }
                b'+' => {
                    out.push((at, Tok::Plus));
                    lx.pos += 1;
                }
                b'-' => {
                    out.push((at, Tok::Minus));
                    lx.pos += 1;
                }
                b'*' => {
                    out.push((at, Tok::Star));
                    lx.pos += 1;
                }
                b'/' => {
                    out.push((at, Tok::Slash));
                    lx.pos += 1;
                }
                b'^' => {
                    out.push((at, Tok::Caret));
                    lx.pos += 1;
                }
                b'(' => {
                    out.push((at, Tok::LParen));
                    lx.pos += 1;
                }
                b')' => {
                    out.push((at, Tok::RParen));
                    lx.pos += 1;
                }
                b'0'..=b'9' => {
                    let start = lx.pos;
                    while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_digit() {
                        lx.pos += 1;
                    }
                    let text = std::str::from_utf8(&lx.src[start..lx.pos]).unwrap();
                    out.push((at, Tok::Int(text.parse().unwrap())));
                }
                b'x' | b'd' => {
                    let kind = c as char;
                    lx.pos += 1;
                    let start = lx.pos;
                    while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_digit() {
                        lx.pos += 1;
                    }
                    if start == lx.pos {
                        return Err(syntax(at, format!("expected an index after '{kind}'")));
                    }
                    let text = std::str::from_utf8(&lx.src[start..lx.pos]).unwrap();
                    let idx: usize = text
                        .parse()
                        .map_err(|_| syntax(at, "variable index out of range"))?;
                    if idx == 0 {
                        return Err(syntax(at, "variable indices start at 1"));
                    }
                    out.push((at, Tok::Ident(kind, idx)));
                }
                other => {
                    return Err(syntax(at, format!("unexpected character '{}'", other as char)));
                }
            }
        }
        Ok(out)
    }
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    n: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t);
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = Ast::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = Ast::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            acc = Ast::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Ast> {
        let negated = matches!(self.peek(), Some(Tok::Minus));
        if negated {
            self.bump();
        }
        let mut node = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let e = self.signed_int()?;
            node = Ast::Pow(Box::new(node), e);
        }
        Ok(if negated { Ast::Neg(Box::new(node)) } else { node })
    }

    fn signed_int(&mut self) -> Result<i64> {
        let col = self.col();
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if neg {
            self.bump();
        }
        match self.bump() {
            Some(Tok::Int(v)) => {
                let v: i64 = v
                    .try_into()
                    .map_err(|_| Error::ExponentOverflow(i64::MAX))?;
                if v > EXPONENT_LIMIT {
                    return Err(Error::ExponentOverflow(if neg { -v } else { v }));
                }
                Ok(if neg { -v } else { v })
            }
            _ => Err(syntax(col, "expected an integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Ast> {
        let col = self.col();
        match self.bump().cloned() {
            Some(Tok::Int(num)) => {
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    let dcol = self.col();
                    match self.bump().cloned() {
                        Some(Tok::Int(den)) => {
                            if den.is_zero() {
                                return Err(syntax(dcol, "zero denominator"));
                            }
                            Ok(Ast::Rational(Rat::new(num, den)))
                        }
                        _ => Err(syntax(dcol, "expected a denominator")),
                    }
                } else {
                    Ok(Ast::Rational(Rat::from(num)))
                }
            }
            Some(Tok::Ident(kind, idx)) => {
                if idx > self.n {
                    return Err(Error::UnknownVariable {
                        name: format!("{kind}{idx}"),
                        n: self.n,
                    });
                }
                Ok(match kind {
                    'x' => Ast::Var(idx),
                    _ => Ast::Deriv(idx),
                })
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(syntax(col, "unbalanced parenthesis")),
                }
            }
            Some(_) | None => Err(syntax(col, "expected a rational, a variable, or '('")),
        }
    }
}

/// Parses an operator expression against the session.
pub fn parse_operator(src: &str, cfg: &SessionConfig) -> Result<Ast> {
    let toks = Lexer::tokens(src)?;
    if toks.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut p = Parser { toks: &toks, pos: 0, n: cfg.n, src_len: src.len() };
    let ast = p.expr()?;
    if p.pos != toks.len() {
        return Err(syntax(toks[p.pos].0, "trailing input"));
    }
    Ok(ast)
}

fn eval_mul(a: &PsdOp, b: &PsdOp, cfg: &SessionConfig) -> Result<PsdOp> {
    match a.mul(b) {
        Err(Error::InfiniteTail) => cfg.clamp(a).mul(&cfg.clamp(b)),
        other => other,
    }
}

fn eval_inverse(a: &PsdOp, cfg: &SessionConfig) -> Result<PsdOp> {
    match a.inverse() {
        Err(Error::InfiniteTail) => cfg.clamp(a).inverse(),
        other => other,
    }
}

/// Evaluates an expression to an operator. Multiplication lowers to the
/// Leibniz product.
pub fn eval_ast(ast: &Ast, cfg: &SessionConfig) -> Result<PsdOp> {
    let n = cfg.n;
    let ring = RingType::P;
    match ast {
        Ast::Rational(c) => Ok(PsdOp::constant(n, ring, vec![], c.clone())),
        Ast::Var(i) => Ok(PsdOp::xvar(n, ring, vec![], *i)),
        Ast::Deriv(i) => Ok(PsdOp::delta(n, ring, vec![], *i)),
        Ast::Neg(a) => Ok(eval_ast(a, cfg)?.neg()),
        Ast::Add(a, b) => eval_ast(a, cfg)?.add(&eval_ast(b, cfg)?),
        Ast::Sub(a, b) => eval_ast(a, cfg)?.sub(&eval_ast(b, cfg)?),
        Ast::Mul(a, b) => eval_mul(&eval_ast(a, cfg)?, &eval_ast(b, cfg)?, cfg),
        Ast::Pow(base, e) => {
            // bare variables exponentiate to monomials directly
            match (base.as_ref(), *e) {
                (Ast::Var(i), e) => {
                    let mut xe = vec![0i64; n];
                    xe[i - 1] = e;
                    Ok(PsdOp::monomial(n, ring, vec![], xe, vec![0; n], Rat::one()))
                }
                (Ast::Deriv(i), e) => {
                    let mut de = vec![0i64; n];
                    de[i - 1] = e;
                    Ok(PsdOp::monomial(n, ring, vec![], vec![0; n], de, Rat::one()))
                }
                (_, e) => {
                    let b = eval_ast(base, cfg)?;
                    let mut acc = PsdOp::one(n, ring, vec![]);
                    for _ in 0..e.unsigned_abs() {
                        acc = eval_mul(&acc, &b, cfg)?;
                    }
                    if e < 0 {
                        acc = eval_inverse(&acc, cfg)?;
                    }
                    Ok(acc)
                }
            }
        }
    }
}

/// Canonical text form: terms sorted by d-exponents descending (d_n most
/// significant), then x-exponents ascending; reduced fractions; the
/// output parses back to the same operator.
pub fn format_operator(op: &PsdOp) -> String {
    if op.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (key, coeff)) in op.terms().iter().enumerate() {
        let negative = coeff.is_negative();
        let mag = coeff.abs();
        if idx == 0 {
            if negative {
                out.push('-');
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mut factors: Vec<String> = Vec::new();
        for (j, &a) in key.aux.iter().enumerate() {
            if a != 0 {
                factors.push(if a == 1 {
                    op.aux()[j].name.clone()
                } else {
                    format!("{}^{}", op.aux()[j].name, a)
                });
            }
        }
        for (i, &e) in key.x.iter().enumerate() {
            if e == 1 {
                factors.push(format!("x{}", i + 1));
            } else if e != 0 {
                factors.push(format!("x{}^{}", i + 1, e));
            }
        }
        for (i, &e) in key.d.iter().enumerate() {
            if e == 1 {
                factors.push(format!("d{}", i + 1));
            } else if e != 0 {
                factors.push(format!("d{}^{}", i + 1, e));
            }
        }
        if factors.is_empty() {
            out.push_str(&rat_to_string(&mag));
        } else {
            if !mag.is_one() {
                out.push_str(&rat_to_string(&mag));
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}
