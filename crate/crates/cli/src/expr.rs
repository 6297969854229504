//! Integrand expressions: lexer, precedence parser, evaluator and printer.
//!
//! Precedence from loosest: `+ -`, `* /`, unary `-`, `^` (right associative). Positions
//! in errors are character offsets into the source.

use std::fmt;
use std::sync::Arc;

use hkquad::corpus;
use thiserror::Error;

pub const VARIABLES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    Lex(char),
    #[error("unexpected {0}")]
    Unexpected(String),
    #[error("unexpected end of input")]
    End,
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{name} takes {expected} argument(s), got {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("variable {0} is not bound in this dimension")]
    Unbound(String),
    #[error("condition is not affine")]
    NotAffine,
    #[error("argument must be a constant")]
    NotConstant,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: usize,
}

fn err<T>(kind: ParseErrorKind, pos: usize) -> Result<T, ParseError> {
    Err(ParseError { kind, pos })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sign,
    Pow,
    Min,
    Max,
}

impl Func {
    const ALL: [Func; 10] =
        [Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt, Func::Abs, Func::Sign, Func::Pow, Func::Min, Func::Max];

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
        }
    }
}

/// Named integrands of the first variable with constant parameters.
#[derive(Clone)]
pub enum Builtin {
    DerivOsc { p: f64, q: f64 },
    Dirichlet { n: usize, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
    StepAt { c: f64 },
}

impl PartialEq for Builtin {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Builtin::DerivOsc { p, q }, Builtin::DerivOsc { p: p2, q: q2 }) => p == p2 && q == q2,
            (Builtin::Dirichlet { n, .. }, Builtin::Dirichlet { n: n2, .. }) => n == n2,
            (Builtin::StepAt { c }, Builtin::StepAt { c: c2 }) => c == c2,
            _ => false,
        }
    }
}

impl fmt::Debug for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::DerivOsc { p, q } => write!(f, "DerivOsc({p}, {q})"),
            Builtin::Dirichlet { n, .. } => write!(f, "Dirichlet({n})"),
            Builtin::StepAt { c } => write!(f, "StepAt({c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// `piecewise(lhs op rhs, then, else)`.
    Piecewise { lhs: Box<Expr>, op: CmpOp, rhs: Box<Expr>, then: Box<Expr>, other: Box<Expr> },
    Builtin(Builtin),
}

impl Expr {
    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => v[*i],
            Expr::Neg(a) => -a.eval(v),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(v), b.eval(v));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(v);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Sign => {
                        if a > 0.0 {
                            1.0
                        } else if a < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Pow => pow(a, args[1].eval(v)),
                    Func::Min => a.min(args[1].eval(v)),
                    Func::Max => a.max(args[1].eval(v)),
                }
            }
            Expr::Piecewise { lhs, op, rhs, then, other } => {
                let (l, r) = (lhs.eval(v), rhs.eval(v));
                let hold = match op {
                    CmpOp::Lt => l < r,
                    CmpOp::Le => l <= r,
                    CmpOp::Eq => l == r,
                };
                if hold {
                    then.eval(v)
                } else {
                    other.eval(v)
                }
            }
            Expr::Builtin(b) => match b {
                Builtin::DerivOsc { p, q } => corpus::deriv_osc(*p, *q, v[0]),
                Builtin::Dirichlet { f, .. } => f(v[0]),
                Builtin::StepAt { c } => corpus::step_at(*c, v[0]),
            },
        }
    }

    /// Highest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) => a.arity(),
            Expr::Bin(_, a, b) => a.arity().max(b.arity()),
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Piecewise { lhs, rhs, then, other, .. } => {
                [lhs, rhs, then, other].iter().map(|e| e.arity()).max().unwrap_or(0)
            }
            Expr::Builtin(_) => 1,
        }
    }

    /// Points of the first axis where a builtin is unbounded.
    pub fn singular_hints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Builtin(Builtin::DerivOsc { p, q }) = e {
                if *p <= *q + 1.0 {
                    out.push(0.0);
                }
            }
        });
        out.dedup();
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(a) => a.walk(f),
            Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            Expr::Piecewise { lhs, rhs, then, other, .. } => {
                for e in [lhs, rhs, then, other] {
                    e.walk(f);
                }
            }
            _ => {}
        }
    }

    fn is_constant(&self) -> bool {
        self.arity() == 0 && !matches!(self, Expr::Builtin(_))
    }

    fn is_affine(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => true,
            Expr::Neg(a) => a.is_affine(),
            Expr::Bin(BinOp::Add | BinOp::Sub, a, b) => a.is_affine() && b.is_affine(),
            Expr::Bin(BinOp::Mul, a, b) => {
                (a.is_constant() && b.is_affine()) || (b.is_constant() && a.is_affine())
            }
            Expr::Bin(BinOp::Div, a, b) => a.is_affine() && b.is_constant(),
            e => e.is_constant(),
        }
    }
}

/// Real powers, with odd integer roots of negative numbers left as NaN.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() < 1024.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{c}")
    }
}

/// Fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write_num(f, *c),
            Expr::Var(i) => write!(f, "{}", VARIABLES[*i]),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Piecewise { lhs, op, rhs, then, other } => {
                write!(f, "piecewise({lhs} {} {rhs}, {then}, {other})", op.symbol())
            }
            Expr::Builtin(b) => match b {
                Builtin::DerivOsc { p, q } => {
                    write!(f, "deriv_osc(")?;
                    write_num(f, *p)?;
                    write!(f, ", ")?;
                    write_num(f, *q)?;
                    write!(f, ")")
                }
                Builtin::Dirichlet { n, .. } => write!(f, "dirichlet({n})"),
                Builtin::StepAt { c } => {
                    write!(f, "step_at(")?;
                    write_num(f, *c)?;
                    write!(f, ")")
                }
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Le,
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(c) => write!(f, "number {c}"),
            Tok::Ident(s) => write!(f, "name {s}"),
            Tok::Op(c) => write!(f, "{c:?}"),
            Tok::Le => write!(f, "\"<=\""),
            Tok::LParen => write!(f, "\"(\""),
            Tok::RParen => write!(f, "\")\""),
            Tok::Comma => write!(f, "\",\""),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<f64>() {
                Ok(v) => out.push((Tok::Num(v), start)),
                Err(_) => return err(ParseErrorKind::Unexpected(format!("number {text:?}")), start),
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' | '=' => Tok::Op(c),
            '<' if chars.get(i + 1) == Some(&'=') => {
                i += 1;
                Tok::Le
            }
            '<' => Tok::Op('<'),
            '≤' => Tok::Le,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => return err(ParseErrorKind::Lex(c), start),
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self) -> Result<T, ParseError> {
        match self.peek() {
            Tok::End => err(ParseErrorKind::End, self.pos()),
            t => err(ParseErrorKind::Unexpected(t.to_string()), self.pos()),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            self.unexpected()
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.next();
            // The exponent may carry its own sign: 2^-x.
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<(Expr, usize)>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            self.next();
            return Ok(out);
        }
        loop {
            let p = self.pos();
            out.push((self.sum()?, p));
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::RParen => {
                    self.next();
                    return Ok(out);
                }
                _ => return self.unexpected(),
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.next();
        match tok {
            Tok::Num(c) => Ok(Expr::Num(c)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, pos),
            Tok::End => err(ParseErrorKind::End, pos),
            t => err(ParseErrorKind::Unexpected(t.to_string()), pos),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        if let Some(i) = VARIABLES.iter().position(|v| *v == name) {
            if i >= self.dim {
                return err(ParseErrorKind::Unbound(name), pos);
            }
            return Ok(Expr::Var(i));
        }
        match name.as_str() {
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "e" => return Ok(Expr::Num(std::f64::consts::E)),
            "piecewise" => return self.piecewise(pos),
            _ => {}
        }
        if *self.peek() != Tok::LParen {
            return err(ParseErrorKind::Unbound(name), pos);
        }
        if let Some(f) = Func::ALL.into_iter().find(|f| f.name() == name) {
            let args = self.args()?;
            check_arity(&name, f.arity(), args.len(), pos)?;
            return Ok(Expr::Call(f, args.into_iter().map(|a| a.0).collect()));
        }
        let builtin_arity = match name.as_str() {
            "deriv_osc" => 2,
            "dirichlet" | "step_at" => 1,
            _ => return err(ParseErrorKind::UnknownFunction(name), pos),
        };
        let args = self.args()?;
        check_arity(&name, builtin_arity, args.len(), pos)?;
        let mut vals = Vec::with_capacity(args.len());
        for (a, p) in &args {
            if !a.is_constant() {
                return err(ParseErrorKind::NotConstant, *p);
            }
            vals.push(a.eval(&[]));
        }
        let b = match name.as_str() {
            "deriv_osc" => Builtin::DerivOsc { p: vals[0], q: vals[1] },
            "dirichlet" => {
                let n = vals[0];
                if !(n >= 0.0 && n.fract() == 0.0 && n <= 1e7) {
                    return err(ParseErrorKind::Unexpected(format!("count {n}")), args[0].1);
                }
                let n = n as usize;
                Builtin::Dirichlet { n, f: Arc::new(corpus::dirichlet(n)) }
            }
            _ => Builtin::StepAt { c: vals[0] },
        };
        if self.dim == 0 {
            return err(ParseErrorKind::Unbound("x".into()), pos);
        }
        Ok(Expr::Builtin(b))
    }

    fn piecewise(&mut self, pos: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen)?;
        let cpos = self.pos();
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Op('<') => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Op('=') => CmpOp::Eq,
            _ => return self.unexpected(),
        };
        self.next();
        let rhs = self.sum()?;
        if !lhs.is_affine() || !rhs.is_affine() {
            return err(ParseErrorKind::NotAffine, cpos);
        }
        let mut parts = Vec::with_capacity(2);
        for _ in 0..2 {
            if *self.peek() != Tok::Comma {
                if *self.peek() == Tok::RParen {
                    return err(
                        ParseErrorKind::Arity { name: "piecewise".into(), expected: 3, found: 1 + parts.len() },
                        pos,
                    );
                }
                return self.unexpected();
            }
            self.next();
            parts.push(self.sum()?);
        }
        if *self.peek() == Tok::Comma {
            return err(ParseErrorKind::Arity { name: "piecewise".into(), expected: 3, found: 4 }, pos);
        }
        self.expect(Tok::RParen)?;
        let other = parts.pop().expect("two branches");
        let then = parts.pop().expect("two branches");
        Ok(Expr::Piecewise { lhs: Box::new(lhs), op, rhs: Box::new(rhs), then: Box::new(then), other: Box::new(other) })
    }
}

fn check_arity(name: &str, expected: usize, found: usize, pos: usize) -> Result<(), ParseError> {
    if expected == found {
        Ok(())
    } else {
        err(ParseErrorKind::Arity { name: name.into(), expected, found }, pos)
    }
}

/// Parses `src` with the first `dim` of `x, y, z` bound.
pub fn parse_expression(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0, dim: dim.min(VARIABLES.len()) };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return p.unexpected();
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expression(s, 2).unwrap()
    }

    #[test]
    fn square() {
        let e = p("x^2");
        assert_eq!(e, Expr::Bin(BinOp::Pow, Box::new(Expr::Var(0)), Box::new(Expr::Num(2.0))));
        assert_eq!(e.eval(&[0.5]), 0.25);
    }

    #[test]
    fn precedence() {
        assert_eq!(p("-x^2").eval(&[3.0, 0.0]), -9.0);
        assert_eq!(p("2^3^2").eval(&[0.0, 0.0]), 512.0);
        assert_eq!(p("1 - 2 - 3").eval(&[0.0, 0.0]), -4.0);
        assert_eq!(p("8 / 2 / 2").eval(&[0.0, 0.0]), 2.0);
        assert_eq!(p("2 * -3").eval(&[0.0, 0.0]), -6.0);
        assert_eq!(p("2^-1").eval(&[0.0, 0.0]), 0.5);
        assert_eq!(p("x*y + 1").eval(&[2.0, 3.0]), 7.0);
    }

    #[test]
    fn functions_and_pieces() {
        assert_eq!(p("max(x, 1) + min(2, y)").eval(&[0.0, 5.0]), 3.0);
        assert_eq!(p("sign(-x) * abs(x)").eval(&[2.0, 0.0]), -2.0);
        assert_eq!(p("piecewise(x <= 0.5, 1, 0)").eval(&[0.5, 0.0]), 1.0);
        assert_eq!(p("piecewise(x < 0.5, 1, 0)").eval(&[0.5, 0.0]), 0.0);
        assert_eq!(p("piecewise(2*x ≤ 1 - y, 1, 0)").eval(&[0.25, 0.5]), 1.0);
        assert_eq!(p("piecewise(x = 0.5, 3, 0)").eval(&[0.5, 0.0]), 3.0);
    }

    #[test]
    fn builtins() {
        let d = p("deriv_osc(2,3)");
        assert_eq!(d.eval(&[0.0]), 0.0);
        assert_eq!(d.singular_hints(), vec![0.0]);
        assert_eq!(p("dirichlet(50)").eval(&[0.5]), 1.0);
        assert_eq!(p("step_at(0.5)").eval(&[0.7]), 1.0);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expression("x +", 1).unwrap_err();
        assert_eq!(e.pos, 3);
        assert_eq!(e.kind, ParseErrorKind::End);
        assert_eq!(parse_expression("x $ 1", 1).unwrap_err().pos, 2);
        let y = parse_expression("x + y", 1).unwrap_err();
        assert_eq!((y.kind, y.pos), (ParseErrorKind::Unbound("y".into()), 4));
        let a = parse_expression("sin(x, 1)", 1).unwrap_err();
        assert!(matches!(a.kind, ParseErrorKind::Arity { expected: 1, found: 2, .. }));
        assert_eq!(parse_expression("piecewise(x*x < 1, 0, 1)", 1).unwrap_err().kind, ParseErrorKind::NotAffine);
        assert_eq!(parse_expression("step_at(x)", 1).unwrap_err().kind, ParseErrorKind::NotConstant);
        assert!(matches!(parse_expression("foo(x)", 1).unwrap_err().kind, ParseErrorKind::UnknownFunction(_)));
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "x^2",
            "-x^2 + 3*y",
            "2^-1.5e-3",
            "piecewise(x <= -0.25, sin(x), exp(-x))",
            "deriv_osc(2, -3)",
            "dirichlet(50) + step_at(-0.5)",
            "pow(x, y) / max(1, -0.0)",
        ] {
            let e = p(s);
            assert_eq!(parse_expression(&e.to_string(), 2).unwrap(), e, "{s} -> {e}");
        }
    }
}
