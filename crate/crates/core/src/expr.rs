//! A small arithmetic language for user-supplied schedules.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `s` (= i/n), `i` and `n`; constants `pi` and `e`.
//! Functions: `log`, `loglog`, `logloglog`, `sqrt`, `exp`, `abs`,
//! and the variadic `min` / `max`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    S,
    I,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Log,
    LogLog,
    LogLogLog,
    Sqrt,
    Exp,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "log" | "ln" => Func::Log,
            "loglog" => Func::LogLog,
            "logloglog" => Func::LogLogLog,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Log => v.ln(),
            Func::LogLog => v.ln().ln(),
            Func::LogLogLog => v.ln().ln().ln(),
            Func::Sqrt => v.sqrt(),
            Func::Exp => v.exp(),
            Func::Abs => v.abs(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::LogLog => "loglog",
            Func::LogLogLog => "logloglog",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!(
                "unexpected {} in {src:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(e)
    }

    /// Evaluates at s = i/n. Domain violations surface as NaN.
    pub fn eval(&self, s: f64, i: f64, n: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::S) => s,
            Expr::Var(Var::I) => i,
            Expr::Var(Var::N) => n,
            Expr::Neg(a) => -a.eval(s, i, n),
            Expr::Add(a, b) => a.eval(s, i, n) + b.eval(s, i, n),
            Expr::Sub(a, b) => a.eval(s, i, n) - b.eval(s, i, n),
            Expr::Mul(a, b) => a.eval(s, i, n) * b.eval(s, i, n),
            Expr::Div(a, b) => a.eval(s, i, n) / b.eval(s, i, n),
            Expr::Pow(a, b) => a.eval(s, i, n).powf(b.eval(s, i, n)),
            Expr::Call(f, a) => f.apply(a.eval(s, i, n)),
            Expr::Min(args) => args
                .iter()
                .map(|a| a.eval(s, i, n))
                .fold(f64::INFINITY, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.min(v) }),
            Expr::Max(args) => args
                .iter()
                .map(|a| a.eval(s, i, n))
                .fold(f64::NEG_INFINITY, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) }),
        }
    }

    /// True if the expression reads `i` or `n`, i.e. is not a function of s alone.
    pub fn depends_on_size(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v != Var::S,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_size() || b.depends_on_size()
            }
            Expr::Min(v) | Expr::Max(v) => v.iter().any(Expr::depends_on_size),
        }
    }

    /// True if the expression reads no variable at all.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Min(v) | Expr::Max(v) => v.iter().all(Expr::is_constant),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::S) => f.write_str("s"),
            Expr::Var(Var::I) => f.write_str("i"),
            Expr::Var(Var::N) => f.write_str("n"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Min(v) | Expr::Max(v) => {
                f.write_str(if matches!(self, Expr::Min(_)) { "min(" } else { "max(" })?;
                for (k, a) in v.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "name {s:?}"),
            Token::Op(c) => write!(f, "operator '{c}'"),
            Token::LParen => f.write_str("'('"),
            Token::RParen => f.write_str("')'"),
            Token::Comma => f.write_str("','"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        match c {
            c if c.is_whitespace() => k += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Token::Op(c));
                k += 1;
            }
            '·' | '×' => {
                out.push(Token::Op('*'));
                k += 1;
            }
            '−' => {
                out.push(Token::Op('-'));
                k += 1;
            }
            '(' => {
                out.push(Token::LParen);
                k += 1;
            }
            ')' => {
                out.push(Token::RParen);
                k += 1;
            }
            ',' => {
                out.push(Token::Comma);
                k += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                    k += 1;
                }
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
                let text: String = chars[start..k].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {text:?}")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                    k += 1;
                }
                out.push(Token::Ident(chars[start..k].iter().collect()));
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(Error::Parse(format!("expected {want}, found {t}"))),
            None => Err(Error::Parse(format!("expected {want}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                if let Some(Token::LParen) = self.peek() {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while let Some(Token::Comma) = self.peek() {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Token::RParen)?;
                    return match name.as_str() {
                        "min" => Ok(Expr::Min(args)),
                        "max" => Ok(Expr::Max(args)),
                        _ => {
                            let f = Func::from_name(&name)
                                .ok_or_else(|| Error::Parse(format!("unknown function {name:?}")))?;
                            if args.len() != 1 {
                                return Err(Error::Parse(format!(
                                    "{name} takes one argument, got {}",
                                    args.len()
                                )));
                            }
                            Ok(Expr::Call(f, Box::new(args.pop().unwrap())))
                        }
                    };
                }
                match name.as_str() {
                    "s" | "x" => Ok(Expr::Var(Var::S)),
                    "i" => Ok(Expr::Var(Var::I)),
                    "n" => Ok(Expr::Var(Var::N)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    _ => Err(Error::Parse(format!("unknown name {name:?}"))),
                }
            }
            Some(t) => Err(Error::Parse(format!("unexpected {t}"))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }
}
