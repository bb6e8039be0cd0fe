//! A small arithmetic expression language for chart definitions.
//!
//! Grammar (whitespace and newlines are insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' unary)?          -- right associative
//! primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Names resolve, in order, to the variables of the evaluation scope (for
//! charts `q1 .. qD`), to named parameters, and to the constant `pi`.
//! Functions: `sin`, `cos`, `atan2(y, x)`, `sqrt`, `exp`, `log` (natural).
//!
//! Evaluation is generic over [`Scalar`], so the same tree is evaluated on
//! plain floats and on forward-mode jets.

use std::fmt;

use crate::scalar::{lit, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {} (at `{}`)",
            self.line, self.column, self.message, self.token
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Atan2,
    Sqrt,
    Exp,
    Log,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "atan2" => Func::Atan2,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Param(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Names visible while parsing.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub vars: Vec<String>,
    pub params: Vec<String>,
}

impl Scope {
    pub fn new<S: AsRef<str>>(vars: &[S], params: &[S]) -> Self {
        Scope {
            vars: vars.iter().map(|s| s.as_ref().to_owned()).collect(),
            params: params.iter().map(|s| s.as_ref().to_owned()).collect(),
        }
    }

    /// `q1 .. qD` plus the given parameter names.
    pub fn coordinates<S: AsRef<str>>(dim: usize, params: &[S]) -> Self {
        let vars: Vec<String> = (1..=dim).map(|i| format!("q{i}")).collect();
        Scope {
            vars,
            params: params.iter().map(|s| s.as_ref().to_owned()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
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
        let start = i;
        let tok = if c.is_ascii_digit() || c == '.' {
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
            let v = text.parse::<f64>().map_err(|_| ParseError {
                line: l0,
                column: c0,
                token: text.clone(),
                message: "malformed number".into(),
            })?;
            Tok::Num(v)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    return Err(ParseError {
                        line: l0,
                        column: c0,
                        token: c.to_string(),
                        message: "unexpected character".into(),
                    })
                }
            }
        };
        let text: String = chars[start..i].iter().collect();
        col += i - start;
        out.push(Token {
            tok,
            text,
            line: l0,
            column: c0,
        });
    }
    out.push(Token {
        tok: Tok::End,
        text: "<end>".into(),
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    scope: &'a Scope,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(t: &Token, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            column: t.column,
            token: t.text.clone(),
            message: msg.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(Self::error(&t, format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
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
        match self.peek().tok {
            Tok::Op('-') => {
                self.next();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Op('^') {
            self.next();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let f = Func::from_name(name)
                        .ok_or_else(|| Self::error(&t, format!("unknown function `{name}`")))?;
                    self.next();
                    let mut args = vec![self.expr()?];
                    while self.peek().tok == Tok::Comma {
                        self.next();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)` closing the argument list")?;
                    if args.len() != f.arity() {
                        return Err(Self::error(
                            &t,
                            format!("`{name}` takes {} argument(s), got {}", f.arity(), args.len()),
                        ));
                    }
                    return Ok(Expr::Call(f, args));
                }
                if let Some(i) = self.scope.vars.iter().position(|v| v == name) {
                    Ok(Expr::Var(i))
                } else if let Some(i) = self.scope.params.iter().position(|v| v == name) {
                    Ok(Expr::Param(i))
                } else if name == "pi" {
                    Ok(Expr::Num(std::f64::consts::PI))
                } else {
                    Err(Self::error(&t, format!("unknown identifier `{name}`")))
                }
            }
            Tok::End => Err(Self::error(&t, "unexpected end of expression")),
            _ => Err(Self::error(&t, "unexpected token")),
        }
    }
}

impl Expr {
    pub fn parse(src: &str, scope: &Scope) -> Result<Expr, ParseError> {
        let toks = lex(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            scope,
        };
        let e = p.expr()?;
        let t = p.peek().clone();
        if t.tok != Tok::End {
            return Err(Parser::error(&t, "unexpected trailing input"));
        }
        Ok(e)
    }

    /// Evaluates with variable values `vars` and parameter values `params`.
    pub fn eval<S: Scalar>(&self, vars: &[S], params: &[f64]) -> S {
        match self {
            Expr::Num(v) => S::constant(lit(*v)),
            Expr::Var(i) => vars[*i].clone(),
            Expr::Param(i) => S::constant(lit(params[*i])),
            Expr::Neg(a) => -a.eval(vars, params),
            Expr::Bin(op, a, b) => {
                let x = a.eval(vars, params);
                match op {
                    BinOp::Add => x + b.eval(vars, params),
                    BinOp::Sub => x - b.eval(vars, params),
                    BinOp::Mul => x * b.eval(vars, params),
                    BinOp::Div => x / b.eval(vars, params),
                    BinOp::Pow => match b.constant_value(params) {
                        Some(p) if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 => {
                            x.powi(p as i32)
                        }
                        Some(p) => x.powf(lit(p)),
                        None => (x.ln() * b.eval(vars, params)).exp(),
                    },
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(vars, params);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => a.sqrt(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Atan2 => a.atan2(&args[1].eval(vars, params)),
                }
            }
        }
    }

    /// Value of a subtree that does not depend on any variable.
    fn constant_value(&self, params: &[f64]) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Param(i) => Some(params[*i]),
            Expr::Neg(a) => a.constant_value(params).map(|v| -v),
            _ => None,
        }
    }

    pub fn uses_var(&self, index: usize) -> bool {
        match self {
            Expr::Var(i) => *i == index,
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::Neg(a) => a.uses_var(index),
            Expr::Bin(_, a, b) => a.uses_var(index) || b.uses_var(index),
            Expr::Call(_, args) => args.iter().any(|a| a.uses_var(index)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    fn scope() -> Scope {
        Scope::coordinates(2, &["eps", "r"])
    }

    #[test]
    fn precedence_and_associativity() {
        let s = scope();
        let e = Expr::parse("1 + 2*3^2^0.5 - -q1/q2", &s).unwrap();
        let v: f64 = e.eval(&[4.0, 2.0], &[0.0, 0.0]);
        let want = 1.0 + 2.0 * 3f64.powf(2f64.powf(0.5)) + 2.0;
        assert!((v - want).abs() < 1e-12);
        let e = Expr::parse("-2^2", &s).unwrap();
        assert_eq!(e.eval::<f64>(&[0.0, 0.0], &[0.0, 0.0]), -4.0);
    }

    #[test]
    fn params_functions_and_pi() {
        let s = scope();
        let e = Expr::parse("r*cos(q2) + eps*atan2(q2, q1) + log(exp(pi))", &s).unwrap();
        let v: f64 = e.eval(&[1.0, 0.5], &[0.1, 2.0]);
        let want = 2.0 * 0.5f64.cos() + 0.1 * 0.5f64.atan2(1.0) + std::f64::consts::PI;
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn unknown_function_reports_name_and_column() {
        let err = Expr::parse("q1*frob(q2)", &scope()).unwrap_err();
        assert_eq!(err.token, "frob");
        assert_eq!(err.line, 1);
        assert_eq!(err.column, 4);
        assert!(err.message.contains("frob"));
    }

    #[test]
    fn multiline_positions() {
        let err = Expr::parse("q1 +\n  q2 * $", &scope()).unwrap_err();
        assert_eq!((err.line, err.column), (2, 8));
        let err = Expr::parse("q1 + (q2", &scope()).unwrap_err();
        assert!(err.message.contains(")"));
        let err = Expr::parse("atan2(q1)", &scope()).unwrap_err();
        assert!(err.message.contains("argument"));
        let err = Expr::parse("q3", &scope()).unwrap_err();
        assert!(err.message.contains("q3"));
    }

    #[test]
    fn evaluates_on_jets() {
        let s = scope();
        let e = Expr::parse("q1^3 * sin(q2)", &s).unwrap();
        let q = Jet::seed(&[2.0, 0.3], 3);
        let j = e.eval(&q, &[0.0, 0.0]);
        assert!((j.d2(0, 1) - 3.0 * 4.0 * 0.3f64.cos()).abs() < 1e-12);
        assert!((j.d3(0, 0, 0) - 6.0 * 0.3f64.sin()).abs() < 1e-12);
    }
}
