//! A small arithmetic expression language for user-defined functions.
//!
//! Catalog files describe custom `phi(b2, s)`, `f(u)`, `g(b2)`, `p(u)` and
//! `q(u)` as strings such as `"1 + s^2"` or `"sqrt(1 + u)/2"`. Parsed
//! expressions evaluate on any [`Scalar`], so jets flow through them.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, the constants
//! `pi` and `e`, and the functions `sqrt exp ln sin cos`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Clone, Debug)]
pub struct Expr {
    src: String,
    vars: Vec<String>,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.src == other.src && self.vars == other.vars
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl Expr {
    /// Parses `src`; identifiers must be one of `vars`.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expr(format!(
                "unexpected trailing input in `{src}`"
            )));
        }
        Ok(Self {
            src: src.to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    /// Whether the variable with index `idx` occurs in the expression.
    pub fn uses(&self, idx: usize) -> bool {
        fn walk(n: &Node, idx: usize) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(i) => *i == idx,
                Node::Neg(a) | Node::Call(_, a) => walk(a, idx),
                Node::Add(a, b)
                | Node::Sub(a, b)
                | Node::Mul(a, b)
                | Node::Div(a, b)
                | Node::Pow(a, b) => walk(a, idx) || walk(b, idx),
            }
        }
        walk(&self.root, idx)
    }

    pub fn eval<S: Scalar>(&self, env: &[S]) -> S {
        eval_node(&self.root, env)
    }
}

impl Serialize for Expr {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        s.serialize_str(&self.src)
    }
}

/// Deserialized expressions are re-bound to their variables by the owner
/// through [`Expr::rebind`]; until then every identifier is unknown.
impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let src = String::deserialize(d)?;
        Ok(Self {
            src,
            vars: Vec::new(),
            root: Node::Num(f64::NAN),
        })
    }
}

impl Expr {
    /// Re-parses the source against a variable list.
    pub fn rebind(&mut self, vars: &[&str]) -> Result<()> {
        *self = Self::parse(&self.src, vars)?;
        Ok(())
    }
}

/// Value of a variable-free subtree.
fn constant(n: &Node) -> Option<f64> {
    Some(match n {
        Node::Num(v) => *v,
        Node::Var(_) => return None,
        Node::Neg(a) => -constant(a)?,
        Node::Add(a, b) => constant(a)? + constant(b)?,
        Node::Sub(a, b) => constant(a)? - constant(b)?,
        Node::Mul(a, b) => constant(a)? * constant(b)?,
        Node::Div(a, b) => constant(a)? / constant(b)?,
        Node::Pow(a, b) => constant(a)?.powf(constant(b)?),
        Node::Call(_, a) => {
            constant(a)?;
            eval_node::<f64>(n, &[])
        }
    })
}

fn eval_node<S: Scalar>(n: &Node, env: &[S]) -> S {
    match n {
        Node::Num(v) => S::cst(*v),
        Node::Var(i) => env[*i],
        Node::Neg(a) => -eval_node(a, env),
        Node::Add(a, b) => eval_node(a, env) + eval_node(b, env),
        Node::Sub(a, b) => eval_node(a, env) - eval_node(b, env),
        Node::Mul(a, b) => eval_node(a, env) * eval_node(b, env),
        Node::Div(a, b) => eval_node(a, env) / eval_node(b, env),
        Node::Pow(a, b) => {
            let base = eval_node(a, env);
            match constant(b) {
                Some(p) if p.fract() == 0.0 && p.abs() < 64.0 => base.powi(p as i32),
                Some(p) => base.powf(p),
                None => (eval_node(b, env) * base.ln()).exp(),
            }
        }
        Node::Call(f, a) => {
            let v = eval_node(a, env);
            match f {
                Func::Sqrt => v.sqrt(),
                Func::Exp => v.exp(),
                Func::Ln => v.ln(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part
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
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expr(format!("bad number `{text}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Expr(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expr(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Expr("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek_op() == Some('(') {
                    let f = match name.as_str() {
                        "sqrt" => Func::Sqrt,
                        "exp" => Func::Exp,
                        "ln" => Func::Ln,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => return Err(Error::Expr(format!("unknown function `{name}`"))),
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(Error::Expr(format!("unknown identifier `{name}`"))),
                }
            }
            Tok::Op(c) => Err(Error::Expr(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::Taylor2;

    #[test]
    fn precedence_and_power() {
        let e = Expr::parse("1 + 2*x^2 - -3/x", &["x"]).unwrap();
        assert_eq!(e.eval(&[2.0]), 1.0 + 8.0 + 1.5);
        let e = Expr::parse("2^3^2", &[]).unwrap();
        assert_eq!(e.eval::<f64>(&[]), 512.0);
        let e = Expr::parse("-x^2", &["x"]).unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
    }

    #[test]
    fn functions_and_constants() {
        let e = Expr::parse("sqrt(u)/2 + ln(exp(1)) + cos(pi)", &["u"]).unwrap();
        assert!((e.eval(&[4.0]) - (1.0 + 1.0 - 1.0)).abs() < 1e-15);
        let e = Expr::parse("1.5e-1 * u^(-1/2)", &["u"]).unwrap();
        assert!((e.eval(&[4.0]) - 0.075).abs() < 1e-15);
    }

    #[test]
    fn derivatives_flow_through() {
        let e = Expr::parse("1 + s^2", &["b2", "s"]).unwrap();
        let z = Taylor2::seed(&[0.3, 0.2]);
        let v = e.eval(&z);
        assert_eq!(v.hess(1, 1), 2.0);
        assert!(e.uses(1) && !e.uses(0));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("1 +", &[]).is_err());
        assert!(Expr::parse("foo(1)", &[]).is_err());
        assert!(Expr::parse("y", &["x"]).is_err());
        assert!(Expr::parse("(1", &[]).is_err());
        assert!(Expr::parse("1 $ 2", &[]).is_err());
    }
}
