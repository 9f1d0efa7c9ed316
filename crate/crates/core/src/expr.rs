//! Scalar expressions in one variable `t`, evaluated with exact first and
//! second derivatives (second-order jets).
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, `t`, `pi`, `e`
//! and the functions `sin cos tan exp log sqrt sinh cosh tanh abs`.

use std::fmt;

use crate::error::{Error, Result};

/// `(f, f', f'')` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        Jet { v, d: 0.0, dd: 0.0 }
    }

    pub fn variable(t: f64) -> Jet {
        Jet { v: t, d: 1.0, dd: 0.0 }
    }

    /// `g(f)` given `g, g', g''` at `f.v`.
    fn chain(self, g: f64, dg: f64, ddg: f64) -> Jet {
        Jet { v: g, d: dg * self.d, dd: ddg * self.d * self.d + dg * self.dd }
    }

    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd }
    }

    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d: self.d - o.d, dd: self.dd - o.dd }
    }

    fn mul(self, o: Jet) -> Jet {
        Jet { v: self.v * o.v, d: self.d * o.v + self.v * o.d, dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd }
    }

    fn recip(self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    fn powf(self, o: Jet) -> Jet {
        if o.d == 0.0 && o.dd == 0.0 {
            let p = o.v;
            if p == 0.0 {
                return Jet::constant(1.0);
            }
            let x = self.v;
            let pw = |q: f64| if p.fract() == 0.0 && p.abs() < 64.0 { x.powi(q as i32) } else { x.powf(q) };
            // zero coefficients must not meet x^(negative) at x = 0
            let term = |c: f64, q: f64| if c == 0.0 { 0.0 } else { c * pw(q) };
            return self.chain(pw(p), term(p, p - 1.0), term(p * (p - 1.0), p - 2.0));
        }
        // a^b = exp(b log a)
        o.mul(self.ln()).exp()
    }

    fn sin(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    fn cos(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    fn exp(self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    fn parse(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, x: Jet) -> Jet {
        let v = x.v;
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => {
                let t = v.tan();
                let s2 = 1.0 + t * t;
                x.chain(t, s2, 2.0 * t * s2)
            }
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => {
                let s = v.sqrt();
                x.chain(s, 0.5 / s, -0.25 / (s * v))
            }
            Func::Sinh => x.chain(v.sinh(), v.cosh(), v.sinh()),
            Func::Cosh => x.chain(v.cosh(), v.sinh(), v.cosh()),
            Func::Tanh => {
                let t = v.tanh();
                let s2 = 1.0 - t * t;
                x.chain(t, s2, -2.0 * t * s2)
            }
            Func::Abs => {
                let s = if v < 0.0 { -1.0 } else { 1.0 };
                x.chain(v.abs(), s, 0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, t: Jet) -> Jet {
        match self {
            Node::Num(v) => Jet::constant(*v),
            Node::Var => t,
            Node::Neg(a) => {
                let a = a.eval(t);
                Jet { v: -a.v, d: -a.d, dd: -a.dd }
            }
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                match op {
                    '+' => a.add(b),
                    '-' => a.sub(b),
                    '*' => a.mul(b),
                    '/' => a.mul(b.recip()),
                    _ => a.powf(b),
                }
            }
            Node::Call(f, a) => f.apply(a.eval(t)),
        }
    }
}

/// Parsed expression.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Expr { source: src.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.root.eval(Jet::variable(t)).v
    }

    pub fn jet(&self, t: f64) -> Jet {
        self.root.eval(Jet::variable(t))
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> Error {
        Error::Expression { column: self.pos + 1, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    // unary minus binds looser than ^ so -t^2 = -(t^2)
    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
                match name {
                    "t" => Ok(Node::Var),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => {
                        let Some(f) = Func::parse(name) else {
                            self.pos = start;
                            return Err(self.err(&format!("unknown identifier `{name}`")));
                        };
                        if self.peek() != Some(b'(') {
                            return Err(self.err(&format!("expected `(` after `{name}`")));
                        }
                        self.pos += 1;
                        let arg = self.expr()?;
                        if self.peek() != Some(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        self.pos += 1;
                        Ok(Node::Call(f, Box::new(arg)))
                    }
                }
            }
            Some(c) => Err(self.err(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let s = self.s;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            let before = self.pos;
            digits(&mut self.pos);
            if self.pos == before {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map(Node::Num).map_err(|_| {
            self.pos = start;
            self.err(&format!("bad number `{text}`"))
        })
    }
}
