//! Closed-form arithmetic expressions over `x1..xd`.
//!
//! Grammar (precedence low to high, `^` right-associative):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | xN | func '(' expr ')' | '(' expr ')'
//! func    := abs | sqrt | exp | log
//! ```

use crate::error::{Error, Result};
use crate::model::field::ScalarField;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Exp,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `src`; variables must be in `x1..x{dim}`.
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            dim,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        match self {
            Expr::Num(v) => T::c(*v),
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => {
                let base = a.eval(x);
                match **b {
                    Expr::Num(v) if v.fract() == 0.0 && v.abs() < 64.0 => base.powi(v as i32),
                    _ => base.powf(b.eval(x)),
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Abs => v.abs(),
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                }
            }
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.arity().max(b.arity()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.error(format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Parse {
                pos: start,
                msg: format!("invalid number '{text}'"),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let func = match name {
            "abs" => Some(Func::Abs),
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat(b'(') {
                return Err(self.error(format!("expected '(' after {name}")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if let Some(idx) = name.strip_prefix('x') {
            if let Ok(k) = idx.parse::<usize>() {
                if k >= 1 && k <= self.dim {
                    return Ok(Expr::Var(k - 1));
                }
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("variable {name} outside x1..x{}", self.dim),
                });
            }
        }
        Err(Error::Parse {
            pos: start,
            msg: format!("unknown identifier '{name}'"),
        })
    }
}

/// An expression viewed as a scalar field; derivatives by central differences.
#[derive(Debug, Clone)]
pub struct ExprField {
    expr: Expr,
    dim: usize,
    source: String,
}

impl ExprField {
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        Ok(Self {
            expr: Expr::parse(src, dim)?,
            dim,
            source: src.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl<T: Scalar> ScalarField<T> for ExprField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T]) -> T {
        self.expr.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64]) -> f64 {
        Expr::parse(s, x.len()).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[0.0]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[0.0]), 512.0);
        assert_eq!(ev("-x1^2", &[3.0]), -9.0);
        assert_eq!(ev("(1 + 2) * 3 - 4 / 2", &[0.0]), 7.0);
        assert_eq!(ev("x1^2/2 + x2^4/4", &[2.0, 2.0]), 6.0);
        assert!((ev("exp(log(2.5)) + sqrt(abs(-16))", &[0.0]) - 6.5).abs() < 1e-14);
        assert_eq!(ev("1.5e1 + 2E-1", &[0.0]), 15.2);
    }

    #[test]
    fn reports_positions() {
        match Expr::parse("x1 + * 2", 1) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match Expr::parse("x1 + x3", 2) {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 5);
                assert!(msg.contains("x3"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Expr::parse("sin(x1)", 1),
            Err(Error::Parse { pos: 0, .. })
        ));
        assert!(matches!(Expr::parse("(x1", 1), Err(Error::Parse { .. })));
        assert!(matches!(
            Expr::parse("x1 x1", 1),
            Err(Error::Parse { pos: 3, .. })
        ));
    }

    #[test]
    fn field_derivatives() {
        let f = ExprField::parse("x1^2/2 + x1^4/4", 1).unwrap();
        let g = ScalarField::<f64>::gradient(&f, &[1.3]);
        assert!((g[0] - (1.3 + 1.3f64.powi(3))).abs() < 1e-8);
        let h = ScalarField::<f64>::hessian(&f, &[1.3]);
        assert!((h[(0, 0)] - (1.0 + 3.0 * 1.69)).abs() < 1e-5);
    }
}
