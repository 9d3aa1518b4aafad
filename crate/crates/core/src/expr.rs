//! Arithmetic expressions in one variable `u`.
//!
//! A hand-rolled recursive-descent parser over the grammar
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := unary ("^" factor)?          (^ right-associative, binds tighter than unary minus)
//! unary  := "-" unary | atom
//! atom   := number | "u" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
//! func   := sin | cos | tan | exp | log | sqrt
//! ```
//!
//! plus evaluation and exact symbolic differentiation. There is deliberately no
//! simplifier beyond constant folding in the smart constructors; the grammar is
//! small enough to audit by hand.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("log of non-positive value {arg} at u = {u}")]
    LogDomain { arg: f64, u: f64 },
    #[error("sqrt of negative value {arg} at u = {u}")]
    SqrtDomain { arg: f64, u: f64 },
    #[error("division by zero at u = {u}")]
    DivByZero { u: f64 },
    #[error("non-finite result at u = {u}")]
    NonFinite { u: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree over the single variable `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Pi,
    E,
    Var,
    Unary(UnaryFn, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let mut p = Parser::new(text);
        p.skip_ws();
        if p.rest().is_empty() {
            return Err(ParseError::Empty);
        }
        let e = p.expr()?;
        p.skip_ws();
        if !p.rest().is_empty() {
            return Err(ParseError::Syntax {
                offset: p.pos,
                message: format!("unexpected trailing input `{}`", p.rest()),
            });
        }
        Ok(e)
    }

    pub fn eval(&self, u: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Var => u,
            Expr::Unary(f, a) => {
                let x = a.eval(u)?;
                match f {
                    UnaryFn::Sin => x.sin(),
                    UnaryFn::Cos => x.cos(),
                    UnaryFn::Tan => x.tan(),
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::LogDomain { arg: x, u });
                        }
                        x.ln()
                    }
                    UnaryFn::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::SqrtDomain { arg: x, u });
                        }
                        x.sqrt()
                    }
                    UnaryFn::Neg => -x,
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval(u)?;
                let y = b.eval(u)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivByZero { u });
                        }
                        x / y
                    }
                    BinOp::Pow => x.powf(y),
                }
            }
        };
        if !v.is_finite() {
            return Err(EvalError::NonFinite { u });
        }
        Ok(v)
    }

    /// Exact symbolic derivative with respect to `u`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::E => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Unary(f, a) => {
                let da = a.derivative();
                let inner = |e: Expr| mul(e, da.clone());
                match f {
                    UnaryFn::Neg => neg(da),
                    UnaryFn::Sin => inner(Expr::Unary(UnaryFn::Cos, a.clone())),
                    UnaryFn::Cos => neg(inner(Expr::Unary(UnaryFn::Sin, a.clone()))),
                    UnaryFn::Tan => {
                        // 1/cos^2
                        let c = Expr::Unary(UnaryFn::Cos, a.clone());
                        div(da, mul(c.clone(), c))
                    }
                    UnaryFn::Exp => inner(Expr::Unary(UnaryFn::Exp, a.clone())),
                    UnaryFn::Log => div(da, (**a).clone()),
                    UnaryFn::Sqrt => div(
                        da,
                        mul(Expr::Const(2.0), Expr::Unary(UnaryFn::Sqrt, a.clone())),
                    ),
                }
            }
            Expr::Binary(op, a, b) => {
                let da = a.derivative();
                let db = b.derivative();
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    BinOp::Div => div(
                        sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                        mul((**b).clone(), (**b).clone()),
                    ),
                    BinOp::Pow => {
                        if b.is_constant() {
                            // power rule: b * a^(b-1) * a'
                            let bm1 = sub((**b).clone(), Expr::Const(1.0));
                            mul(
                                mul((**b).clone(), pow((**a).clone(), bm1)),
                                da,
                            )
                        } else {
                            // a^b * (b' log a + b a'/a)
                            mul(
                                pow((**a).clone(), (**b).clone()),
                                add(
                                    mul(db, Expr::Unary(UnaryFn::Log, a.clone())),
                                    div(mul((**b).clone(), da), (**a).clone()),
                                ),
                            )
                        }
                    }
                }
            }
        }
    }

    /// True when the expression does not reference `u`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::E => true,
            Expr::Var => false,
            Expr::Unary(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Unary(UnaryFn::Neg, _) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

// Smart constructors with constant folding. Folding keeps derivative trees
// small; it never changes the value.

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), _) if *x == 0.0 => b,
        (_, Expr::Const(y)) if *y == 0.0 => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Const(y)) if *y == 0.0 => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 0.0 => Expr::Const(0.0),
        (Expr::Const(x), _) if *x == 1.0 => b,
        (_, Expr::Const(y)) if *y == 1.0 => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        _ => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 1.0 => a,
        _ => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match &b {
        Expr::Const(y) if *y == 1.0 => a,
        Expr::Const(y) if *y == 0.0 => Expr::Const(1.0),
        _ => Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match &a {
        Expr::Const(x) => Expr::Const(-x),
        _ => Expr::Unary(UnaryFn::Neg, Box::new(a)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Pi => write!(f, "pi"),
            Expr::E => write!(f, "e"),
            Expr::Var => write!(f, "u"),
            Expr::Unary(UnaryFn::Neg, a) => {
                write!(f, "-")?;
                paren(f, a, 3)
            }
            Expr::Unary(func, a) => {
                let name = match func {
                    UnaryFn::Sin => "sin",
                    UnaryFn::Cos => "cos",
                    UnaryFn::Tan => "tan",
                    UnaryFn::Exp => "exp",
                    UnaryFn::Log => "log",
                    UnaryFn::Sqrt => "sqrt",
                    UnaryFn::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Expr::Binary(op, a, b) => match op {
                BinOp::Add => {
                    paren(f, a, 1)?;
                    write!(f, " + ")?;
                    paren(f, b, 2)
                }
                BinOp::Sub => {
                    paren(f, a, 1)?;
                    write!(f, " - ")?;
                    paren(f, b, 2)
                }
                BinOp::Mul => {
                    paren(f, a, 2)?;
                    write!(f, "*")?;
                    paren(f, b, 3)
                }
                BinOp::Div => {
                    paren(f, a, 2)?;
                    write!(f, "/")?;
                    paren(f, b, 3)
                }
                BinOp::Pow => {
                    paren(f, a, 5)?;
                    write!(f, "^")?;
                    // right-associative; exponent may carry a unary minus
                    paren(f, b, 3)
                }
            },
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(|c: char| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = Expr::Binary(BinOp::Add, Box::new(e), Box::new(self.term()?));
            } else if self.eat('-') {
                e = Expr::Binary(BinOp::Sub, Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Binary(BinOp::Mul, Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Binary(BinOp::Div, Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    // unary minus binds looser than ^, so -u^2 reads -(u^2)
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Unary(UnaryFn::Neg, Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let mut chars = rest.chars();
        match chars.next() {
            None => Err(ParseError::Syntax {
                offset: start,
                message: "unexpected end of input".into(),
            }),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(ParseError::Syntax {
                        offset: self.pos,
                        message: "expected `)`".into(),
                    });
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let ident: String = rest
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .collect();
                self.pos += ident.len();
                match ident.as_str() {
                    "u" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Pi),
                    "e" => Ok(Expr::E),
                    "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" => {
                        let func = match ident.as_str() {
                            "sin" => UnaryFn::Sin,
                            "cos" => UnaryFn::Cos,
                            "tan" => UnaryFn::Tan,
                            "exp" => UnaryFn::Exp,
                            "log" => UnaryFn::Log,
                            _ => UnaryFn::Sqrt,
                        };
                        if !self.eat('(') {
                            return Err(ParseError::Syntax {
                                offset: self.pos,
                                message: format!("expected `(` after `{ident}`"),
                            });
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(ParseError::Syntax {
                                offset: self.pos,
                                message: "expected `)`".into(),
                            });
                        }
                        Ok(Expr::Unary(func, Box::new(arg)))
                    }
                    _ => Err(ParseError::UnknownIdentifier {
                        offset: start,
                        name: ident,
                    }),
                }
            }
            Some(c) => Err(ParseError::Syntax {
                offset: start,
                message: format!("unexpected character `{c}`"),
            }),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            // exponent only if followed by digits or a signed digit run
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                i = j;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        let text = &self.src[start..i];
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = i;
                Ok(Expr::Const(v))
            }
            Err(_) => Err(ParseError::Syntax {
                offset: start,
                message: format!("invalid number `{text}`"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_constant_zero() {
        assert_eq!(Expr::parse("0").unwrap(), Expr::Const(0.0));
    }

    #[test]
    fn evaluates_two_cos_u_at_zero() {
        let e = Expr::parse("2*cos(u)").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 2.0);
    }

    #[test]
    fn evaluates_polynomial() {
        let e = Expr::parse("u^2 + 1").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 5.0);
    }

    #[test]
    fn whitespace_insensitive() {
        let a = Expr::parse(" u ^ 2+ 1").unwrap();
        let b = Expr::parse("u^2+1").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn power_right_associative() {
        // 2^3^2 = 2^(3^2) = 512
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Expr::parse("-u^2").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), -9.0);
    }

    #[test]
    fn negative_exponent_allowed() {
        let e = Expr::parse("2^-2").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 0.25);
    }

    #[test]
    fn syntax_error_carries_offset() {
        match Expr::parse("1 + @") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_rejected() {
        match Expr::parse("2*v") {
            Err(ParseError::UnknownIdentifier { name, .. }) => assert_eq!(name, "v"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn log_domain_error() {
        let e = Expr::parse("log(u)").unwrap();
        assert!(matches!(e.eval(-1.0), Err(EvalError::LogDomain { .. })));
    }

    #[test]
    fn division_by_zero_reported() {
        let e = Expr::parse("1/u").unwrap();
        assert!(matches!(e.eval(0.0), Err(EvalError::DivByZero { .. })));
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let e = Expr::parse("sin(u)").unwrap();
        let d = e.derivative();
        for u in [0.0, 0.5, 1.3, -2.0] {
            assert!((d.eval(u).unwrap() - u.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_uses_power_rule_for_constant_exponent() {
        // must not introduce log(u), which would fail at u <= 0
        let e = Expr::parse("u^3").unwrap();
        let d = e.derivative();
        assert!((d.eval(-2.0).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn print_parse_round_trip_is_identity() {
        for src in [
            "0",
            "2*cos(u)",
            "u^2 + 1",
            "-u^2",
            "1 - u - 2",
            "u/(1 + u^2)",
            "sqrt(1 + sin(u)^2)",
            "2^-2",
            "pi*e*u",
            "1/2/u",
        ] {
            let a = Expr::parse(src).unwrap();
            let b = Expr::parse(&a.to_string()).unwrap();
            assert_eq!(a, b, "round trip failed for `{src}` printed as `{a}`");
        }
    }
}
