//! Scalar coefficient fields written as small arithmetic expressions.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | variable | func '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! Variables are `x`, `y`, `r` and `theta`; functions are `sqrt`, `exp`,
//! `sin`, `cos`, `abs` (one argument) and `min`, `max` (two arguments).

use crate::scalar::{lit, Scalar};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Coordinate variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    R,
    Theta,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::R => "r",
            Var::Theta => "theta",
        }
    }
}

/// Built-in function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Sin,
    Cos,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Binary operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Point at which a field is evaluated; all four coordinate variables are
/// always available regardless of the chart the sample lives in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coords<T> {
    pub x: T,
    pub y: T,
    pub r: T,
    pub theta: T,
}

impl<T: Scalar> Coords<T> {
    pub fn cartesian(x: T, y: T) -> Self {
        Coords { x, y, r: x.hypot(y), theta: y.atan2(x) }
    }

    pub fn polar(r: T, theta: T) -> Self {
        Coords { x: r * theta.cos(), y: r * theta.sin(), r, theta }
    }

    fn get(&self, v: Var) -> T {
        match v {
            Var::X => self.x,
            Var::Y => self.y,
            Var::R => self.r,
            Var::Theta => self.theta,
        }
    }
}

/// Parse failure.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected one of {expected:?}")]
    Syntax { offset: usize, expected: Vec<String> },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

/// Evaluation failure.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("domain error: square root of a negative number")]
    SqrtNegative,
    #[error("domain error: division by zero")]
    DivisionByZero,
    #[error("domain error: non-finite result of `{0}`")]
    NonFinite(String),
}

/// A parsed coefficient field together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldExpr {
    ast: Expr,
}

impl FieldExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_field(text)
    }

    pub fn constant(v: f64) -> Self {
        if v < 0.0 {
            FieldExpr { ast: Expr::Neg(Box::new(Expr::Num(-v))) }
        } else {
            FieldExpr { ast: Expr::Num(v) }
        }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// True when no coordinate variable occurs.
    pub fn is_constant(&self) -> bool {
        fn walk(e: &Expr) -> bool {
            match e {
                Expr::Num(_) => true,
                Expr::Var(_) => false,
                Expr::Neg(a) => walk(a),
                Expr::Bin(_, a, b) => walk(a) && walk(b),
                Expr::Call(_, args) => args.iter().all(walk),
            }
        }
        walk(&self.ast)
    }

    pub fn eval<T: Scalar>(&self, at: &Coords<T>) -> Result<T, EvalError> {
        eval_node(&self.ast, at)
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

impl FromStr for FieldExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_field(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn finite<T: Scalar>(v: T, what: &str) -> Result<T, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(what.to_string()))
    }
}

fn eval_node<T: Scalar>(e: &Expr, at: &Coords<T>) -> Result<T, EvalError> {
    match e {
        Expr::Num(v) => Ok(lit(*v)),
        Expr::Var(v) => finite(at.get(*v), v.name()),
        Expr::Neg(a) => Ok(-eval_node(a, at)?),
        Expr::Bin(op, a, b) => {
            let l = eval_node(a, at)?;
            let r = eval_node(b, at)?;
            match op {
                BinOp::Add => finite(l + r, "+"),
                BinOp::Sub => finite(l - r, "-"),
                BinOp::Mul => finite(l * r, "*"),
                BinOp::Div => {
                    if r == T::zero() {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(l / r, "/")
                    }
                }
                BinOp::Pow => finite(l.powf(r), "^"),
            }
        }
        Expr::Call(func, args) => {
            let a = eval_node(&args[0], at)?;
            match func {
                Func::Sqrt => {
                    if a < T::zero() {
                        Err(EvalError::SqrtNegative)
                    } else {
                        Ok(a.sqrt())
                    }
                }
                Func::Exp => finite(a.exp(), "exp"),
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Abs => Ok(a.abs()),
                Func::Min => Ok(a.min(eval_node(&args[1], at)?)),
                Func::Max => Ok(a.max(eval_node(&args[1], at)?)),
            }
        }
    }
}

/// Parses a field expression.
pub fn parse_field(text: &str) -> Result<FieldExpr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos >= p.src.len() {
        return Err(p.expected(&["expression"]));
    }
    let ast = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.expected(&["operator", "end of input"]));
    }
    Ok(FieldExpr { ast })
}

/// Evaluates a field at a point.
pub fn eval_field<T: Scalar>(expr: &FieldExpr, at: &Coords<T>) -> Result<T, EvalError> {
    expr.eval(at)
}

const OPERAND: &[&str] = &["number", "identifier", "(", "-"];

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expected(&self, what: &[&str]) -> ParseError {
        ParseError::Syntax { offset: self.pos, expected: what.iter().map(|s| s.to_string()).collect() }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.expected(&[")", "operator"]));
                }
                Ok(e)
            }
            _ => Err(self.expected(OPERAND)),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = i;
                Ok(Expr::Num(v))
            }
            _ => Err(ParseError::Syntax { offset: start, expected: vec!["number".into()] }),
        }
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
            i += 1;
        }
        let name = std::str::from_utf8(&s[start..i]).expect("ascii");
        self.pos = i;
        let var = match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "r" => Some(Var::R),
            "theta" => Some(Var::Theta),
            _ => None,
        };
        if let Some(v) = var {
            return Ok(Expr::Var(v));
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        let func = Func::lookup(name)
            .ok_or_else(|| ParseError::UnknownIdentifier { offset: start, name: name.to_string() })?;
        if !self.eat(b'(') {
            return Err(self.expected(&["("]));
        }
        let mut args = vec![self.sum()?];
        while args.len() < func.arity() {
            if !self.eat(b',') {
                return Err(self.expected(&[","]));
            }
            args.push(self.sum()?);
        }
        if !self.eat(b')') {
            return Err(self.expected(&[")"]));
        }
        Ok(Expr::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> Coords<f64> {
        Coords::cartesian(x, y)
    }

    #[test]
    fn evaluates_examples() {
        let f = parse_field("1/(1+x^2)").unwrap();
        assert_eq!(f.eval(&at(1.0, 0.0)).unwrap(), 0.5);
        let g = parse_field("sqrt(x*x+y*y)").unwrap();
        assert_eq!(g.eval(&at(3.0, 4.0)).unwrap(), 5.0);
        assert_eq!(parse_field("2").unwrap().eval(&at(7.0, -3.0)).unwrap(), 2.0);
        assert_eq!(parse_field("-x").unwrap().eval(&at(-1.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn reports_syntax_offset() {
        let e = parse_field("1+(").unwrap_err();
        assert_eq!(e.offset(), 3);
        assert!(matches!(e, ParseError::Syntax { .. }));
        let e = parse_field("2*foo").unwrap_err();
        assert_eq!(e, ParseError::UnknownIdentifier { offset: 2, name: "foo".into() });
        assert!(parse_field("").is_err());
        assert!(parse_field("1 2").is_err());
    }

    #[test]
    fn domain_errors() {
        let f = parse_field("1/(x-1)").unwrap();
        assert_eq!(f.eval(&at(1.0, 0.0)), Err(EvalError::DivisionByZero));
        let g = parse_field("sqrt(x)").unwrap();
        assert_eq!(g.eval(&at(-1.0, 0.0)), Err(EvalError::SqrtNegative));
        let h = parse_field("(0-1)^0.5").unwrap();
        assert!(matches!(h.eval(&at(0.0, 0.0)), Err(EvalError::NonFinite(_))));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = |s: &str| parse_field(s).unwrap().eval(&at(0.0, 0.0)).unwrap();
        assert_eq!(e("2^3^2"), 512.0);
        assert_eq!(e("-2^2"), -4.0);
        assert_eq!(e("8-3-2"), 3.0);
        assert_eq!(e("8/4/2"), 1.0);
        assert_eq!(e("2*-3"), -6.0);
        assert_eq!(e("2^-1"), 0.5);
        assert_eq!(e("max(1, min(5, 3))"), 3.0);
        assert_eq!(e("1e-3*1000"), 1.0);
    }

    #[test]
    fn polar_variables() {
        let f = parse_field("r*cos(theta) - x").unwrap();
        let p = Coords::polar(2.0f64, 0.7);
        assert!(f.eval(&p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn print_parse_roundtrip() {
        for s in ["1/(1+x^2)", "-(1-r)", "max(0,min(1,(1-abs(x+3))/0.75))*(1-1/(2+y)^2)", "2^-x^2", "1e-7+theta"] {
            let a = parse_field(s).unwrap();
            let b = parse_field(&a.to_string()).unwrap();
            assert_eq!(a, b, "{s}");
            assert_eq!(a.to_string(), b.to_string());
        }
    }

    #[test]
    fn generic_over_f32() {
        let f = parse_field("x*y+1").unwrap();
        let v: f32 = f.eval(&Coords::cartesian(2.0f32, 3.0)).unwrap();
        assert_eq!(v, 7.0);
    }
}
