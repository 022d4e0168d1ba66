//! Scalar expression language over chart coordinates.
//!
//! Expressions are immutable trees built from numeric literals, coordinate
//! references, arithmetic, integer powers, and a fixed set of smooth
//! univariate functions. They support exact evaluation at a point and exact
//! symbolic partial differentiation, which is what makes exterior derivatives
//! of symbolic forms reliable at tight tolerances.
//!
//! Domain violations (division by zero, `log` of a non-positive value,
//! `sqrt` of a negative value) are reported as errors rather than silently
//! producing NaN.

mod parser;

pub use parser::{parse, ParseError};

use thiserror::Error;

/// Built-in univariate functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Tan => Ok(x.tan()),
            Func::Exp => Ok(x.exp()),
            Func::Log => {
                if x <= 0.0 {
                    Err(EvalError::LogDomain(x))
                } else {
                    Ok(x.ln())
                }
            }
            Func::Sqrt => {
                if x < 0.0 {
                    Err(EvalError::SqrtDomain(x))
                } else {
                    Ok(x.sqrt())
                }
            }
            Func::Sinh => Ok(x.sinh()),
            Func::Cosh => Ok(x.cosh()),
        }
    }
}

/// Errors raised while evaluating an expression at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("coordinate index {index} out of range for point of dimension {arity}")]
    CoordOutOfRange { index: usize, arity: usize },
}

/// Immutable expression tree over coordinates indexed by position.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    /// Zero-based index into the owning chart's coordinate list.
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power of a subexpression; the exponent is not an expression.
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn number(x: f64) -> Expr {
        Expr::Number(x)
    }

    pub fn coord(i: usize) -> Expr {
        Expr::Coord(i)
    }

    fn is_number(&self, v: f64) -> bool {
        matches!(self, Expr::Number(x) if *x == v)
    }

    /// Evaluate at a point given as one value per coordinate.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Number(x) => Ok(*x),
            Expr::Coord(i) => point.get(*i).copied().ok_or(EvalError::CoordOutOfRange {
                index: *i,
                arity: point.len(),
            }),
            Expr::Neg(a) => Ok(-a.eval(point)?),
            Expr::Add(a, b) => Ok(a.eval(point)? + b.eval(point)?),
            Expr::Sub(a, b) => Ok(a.eval(point)? - b.eval(point)?),
            Expr::Mul(a, b) => Ok(a.eval(point)? * b.eval(point)?),
            Expr::Div(a, b) => {
                let d = b.eval(point)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(a.eval(point)? / d)
            }
            Expr::Pow(a, n) => {
                let base = a.eval(point)?;
                if base == 0.0 && *n < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(base.powi(*n))
            }
            Expr::Call(f, a) => f.apply(a.eval(point)?),
        }
    }

    /// Exact partial derivative with respect to coordinate `coord`.
    ///
    /// The result is a new tree; no finite differences are involved. Trivial
    /// identities (`0 + e`, `1 * e`, ...) are folded to keep nested
    /// derivatives compact, but no general simplification is attempted.
    pub fn differentiate(&self, coord: usize) -> Expr {
        match self {
            Expr::Number(_) => Expr::Number(0.0),
            Expr::Coord(i) => Expr::Number(if *i == coord { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.differentiate(coord)),
            Expr::Add(a, b) => add(a.differentiate(coord), b.differentiate(coord)),
            Expr::Sub(a, b) => sub(a.differentiate(coord), b.differentiate(coord)),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(coord), (**b).clone()),
                mul((**a).clone(), b.differentiate(coord)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.differentiate(coord), (**b).clone()),
                    mul((**a).clone(), b.differentiate(coord)),
                ),
                pow((**b).clone(), 2),
            ),
            Expr::Pow(a, n) => mul(
                mul(Expr::Number(f64::from(*n)), pow((**a).clone(), n - 1)),
                a.differentiate(coord),
            ),
            Expr::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Tan => div(Expr::Number(1.0), pow(call(Func::Cos, inner), 2)),
                    Func::Exp => call(Func::Exp, inner),
                    Func::Log => div(Expr::Number(1.0), inner),
                    Func::Sqrt => div(
                        Expr::Number(1.0),
                        mul(Expr::Number(2.0), call(Func::Sqrt, inner)),
                    ),
                    Func::Sinh => call(Func::Cosh, inner),
                    Func::Cosh => call(Func::Sinh, inner),
                };
                mul(outer, a.differentiate(coord))
            }
        }
    }

    /// Replace each `Coord(i)` with `map[i]`; used by pullbacks.
    pub fn substitute(&self, map: &[Expr]) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Number(x) => Expr::Number(*x),
            Expr::Coord(i) => map
                .get(*i)
                .cloned()
                .ok_or(EvalError::CoordOutOfRange {
                    index: *i,
                    arity: map.len(),
                })?,
            Expr::Neg(a) => neg(a.substitute(map)?),
            Expr::Add(a, b) => add(a.substitute(map)?, b.substitute(map)?),
            Expr::Sub(a, b) => sub(a.substitute(map)?, b.substitute(map)?),
            Expr::Mul(a, b) => mul(a.substitute(map)?, b.substitute(map)?),
            Expr::Div(a, b) => div(a.substitute(map)?, b.substitute(map)?),
            Expr::Pow(a, n) => pow(a.substitute(map)?, *n),
            Expr::Call(f, a) => call(*f, a.substitute(map)?),
        })
    }

    /// Structural zero test; absent simplification this is only used to keep
    /// coefficient tables sparse, never for numeric decisions.
    pub fn is_zero(&self) -> bool {
        self.is_number(0.0)
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    if a.is_number(0.0) {
        return b;
    }
    if b.is_number(0.0) {
        return a;
    }
    Expr::Add(Box::new(a), Box::new(b))
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_number(0.0) {
        return a;
    }
    if a.is_number(0.0) {
        return neg(b);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_number(0.0) || b.is_number(0.0) {
        return Expr::Number(0.0);
    }
    if a.is_number(1.0) {
        return b;
    }
    if b.is_number(1.0) {
        return a;
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    if b.is_number(1.0) {
        return a;
    }
    if a.is_number(0.0) {
        return Expr::Number(0.0);
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Number(x) => Expr::Number(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(crate) fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Number(1.0),
        1 => a,
        _ => Expr::Pow(Box::new(a), n),
    }
}

pub(crate) fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn prec(e: &Expr) -> u8 {
            match e {
                Expr::Add(..) | Expr::Sub(..) => 1,
                Expr::Mul(..) | Expr::Div(..) => 2,
                Expr::Neg(..) => 3,
                Expr::Pow(..) => 4,
                _ => 5,
            }
        }
        fn write_child(
            f: &mut std::fmt::Formatter<'_>,
            child: &Expr,
            min: u8,
        ) -> std::fmt::Result {
            if prec(child) < min {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }
        match self {
            Expr::Number(x) => write!(f, "{x}"),
            Expr::Coord(i) => write!(f, "#{i}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Expr::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 3)
            }
            Expr::Pow(a, n) => {
                write_child(f, a, 5)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
