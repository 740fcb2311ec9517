//! Dynamics expressions: parsing, printing, evaluation, symbolic
//! differentiation and interval enclosures.
//!
//! Variables are 1-based (`x1 … xn`) both in text and in [`Expr::Var`].

mod decompose;
mod diff;
mod interval;
mod parse;
mod system;

use std::fmt;

pub use decompose::{decompose_component, decompose_univariate, UnivariateComponent};
pub use interval::Interval;
pub use parse::parse;
pub use system::SystemModel;

/// Errors raised while parsing or evaluating expressions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("interval division by an interval containing zero: [{lo}, {hi}]")]
    IntervalDivisionByZero { lo: f64, hi: f64 },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported structure for univariate decomposition in component {component}: {term}")]
    UnsupportedDecomposition { component: usize, term: String },
    #[error("invalid system model: {0}")]
    InvalidModel(String),
}

/// Expression tree over real variables `x1 … xn`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 1-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(k: usize) -> Expr {
        Expr::Var(k)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    /// Largest variable index referenced, or 0 for constants.
    pub fn max_var(&self) -> usize {
        let mut max = 0;
        self.visit_vars(&mut |k| max = max.max(k));
        max
    }

    /// Sorted, deduplicated list of referenced variable indices.
    pub fn variables(&self) -> Vec<usize> {
        let mut vars = Vec::new();
        self.visit_vars(&mut |k| vars.push(k));
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn depends_on(&self, k: usize) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v == k);
        found
    }

    fn visit_vars(&self, f: &mut impl FnMut(usize)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(k) => f(*k),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                a.visit_vars(f)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Evaluates the expression at `x` (0-based slice, `x[k-1]` is `xk`).
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(k) => *x.get(k - 1).ok_or(ExprError::VariableOutOfRange {
                index: *k,
                dim: x.len(),
            })?,
            Expr::Neg(a) => -a.evaluate(x)?,
            Expr::Add(a, b) => a.evaluate(x)? + b.evaluate(x)?,
            Expr::Sub(a, b) => a.evaluate(x)? - b.evaluate(x)?,
            Expr::Mul(a, b) => a.evaluate(x)? * b.evaluate(x)?,
            Expr::Div(a, b) => {
                let d = b.evaluate(x)?;
                if d == 0.0 {
                    return Err(ExprError::DivisionByZero);
                }
                a.evaluate(x)? / d
            }
            Expr::Pow(a, p) => powi(a.evaluate(x)?, *p),
            Expr::Sin(a) => a.evaluate(x)?.sin(),
            Expr::Cos(a) => a.evaluate(x)?.cos(),
            Expr::Exp(a) => a.evaluate(x)?.exp(),
        })
    }

    /// Symbolic partial derivative with respect to `xk`.
    pub fn differentiate(&self, k: usize) -> Expr {
        diff::differentiate(self, k)
    }

    /// Encloses the range of the expression over an axis-aligned box.
    pub fn interval_evaluate(&self, domain: &[Interval]) -> Result<Interval, ExprError> {
        interval::evaluate(self, domain)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }
}

pub(crate) fn powi(base: f64, p: u32) -> f64 {
    match i32::try_from(p) {
        Ok(p) => base.powi(p),
        Err(_) => base.powf(p as f64),
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v < 0.0 {
        write!(f, "-{}", -v)
    } else {
        write!(f, "{v}")
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write_num(f, *v),
            Expr::Var(k) => write!(f, "x{k}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_wrapped(f, a, a.precedence() < 3)
            }
            Expr::Add(a, b) => {
                write!(f, "{a}+")?;
                write_wrapped(f, b, b.precedence() < 2)
            }
            Expr::Sub(a, b) => {
                write!(f, "{a}-")?;
                write_wrapped(f, b, b.precedence() < 2)
            }
            Expr::Mul(a, b) => {
                write_wrapped(f, a, a.precedence() < 2)?;
                write!(f, "*")?;
                write_wrapped(f, b, b.precedence() < 3)
            }
            Expr::Div(a, b) => {
                write_wrapped(f, a, a.precedence() < 2)?;
                write!(f, "/")?;
                write_wrapped(f, b, b.precedence() < 3)
            }
            Expr::Pow(a, p) => {
                write_wrapped(f, a, a.precedence() < 5)?;
                write!(f, "^{p}")
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
