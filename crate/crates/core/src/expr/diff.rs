//! Symbolic differentiation. Results are simplified only by constant
//! folding, zero/one elimination and double-negation removal.

use super::{powi, Expr};

pub(super) fn differentiate(e: &Expr, k: usize) -> Expr {
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Var(j) => Expr::Num(if *j == k { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(differentiate(a, k)),
        Expr::Add(a, b) => add(differentiate(a, k), differentiate(b, k)),
        Expr::Sub(a, b) => sub(differentiate(a, k), differentiate(b, k)),
        Expr::Mul(a, b) => add(
            mul(differentiate(a, k), (**b).clone()),
            mul((**a).clone(), differentiate(b, k)),
        ),
        Expr::Div(a, b) => {
            // (a'b - ab') / b^2
            let num = sub(
                mul(differentiate(a, k), (**b).clone()),
                mul((**a).clone(), differentiate(b, k)),
            );
            div(num, pow((**b).clone(), 2))
        }
        Expr::Pow(a, p) => {
            if *p == 0 {
                return Expr::Num(0.0);
            }
            mul(
                mul(Expr::Num(*p as f64), pow((**a).clone(), p - 1)),
                differentiate(a, k),
            )
        }
        Expr::Sin(a) => mul(Expr::Cos(a.clone()), differentiate(a, k)),
        Expr::Cos(a) => mul(neg(Expr::Sin(a.clone())), differentiate(a, k)),
        Expr::Exp(a) => mul(Expr::Exp(a.clone()), differentiate(a, k)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        (a, b) if a.is_zero() => b,
        (a, b) if b.is_zero() => a,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        (a, b) if a.is_zero() || b.is_zero() => Expr::Num(0.0),
        (a, b) if a.is_one() => b,
        (a, b) if b.is_one() => a,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) if y != 0.0 => Expr::Num(x / y),
        (a, _) if a.is_zero() => Expr::Num(0.0),
        (a, b) if b.is_one() => a,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, p: u32) -> Expr {
    match (a, p) {
        (_, 0) => Expr::Num(1.0),
        (a, 1) => a,
        (Expr::Num(v), p) => Expr::Num(powi(v, p)),
        (a, p) => Expr::Pow(Box::new(a), p),
    }
}
