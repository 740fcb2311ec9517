//! Closed real intervals with outward-rounded arithmetic.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use super::{powi, Expr, ExprError};

/// Closed interval `[lo, hi]`; every operation returns an enclosure of the
/// exact image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    fn outward(lo: f64, hi: f64) -> Self {
        Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    pub fn powi(self, p: u32) -> Self {
        match p {
            0 => Interval::point(1.0),
            1 => self,
            _ if p % 2 == 1 => Interval::outward(powi(self.lo, p), powi(self.hi, p)),
            _ => {
                let a = powi(self.lo, p);
                let b = powi(self.hi, p);
                if self.lo >= 0.0 {
                    Interval::outward(a, b)
                } else if self.hi <= 0.0 {
                    Interval::outward(b, a)
                } else {
                    Interval::new(0.0, a.max(b).next_up())
                }
            }
        }
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Self, ExprError> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(ExprError::IntervalDivisionByZero {
                lo: rhs.lo,
                hi: rhs.hi,
            });
        }
        let recip = Interval::outward(1.0 / rhs.hi, 1.0 / rhs.lo);
        Ok(self * recip)
    }

    pub fn sin(self) -> Self {
        if self.width() >= TAU {
            return Interval::new(-1.0, 1.0);
        }
        let mut lo = self.lo.sin().min(self.hi.sin());
        let mut hi = self.lo.sin().max(self.hi.sin());
        if contains_point_of_lattice(self, FRAC_PI_2, TAU) {
            hi = 1.0;
        }
        if contains_point_of_lattice(self, -FRAC_PI_2, TAU) {
            lo = -1.0;
        }
        clamp_unit(Interval::outward(lo, hi))
    }

    pub fn cos(self) -> Self {
        if self.width() >= TAU {
            return Interval::new(-1.0, 1.0);
        }
        let mut lo = self.lo.cos().min(self.hi.cos());
        let mut hi = self.lo.cos().max(self.hi.cos());
        if contains_point_of_lattice(self, 0.0, TAU) {
            hi = 1.0;
        }
        if contains_point_of_lattice(self, PI, TAU) {
            lo = -1.0;
        }
        clamp_unit(Interval::outward(lo, hi))
    }

    pub fn exp(self) -> Self {
        let lo = self.lo.exp().next_down().max(0.0);
        Interval::new(lo, self.hi.exp().next_up())
    }
}

fn clamp_unit(i: Interval) -> Interval {
    Interval::new(i.lo.max(-1.0), i.hi.min(1.0))
}

/// Whether `[lo, hi]` contains a point `offset + k·period` for integer k.
/// Slightly inclusive so that extrema sitting on an endpoint are not missed.
fn contains_point_of_lattice(i: Interval, offset: f64, period: f64) -> bool {
    let slack = 1e-12 * (1.0 + i.lo.abs().max(i.hi.abs()));
    let k = ((i.lo - slack - offset) / period).ceil();
    offset + k * period <= i.hi + slack
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::outward(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::outward(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        // exact points stay exact (constant scaling is the common case)
        if self.lo == self.hi && rhs.lo == rhs.hi {
            let v = self.lo * rhs.lo;
            return Interval::outward(v, v);
        }
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::outward(lo, hi)
    }
}

pub(super) fn evaluate(e: &Expr, domain: &[Interval]) -> Result<Interval, ExprError> {
    Ok(match e {
        Expr::Num(v) => Interval::point(*v),
        Expr::Var(k) => *domain.get(k - 1).ok_or(ExprError::VariableOutOfRange {
            index: *k,
            dim: domain.len(),
        })?,
        Expr::Neg(a) => -evaluate(a, domain)?,
        Expr::Add(a, b) => evaluate(a, domain)? + evaluate(b, domain)?,
        Expr::Sub(a, b) => evaluate(a, domain)? - evaluate(b, domain)?,
        Expr::Mul(a, b) => evaluate(a, domain)? * evaluate(b, domain)?,
        Expr::Div(a, b) => evaluate(a, domain)?.checked_div(evaluate(b, domain)?)?,
        Expr::Pow(a, p) => evaluate(a, domain)?.powi(*p),
        Expr::Sin(a) => evaluate(a, domain)?.sin(),
        Expr::Cos(a) => evaluate(a, domain)?.cos(),
        Expr::Exp(a) => evaluate(a, domain)?.exp(),
    })
}
