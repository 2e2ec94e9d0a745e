//! Double-double arithmetic (about 32 significant digits).
//!
//! Only what the secular solver needs: the four operations and `cot(pi x)`.
//! Near a cotangent pole the secular residual is a difference of two numbers
//! of size `k / delta`; plain `f64` cannot resolve it below one ulp of that size.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

pub const PI: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn half(self) -> Self {
        DoubleDouble {
            hi: 0.5 * self.hi,
            lo: 0.5 * self.lo,
        }
    }

    /// `cot(pi x)` for `0 < x < 1`.
    pub fn cot_pi(self) -> Self {
        debug_assert!(self.hi > 0.0 && self.hi < 1.0);
        if self.hi > 0.5 {
            return -(DoubleDouble::ONE - self).cot_pi();
        }
        if self.hi <= 0.25 {
            let (s, c) = sin_cos(PI * self);
            c / s
        } else {
            let (s, c) = sin_cos(PI * (DoubleDouble::from_f64(0.5) - self));
            s / c
        }
    }

    /// `cot(pi x) - 1/(pi x)`, finite as `x -> 0`.
    pub fn cot_pi_minus_pole(self) -> Self {
        self.cot_pi() - DoubleDouble::ONE / (PI * self)
    }
}

/// Taylor series, valid to full precision for `|x| <= pi / 4`.
fn sin_cos(x: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    let x2 = x * x;
    let mut sin = x;
    let mut cos = DoubleDouble::ONE;
    let mut s_term = x;
    let mut c_term = DoubleDouble::ONE;
    let mut n = 1.0_f64;
    loop {
        s_term = -(s_term * x2) / ((n + 1.0) * (n + 2.0));
        c_term = -(c_term * x2) / (n * (n + 1.0));
        sin = sin + s_term;
        cos = cos + c_term;
        n += 2.0;
        if s_term.hi.abs() <= 1e-34 * sin.hi.abs() && c_term.hi.abs() <= 1e-34 {
            break;
        }
    }
    (sin, cos)
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl From<usize> for DoubleDouble {
    fn from(k: usize) -> Self {
        // exact for k < 2^53
        DoubleDouble::from_f64(k as f64)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        DoubleDouble::renorm(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        DoubleDouble::renorm(p, e + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let (p, e) = two_prod(self.hi, rhs);
        DoubleDouble::renorm(p, e + self.lo * rhs)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + DoubleDouble::from_f64(q3)
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self / DoubleDouble::from_f64(rhs)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}
