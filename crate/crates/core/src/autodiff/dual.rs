//! Forward-mode scalars: a plain `f64`, a first-order dual, and a truncated
//! second-order Taylor scalar in two variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic shared by `f64` and the dual types so that network evaluation
/// can be written once and instantiated per scalar kind.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    /// Primal value.
    fn value(self) -> f64;
    /// Multiply by an `f64` constant.
    fn scale(self, c: f64) -> Self;
    /// Add an `f64` constant.
    fn add_const(self, c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn recip(self) -> Self;
    /// True iff every component (value and derivatives) is finite.
    fn all_finite(self) -> bool;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(self) -> f64 {
        self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn add_const(self, c: f64) -> Self {
        self + c
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn recip(self) -> Self {
        f64::recip(self)
    }
    fn all_finite(self) -> bool {
        self.is_finite()
    }
}

/// First-order dual number `v + eps * d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual1 {
    pub v: f64,
    pub d: f64,
}

impl Dual1 {
    pub fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }

    pub fn var(v: f64) -> Self {
        Self { v, d: 1.0 }
    }

    /// Chain rule through a univariate map with derivative `f1` at `self.v`.
    fn chain(self, f0: f64, f1: f64) -> Self {
        Self {
            v: f0,
            d: f1 * self.d,
        }
    }
}

impl Add for Dual1 {
    type Output = Dual1;
    fn add(self, o: Dual1) -> Dual1 {
        Dual1::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual1 {
    type Output = Dual1;
    fn sub(self, o: Dual1) -> Dual1 {
        Dual1::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual1 {
    type Output = Dual1;
    fn mul(self, o: Dual1) -> Dual1 {
        Dual1::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual1 {
    type Output = Dual1;
    fn div(self, o: Dual1) -> Dual1 {
        self * Scalar::recip(o)
    }
}

impl Neg for Dual1 {
    type Output = Dual1;
    fn neg(self) -> Dual1 {
        Dual1::new(-self.v, -self.d)
    }
}

impl Scalar for Dual1 {
    fn constant(c: f64) -> Self {
        Dual1::new(c, 0.0)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn scale(self, c: f64) -> Self {
        Dual1::new(self.v * c, self.d * c)
    }
    fn add_const(self, c: f64) -> Self {
        Dual1::new(self.v + c, self.d)
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r)
    }
    fn all_finite(self) -> bool {
        self.v.is_finite() && self.d.is_finite()
    }
}

/// Second-order Taylor scalar in two variables `(t, p)`: carries the value,
/// the gradient `(d1, d2)` and the Hessian `(d11, d12, d22)`. Arithmetic
/// implements the exact second-order Leibniz/chain rules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

impl Dual2 {
    pub fn new(v: f64, d1: f64, d2: f64, d11: f64, d12: f64, d22: f64) -> Self {
        Self {
            v,
            d1,
            d2,
            d11,
            d12,
            d22,
        }
    }

    /// Seed for the first variable.
    pub fn var1(v: f64) -> Self {
        Self::new(v, 1.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// Seed for the second variable.
    pub fn var2(v: f64) -> Self {
        Self::new(v, 0.0, 1.0, 0.0, 0.0, 0.0)
    }

    /// Chain rule through a univariate map with derivatives `(f1, f2)` at
    /// `self.v`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f0,
            d1: f1 * self.d1,
            d2: f1 * self.d2,
            d11: f2 * self.d1 * self.d1 + f1 * self.d11,
            d12: f2 * self.d1 * self.d2 + f1 * self.d12,
            d22: f2 * self.d2 * self.d2 + f1 * self.d22,
        }
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2::new(
            self.v + o.v,
            self.d1 + o.d1,
            self.d2 + o.d2,
            self.d11 + o.d11,
            self.d12 + o.d12,
            self.d22 + o.d22,
        )
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        Dual2::new(
            self.v - o.v,
            self.d1 - o.d1,
            self.d2 - o.d2,
            self.d11 - o.d11,
            self.d12 - o.d12,
            self.d22 - o.d22,
        )
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + self.v * o.d2,
            self.d11 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d11,
            self.d12 * o.v + self.d1 * o.d2 + self.d2 * o.d1 + self.v * o.d12,
            self.d22 * o.v + 2.0 * self.d2 * o.d2 + self.v * o.d22,
        )
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    fn div(self, o: Dual2) -> Dual2 {
        self * Scalar::recip(o)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

impl Scalar for Dual2 {
    fn constant(c: f64) -> Self {
        Dual2::new(c, 0.0, 0.0, 0.0, 0.0, 0.0)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn scale(self, c: f64) -> Self {
        Dual2::new(
            self.v * c,
            self.d1 * c,
            self.d2 * c,
            self.d11 * c,
            self.d12 * c,
            self.d22 * c,
        )
    }
    fn add_const(self, c: f64) -> Self {
        let mut out = self;
        out.v += c;
        out
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    fn all_finite(self) -> bool {
        self.v.is_finite()
            && self.d1.is_finite()
            && self.d2.is_finite()
            && self.d11.is_finite()
            && self.d12.is_finite()
            && self.d22.is_finite()
    }
}
