//! Double-double arithmetic: an unevaluated sum of two `f64`s giving roughly
//! 31 significant decimal digits.
//!
//! Fourth-difference stencils divide by `h^4`; in plain `f64` that amplifies
//! evaluation rounding to about `1e-16 / h^4`, which at useful steps sits far
//! above the residual gates for steep radial fields. Evaluating the same
//! stencils in double-double pushes the rounding floor to ~`1e-32 / h^4` and
//! leaves pure truncation error, which the step controls.
//!
//! The algorithms are the classic error-free transformations (two-sum,
//! two-product via FMA) with Taylor/Newton kernels for `exp`, `ln`, and
//! `sqrt`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// ln 2 to double-double precision: the `f64` value plus its residual.
    #[allow(clippy::approx_constant)]
    pub const LN2: Dd = Dd {
        hi: 0.693_147_180_559_945_3,
        lo: 2.319_046_813_846_299_6e-17,
    };

    #[inline]
    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqr(self) -> Self {
        let (p, mut e) = two_prod(self.hi, self.hi);
        e += 2.0 * self.hi * self.lo;
        e += self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    /// Square root by one double-double Newton correction of the `f64` seed.
    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative double-double");
        let approx = self.hi.sqrt();
        let a = Dd::from_f64(approx);
        // a + (x - a^2) / (2a)
        a + (self - a.sqr()) / (a + a)
    }

    /// Integer power by binary exponentiation.
    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { Dd::ONE / self } else { self };
        let mut exp = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            exp >>= 1;
        }
        acc
    }

    /// `exp(x)` by range reduction over ln 2 and a Taylor kernel.
    pub fn exp(self) -> Self {
        if self.hi > 700.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -700.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - Dd::LN2 * Dd::from_f64(k);
        // Taylor sum for |r| <= 0.35; terms shrink below 1e-35 well before 30.
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..30 {
            term = term * r / Dd::from_f64(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        // scale by 2^k exactly
        let scale = Dd::from_f64(2.0f64.powi(k as i32));
        sum * scale
    }

    /// `ln(x)` for `x > 0` via Newton on `exp`.
    pub fn ln(self) -> Self {
        debug_assert!(self.hi > 0.0, "ln of non-positive double-double");
        let mut y = Dd::from_f64(self.hi.ln());
        // y' = y + x * exp(-y) - 1; each step roughly squares the accuracy.
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    /// `x^a` for `x > 0`.
    pub fn powf(self, a: f64) -> Self {
        if a == 0.0 {
            return Dd::ONE;
        }
        // integer exponents avoid the exp/ln round trip entirely
        if a.fract() == 0.0 && a.abs() <= 64.0 {
            return self.powi(a as i32);
        }
        (self.ln() * Dd::from_f64(a)).exp()
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd::from_f64(v)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, mut e) = two_prod(self.hi, rhs.hi);
        e += self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let mut r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::from_f64(q3)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: f64) -> Dd {
        self * Dd::from_f64(rhs)
    }
}
