//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`,
//! carrying about 106 bits of significand.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123233995736766e-17,
    };

    pub const fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Renormalises an arbitrary pair.
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (h, l) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi: h, lo: l }
    }

    /// Exact scaling by a power of two.
    pub fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            Dd::from_parts(hi, self.lo.floor())
        } else {
            Dd::new(hi)
        }
    }

    pub fn ceil(self) -> Dd {
        -((-self).floor())
    }

    pub fn round(self) -> Dd {
        (self + Dd::new(0.5)).floor()
    }

    pub fn powi(self, k: i32) -> Dd {
        if k == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut n = k.unsigned_abs();
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr();
            }
        }
        if k < 0 {
            Dd::ONE / acc
        } else {
            acc
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.8 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self - Dd::LN2.mul_f64(k);
        // exp(r) = exp(r / 512)^512 keeps the series short.
        let r = r.ldexp(-9);
        let mut sum = Dd::ZERO;
        let mut term = r;
        let mut n = 1.0;
        while term.hi.abs() > 1e-36 {
            sum = sum + term;
            n += 1.0;
            term = term * r / Dd::new(n);
        }
        // sum = exp(r) - 1; square through (1 + s)^2 - 1 = s(2 + s).
        for _ in 0..9 {
            sum = sum * (sum + Dd::new(2.0));
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }

    /// Natural logarithm; NaN for non-positive input.
    pub fn ln(self) -> Dd {
        if !(self.hi > 0.0) {
            return Dd::new(f64::NAN);
        }
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..3 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    fn sin_cos_reduced(r: Dd) -> (Dd, Dd) {
        let r2 = r.sqr();
        let mut s = r;
        let mut term = r;
        let mut i = 3.0;
        loop {
            term = -(term * r2 / Dd::new((i - 1.0) * i));
            if term.hi.abs() < 1e-36 {
                break;
            }
            s = s + term;
            i += 2.0;
        }
        let mut c = Dd::ONE;
        let mut term = Dd::ONE;
        let mut i = 2.0;
        loop {
            term = -(term * r2 / Dd::new((i - 1.0) * i));
            if term.hi.abs() < 1e-36 {
                break;
            }
            c = c + term;
            i += 2.0;
        }
        (s, c)
    }

    pub fn sin_cos(self) -> (Dd, Dd) {
        let j = (self / Dd::FRAC_PI_2).round();
        let r = self - Dd::FRAC_PI_2 * j;
        let (s, c) = Dd::sin_cos_reduced(r);
        match (j.hi.rem_euclid(4.0)) as u8 {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (h, l) = quick_two_sum(s1, s2 + t2);
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p1, p2);
        Dd { hi: h, lo: l }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd::new(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l } + Dd::new(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `want` is the (hi, lo) split of the exact result.
    fn close(got: Dd, want: (f64, f64), tol: f64) {
        let err = (got.hi - want.0) + (got.lo - want.1);
        assert!(
            err.abs() <= tol,
            "got {got}, want {:e} + {:e}, err {err:e}",
            want.0,
            want.1
        );
    }

    #[test]
    fn constants_are_normalised() {
        for c in [Dd::LN2, Dd::FRAC_PI_2] {
            assert_eq!(c.hi + c.lo, c.hi);
        }
    }

    #[test]
    fn arithmetic_is_exact_where_it_should_be() {
        let third = Dd::ONE / Dd::new(3.0);
        let back = third * Dd::new(3.0);
        assert!((back - Dd::ONE).hi.abs() < 1e-31);
        let x = Dd::new(0.1) + Dd::new(0.2);
        assert_eq!(x.hi, 0.30000000000000004);
        // 0.1 + 0.2 exceeds its rounding by exactly 2⁻⁵⁵.
        assert_eq!(x.lo, -2f64.powi(-55));
        assert_eq!(Dd::new(1.5).powi(3), Dd::new(3.375));
        assert_eq!(Dd::new(2.0).powi(-2), Dd::new(0.25));
    }

    #[test]
    fn elementary_functions_against_reference() {
        for (x, want) in super::reference::EXP {
            close(Dd::new(*x).exp(), *want, 4e-31 * want.0.abs());
        }
        for (x, want) in super::reference::LN {
            // ln near 1 is only absolutely accurate.
            close(Dd::new(*x).ln(), *want, 4e-31 * want.0.abs().max(1.0));
        }
        for (x, s, c) in super::reference::SIN_COS {
            let (gs, gc) = Dd::new(*x).sin_cos();
            close(gs, *s, 4e-30 * s.0.abs());
            close(gc, *c, 4e-30 * c.0.abs());
        }
    }

    #[test]
    fn ordering_uses_both_limbs() {
        let a = Dd::from_parts(1.0, 1e-20);
        assert!(a > Dd::ONE);
        assert!(-a < -Dd::ONE);
        assert_eq!(Dd::new(2.5).floor(), Dd::new(2.0));
        assert_eq!(Dd::from_parts(3.0, -1e-20).floor(), Dd::new(2.0));
        assert_eq!(Dd::from_parts(3.0, -1e-20).ceil(), Dd::new(3.0));
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod reference;
