//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`,
//! giving about 106 bits. Only what the eigenvalue sums need is provided.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

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

/// π to double-double precision.
pub const PI: DD = DD { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DD { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    /// Exact for `|x| < 2^106`.
    pub fn from_i64(x: i64) -> Self {
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        DD::new(hi, lo)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn div(self, b: DD) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from_f64(q3)
    }

    pub fn div_f64(self, b: f64) -> Self {
        self.div(DD::from_f64(b))
    }

    /// Nearest integer of the value, as an `f64`.
    pub fn round(self) -> f64 {
        let r = self.hi.round();
        if r == self.hi {
            // hi is an integer, lo decides a tie
            let lr = self.lo.round();
            let (s, _) = two_sum(r, lr);
            s
        } else if (r - self.hi).abs() == 0.5 {
            // hi sits exactly on a half; lo breaks the tie
            if self.lo > 0.0 {
                self.hi.ceil()
            } else if self.lo < 0.0 {
                self.hi.floor()
            } else {
                r
            }
        } else {
            r
        }
    }

    /// Value reduced into `[-1, 1]` modulo 2, exact.
    pub fn rem2(self) -> Self {
        let k = (self.mul_f64(0.5)).round();
        self - DD::from_f64(2.0 * k)
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

/// `(sin πx, cos πx)` for `x` in half-turns. Exact zeros at integers and
/// half-integers.
pub fn sincospi(x: DD) -> (DD, DD) {
    let r = x.rem2();
    let k = (r.mul_f64(2.0)).round();
    let f = r - DD::from_f64(k * 0.5);
    let (s, c) = sincos_small(PI * f);
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Taylor series for `|t| ≤ π/4`.
fn sincos_small(t: DD) -> (DD, DD) {
    if t.hi == 0.0 {
        return (DD::ZERO, DD::ONE);
    }
    let t2 = t * t;
    // sin: t - t^3/3! + ..., cos: 1 - t^2/2! + ...; 2k ≤ 30 reaches 1e-33 on |t| ≤ π/4.
    let mut sin = t;
    let mut cos = DD::ONE;
    let mut term_s = t;
    let mut term_c = DD::ONE;
    for k in 1..=15 {
        let a = (2 * k) as f64;
        term_c = -(term_c * t2).div_f64(a * (a - 1.0));
        term_s = -(term_s * t2).div_f64(a * (a + 1.0));
        cos = cos + term_c;
        sin = sin + term_s;
        if term_s.hi.abs() < 1e-34 && term_c.hi.abs() < 1e-34 {
            break;
        }
    }
    (sin, cos)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_recovers_low_bits() {
        let a = DD::from_f64(1.0) + DD::from_f64(1e-20);
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        let third = DD::ONE.div_f64(3.0);
        let back = third.mul_f64(3.0) - DD::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sincospi_special_points() {
        let (s, c) = sincospi(DD::from_f64(0.5));
        assert_eq!(s.to_f64(), 1.0);
        assert_eq!(c.to_f64(), 0.0);
        let (s, c) = sincospi(DD::from_f64(-3.0));
        assert_eq!(s.to_f64(), 0.0);
        assert_eq!(c.to_f64(), -1.0);
    }

    #[test]
    fn sincospi_matches_f64() {
        for i in 0..200 {
            let x = -7.3 + 0.0731 * i as f64;
            let (s, c) = sincospi(DD::from_f64(x));
            let t = std::f64::consts::PI * x;
            assert!((s.to_f64() - t.sin()).abs() < 1e-14);
            assert!((c.to_f64() - t.cos()).abs() < 1e-14);
            let pyth = s * s + c * c - DD::ONE;
            assert!(pyth.to_f64().abs() < 1e-30);
        }
    }
}
