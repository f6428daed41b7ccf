//! Closed real intervals with outward-rounded arithmetic.
//!
//! Every operation returns an interval that contains the exact real result
//! of applying the operation to any pair of points drawn from the operands,
//! and also contains the result of the same operation evaluated in `f64`
//! round-to-nearest. Endpoints are nudged one ulp outward only when the
//! floating-point result is inexact, detected with error-free transforms.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

// Error of a + b (two-sum); positive when the exact sum exceeds the float.
#[inline]
fn sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_finite() && a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_finite() && a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

// Sign of the exact quotient minus the float one: a - q*b has the sign of
// (a/b - q) * b.
#[inline]
fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = (-q).mul_add(b, a);
    if q.is_finite() && r != 0.0 && (r < 0.0) != (b < 0.0) {
        q.next_down()
    } else {
        q
    }
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = (-q).mul_add(b, a);
    if q.is_finite() && r != 0.0 && (r > 0.0) != (b < 0.0) {
        q.next_up()
    } else {
        q
    }
}

impl Interval {
    /// Panics in debug builds when `lo > hi` or either endpoint is NaN.
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "malformed interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Widens by one ulp on each side.
    #[inline]
    pub fn outward(self) -> Self {
        Interval {
            lo: down(self.lo),
            hi: up(self.hi),
        }
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    #[inline]
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    #[inline]
    pub fn hull_point(&self, x: f64) -> Interval {
        Interval {
            lo: self.lo.min(x),
            hi: self.hi.max(x),
        }
    }

    /// Image of `x -> x.clamp(min, max)`.
    #[inline]
    pub fn clamp(&self, min: f64, max: f64) -> Interval {
        Interval {
            lo: self.lo.clamp(min, max),
            hi: self.hi.clamp(min, max),
        }
    }

    #[inline]
    pub fn widen(&self, by: f64) -> Interval {
        Interval {
            lo: add_down(self.lo, -by),
            hi: add_up(self.hi, by),
        }
    }

    pub fn scale(&self, k: f64) -> Interval {
        let (a, b) = if k >= 0.0 {
            (self.lo, self.hi)
        } else {
            (self.hi, self.lo)
        };
        Interval {
            lo: mul_down(a, k),
            hi: mul_up(b, k),
        }
    }

    pub fn add_scalar(&self, k: f64) -> Interval {
        Interval {
            lo: add_down(self.lo, k),
            hi: add_up(self.hi, k),
        }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            Interval {
                lo: -self.hi,
                hi: -self.lo,
            }
        } else {
            Interval {
                lo: 0.0,
                hi: (-self.lo).max(self.hi),
            }
        }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: mul_down(a.lo, a.lo).max(0.0),
            hi: mul_up(a.hi, a.hi),
        }
    }

    /// `None` when the divisor contains zero.
    pub fn checked_div(&self, other: &Interval) -> Option<Interval> {
        if other.lo <= 0.0 && other.hi >= 0.0 {
            return None;
        }
        let pairs = [
            (self.lo, other.lo),
            (self.lo, other.hi),
            (self.hi, other.lo),
            (self.hi, other.hi),
        ];
        Some(Interval {
            lo: pairs.iter().map(|&(a, b)| div_down(a, b)).fold(f64::INFINITY, f64::min),
            hi: pairs
                .iter()
                .map(|&(a, b)| div_up(a, b))
                .fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Tight enclosure of `sin` over the interval: interior extrema at
    /// `pi/2 + k*pi` are detected and reported exactly as `+-1`.
    pub fn sin(&self) -> Interval {
        trig_range(self.lo, self.hi, f64::sin, FRAC_PI_2)
    }

    /// Tight enclosure of `cos`; extrema sit at multiples of `pi`.
    pub fn cos(&self) -> Interval {
        trig_range(self.lo, self.hi, f64::cos, 0.0)
    }
}

/// Range of a unit-amplitude sinusoid with maxima at `phase + 2k*pi` and
/// minima at `phase + (2k+1)*pi`.
fn trig_range(lo: f64, hi: f64, f: fn(f64) -> f64, phase: f64) -> Interval {
    if hi - lo >= 2.0 * PI {
        return Interval { lo: -1.0, hi: 1.0 };
    }
    let a = f(lo);
    let b = f(hi);
    // libm sin/cos are faithfully rounded, so two ulps cover both the
    // endpoint evaluation error and any non-monotone rounding in between.
    let mut out = Interval {
        lo: down(down(a.min(b))).max(-1.0),
        hi: up(up(a.max(b))).min(1.0),
    };
    // Extremum candidates phase + k*pi with the stationary point inside
    // [lo, hi]. The index range is widened by one and each candidate is
    // tested with a tolerance so that rounding in k*pi never hides one.
    let k_lo = ((lo - phase) / PI).floor() as i64 - 1;
    let k_hi = ((hi - phase) / PI).ceil() as i64 + 1;
    for k in k_lo..=k_hi {
        let x = phase + k as f64 * PI;
        let tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
        if x >= lo - tol && x <= hi + tol {
            if k.rem_euclid(2) == 0 {
                out.hi = 1.0;
            } else {
                out.lo = -1.0;
            }
        }
    }
    out
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, -rhs.hi),
            hi: add_up(self.hi, -rhs.lo),
        }
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
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        Interval {
            lo: pairs.iter().map(|&(a, b)| mul_down(a, b)).fold(f64::INFINITY, f64::min),
            hi: pairs
                .iter()
                .map(|&(a, b)| mul_up(a, b))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
