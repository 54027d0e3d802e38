//! Closed real intervals with outward rounding.
//!
//! Every operation returns an enclosure of the exact image: endpoints are
//! nudged one ulp outward after each rounded computation, so the result is
//! valid regardless of the rounding mode of the underlying libm.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use std::f64::consts::{FRAC_PI_2, PI, TAU};

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// `None` when `lo > hi` or either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// `[c - r, c + r]`, widened outward.
    pub fn ball(c: f64, r: f64) -> Self {
        Self { lo: (c - r).next_down(), hi: (c + r).next_up() }
    }

    pub fn entire() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    fn widen(lo: f64, hi: f64) -> Self {
        let lo = if lo.is_nan() { f64::NEG_INFINITY } else { lo.next_down() };
        let hi = if hi.is_nan() { f64::INFINITY } else { hi.next_up() };
        Self { lo, hi }
    }

    pub fn hull(self, other: Self) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Self { lo: 0.0, hi: (-self.lo).max(self.hi) }
        }
    }

    /// `None` when the divisor contains zero.
    pub fn div(self, rhs: Self) -> Option<Self> {
        if rhs.contains_zero() {
            return None;
        }
        let inv = Self::widen(1.0 / rhs.hi, 1.0 / rhs.lo);
        Some(self * inv)
    }

    pub fn sin(self) -> Self {
        // sin x = cos(x - π/2)
        (self - Self::point(FRAC_PI_2)).cos_shifted(FRAC_PI_2)
    }

    pub fn cos(self) -> Self {
        self.cos_shifted(0.0)
    }

    // cos over `self`; `slack` accounts for the rounding in a caller's shift
    fn cos_shifted(self, slack: f64) -> Self {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.width() >= TAU {
            return Self { lo: -1.0, hi: 1.0 };
        }
        let slack = slack * f64::EPSILON * 4.0;
        let (a, b) = (self.lo - slack, self.hi + slack);
        let mut lo = a.cos().min(b.cos());
        let mut hi = a.cos().max(b.cos());
        // extrema of cos sit at multiples of π
        let k0 = (a / PI).ceil() as i64;
        let k1 = (b / PI).floor() as i64;
        for k in k0..=k1 {
            if k.rem_euclid(2) == 0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
        }
        let r = Self::widen(lo, hi);
        Self { lo: r.lo.max(-1.0), hi: r.hi.min(1.0) }
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Self) -> Self {
        Self::widen(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Self) -> Self {
        Self::widen(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Self) -> Self {
        let products = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        // 0 · ∞ shows up as NaN; the true product set is bounded by the rest
        let finite = products.iter().copied().filter(|p| !p.is_nan());
        let lo = finite.clone().fold(f64::INFINITY, f64::min);
        let hi = finite.fold(f64::NEG_INFINITY, f64::max);
        if lo > hi {
            return Self::point(0.0);
        }
        Self::widen(lo, hi)
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
