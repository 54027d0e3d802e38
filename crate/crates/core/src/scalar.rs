//! Scalar abstraction shared by the quantale, the evaluator and the moduli.
//!
//! Three carriers are supported: `f64`, `f32` and [`BigRational`]. The exact
//! carrier keeps `+ - * /` and `abs` exact; `sin`/`cos` go through `f64` and
//! the result is rationalized, so every value it produces is still an exact
//! rational that other exact code can compare without rounding.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// A real-number carrier.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic other than `sin`/`cos` is exact.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;

    /// `None` for NaN and infinities.
    fn from_float(x: f64) -> Option<Self>;

    fn to_float(&self) -> f64;

    /// Exact rational value, `None` for non-finite floats.
    fn to_rational(&self) -> Option<BigRational>;

    fn sin(&self) -> Self;

    fn cos(&self) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn from_float(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_float(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    fn cos(&self) -> Self {
        f64::cos(*self)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn from_float(x: f64) -> Option<Self> {
        let y = x as f32;
        y.is_finite().then_some(y)
    }

    fn to_float(&self) -> f64 {
        f64::from(*self)
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn sin(&self) -> Self {
        f32::sin(*self)
    }

    fn cos(&self) -> Self {
        f32::cos(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_float(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_float(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn sin(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        BigRational::from_float(self.to_float().sin()).unwrap_or_else(Self::zero)
    }

    fn cos(&self) -> Self {
        if self.is_zero() {
            return Self::one();
        }
        BigRational::from_float(self.to_float().cos()).unwrap_or_else(Self::zero)
    }
}

/// Parses a decimal literal (`-12.5`, `3`, `1e-3`, `0.1`) into an exact rational.
///
/// `0.1` becomes exactly 1/10, not the nearest double.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(if all.is_empty() { b"0" } else { all.as_bytes() }, 10)?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}

/// Renders a rational as a short decimal when it has a terminating expansion
/// with few digits, otherwise as the shortest round-tripping `f64` text.
pub fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    // denominators of the form 2^a 5^b terminate
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut digits = 0usize;
    while (&den % &two).is_zero() || (&den % &five).is_zero() {
        if (&den % &two).is_zero() {
            den /= &two;
        } else {
            den /= &five;
        }
        digits += 1;
    }
    if den.is_one() && digits <= 12 {
        let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
        let n = scaled.to_integer();
        let negative = n.is_negative();
        let mut s = n.abs().to_string();
        while s.len() <= digits {
            s.insert(0, '0');
        }
        let point = s.len() - digits;
        let mut out = format!("{}.{}", &s[..point], &s[point..]);
        while out.ends_with('0') {
            out.pop();
        }
        if negative {
            out.insert(0, '-');
        }
        return out;
    }
    let f = r.to_f64().unwrap_or(f64::NAN);
    format!("{f:?}")
}

/// Renders a rational exactly: integers and terminating decimals in full,
/// anything else as `{n/d}`, the term syntax for an exact rational literal.
pub fn render_exact(r: &BigRational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{{{}/{}}}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    let scaled = (r * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits))).to_integer();
    let mut s = scaled.abs().to_string();
    while s.len() <= digits {
        s.insert(0, '0');
    }
    let point = s.len() - digits;
    let sign = if scaled.is_negative() { "-" } else { "" };
    format!("{sign}{}.{}", &s[..point], &s[point..])
}
