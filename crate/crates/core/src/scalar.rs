//! Scalar abstractions.
//!
//! Objective weights are generic over [`Weight`], which is implemented for
//! exact rationals ([`Rational64`]) and for `f64`. Amplitudes and angles are
//! generic over [`Real`], implemented for `f32` and `f64`.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Rational64;
use num_traits::{FloatConst, FromPrimitive, Signed, ToPrimitive};

/// Scalar type for edge weights, linear terms and objective values.
pub trait Weight:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Parses a decimal literal (`3`, `-0.25`, `1e-3`) or a fraction (`3/4`).
    fn parse_weight(text: &str) -> Option<Self>;

    /// Canonical textual form used by the instance writer.
    fn to_text(&self) -> String;

    /// Total order used for histogram keys.
    fn cmp_total(&self, other: &Self) -> Ordering;

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_int(value: i64) -> Self {
        Self::from_i64(value).expect("integer weight must be representable")
    }
}

impl Weight for Rational64 {
    fn parse_weight(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: i64 = num.trim().parse().ok()?;
            let den: i64 = den.trim().parse().ok()?;
            if den == 0 {
                return None;
            }
            return Some(Rational64::new(num, den));
        }
        parse_decimal_rational(text)
    }

    fn to_text(&self) -> String {
        if self.is_integer() {
            return self.numer().to_string();
        }
        // Denominators of the form 2^a 5^b have a finite decimal expansion.
        let mut den = *self.denom();
        let (mut twos, mut fives) = (0u32, 0u32);
        while den % 2 == 0 {
            den /= 2;
            twos += 1;
        }
        while den % 5 == 0 {
            den /= 5;
            fives += 1;
        }
        if den != 1 {
            return format!("{}/{}", self.numer(), self.denom());
        }
        let digits = twos.max(fives);
        let scale = 10i128.pow(digits);
        let scaled = *self.numer() as i128 * scale / *self.denom() as i128;
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.abs();
        let int_part = abs / scale;
        let frac_part = abs % scale;
        let frac = format!("{:0width$}", frac_part, width = digits as usize);
        format!("{sign}{int_part}.{}", frac.trim_end_matches('0'))
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Weight for f64 {
    fn parse_weight(text: &str) -> Option<Self> {
        if let Some((num, den)) = text.trim().split_once('/') {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            return (den != 0.0).then_some(num / den);
        }
        text.trim().parse().ok().filter(|v: &f64| v.is_finite())
    }

    fn to_text(&self) -> String {
        format!("{self}")
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

fn parse_decimal_rational(text: &str) -> Option<Rational64> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut numer: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer.checked_mul(10)?.checked_add((b - b'0') as i64)?;
    }
    let scale = exponent - frac_part.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    let value = if scale >= 0 {
        Rational64::from_integer(numer.checked_mul(pow)?)
    } else {
        Rational64::new(numer, pow)
    };
    Some(if negative { -value } else { value })
}

/// Floating-point type for amplitudes, probabilities and circuit angles.
pub trait Real:
    num_traits::Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 must convert")
    }

    fn f64(self) -> f64 {
        self.to_f64().expect("float must convert")
    }
}

impl Real for f32 {}
impl Real for f64 {}
