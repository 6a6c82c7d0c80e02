//! Numeric abstraction shared by the model, the evaluator and the solvers.
//!
//! Everything in this crate is generic over [`Scalar`]. Floating-point
//! instantiations compare with an absolute tolerance; the exact rational
//! instantiation compares exactly.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, used for exact evaluation and exact simplex.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance for feasibility and objective comparisons.
    fn tolerance() -> Self;

    /// Smallest magnitude accepted as a simplex pivot.
    fn pivot_tolerance() -> Self;

    /// Parses a plain decimal literal such as `"0.4"`, `"-3"`, `"1.5e-2"`.
    fn parse_decimal(text: &str) -> Option<Self>;

    fn from_usize_lossless(value: usize) -> Self {
        Self::from_usize(value).expect("integer fits the scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn pivot_tolerance() -> Self {
        1e-11
    }

    fn parse_decimal(text: &str) -> Option<Self> {
        let value: f64 = text.trim().parse().ok()?;
        value.is_finite().then_some(value)
    }
}

impl Scalar for f32 {
    // 1e-9 is below f32 resolution for the magnitudes we handle.
    fn tolerance() -> Self {
        1e-5
    }

    fn pivot_tolerance() -> Self {
        1e-7
    }

    fn parse_decimal(text: &str) -> Option<Self> {
        let value: f32 = text.trim().parse().ok()?;
        value.is_finite().then_some(value)
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn pivot_tolerance() -> Self {
        BigRational::zero()
    }

    fn parse_decimal(text: &str) -> Option<Self> {
        parse_decimal_rational(text)
    }

    fn to_f64_lossy(&self) -> f64 {
        // Ratio::to_f64 handles big numerators/denominators without overflow.
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn parse_decimal_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let den = parse_decimal_rational(den)?;
        return (!den.is_zero()).then(|| parse_decimal_rational(num).map(|n| n / den))?;
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - i32::try_from(frac_part.len()).ok()?;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// `a >= b` up to the scalar's tolerance.
pub fn ge_tol<S: Scalar>(a: &S, b: &S) -> bool {
    a.clone() >= b.clone() - S::tolerance()
}

/// `a <= b` up to the scalar's tolerance.
pub fn le_tol<S: Scalar>(a: &S, b: &S) -> bool {
    a.clone() <= b.clone() + S::tolerance()
}

/// `|a - b| <= tolerance`.
pub fn approx_eq<S: Scalar>(a: &S, b: &S) -> bool {
    (a.clone() - b.clone()).abs() <= S::tolerance()
}

/// `a < b` by more than the tolerance.
pub fn lt_strict<S: Scalar>(a: &S, b: &S) -> bool {
    a.clone() < b.clone() - S::tolerance()
}

pub(crate) fn min_of<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub(crate) fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}
