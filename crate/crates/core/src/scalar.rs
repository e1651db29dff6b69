//! Scalar types the confidence arithmetic is generic over.
//!
//! Propagation only needs ring operations, ordering and a way in and out of
//! `f64`, so it runs unchanged over `f32`, `f64` and exact `BigRational`.
//! Measures that need logarithms or roots take `num_traits::Float` instead.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// A confidence value.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Send + Sync + 'static {
    /// Converts a finite `f64`. Exact types read the shortest decimal form,
    /// so `0.6` becomes `3/5` rather than its binary approximation.
    fn from_f64(x: f64) -> Option<Self>;

    fn as_f64(&self) -> f64;

    /// Rounds half away from zero to `places` decimal places.
    fn round_dp(&self, places: u32) -> Self;

    fn clamp_unit(&self) -> Self {
        if *self < Self::zero() {
            Self::zero()
        } else if *self > Self::one() {
            Self::one()
        } else {
            self.clone()
        }
    }

    fn in_unit_interval(&self) -> bool {
        *self >= Self::zero() && *self <= Self::one()
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_f64(x: f64) -> Option<Self> {
                x.is_finite().then_some(x as $t)
            }

            fn as_f64(&self) -> f64 {
                *self as f64
            }

            fn round_dp(&self, places: u32) -> Self {
                let scale = (10.0 as $t).powi(places as i32);
                (*self * scale).round() / scale
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        parse_decimal(&format!("{x:e}"))
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn round_dp(&self, places: u32) -> Self {
        let scale = BigRational::from_integer(BigInt::from(10).pow(places));
        let scaled = self * &scale;
        // Ratio::round rounds half away from zero.
        scaled.round() / scale
    }
}

/// Parses `[-]d[.ddd][e[-]n]` exactly.
fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if shift >= 0 {
        BigRational::from_integer(digits * ten.pow(shift as u32))
    } else {
        BigRational::new(digits, ten.pow(shift.unsigned_abs()))
    };
    if negative {
        value = -value;
    }
    Some(value)
}
