//! Scalar abstraction for fitness values.
//!
//! Landscapes, beliefs and the search routines are generic over the floating
//! point type used for contribution tables. `f64` is the default everywhere;
//! `f32` halves table memory for large `k`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Fitness:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + FromStr
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Largest representable value strictly below one.
    const BELOW_ONE: Self;

    /// A uniform draw on `[0, 1)`. Every type consumes one `f64` draw, so a
    /// seed describes the same landscape at any precision.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts a probability or weight given in `f64`.
    fn from_weight(w: f64) -> Self {
        Self::from_f64(w).expect("finite weight")
    }

    fn to_f64_lossless(self) -> f64 {
        self.to_f64().expect("finite fitness")
    }

    /// Pins rounding overshoot back into `[0, 1)`.
    fn clamp_unit(self) -> Self {
        if self >= Self::one() {
            Self::BELOW_ONE
        } else if self < Self::zero() {
            Self::zero()
        } else {
            self
        }
    }
}

impl Fitness for f64 {
    const BELOW_ONE: Self = 1.0 - f64::EPSILON / 2.0;

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f64>()
    }
}

impl Fitness for f32 {
    const BELOW_ONE: Self = 1.0 - f32::EPSILON / 2.0;

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        // Rounding to nearest can land on 1.0.
        (rng.gen::<f64>() as f32).min(Self::BELOW_ONE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_one_is_the_predecessor_of_one() {
        assert_eq!(f64::BELOW_ONE.next_up(), 1.0);
        assert_eq!(f32::BELOW_ONE.next_up(), 1.0);
    }

    #[test]
    fn clamp_keeps_values_in_unit_interval() {
        assert_eq!(1.0f64.clamp_unit(), f64::BELOW_ONE);
        assert_eq!(0.25f64.clamp_unit(), 0.25);
        assert_eq!((-0.0f32).clamp_unit(), 0.0);
    }
}
