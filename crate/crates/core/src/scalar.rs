//! Scalar abstractions.
//!
//! Everything numeric in the crate is written against one of two traits:
//!
//! * [`Real`] for the floating-point code paths (complex scattering
//!   coefficients, state vectors, integrators). Implemented for `f32` and `f64`.
//! * [`Field`] for code that only needs exact field arithmetic (the resonant
//!   coefficients and the averaged fidelity/efficiency polynomials). Besides the
//!   float types this admits `num_rational::BigRational`, so those values can
//!   be evaluated exactly.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + NumAssign + FromPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Values outside the type's range saturate or
    /// flush to zero the way an `as` cast does.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::zero)
    }

    /// Lossy conversion back to `f64`, used by exporters.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact-or-floating field scalar.
pub trait Field: Clone + Num + Neg<Output = Self> + PartialOrd + FromPrimitive + Debug {
    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("small integer literal is representable")
    }
}

impl<T> Field for T where T: Clone + Num + Neg<Output = T> + PartialOrd + FromPrimitive + Debug {}

/// Horner evaluation of `Σ coeffs[k]·x^k`, coefficients listed from the
/// constant term upwards.
pub fn horner<T: Field>(coeffs: &[i64], x: &T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x.clone() + T::int(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn horner_matches_direct_evaluation() {
        let v: f64 = horner(&[7, 2, 8, -2, 1], &0.5);
        let direct = 0.5f64.powi(4) - 2.0 * 0.5f64.powi(3) + 8.0 * 0.25 + 2.0 * 0.5 + 7.0;
        assert!((v - direct).abs() < 1e-15);
    }

    #[test]
    fn horner_is_exact_over_rationals() {
        let x = BigRational::new(1.into(), 3.into());
        let v = horner(&[0, 0, 9], &x);
        assert_eq!(v, BigRational::from_integer(1.into()));
    }

    #[test]
    fn lit_flushes_tiny_values_for_f32() {
        assert_eq!(f32::lit(1e-300), 0.0);
        assert_eq!(f64::lit(1e-300), 1e-300);
    }
}
