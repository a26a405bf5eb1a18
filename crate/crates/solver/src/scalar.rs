//! Scalar abstraction shared by the LP and double-description engines.

use std::fmt::{Debug, Display};

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use num_traits::{FromPrimitive, Num, NumAssign};

/// Ordered field used by the combinatorial engines.
///
/// Floating types carry an absolute tolerance for sign tests; the rational type is exact
/// and its tolerance is zero.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + NumAssign + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance below which a value counts as zero.
    fn tolerance() -> Self;

    /// Whether arithmetic is exact (no rounding).
    fn is_exact() -> bool;

    /// Converts from `f64`; exact types convert the binary value exactly.
    fn from_f64_lossy(v: f64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer conversion") / Self::from_i64(den).expect("integer conversion")
    }

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn near_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    /// Rescales a direction to a canonical representative of its ray.
    ///
    /// Rational vectors become primitive integer vectors; floating vectors are scaled to unit
    /// max-norm.
    fn normalize_direction(v: &mut [Self]);
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn tolerance() -> Self {
                $tol
            }

            fn is_exact() -> bool {
                false
            }

            fn from_f64_lossy(v: f64) -> Self {
                v as $t
            }

            fn normalize_direction(v: &mut [Self]) {
                let m = v.iter().fold(0.0 as $t, |m, x| m.max(x.abs()));
                if m > 0.0 {
                    for x in v.iter_mut() {
                        *x /= m;
                        if x.abs() < Self::tolerance() {
                            *x = 0.0;
                        }
                    }
                }
            }
        }
    };
}

float_scalar!(f64, 1e-10);
float_scalar!(f32, 1e-5);

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn from_f64_lossy(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }

    fn normalize_direction(v: &mut [Self]) {
        let mut lcm = BigInt::one();
        for x in v.iter() {
            if !x.is_zero() {
                lcm = lcm.lcm(x.denom());
            }
        }
        let mut gcd = BigInt::zero();
        let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
        for n in &ints {
            gcd = gcd.gcd(n);
        }
        if gcd.is_zero() {
            return;
        }
        for (x, n) in v.iter_mut().zip(ints) {
            *x = BigRational::from_integer(n / &gcd);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_directions_become_primitive() {
        let mut v = vec![
            BigRational::from_ratio(2, 3),
            BigRational::from_ratio(-4, 3),
            BigRational::zero(),
        ];
        BigRational::normalize_direction(&mut v);
        assert_eq!(v, vec![BigRational::from_ratio(1, 1), BigRational::from_ratio(-2, 1), BigRational::zero()]);
    }

    #[test]
    fn float_directions_have_unit_max_norm() {
        let mut v = vec![0.5f64, -2.0, 1e-14];
        f64::normalize_direction(&mut v);
        assert_eq!(v, vec![0.25, -1.0, 0.0]);
    }

    #[test]
    fn sign_tests_respect_tolerance() {
        assert!(1e-11f64.near_zero());
        assert!(1e-9f64.is_pos());
        assert!(BigRational::from_ratio(1, 1_000_000_000).is_pos());
    }
}
