//! Binary fixed-point reals on top of `BigInt`, value = raw · 2^{−FRAC_BITS}.
//!
//! The residue sums cancel across dozens of decimal orders, so every
//! intermediate carries 640 fractional bits.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const FRAC_BITS: u64 = 640;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn one() -> Self {
        Fixed(BigInt::one() << FRAC_BITS)
    }

    pub fn from_int(n: i64) -> Self {
        Fixed(BigInt::from(n) << FRAC_BITS)
    }

    /// Exact for every finite double whose exponent exceeds −640.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "fixed-point conversion of a non-finite value");
        if x == 0.0 {
            return Fixed::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let m = BigInt::from(mant) * sign;
        let shift = exp + FRAC_BITS as i64;
        if shift >= 0 {
            Fixed(m << shift as u64)
        } else {
            Fixed(m >> (-shift) as u64)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.0.bits();
        if bits > 900 {
            let shift = bits - 60;
            let top = (&self.0 >> shift).to_f64().unwrap_or(f64::NAN);
            top * 2f64.powi(shift as i32 - FRAC_BITS as i32)
        } else {
            self.0.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(FRAC_BITS as i32))
        }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Fixed(&self.0 * n)
    }

    /// Truncating division by a non-zero integer.
    pub fn div_int(&self, n: i64) -> Self {
        Fixed(&self.0 / n)
    }

    pub fn abs(&self) -> Self {
        Fixed(self.0.abs())
    }

    /// e^x by halving to |x| < 1, a Taylor series, and repeated squaring.
    pub fn exp(&self) -> Self {
        let mut halvings = 0u32;
        let mut r = self.clone();
        let bound = Fixed::one();
        while r.abs() >= bound {
            r = Fixed(r.0 >> 1u32);
            halvings += 1;
        }
        let mut sum = Fixed::one();
        let mut term = Fixed::one();
        for n in 1..400 {
            term = (&term * &r).div_int(n);
            if term.is_zero() {
                break;
            }
            sum += &term;
        }
        for _ in 0..halvings {
            sum = &sum * &sum;
        }
        sum
    }
}

impl Add<&Fixed> for &Fixed {
    type Output = Fixed;
    fn add(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }
}

impl Sub<&Fixed> for &Fixed {
    type Output = Fixed;
    fn sub(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }
}

impl Mul<&Fixed> for &Fixed {
    type Output = Fixed;
    fn mul(self, o: &Fixed) -> Fixed {
        Fixed((&self.0 * &o.0) >> FRAC_BITS)
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl AddAssign<&Fixed> for Fixed {
    fn add_assign(&mut self, o: &Fixed) {
        self.0 += &o.0;
    }
}
