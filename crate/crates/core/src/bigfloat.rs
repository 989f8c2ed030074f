//! Minimal binary floating point with arbitrary mantissa width.
//!
//! Only what the Reed-Frost final-size solver needs: exact conversion from
//! `f64`, the four arithmetic operations with round-to-nearest at a fixed
//! precision, integer powers and conversion back to `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Float, Signed, ToPrimitive, Zero};

/// `mantissa · 2^exponent`, mantissa kept to at most `precision` bits.
#[derive(Debug, Clone)]
pub(crate) struct BigFloat {
    mantissa: BigInt,
    exponent: i64,
    precision: u64,
}

impl BigFloat {
    pub fn zero(precision: u64) -> Self {
        Self { mantissa: BigInt::zero(), exponent: 0, precision }
    }

    pub fn from_u64(v: u64, precision: u64) -> Self {
        Self { mantissa: BigInt::from(v), exponent: 0, precision }.normalized()
    }

    pub fn from_f64(v: f64, precision: u64) -> Self {
        assert!(v.is_finite(), "BigFloat::from_f64 on non-finite value");
        let (m, e, s) = v.integer_decode();
        let mut mantissa = BigInt::from(m);
        if s < 0 {
            mantissa = -mantissa;
        }
        Self { mantissa, exponent: e as i64, precision }.normalized()
    }

    fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Position one past the most significant bit, as a power of two.
    fn top(&self) -> i64 {
        self.exponent + self.mantissa.bits() as i64
    }

    fn normalized(mut self) -> Self {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return self;
        }
        let bits = self.mantissa.bits();
        if bits > self.precision {
            let shift = bits - self.precision;
            self.mantissa = round_shift(&self.mantissa, shift);
            self.exponent += shift as i64;
        }
        self
    }

    pub fn powi(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::from_u64(1, self.precision);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // keep 64 significant bits, then scale
        let bits = self.mantissa.bits();
        let (m, e) = if bits > 64 {
            let s = bits - 64;
            (round_shift(&self.mantissa, s), self.exponent + s as i64)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        ldexp(m.to_f64().expect("64-bit mantissa"), e)
    }
}

fn round_shift(m: &BigInt, shift: u64) -> BigInt {
    if shift == 0 {
        return m.clone();
    }
    let mag = m.abs();
    let half = BigInt::from(1) << (shift - 1);
    let r = (mag + half) >> shift;
    if m.sign() == Sign::Minus {
        -r
    } else {
        r
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(mut self) -> BigFloat {
        self.mantissa = -self.mantissa;
        self
    }
}

impl Add for &BigFloat {
    type Output = BigFloat;
    fn add(self, rhs: &BigFloat) -> BigFloat {
        let precision = self.precision.max(rhs.precision);
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        // an operand lying entirely below the rounding position cannot matter
        let guard = precision as i64 + 4;
        if self.top() - rhs.top() > guard {
            return self.clone();
        }
        if rhs.top() - self.top() > guard {
            return rhs.clone();
        }
        let exponent = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - exponent) as usize;
        let b = &rhs.mantissa << (rhs.exponent - exponent) as usize;
        BigFloat { mantissa: a + b, exponent, precision }.normalized()
    }
}

impl Sub for &BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: &BigFloat) -> BigFloat {
        self + &(-rhs.clone())
    }
}

impl Mul for &BigFloat {
    type Output = BigFloat;
    fn mul(self, rhs: &BigFloat) -> BigFloat {
        BigFloat {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
            precision: self.precision.max(rhs.precision),
        }
        .normalized()
    }
}

impl Div for &BigFloat {
    type Output = BigFloat;
    fn div(self, rhs: &BigFloat) -> BigFloat {
        assert!(!rhs.is_zero(), "BigFloat division by zero");
        let precision = self.precision.max(rhs.precision);
        if self.is_zero() {
            return BigFloat::zero(precision);
        }
        let shift = (precision + 2 + rhs.mantissa.bits()).saturating_sub(self.mantissa.bits());
        let num = &self.mantissa << shift as usize;
        BigFloat { mantissa: num / &rhs.mantissa, exponent: self.exponent - shift as i64 - rhs.exponent, precision }
            .normalized()
    }
}
