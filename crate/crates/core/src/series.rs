//! Truncated power series over exact or floating coefficients.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficient ring for series arithmetic: `f32`, `f64` or exact rationals.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coefficient for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coefficient for f32 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Coefficient for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `Σ_{k<len} c_k x^k`, truncated at a fixed length.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<C> {
    pub coeffs: Vec<C>,
}

impl<C: Coefficient> PowerSeries<C> {
    pub fn zero(len: usize) -> Self {
        Self { coeffs: vec![C::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `c · x^k`, truncated to `len`.
    pub fn monomial(c: C, k: usize, len: usize) -> Self {
        let mut s = Self::zero(len);
        if k < len {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        let mut out = Self::zero(len);
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] = out.coeffs[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// `exp(s)` for a series with vanishing constant term, via `E' = s' E`.
    pub fn exp(&self) -> Self {
        assert!(self.coeffs.first().is_none_or(|c| c.is_zero()), "exp needs a zero constant term");
        let len = self.len();
        let mut e = Self::zero(len);
        if len == 0 {
            return e;
        }
        e.coeffs[0] = C::one();
        for k in 1..len {
            let mut acc = C::zero();
            for j in 1..=k {
                let s = &self.coeffs[j];
                if !s.is_zero() {
                    acc = acc + C::ratio(j as i64, 1) * s.clone() * e.coeffs[k - j].clone();
                }
            }
            e.coeffs[k] = acc / C::ratio(k as i64, 1);
        }
        e
    }

    /// Substitutes `x -> x^k`.
    pub fn compose_monomial(&self, k: usize, len: usize) -> Self {
        let mut out = Self::zero(len);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i * k < len {
                out.coeffs[i * k] = c.clone();
            }
        }
        out
    }

    /// `f^{(j)}(0) = j! c_j`.
    pub fn derivative_at_zero(&self, j: usize) -> C {
        let mut f = C::one();
        for i in 2..=j {
            f = f * C::ratio(i as i64, 1);
        }
        self.coeffs[j].clone() * f
    }
}

/// Generalized binomial coefficients `binom(a, j)` for `j < len`, `a = num/den`.
pub fn binomial_series<C: Coefficient>(num: i64, den: i64, len: usize) -> Vec<C> {
    let a = C::ratio(num, den);
    let mut out = Vec::with_capacity(len);
    let mut b = C::one();
    for j in 0..len {
        out.push(b.clone());
        b = b * (a.clone() - C::ratio(j as i64, 1)) / C::ratio(j as i64 + 1, 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_x_gives_inverse_factorials() {
        let s = PowerSeries::<BigRational>::monomial(BigRational::one(), 1, 8);
        let e = s.exp();
        assert_eq!(e.coeffs[5], BigRational::ratio(1, 120));
        assert_eq!(e.derivative_at_zero(7), BigRational::one());
    }

    #[test]
    fn binomial_of_one_half() {
        let b: Vec<BigRational> = binomial_series(1, 2, 4);
        assert_eq!(b[1], BigRational::ratio(1, 2));
        assert_eq!(b[2], BigRational::ratio(-1, 8));
        assert_eq!(b[3], BigRational::ratio(1, 16));
    }

    #[test]
    fn float_and_exact_agree() {
        let x = PowerSeries::<f64>::monomial(-1.0, 2, 10).exp();
        let y = PowerSeries::<BigRational>::monomial(-BigRational::one(), 2, 10).exp();
        for (a, b) in x.coeffs.iter().zip(&y.coeffs) {
            assert!((a - b.to_f64()).abs() < 1e-15);
        }
    }
}
