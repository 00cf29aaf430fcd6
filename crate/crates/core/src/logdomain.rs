//! Arithmetic on quantities stored as logarithms, real and complex.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// `ln(e^a + e^b)` without overflow; `-inf` is the additive identity.
pub fn log_add<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == T::neg_infinity() {
        return hi;
    }
    if hi == T::infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{a_i}`.
pub fn log_sum_exp<T: Real, I: IntoIterator<Item = T>>(xs: I) -> T {
    let v: Vec<T> = xs.into_iter().collect();
    let hi = v.iter().copied().fold(T::neg_infinity(), T::max);
    if hi == T::neg_infinity() || hi == T::infinity() {
        return hi;
    }
    let s: T = v.iter().map(|&x| (x - hi).exp()).sum();
    hi + s.ln()
}

/// `ln |e^a − e^b|`, `-inf` when the two are equal.
pub fn log_abs_diff<T: Real>(a: T, b: T) -> T {
    if a == b {
        return T::neg_infinity();
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == T::neg_infinity() || hi == T::infinity() {
        return hi;
    }
    hi + (-(lo - hi).exp_m1()).ln()
}

/// Complex number held as `(ln|z|, arg z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LogComplex<T: Real> {
    pub ln_abs: T,
    pub arg: T,
}

impl<T: Real> LogComplex<T> {
    pub fn zero() -> Self {
        Self { ln_abs: T::neg_infinity(), arg: T::zero() }
    }

    pub fn one() -> Self {
        Self { ln_abs: T::zero(), arg: T::zero() }
    }

    pub fn from_polar_log(ln_abs: T, arg: T) -> Self {
        Self { ln_abs, arg }
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        if z.re == T::zero() && z.im == T::zero() {
            Self::zero()
        } else {
            Self { ln_abs: z.norm().ln(), arg: z.im.atan2(z.re) }
        }
    }

    pub fn from_real(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else if x > T::zero() {
            Self { ln_abs: x.ln(), arg: T::zero() }
        } else {
            Self { ln_abs: (-x).ln(), arg: T::PI() }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == T::neg_infinity()
    }

    /// Value as an ordinary complex number (may overflow to infinity).
    pub fn to_complex(&self) -> Complex<T> {
        self.scaled(T::zero())
    }

    /// `z · e^{-shift}` as an ordinary complex number.
    pub fn scaled(&self, shift: T) -> Complex<T> {
        if self.is_zero() {
            return Complex::new(T::zero(), T::zero());
        }
        Complex::from_polar((self.ln_abs - shift).exp(), self.arg)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self { ln_abs: self.ln_abs + other.ln_abs, arg: wrap_angle(self.arg + other.arg) }
    }
}

/// Sums log-complex terms by factoring out the largest magnitude.
pub fn log_complex_sum<T: Real>(terms: &[LogComplex<T>]) -> LogComplex<T> {
    let hi = terms.iter().map(|t| t.ln_abs).fold(T::neg_infinity(), T::max);
    if hi == T::neg_infinity() {
        return LogComplex::zero();
    }
    let s = terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, t| acc + t.scaled(hi));
    let mut out = LogComplex::from_complex(s);
    out.ln_abs = out.ln_abs + hi;
    out
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = a % two_pi;
    if r > T::PI() {
        r = r - two_pi;
    } else if r <= -T::PI() {
        r = r + two_pi;
    }
    r
}

/// `e^z − 1` accurate near `z = 0`.
pub fn cexpm1<T: Real>(z: Complex<T>) -> Complex<T> {
    let two = T::of(2.0);
    let half = T::of(0.5);
    let s = (z.im * half).sin();
    let re = z.re.exp_m1() * z.im.cos() - two * s * s;
    let im = z.re.exp() * z.im.sin();
    Complex::new(re, im)
}

/// `ln(1 + z)` accurate near `z = 0` (principal branch).
pub fn clog1p<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::of(0.5) {
        // |1+z|² = 1 + (2x + x² + y²)
        let (x, y) = (z.re, z.im);
        let re = T::of(0.5) * (T::of(2.0) * x + x * x + y * y).ln_1p();
        Complex::new(re, y.atan2(T::one() + x))
    } else {
        (Complex::new(T::one(), T::zero()) + z).ln()
    }
}

/// Serde helper for extended reals: finite values as numbers, infinities as strings.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            Repr::Num(*x).serialize(s)
        } else if x.is_nan() {
            Repr::Tag("nan".into()).serialize(s)
        } else if *x > 0.0 {
            Repr::Tag("inf".into()).serialize(s)
        } else {
            Repr::Tag("-inf".into()).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad extended real {other}"))),
            },
        }
    }
}

/// [`ext_real`] for vectors.
pub mod ext_real_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Item(#[serde(with = "super::ext_real")] f64);

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(|&x| Item(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Item>::deserialize(d)?.into_iter().map(|i| i.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_handles_identity_and_overflow() {
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
        let big: f64 = log_add(1e6, 1e6);
        assert!((big - (1e6 + 2f64.ln())).abs() < 1e-9);
        assert!((log_sum_exp([0.0f64, 0.0, 0.0]) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_abs_diff_is_cancellation_free() {
        let d: f64 = log_abs_diff(1e-20, 0.0);
        assert!((d - 1e-20f64.ln()).abs() < 1e-10);
        assert_eq!(log_abs_diff(2.0f64, 2.0), f64::NEG_INFINITY);
    }

    #[test]
    fn complex_expm1_and_log1p_are_accurate_near_zero() {
        let z = Complex::new(1e-12f64, -3e-13);
        let e = cexpm1(z);
        assert!((e - z).norm() < 1e-24);
        let l = clog1p(z);
        assert!((l - z).norm() < 1e-24);
        let w = Complex::new(0.3f64, 0.4);
        assert!((cexpm1(w) - (w.exp() - 1.0)).norm() < 1e-15);
        assert!((clog1p(w) - (w + 1.0).ln()).norm() < 1e-15);
    }

    #[test]
    fn log_complex_sum_survives_huge_magnitudes() {
        let a = LogComplex::from_polar_log(1e5f64, 0.0);
        let b = LogComplex::from_polar_log(1e5f64, std::f64::consts::PI);
        let c = LogComplex::from_polar_log(1e5f64 - 1.0, 0.0);
        let s = log_complex_sum(&[a, b, c]);
        assert!((s.ln_abs - (1e5 - 1.0)).abs() < 1e-9);
    }
}
