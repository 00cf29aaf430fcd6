//! The flat profiles `h_n`, `k_n`, their exact Taylor series and uniform bounds.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gevrey::catalog::CatalogFunction;
use crate::gevrey::{sigma_pow, DecayCertificate};
use crate::logdomain::{cexpm1, clog1p};
use crate::scalar::{floor_pow, Real};
use crate::series::{binomial_series, Coefficient, PowerSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlatKind {
    H,
    K,
}

/// `ln h_n(x) = −n² expm1(log1p((x/n)^{2n}) / n)`.
pub fn log_h<T: Real>(n: u32, x: T) -> T {
    if n == 1 {
        return -(x * x);
    }
    if x == T::zero() {
        return T::zero();
    }
    let nn = T::of(n as f64);
    let ln_u = T::of(2.0 * n as f64) * (x.abs() / nn).ln();
    let l1p = if ln_u > T::of(36.0) { ln_u + (-ln_u).exp().ln_1p() } else { ln_u.exp().ln_1p() };
    -(nn * nn) * (l1p / nn).exp_m1()
}

/// `ln k_n(x) = −x^{2n}`.
pub fn log_k<T: Real>(n: u32, x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    -(T::of(2.0 * n as f64) * x.abs().ln()).exp()
}

pub fn eval_h<T: Real>(n: u32, x: T) -> T {
    log_h(n, x).exp()
}

pub fn eval_k<T: Real>(n: u32, x: T) -> T {
    log_k(n, x).exp()
}

/// Principal-branch continuation of `ln h_n` into the strip `|Im z| < n sin(π/2n)`.
pub fn log_h_complex<T: Real>(n: u32, z: Complex<T>) -> Complex<T> {
    if n == 1 {
        return -(z * z);
    }
    if z.re == T::zero() && z.im == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let nn = T::of(n as f64);
    let u = ((z / nn).ln() * T::of(2.0 * n as f64)).exp();
    -(cexpm1(clog1p(u) / nn) * (nn * nn))
}

/// `ln k_n(z) = −z^{2n}`.
pub fn log_k_complex<T: Real>(n: u32, z: Complex<T>) -> Complex<T> {
    if z.re == T::zero() && z.im == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    -((z.ln() * T::of(2.0 * n as f64)).exp())
}

/// Distance from the real axis to the nearest branch point of `(n^{2n} + z^{2n})^{1/n}`.
pub fn singularity_distance(n: u32) -> f64 {
    n as f64 * (std::f64::consts::PI / (2.0 * n as f64)).sin()
}

/// `g(n) = floor(floor(n^{1/(m−1)}) / 2) + 1`.
pub fn index_map_g(n: u64, m: f64) -> u32 {
    assert!(n >= 1 && m > 1.0, "index map needs n >= 1 and m > 1");
    (floor_pow(n, 1.0 / (m - 1.0)) / 2 + 1) as u32
}

/// Number of vanishing moments required of `φ^n`: `floor(n^{1/m}) + 1`.
pub fn moment_order(n: u64, m: f64) -> usize {
    floor_pow(n, 1.0 / m) as usize + 1
}

/// Taylor series of `h_n` or `k_n` at 0 with `len` coefficients.
pub fn taylor_series<C: Coefficient>(kind: FlatKind, n: u32, len: usize) -> PowerSeries<C> {
    let p = 2 * n as usize;
    let exponent = match kind {
        FlatKind::K => PowerSeries::monomial(-C::one(), p, len),
        FlatKind::H => {
            // −n² Σ_{j≥1} binom(1/n, j) u^j with u = x^{2n} / n^{2n}
            let jmax = (len.saturating_sub(1)) / p;
            let b: Vec<C> = binomial_series(1, n as i64, jmax + 1);
            let inv = C::ratio(1, n as i64);
            let mut inv_pow = C::one();
            for _ in 0..p {
                inv_pow = inv_pow * inv.clone();
            }
            let n2 = C::ratio((n as i64) * (n as i64), 1);
            let mut in_u = PowerSeries::zero(jmax + 1);
            let mut scale = C::one();
            for j in 1..=jmax {
                scale = scale * inv_pow.clone();
                in_u.coeffs[j] = -(n2.clone() * b[j].clone() * scale.clone());
            }
            in_u.compose_monomial(p, len)
        }
    };
    exponent.exp()
}

/// `w^{(j)}(0)` for `j < len`.
pub fn derivatives_at_zero<C: Coefficient>(kind: FlatKind, n: u32, len: usize) -> Vec<C> {
    let s = taylor_series::<C>(kind, n, len);
    (0..len).map(|j| s.derivative_at_zero(j)).collect()
}

/// Largest `n` handled by the series route unless overridden.
pub const DEFAULT_SERIES_CAP: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub kind: FlatKind,
    pub n: u32,
    pub order_cap: usize,
    /// `w(0)` (expected exactly 1).
    pub value_at_zero: f64,
    /// Every coefficient of order `1..=order_cap` is exactly zero.
    pub vanishing: bool,
    /// Lowest nonzero order above zero within the computed series.
    pub first_nonzero: Option<usize>,
    /// Leading nonconstant coefficient, printed exactly.
    pub leading: Option<String>,
}

/// Checks that the orders `1..=order_cap` of the Taylor series at 0 are exactly zero.
pub fn certify_flatness<C: Coefficient + std::fmt::Display>(
    kind: FlatKind,
    n: u32,
    order_cap: Option<usize>,
    series_cap: u32,
) -> Result<FlatnessReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("flat functions start at n = 1".into()));
    }
    if n > series_cap {
        return Err(Error::SeriesOverflow { n, cap: series_cap });
    }
    let max_cap = 2 * n as usize - 1;
    let cap = order_cap.unwrap_or(max_cap);
    if cap > max_cap {
        return Err(Error::InvalidParameter(format!("order cap {cap} exceeds 2n-1 = {max_cap}")));
    }
    let s = taylor_series::<C>(kind, n, 2 * n as usize + 2);
    let first_nonzero = (1..s.len()).find(|&j| !s.coeffs[j].is_zero());
    Ok(FlatnessReport {
        kind,
        n,
        order_cap: cap,
        value_at_zero: s.coeffs[0].to_f64(),
        vanishing: s.coeffs[1..=cap].iter().all(|c| c.is_zero()),
        first_nonzero,
        leading: first_nonzero.map(|j| s.coeffs[j].to_string()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBoundEntry {
    pub n: u32,
    /// H: `max Re ln h_n(x + ½e^{iθ})`; K: `ln σ^b(k_n)`.
    pub log_bound: f64,
    /// H: `σ_2(h_n) ≤ e^{log_bound}`; K: `σ^b(k_n)`.
    pub bound: f64,
    pub witness_x: f64,
    /// θ for H, β for K.
    pub witness_index: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBoundReport {
    pub kind: FlatKind,
    pub b: f64,
    /// Claimed uniform constant.
    pub c: f64,
    pub entries: Vec<UniformBoundEntry>,
    pub max_log_bound: f64,
}

/// Uniform bounds over `n_range`: `σ_2(h_n) < 3` with `Re ln h_n < 1` on the radius-½ circles,
/// or `σ^1(k_n) ≤ 1` with the tail split at `|x| = 2`.
pub fn certify_uniform_bounds(kind: FlatKind, n_range: std::ops::RangeInclusive<u32>) -> Result<UniformBoundReport> {
    let mut entries = Vec::new();
    match kind {
        FlatKind::H => {
            let thetas: Vec<f64> = (0..256).map(|j| 2.0 * std::f64::consts::PI * j as f64 / 256.0).collect();
            for n in n_range {
                let x_max = 2.0 * n as f64 + 2.0;
                let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
                for i in 0..=2000 {
                    let x = x_max * i as f64 / 2000.0;
                    for &th in &thetas {
                        let z = Complex::new(x + 0.5 * th.cos(), 0.5 * th.sin());
                        let re = log_h_complex(n, z).re;
                        if re > best.0 {
                            best = (re, x, th);
                        }
                    }
                }
                entries.push(UniformBoundEntry {
                    n,
                    log_bound: best.0,
                    bound: best.0.exp(),
                    witness_x: best.1,
                    witness_index: best.2,
                });
            }
            let report = finish(kind, 2.0, 3.0, entries);
            if let Some(e) = report.entries.iter().find(|e| !(e.log_bound < 1.0) || !(e.bound < 3.0)) {
                return Err(Error::BoundViolated(format!(
                    "h_{}: Re exponent {} at x = {}, theta = {}",
                    e.n, e.log_bound, e.witness_x, e.witness_index
                )));
            }
            Ok(report)
        }
        FlatKind::K => {
            for n in n_range {
                let f = CatalogFunction::FlatK { n }.sample::<f64>(6.0, 2400, 1)?;
                // |x| ≥ 2 gives x^{2n} ≥ 4^{n−1} x²
                let cert = DecayCertificate { c: 4f64.powi(n as i32 - 1), p: 2.0 };
                let s = sigma_pow(&f, 1.0, 200, Some(cert))?;
                entries.push(UniformBoundEntry {
                    n,
                    log_bound: s.log_value,
                    bound: s.log_value.exp(),
                    witness_x: s.grid.x,
                    witness_index: s.grid.index as f64,
                });
            }
            let report = finish(kind, 1.0, 1.0, entries);
            if let Some(e) = report.entries.iter().find(|e| e.log_bound > 1e-12) {
                return Err(Error::BoundViolated(format!(
                    "k_{}: sigma^1 = {} at x = {}, beta = {}",
                    e.n, e.bound, e.witness_x, e.witness_index
                )));
            }
            Ok(report)
        }
    }
}

fn finish(kind: FlatKind, b: f64, c: f64, entries: Vec<UniformBoundEntry>) -> UniformBoundReport {
    let max_log_bound = entries.iter().map(|e| e.log_bound).fold(f64::NEG_INFINITY, f64::max);
    UniformBoundReport { kind, b, c, entries, max_log_bound }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn h_and_k_examples() {
        assert_eq!(eval_h(5, 0.0f64), 1.0);
        assert!((eval_h(1, 1.0f64) - (-1f64).exp()).abs() < 1e-16);
        assert!((eval_h(2, 2.0f64) - (-4.0 * (2f64.sqrt() - 1.0)).exp()).abs() < 1e-15);
        assert_eq!(eval_k(3, 0.0f64), 1.0);
        assert!((eval_k(1, 1.0f64) - (-1f64).exp()).abs() < 1e-16);
        assert!((eval_k(2, 1.2f64) - (-2.0736f64).exp()).abs() < 1e-15);
        assert_eq!(eval_h(4, 1e200f64), 0.0);
        assert!((eval_h(2, 2.0f32) - 0.190_738_05).abs() < 1e-6);
    }

    #[test]
    fn complex_continuation_agrees_on_the_real_axis() {
        for n in [1u32, 2, 5, 13] {
            for &x in &[0.3, 1.7, 6.0, 20.0] {
                let c = log_h_complex(n, Complex::new(x, 0.0f64));
                assert!((c.re - log_h(n, x)).abs() < 1e-12 * log_h(n, x).abs().max(1.0));
                assert!(c.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn index_map_examples() {
        assert_eq!(index_map_g(8, 2.0), 5);
        assert_eq!(index_map_g(100, 3.0), 6);
        assert_eq!(index_map_g(1, 2.0), 1);
        assert_eq!(moment_order(4, 2.0), 3);
        assert_eq!(moment_order(25, 2.0), 6);
    }

    #[test]
    fn flatness_is_exact() {
        let r = certify_flatness::<BigRational>(FlatKind::K, 3, None, DEFAULT_SERIES_CAP).unwrap();
        assert!(r.vanishing);
        assert_eq!(r.first_nonzero, Some(6));
        let r = certify_flatness::<BigRational>(FlatKind::H, 2, None, DEFAULT_SERIES_CAP).unwrap();
        assert!(r.vanishing);
        assert_eq!(r.first_nonzero, Some(4));
        assert_eq!(r.leading.as_deref(), Some("-1/8"));
        assert_eq!(r.value_at_zero, 1.0);
        assert!(matches!(
            certify_flatness::<BigRational>(FlatKind::H, 17, None, DEFAULT_SERIES_CAP),
            Err(Error::SeriesOverflow { n: 17, cap: 16 })
        ));
    }

    #[test]
    fn singularity_clearance() {
        assert!((1..=10_000u32).all(|n| singularity_distance(n) >= 1.0 - 1e-15));
    }
}
