//! Gevrey seminorms of sampled functions.
//!
//! `p_ν^{m,μ}(f) = sup_{|x|≤μ, α} ν^α |f^{(α)}(x)| / α!^m`, evaluated in log domain over
//! the grid and `α ≤ S_max`. The Roumieu seminorm is the same quantity at `1/ν`.

pub mod catalog;
mod sampled;

use serde::{Deserialize, Serialize};

pub use sampled::{DerivativeOracle, Provenance, SampledFunction, DEFAULT_INTERVALS, DEFAULT_S_MAX};

use crate::error::{Error, Result};
use crate::scalar::{ln_factorials, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyParams {
    pub m: f64,
    pub nu: f64,
    pub mu: f64,
    pub s_max: usize,
}

impl GevreyParams {
    pub fn new(m: f64, nu: f64, mu: f64, s_max: usize) -> Result<Self> {
        let p = Self { m, nu, mu, s_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0) || !(self.nu > 0.0) || !(self.mu > 0.0) || self.s_max < 1 {
            return Err(Error::InvalidParameter(format!("invalid Gevrey parameters {self:?}")));
        }
        Ok(())
    }

    pub fn with_nu(&self, nu: f64) -> Self {
        Self { nu, ..*self }
    }
}

/// A supremum in log domain with the index and point attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    #[serde(with = "crate::logdomain::ext_real")]
    pub log_value: f64,
    pub index: usize,
    pub x: f64,
    /// The maximum sits at the top of the index range, so the true sup may be larger.
    pub cap_hit: bool,
}

impl SeminormValue {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Max of `coef[α] + ln|row[α]|` over the sampled rows; ties go to the smallest `α`, then smallest `x`.
fn sup_over<T: Real>(f: &SampledFunction<T>, coef: &[T], keep: impl Fn(T) -> bool) -> Result<SeminormValue> {
    let rows = f.table()?;
    let top = coef.len() - 1;
    let mut best = SeminormValue { log_value: f64::NEG_INFINITY, index: 0, x: 0.0, cap_hit: false };
    let mut found = false;
    for alpha in 0..=top {
        for (i, row) in rows.iter().enumerate() {
            let x = f.x(i);
            if !keep(x) {
                continue;
            }
            let v = row[alpha].abs();
            let l = if v == T::zero() { f64::NEG_INFINITY } else { (coef[alpha] + v.ln()).as_f64() };
            if !found || l > best.log_value {
                best = SeminormValue { log_value: l, index: alpha, x: x.as_f64(), cap_hit: false };
                found = true;
            }
        }
    }
    if !found {
        return Err(Error::GridMismatch("no grid point inside the seminorm domain".into()));
    }
    best.cap_hit = best.index == top && top > 0 && best.log_value > f64::NEG_INFINITY;
    Ok(best)
}

fn check_cover<T: Real>(f: &SampledFunction<T>, s_max: usize, mu: f64) -> Result<()> {
    if f.s_max() < s_max {
        return Err(Error::OracleGap { alpha: f.s_max() + 1, x: 0.0 });
    }
    if f.mu().as_f64() < mu * (1.0 - 1e-12) {
        return Err(Error::GridMismatch(format!("grid half-width {} < mu {}", f.mu(), mu)));
    }
    Ok(())
}

/// `ln p_ν^{m,μ}(f)`.
pub fn gevrey_seminorm<T: Real>(f: &SampledFunction<T>, p: &GevreyParams) -> Result<SeminormValue> {
    p.validate()?;
    check_cover(f, p.s_max, p.mu)?;
    let lf: Vec<T> = ln_factorials(p.s_max);
    let (m, lnu) = (T::of(p.m), T::of(p.nu.ln()));
    let coef: Vec<T> = (0..=p.s_max).map(|a| T::of_usize(a) * lnu - m * lf[a]).collect();
    let edge = T::of(p.mu * (1.0 + 1e-12));
    sup_over(f, &coef, |x| x.abs() <= edge)
}

/// `ln q_ν^{m,μ}(f) = ln p_{1/ν}^{m,μ}(f)`.
pub fn roumieu_seminorm<T: Real>(f: &SampledFunction<T>, p: &GevreyParams) -> Result<SeminormValue> {
    gevrey_seminorm(f, &p.with_nu(1.0 / p.nu))
}

/// `ln σ_b(f) = ln sup_{α ≤ s_max, x} |f^{(α)}(x)| / (b^α α!)` over the whole grid.
pub fn sigma_der<T: Real>(f: &SampledFunction<T>, b: f64, s_max: usize) -> Result<SeminormValue> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
    }
    check_cover(f, s_max, 0.0)?;
    let lf: Vec<T> = ln_factorials(s_max);
    let lb = T::of(b.ln());
    let coef: Vec<T> = (0..=s_max).map(|a| -(T::of_usize(a) * lb) - lf[a]).collect();
    sup_over(f, &coef, |_| true)
}

/// Tail bound `|f(x)| ≤ e^{-c|x|^p}` valid for `|x|` at and beyond the grid edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub c: f64,
    pub p: f64,
}

/// Result of [`sigma_pow`]: grid sup combined with the certified tail bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaPow {
    pub grid: SeminormValue,
    /// Largest bound on `ln(|x|^β e^{-c|x|^p} / (b^β β!))` over `β` and `|x|` past the grid edge.
    #[serde(with = "crate::logdomain::ext_real")]
    pub log_tail_bound: f64,
    #[serde(with = "crate::logdomain::ext_real")]
    pub log_value: f64,
}

/// `ln σ^b(f) = ln sup_{β ≤ beta_max, x} |x^β f(x)| / (b^β β!)`.
pub fn sigma_pow<T: Real>(
    f: &SampledFunction<T>,
    b: f64,
    beta_max: usize,
    certificate: Option<DecayCertificate>,
) -> Result<SigmaPow> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
    }
    let cert = certificate.ok_or_else(|| Error::TailUnbounded("sigma_pow needs a decay certificate".into()))?;
    if !(cert.c > 0.0) || !(cert.p > 0.0) {
        return Err(Error::TailUnbounded(format!("degenerate decay certificate {cert:?}")));
    }
    let edge = f.mu().as_f64();
    let rows = f.table()?;
    let lf: Vec<f64> = ln_factorials(beta_max);
    let lb = b.ln();
    let mut best = SeminormValue { log_value: f64::NEG_INFINITY, index: 0, x: 0.0, cap_hit: false };
    for beta in 0..=beta_max {
        for (i, row) in rows.iter().enumerate() {
            let x = f.x(i).as_f64();
            let v = row[0].abs().as_f64();
            if v == 0.0 || (x == 0.0 && beta > 0) {
                continue;
            }
            let lx = if beta == 0 { 0.0 } else { beta as f64 * (x.abs().ln() - lb) };
            let l = lx - lf[beta] + v.ln();
            if l > best.log_value {
                best = SeminormValue { log_value: l, index: beta, x, cap_hit: false };
            }
        }
    }
    best.cap_hit = best.index == beta_max && best.log_value > f64::NEG_INFINITY;
    // beyond the edge, x^β e^{-cx^p} is bounded by its value at the edge once past its peak,
    // and by its global maximum otherwise
    let tail = (0..=beta_max)
        .map(|beta| {
            let peak = (beta as f64 / (cert.c * cert.p)).powf(1.0 / cert.p);
            let x = edge.max(peak);
            let lx = if beta == 0 { 0.0 } else { beta as f64 * x.ln() };
            lx - beta as f64 * lb - lf[beta] - cert.c * x.powf(cert.p)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SigmaPow { grid: best, log_tail_bound: tail, log_value: best.log_value.max(tail) })
}

#[cfg(test)]
mod tests {
    use super::catalog::CatalogFunction;
    use super::*;

    fn sampled(f: CatalogFunction, mu: f64, s_max: usize) -> SampledFunction<f64> {
        f.sample(mu, DEFAULT_INTERVALS, s_max).unwrap()
    }

    #[test]
    fn constant_has_unit_seminorm_at_order_zero() {
        let f = sampled(CatalogFunction::Constant { value: 1.0 }, 2.0, 30);
        for nu in [0.5, 1.0, 7.0] {
            let v = gevrey_seminorm(&f, &GevreyParams::new(2.0, nu, 1.5, 30).unwrap()).unwrap();
            assert_eq!(v.log_value, 0.0);
            assert_eq!(v.index, 0);
            assert!(!v.cap_hit);
        }
    }

    #[test]
    fn sine_at_nu_four_peaks_at_first_order() {
        let f = sampled(CatalogFunction::Sin {}, 2.0, 20);
        let p = GevreyParams::new(2.0, 4.0, 2.0, 20).unwrap();
        let v = gevrey_seminorm(&f, &p).unwrap();
        assert!((v.value() - 4.0).abs() < 1e-12, "{v:?}");
        assert!(v.index == 1 || v.index == 2);
        let q = roumieu_seminorm(&f, &p.with_nu(0.25)).unwrap();
        assert_eq!(q.log_value, v.log_value);
    }

    #[test]
    fn exp_is_attained_at_the_right_edge() {
        let f = sampled(CatalogFunction::Exp {}, 1.0, 50);
        let v = gevrey_seminorm(&f, &GevreyParams::new(2.0, 1.0, 1.0, 50).unwrap()).unwrap();
        assert!((v.value() - std::f64::consts::E).abs() < 1e-14);
        assert_eq!((v.index, v.x), (0, 1.0));
    }

    #[test]
    fn cap_hit_flags_unresolved_sup() {
        let f = sampled(CatalogFunction::Exp {}, 1.0, 5);
        let v = gevrey_seminorm(&f, &GevreyParams::new(1.01, 50.0, 1.0, 5).unwrap()).unwrap();
        assert!(v.cap_hit);
    }

    #[test]
    fn oracle_gap_surfaces() {
        let f = sampled(CatalogFunction::Sin {}, 1.0, 5);
        assert!(matches!(
            gevrey_seminorm(&f, &GevreyParams::new(2.0, 1.0, 1.0, 6).unwrap()),
            Err(Error::OracleGap { .. })
        ));
    }

    #[test]
    fn sigma_pow_of_gaussian_is_one() {
        let f = sampled(CatalogFunction::Gaussian { a: 1.0 }, 8.0, 0);
        let cert = DecayCertificate { c: 1.0, p: 2.0 };
        let s = sigma_pow(&f, 1.0, 100, Some(cert)).unwrap();
        assert!(s.log_value.abs() < 1e-15, "{s:?}");
        assert_eq!(s.grid.index, 0);
        assert!(matches!(sigma_pow(&f, 1.0, 100, None), Err(Error::TailUnbounded(_))));
    }

    #[test]
    fn sigma_pow_of_zero_is_zero() {
        let f = sampled(CatalogFunction::Constant { value: 0.0 }, 8.0, 0);
        let s = sigma_pow(&f, 1.0, 10, Some(DecayCertificate { c: 1e6, p: 2.0 })).unwrap();
        assert_eq!(s.grid.log_value, f64::NEG_INFINITY);
    }

    #[test]
    fn sigma_der_of_sine() {
        let f = sampled(CatalogFunction::Sin {}, 3.0, 30);
        let s = sigma_der(&f, 1.0, 30).unwrap();
        assert!(s.log_value.abs() < 1e-12);
    }
}
