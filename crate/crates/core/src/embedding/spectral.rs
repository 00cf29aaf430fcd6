//! Fourier transform of the Gevrey bump and Fourier-side bounds on derivative sups.
//!
//! For `β(x) = exp(−(1−x²)^{−σ})` on `[−1, 1]`, `β̂(ξ) = 2 Re(e^{−iξ} Q(ξ))` with
//! `Q(ξ) = ∫ exp(−(y(2−y))^{−σ} + iyξ) dy` taken from `0` through the saddle point `y_s`
//! of the exponent and then straight up. `|Q|` is smooth in `ξ`, so `ln 2|Q|` is tabulated and
//! interpolated as an upper envelope of `|β̂|`.
//!
//! For an even-or-not `ψ` with transform bound `A(ξ) ≥ |ψ̂(ξ)|` and a multiplier `D`,
//! `sup_x |(ψ ∗ K − ψ)^{(s)}(x)| ≤ (1/2π) ∫ A |D| |ξ|^s`, which is what [`log_sup_majorants`] integrates.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logdomain::log_sum_exp;
use crate::quadrature::{composite, gauss_legendre, uniform_breaks, Rule};
use crate::scalar::ln_factorials;

/// Below this frequency `β̂` is computed by real-line quadrature.
const DIRECT_LIMIT: f64 = 8.0;
/// Table nodes per unit of `ln ξ`.
const PER_EFOLD: f64 = 64.0;
const EPS: f64 = f64::EPSILON;

/// `ln|Q(ξ)|`, `arg Q(ξ)` and the rounding scale `ln Σ|w e^F|`.
#[derive(Clone, Copy, Debug)]
pub struct SaddleValue {
    pub ln_abs: f64,
    pub arg: f64,
    pub ln_l1: f64,
}

fn exponent(sigma: f64, xi: f64, y: Complex64) -> Complex64 {
    let q = y * (2.0 - y);
    -(q.ln() * -sigma).exp() + Complex64::new(0.0, xi) * y
}

fn saddle_point(sigma: f64, xi: f64) -> Result<Complex64> {
    let arg = std::f64::consts::PI / (2.0 * (sigma + 1.0));
    let r = (sigma * 2f64.powf(-sigma) / xi).powf(1.0 / (sigma + 1.0));
    let mut y = Complex64::from_polar(r, arg);
    let mut residual = f64::INFINITY;
    for _ in 0..100 {
        let q = y * (2.0 - y);
        let dq = 2.0 - 2.0 * y;
        let qs1 = (q.ln() * (-sigma - 1.0)).exp();
        let d1 = sigma * qs1 * dq + Complex64::new(0.0, xi);
        let d2 = -sigma * (sigma + 1.0) * qs1 / q * dq * dq - 2.0 * sigma * qs1;
        let step = d1 / d2;
        y -= step;
        residual = d1.norm() / xi;
        if step.norm() <= 1e-14 * y.norm() {
            return Ok(y);
        }
    }
    // rounding can keep the last digits moving; a tiny relative residual is still a saddle point
    if residual < 1e-12 {
        return Ok(y);
    }
    Err(Error::NewtonStall { iterations: 100, residual })
}

/// `Q(ξ)` along the saddle path, for `ξ ≥ DIRECT_LIMIT`.
pub fn saddle_transform(sigma: f64, xi: f64) -> Result<SaddleValue> {
    let ys = saddle_point(sigma, xi)?;
    let q = ys * (2.0 - ys);
    let dq = 2.0 - 2.0 * ys;
    let qs1 = (q.ln() * (-sigma - 1.0)).exp();
    let curv = (-sigma * (sigma + 1.0) * qs1 / q * dq * dq - 2.0 * sigma * qs1).norm();
    let height = (60.0 / curv.sqrt()).max(40.0 / xi);
    let gl = gauss_legendre::<f64>(20);
    let mut nodes: Vec<(Complex64, Complex64)> = Vec::with_capacity(20 * 240);
    let seg = composite(&uniform_breaks(0.0, 1.0, 40), &gl);
    for (&r, &w) in seg.x.iter().zip(&seg.w) {
        nodes.push((ys * r, ys * w));
    }
    let up = composite(&uniform_breaks(0.0, height, 200), &gl);
    for (&t, &w) in up.x.iter().zip(&up.w) {
        nodes.push((ys + Complex64::new(0.0, t), Complex64::new(0.0, w)));
    }
    let f: Vec<Complex64> = nodes.iter().map(|(y, _)| exponent(sigma, xi, *y)).collect();
    let peak = f.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for ((_, w), fv) in nodes.iter().zip(&f) {
        let term = w * (fv - peak).exp();
        sum += term;
        l1 += term.norm();
    }
    Ok(SaddleValue { ln_abs: sum.norm().ln() + peak, arg: sum.arg(), ln_l1: l1.ln() + peak })
}

/// Transform data of the unit bump of a given Gevrey order.
#[derive(Clone, Debug)]
pub struct BumpSpectrum {
    pub order: f64,
    pub sigma: f64,
    /// `∫ β`, which bounds `|β̂|` everywhere.
    pub mass: f64,
    /// Largest tabulated frequency.
    pub xi_max: f64,
    direct: Rule<f64>,
    direct_values: Vec<f64>,
    ln_xi: Vec<f64>,
    ln_bound: Vec<f64>,
    /// Added to interpolated values; covers the interpolation error measured at midpoints.
    pub margin: f64,
}

impl BumpSpectrum {
    /// Tabulates `ln|β̂|` envelopes on `[DIRECT_LIMIT, xi_max]`.
    pub fn new(order: f64, xi_max: f64) -> Result<Self> {
        if !(order > 1.0) {
            return Err(Error::InvalidParameter(format!("bump order must exceed 1, got {order}")));
        }
        let sigma = 1.0 / (order - 1.0);
        let direct = composite(&uniform_breaks(0.0, 1.0, 256), &gauss_legendre::<f64>(16));
        let direct_values: Vec<f64> = direct
            .x
            .iter()
            .map(|&x| {
                let q = 1.0 - x * x;
                if q <= 0.0 {
                    0.0
                } else {
                    (-(q.powf(-sigma))).exp()
                }
            })
            .collect();
        let mass = 2.0 * direct.w.iter().zip(&direct_values).map(|(w, b)| w * b).sum::<f64>();
        let xi_max = xi_max.max(2.0 * DIRECT_LIMIT);
        let (lo, hi) = (DIRECT_LIMIT.ln(), xi_max.ln());
        let count = ((hi - lo) * PER_EFOLD).ceil() as usize + 1;
        let ln_xi: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
        let bound = |lx: f64| -> Result<f64> {
            let v = saddle_transform(sigma, lx.exp())?;
            // rounding in the contour sum is at most ~64 eps of its absolute sum
            Ok(std::f64::consts::LN_2 + crate::logdomain::log_add(v.ln_abs, v.ln_l1 + (64.0 * EPS).ln()))
        };
        let ln_bound = ln_xi.iter().map(|&l| bound(l)).collect::<Result<Vec<_>>>()?;
        let mut spec = Self {
            order,
            sigma,
            mass,
            xi_max: ln_xi[count - 1].exp(),
            direct,
            direct_values,
            ln_xi,
            ln_bound,
            margin: 0.0,
        };
        let mut margin: f64 = 0.0;
        for i in 0..count - 1 {
            let mid = 0.5 * (spec.ln_xi[i] + spec.ln_xi[i + 1]);
            margin = margin.max(bound(mid)? - spec.interpolate(mid));
        }
        spec.margin = 2.0 * margin.max(0.0) + 1e-9;
        Ok(spec)
    }

    fn interpolate(&self, lx: f64) -> f64 {
        // linear in ξ^{σ/(σ+1)}, the variable in which ln|Q| is nearly affine
        let e = self.sigma / (self.sigma + 1.0);
        let step = self.ln_xi[1] - self.ln_xi[0];
        let i = (((lx - self.ln_xi[0]) / step).floor().max(0.0) as usize).min(self.ln_xi.len() - 2);
        let (a, b) = ((self.ln_xi[i] * e).exp(), (self.ln_xi[i + 1] * e).exp());
        let v = (lx * e).exp();
        let s = (v - a) / (b - a);
        self.ln_bound[i] + s * (self.ln_bound[i + 1] - self.ln_bound[i])
    }

    /// `β̂(ξ) = ∫ β(x) cos(xξ) dx` by real-line quadrature; accurate for `|ξ| ≲ 10³`.
    pub fn value_direct(&self, xi: f64) -> f64 {
        2.0 * self
            .direct
            .x
            .iter()
            .zip(&self.direct.w)
            .zip(&self.direct_values)
            .map(|((x, w), b)| w * b * (x * xi).cos())
            .sum::<f64>()
    }

    /// Signed `β̂(ξ)`: real-line quadrature for small `|ξ|`, the saddle path above.
    pub fn value(&self, xi: f64) -> Result<f64> {
        let xi = xi.abs();
        if xi < 64.0 {
            return Ok(self.value_direct(xi));
        }
        let q = saddle_transform(self.sigma, xi)?;
        Ok(2.0 * q.ln_abs.exp() * (q.arg - xi).cos())
    }

    /// Upper bound of `ln|β̂(ξ)|`.
    pub fn ln_bound(&self, xi: f64) -> Result<f64> {
        let xi = xi.abs();
        if xi <= DIRECT_LIMIT {
            return Ok(self.mass.ln());
        }
        if xi > self.xi_max * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("frequency {xi} beyond the tabulated range {}", self.xi_max)));
        }
        Ok((self.interpolate(xi.ln()) + self.margin).min(self.mass.ln()))
    }

    /// Upper bound of `ln|ψ̂(ξ)|` for `ψ(x) = β((x − c)/a)`.
    pub fn ln_bound_scaled(&self, xi: f64, half_width: f64) -> Result<f64> {
        Ok(half_width.ln() + self.ln_bound(half_width * xi)?)
    }
}

/// Quadrature nodes on `[0, xi_end]`: uniform on `[0, 1]`, then geometric panels of ratio `1 + ratio`.
pub fn frequency_rule(xi_end: f64, ratio: f64) -> Rule<f64> {
    let mut breaks = uniform_breaks(0.0, 1.0, 4);
    let mut x = 1.0;
    while x < xi_end {
        x = (x * (1.0 + ratio)).min(xi_end);
        breaks.push(x);
    }
    composite(&breaks, &gauss_legendre(16))
}

/// `ln[(1/π) ∫_0^{ξ_end} e^{ln_amp(ξ)} ξ^s dξ]` for `s = 0..=s_max`, plus a check that the
/// integrand is negligible at `ξ_end`; `ln_amp` must be even in `ξ` in spirit (the caller
/// supplies the bound for `|ξ|`).
pub fn log_sup_majorants(ln_amp: impl Fn(f64) -> Result<f64>, xi_end: f64, s_max: usize) -> Result<Vec<f64>> {
    let rule = frequency_rule(xi_end, 0.01);
    let mut vals = Vec::with_capacity(rule.len());
    for (&x, &w) in rule.x.iter().zip(&rule.w) {
        vals.push((x.ln(), w.ln() + ln_amp(x)?));
    }
    let mut out = Vec::with_capacity(s_max + 1);
    let tail_amp = ln_amp(xi_end)?;
    for s in 0..=s_max {
        let sf = s as f64;
        let total = log_sum_exp(vals.iter().map(|&(lx, l)| l + sf * lx));
        // the integrand must have decayed well before the end of the range
        let tail = tail_amp + sf * xi_end.ln() + xi_end.ln();
        if total > f64::NEG_INFINITY && tail > total - 40.0 {
            return Err(Error::TruncationUncertified(format!(
                "Fourier integrand not negligible at ξ = {xi_end} (order {s})"
            )));
        }
        // 1e-6 relative allowance for the quadrature of a smooth positive integrand
        out.push(total - std::f64::consts::PI.ln() + 1e-6);
    }
    Ok(out)
}

/// `max_s (s ln ν − m ln s! + J_s)` with its argmax, from majorants `J_s`.
pub fn seminorm_from_majorants(majorants: &[f64], m: f64, nu: f64) -> (f64, usize) {
    let lf: Vec<f64> = ln_factorials(majorants.len().saturating_sub(1));
    let mut best = (f64::NEG_INFINITY, 0);
    for (s, &j) in majorants.iter().enumerate() {
        let v = s as f64 * nu.ln() - m * lf[s] + j;
        if v > best.0 {
            best = (v, s);
        }
    }
    best
}
