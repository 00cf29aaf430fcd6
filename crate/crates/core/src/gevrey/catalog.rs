//! Built-in functions with derivative oracles, addressable by name from configuration files.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::sampled::{DerivativeOracle, Provenance, SampledFunction};
use crate::error::{Error, Result};
use crate::mollifier::flat;
use crate::scalar::{ln_factorials, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CatalogFunction {
    Constant {
        value: f64,
    },
    Sin {},
    Exp {},
    /// `e^{-a x²}`
    Gaussian {
        a: f64,
    },
    /// `Σ c_i x^i`
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `e^{-x^{2n}}`
    FlatK {
        n: u32,
    },
    /// `exp(n² − (n^{2n} + x^{2n})^{1/n})`, derivatives by Cauchy's formula on a radius-½ circle
    FlatH {
        n: u32,
    },
    /// `exp(−(1 − y²)^{−1/(order−1)})` with `y = (x − center)/half_width`, zero for `|y| ≥ 1`
    Bump {
        order: f64,
        center: f64,
        half_width: f64,
    },
    /// `max(0, 1 − |x − center|/half_width)`; only orders 0 and 1 are available
    Triangle {
        center: f64,
        half_width: f64,
    },
}

impl CatalogFunction {
    /// Canonical bump of Gevrey order `order` on `[-1, 1]`.
    pub fn bump(order: f64) -> Self {
        Self::Bump { order, center: 0.0, half_width: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = match self {
            Self::Gaussian { a } => !(*a > 0.0),
            Self::FlatK { n } | Self::FlatH { n } => *n == 0,
            Self::Bump { order, half_width, .. } => !(*order > 1.0) || !(*half_width > 0.0),
            Self::Triangle { half_width, .. } => !(*half_width > 0.0),
            _ => false,
        };
        if bad {
            return Err(Error::InvalidParameter(format!("invalid catalog parameters {self:?}")));
        }
        Ok(())
    }

    /// Support `[lo, hi]` when compact.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Bump { center, half_width, .. } | Self::Triangle { center, half_width } => {
                Some((center - half_width, center + half_width))
            }
            Self::Constant { value } if value == 0.0 => Some((0.0, 0.0)),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant { value } if *value == 0.0)
    }

    /// Samples on `[-mu, mu]` with `intervals` grid intervals.
    pub fn sample<T: Real>(&self, mu: f64, intervals: usize, s_max: usize) -> Result<SampledFunction<T>> {
        self.validate()?;
        SampledFunction::new(Arc::new(self.clone()), T::of(mu), intervals, s_max.max(1))
    }
}

impl<T: Real> DerivativeOracle<T> for CatalogFunction {
    fn derivatives(&self, x: T, s: usize) -> Result<Vec<T>> {
        match self {
            Self::Constant { value } => {
                let mut v = vec![T::zero(); s + 1];
                v[0] = T::of(*value);
                Ok(v)
            }
            Self::Sin {} => {
                let half_pi = T::FRAC_PI_2();
                Ok((0..=s).map(|a| (x + half_pi * T::of_usize(a)).sin()).collect())
            }
            Self::Exp {} => Ok(vec![x.exp(); s + 1]),
            Self::Gaussian { a } => Ok(gaussian_derivatives(T::of(*a), x, s)),
            Self::Polynomial { coeffs } => Ok(polynomial_derivatives(coeffs, x, s)),
            Self::FlatK { n } => Ok(flat_k_derivatives(*n, x, s)),
            Self::FlatH { n } => Ok(cauchy_derivatives(|z| flat::log_h_complex(*n, z).exp(), x, T::of(0.5), s)),
            Self::Bump { order, center, half_width } => {
                let w = T::of(*half_width);
                let y = (x - T::of(*center)) / w;
                let mut d = bump_derivatives(T::one() / (T::of(*order) - T::one()), y, s);
                let inv_w = T::one() / w;
                let mut scale = T::one();
                for v in d.iter_mut() {
                    *v = *v * scale;
                    scale = scale * inv_w;
                }
                Ok(d)
            }
            Self::Triangle { center, half_width } => {
                if s > 1 {
                    return Err(Error::OracleGap { alpha: 2, x: x.as_f64() });
                }
                let w = T::of(*half_width);
                let y = (x - T::of(*center)) / w;
                let mut v = vec![(T::one() - y.abs()).max(T::zero())];
                if s == 1 {
                    let slope = if y.abs() >= T::one() || y == T::zero() { T::zero() } else { -y.signum() / w };
                    v.push(slope);
                }
                Ok(v)
            }
        }
    }

    fn provenance(&self) -> Provenance {
        match self {
            Self::FlatH { .. } => Provenance::CauchyCircle,
            Self::Bump { .. } => Provenance::TaylorRecurrence,
            _ => Provenance::ClosedForm,
        }
    }

    fn label(&self) -> String {
        format!("{self:?}")
    }
}

/// `d^α/dx^α e^{-a x²} = (−√a)^α H_α(√a x) e^{-a x²}` with physicists' Hermite polynomials.
fn gaussian_derivatives<T: Real>(a: T, x: T, s: usize) -> Vec<T> {
    let ra = a.sqrt();
    let y = ra * x;
    let g = (-(a * x * x)).exp();
    let two = T::of(2.0);
    let (mut h0, mut h1) = (T::one(), two * y);
    let mut out = Vec::with_capacity(s + 1);
    let mut scale = T::one();
    for k in 0..=s {
        let hk = if k == 0 { h0 } else { h1 };
        out.push(scale * hk * g);
        scale = scale * (-ra);
        if k >= 1 {
            let h2 = two * y * h1 - two * T::of_usize(k) * h0;
            h0 = h1;
            h1 = h2;
        }
    }
    out
}

fn polynomial_derivatives<T: Real>(coeffs: &[f64], x: T, s: usize) -> Vec<T> {
    let mut c: Vec<T> = coeffs.iter().map(|&v| T::of(v)).collect();
    let mut out = Vec::with_capacity(s + 1);
    for _ in 0..=s {
        out.push(c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + ci));
        c = c.iter().enumerate().skip(1).map(|(i, &ci)| ci * T::of_usize(i)).collect();
    }
    out
}

/// Taylor coefficients of `exp(g(x + h))` in `h` from those of `g`, times `α!`.
fn exp_taylor_derivatives<T: Real>(g: &[T], s: usize, log_step: T) -> Vec<T> {
    // coefficients of exp(g - g0) in the scaled variable, E_0 = 1
    let mut e = vec![T::zero(); s + 1];
    e[0] = T::one();
    for k in 1..=s {
        let mut acc = T::zero();
        for j in 1..=k.min(g.len() - 1) {
            acc = acc + T::of_usize(j) * g[j] * e[k - j];
        }
        e[k] = acc / T::of_usize(k);
    }
    let lf: Vec<T> = ln_factorials(s);
    (0..=s)
        .map(|a| {
            if e[a] == T::zero() {
                T::zero()
            } else {
                let l = g[0] + lf[a] + e[a].abs().ln() - T::of_usize(a) * log_step;
                e[a].signum() * l.exp()
            }
        })
        .collect()
}

/// Derivatives of `e^{-x^{2n}}` via the binomial expansion of `(x + h)^{2n}`.
fn flat_k_derivatives<T: Real>(n: u32, x: T, s: usize) -> Vec<T> {
    let p = 2 * n as usize;
    let mut g = vec![T::zero(); s.max(p) + 1];
    let mut binom = T::one();
    for j in 0..=p {
        let pw = if p - j == 0 { T::one() } else { x.powi((p - j) as i32) };
        if j < g.len() {
            g[j] = -(binom * pw);
        }
        binom = binom * T::of_usize(p - j) / T::of_usize(j + 1);
    }
    exp_taylor_derivatives(&g, s, T::zero())
}

/// Derivatives of the bump `exp(−(1−y²)^{−σ})` at `y`.
///
/// The Taylor variable is rescaled by `q0 = 1 − y²` so the coefficients stay bounded near the edge.
pub fn bump_derivatives<T: Real>(sigma: T, y: T, s: usize) -> Vec<T> {
    let q0 = T::one() - y * y;
    if q0 <= T::zero() {
        return vec![T::zero(); s + 1];
    }
    let step = q0.min(T::one());
    // q(η) = q0 − 2y·step·η − step²·η²
    let q = [q0, -(T::of(2.0) * y * step), -(step * step)];
    let a = -sigma;
    let mut p = vec![T::zero(); s + 1];
    p[0] = q0.powf(a);
    for k in 1..=s {
        let mut acc = T::zero();
        for j in 1..=k.min(2) {
            acc = acc + ((a + T::one()) * T::of_usize(j) - T::of_usize(k)) * q[j] * p[k - j];
        }
        p[k] = acc / (T::of_usize(k) * q0);
    }
    let g: Vec<T> = p.iter().map(|&v| -v).collect();
    exp_taylor_derivatives(&g, s, step.ln())
}

/// `f^{(α)}(x) = α!/(r^α M) Σ_j f(x + r e^{iθ_j}) e^{-iαθ_j}` on `M` equispaced nodes.
pub fn cauchy_derivatives<T: Real>(f: impl Fn(Complex<T>) -> Complex<T>, x: T, r: T, s: usize) -> Vec<T> {
    let m = (4 * (s + 1)).max(128);
    let two_pi = T::PI() + T::PI();
    let samples: Vec<(T, Complex<T>)> = (0..m)
        .map(|j| {
            let th = two_pi * T::of_usize(j) / T::of_usize(m);
            (th, f(Complex::new(x + r * th.cos(), r * th.sin())))
        })
        .collect();
    let lf: Vec<T> = ln_factorials(s);
    (0..=s)
        .map(|a| {
            let acc = samples.iter().fold(T::zero(), |acc, &(th, v)| {
                let ang = T::of_usize(a) * th;
                acc + v.re * ang.cos() + v.im * ang.sin()
            });
            acc / T::of_usize(m) * (lf[a] - T::of_usize(a) * r.ln()).exp()
        })
        .collect()
}
