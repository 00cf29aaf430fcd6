//! Minimum of `φ(t) = ρ^{−t} t^{m(t+½)} e^{−mt}` over `t >= ½`.
//!
//! The stationary point solves `ln t + 1/(2t) = ln R` with `R = ρ^{1/m}`. Writing
//! `t = R − ½ − ε` keeps the small offset `ε` representable when `R` is large, and all
//! bound margins below are formed from `ε` and `t` without cancelling large terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizerResult {
    pub m: f64,
    pub rho: f64,
    pub t_rho: f64,
    /// `ρ^{1/m} − t_ρ − ½`.
    pub offset: f64,
    /// `ln φ(t_ρ)` from `½ ln ρ − m(t_ρ + ½ + 1/(4t_ρ))`.
    pub ln_phi: f64,
    /// `ln φ(t_ρ)` evaluated term by term.
    pub ln_phi_direct: f64,
    /// `|ln t_ρ + 1/(2t_ρ) − (1/m) ln ρ|`.
    pub residual: f64,
    pub iterations: usize,
    pub bounds: MinimizerBounds,
}

/// Every entry is `right − left` of an inequality that should be strictly positive
/// (nonnegative for the last one).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizerBounds {
    /// `ρ^{1/m} − t_ρ − ½`.
    pub gap_lower: f64,
    /// `½ e^{1/(2t_ρ)} − (ρ^{1/m} − t_ρ)`.
    pub gap_upper: f64,
    /// `ln φ(t_ρ) − ln(√ρ e^{−m/2} e^{−mρ^{1/m}})`.
    pub phi_lower: f64,
    /// `ln(√ρ e^{−mρ^{1/m}}) − ln φ(t_ρ)`.
    pub phi_upper: f64,
    /// `|ln φ closed − ln φ direct| / |ln φ direct|`.
    pub closed_form_rel: f64,
    /// `ln(√ρ e^{−mρ^{1/m}}) − ln φ(ρ^{1/m} + ½)`.
    pub shifted_margin: f64,
}

impl MinimizerBounds {
    pub fn lemma_holds(&self) -> bool {
        self.gap_lower > 0.0 && self.gap_upper > 0.0 && self.phi_lower > 0.0 && self.phi_upper > 0.0
    }

    pub fn shifted_bound_holds(&self) -> bool {
        self.shifted_margin >= 0.0
    }
}

/// `ψ(t) = ln φ(t)`.
pub fn ln_phi(m: f64, rho: f64, t: f64) -> f64 {
    -t * rho.ln() + m * (t + 0.5) * t.ln() - m * t
}

/// `ψ''(t) = (m/t)(1 − 1/(2t))`.
pub fn ln_phi_second_derivative(m: f64, t: f64) -> f64 {
    m / t * (1.0 - 0.5 / t)
}

/// `ln(1 + y)/y − 1`, accurate for small `y`.
fn ln1p_ratio_minus_one(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        y * (-0.5 + y * (1.0 / 3.0 - y * 0.25))
    } else {
        y.ln_1p() / y - 1.0
    }
}

/// `S(x) = −(ln(1 − x) + x)/x² = Σ_{j>=2} x^{j−2}/j`.
fn log_remainder(x: f64) -> f64 {
    if x < 1e-3 {
        0.5 + x * (1.0 / 3.0 + x * (0.25 + x * 0.2))
    } else {
        -((-x).ln_1p() + x) / (x * x)
    }
}

/// Solves the stationarity equation by Newton in the offset `ε`, bracketed by bisection.
pub fn lemma_aaa_minimize(m: f64, rho: f64) -> Result<MinimizerResult> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidParameter(format!("m must lie in (0, 1), got {m}")));
    }
    if !(rho > std::f64::consts::E) {
        return Err(Error::InvalidParameter(format!("ρ must exceed e, got {rho}")));
    }
    let ln_r = rho.ln() / m;
    let r = ln_r.exp();
    let t_of = |eps: f64| (r - 0.5) - eps;
    // R (ln t + 1/(2t) − ln R) with x = (½ + ε)/R; ln(1 − x) + x = −x² S(x) and R x² = (½ + ε) x
    let g = |eps: f64| {
        let x = (0.5 + eps) / r;
        -(0.5 + eps) * x * log_remainder(x) + 0.5 * x / (1.0 - x) - eps
    };
    // dg/dε = −(R/t)(1 − 1/(2t)) < 0 on t > ½
    let dg = |eps: f64| -r * ln_phi_second_derivative(1.0, t_of(eps));
    // g(−½) = ½ > 0 and g < 0 at t = ½
    let (mut lo, mut hi) = (-0.5, r - 1.0);
    let mut eps = (0.125 / r).min(0.5 * hi);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let v = g(eps);
        if v == 0.0 {
            converged = true;
            break;
        }
        if v > 0.0 {
            lo = eps;
        } else {
            hi = eps;
        }
        let mut next = eps - v / dg(eps);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - eps).abs();
        eps = next;
        if step <= 4.0 * f64::EPSILON * eps.abs() || hi - lo <= 4.0 * f64::EPSILON * eps.abs() {
            converged = true;
            break;
        }
    }
    let t = t_of(eps);
    let residual = (t.ln() + 0.5 / t - ln_r).abs();
    if !converged || residual >= RESIDUAL_TOL {
        return Err(Error::NewtonStall { iterations, residual });
    }
    let ln_phi_closed = 0.5 * rho.ln() - m * (t + 0.5 + 0.25 / t);
    let ln_phi_direct = ln_phi(m, rho, t);
    let gap = 0.5 + eps;
    let bounds = MinimizerBounds {
        gap_lower: eps,
        gap_upper: 0.5 * (0.5 / t).exp_m1() - eps,
        phi_lower: m * (gap - 0.25 / t),
        phi_upper: m * (0.25 / t - eps),
        closed_form_rel: (ln_phi_closed - ln_phi_direct).abs() / ln_phi_direct.abs().max(f64::MIN_POSITIVE),
        // ψ(R+½) − (½ ln ρ − mR) = m((R+1) ln(1 + y) − ½) = m(½(ln(1 + y)/y − 1) + ln(1 + y)), y = 1/(2R)
        shifted_margin: -m * (0.5 * ln1p_ratio_minus_one(0.5 / r) + (0.5 / r).ln_1p()),
    };
    if !bounds.lemma_holds() {
        return Err(Error::BoundViolated(format!("m = {m}, ρ = {rho}: {bounds:?}")));
    }
    Ok(MinimizerResult {
        m,
        rho,
        t_rho: t,
        offset: eps,
        ln_phi: ln_phi_closed,
        ln_phi_direct,
        residual,
        iterations,
        bounds,
    })
}
