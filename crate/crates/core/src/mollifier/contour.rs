//! Samples of `φ^{(s)}(t) = (1/2π) ∫ w(ξ) (−iξ)^s e^{−itξ} dξ` for the flat profiles `w`.
//!
//! The ξ-line is moved to `Im ξ = −Y` (`Y ≥ 0` for `t ≥ 0`), which factors out `e^{−tY}` and keeps
//! relative accuracy where `φ` is exponentially small. For the entire profiles (`k_g`, and `h_1`)
//! `Y` follows the height of the saddle point; for `h_g` with `g ≥ 2` it stays below the branch points.

use num_complex::Complex64;

use super::flat::{log_h, log_h_complex, log_k, log_k_complex};
use super::MollifierKind;
use crate::quadrature::{breaks_with, composite, gauss_legendre, Rule};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Integrand magnitudes below `e^{-CUT}` relative to the peak are dropped.
const CUT: f64 = 60.0;
const U_NODES: usize = 24;

/// The profile `w = h_g` (pow) or `w = k_g` (der).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Profile {
    pub kind: MollifierKind,
    pub g: u32,
}

/// `φ^{(s)}(t)` for `s = 0..=s_max` with error indicators.
#[derive(Clone, Debug)]
pub struct Sample {
    pub values: Vec<f64>,
    /// `(1/2π) Σ |weight · integrand|` per order, the scale of rounding errors.
    pub l1: Vec<f64>,
    /// `|Im|` of the order-0 sum relative to `l1[0]`.
    pub imag_residue: f64,
}

impl Profile {
    pub fn new(kind: MollifierKind, g: u32) -> Self {
        assert!(g >= 1, "profile index starts at 1");
        Self { kind, g }
    }

    pub fn log_w(&self, z: Complex64) -> Complex64 {
        match self.kind {
            MollifierKind::Pow => log_h_complex(self.g, z),
            MollifierKind::Der => log_k_complex(self.g, z),
        }
    }

    pub fn log_w_real(&self, x: f64) -> f64 {
        match self.kind {
            MollifierKind::Pow => log_h(self.g, x),
            MollifierKind::Der => log_k(self.g, x),
        }
    }

    /// Point where `w` falls off: `|ξ| = g` for `h_g`, `|ξ| = 1` for `k_g`.
    pub fn transition(&self) -> f64 {
        match self.kind {
            MollifierKind::Pow => self.g as f64,
            MollifierKind::Der => 1.0,
        }
    }

    /// Dominant angular frequency of `φ`.
    pub fn frequency(&self) -> f64 {
        self.transition()
    }

    /// Height `Y` of the integration line for `|t|`.
    pub fn shift(&self, t: f64) -> f64 {
        let t = t.abs();
        if self.g == 1 {
            return t / 2.0;
        }
        match self.kind {
            MollifierKind::Pow => t.min(1.0),
            MollifierKind::Der => {
                // saddle height, capped so that |arg z^{2g}| ≤ π/4 for Re z ≥ 1 keeps the line tails tame
                let g = self.g as f64;
                let q = 2.0 * g - 1.0;
                let saddle = (t / (2.0 * g)).powf(1.0 / q) * (std::f64::consts::PI / (2.0 * q)).sin();
                saddle.min((std::f64::consts::PI / (8.0 * g)).tan())
            }
        }
    }

    fn line_log_abs(&self, u: f64, y: f64) -> f64 {
        self.log_w(Complex64::new(u, -y)).re
    }

    /// Half-width `U` beyond which `|w(u − iY)|` stays below `e^{-CUT}` times its peak, and the peak log.
    pub fn extent(&self, y: f64) -> (f64, f64) {
        let u_min = match self.kind {
            MollifierKind::Pow => self.transition(),
            MollifierKind::Der => self.transition().max(4.0 * self.g as f64 * y / std::f64::consts::PI),
        };
        let peak = (0..=64).map(|i| self.line_log_abs(u_min * i as f64 / 64.0, y)).fold(f64::NEG_INFINITY, f64::max);
        let mut u = u_min;
        let mut step = 0.01 * u_min;
        loop {
            let here = self.line_log_abs(u, y);
            let next = self.line_log_abs(u + step, y);
            if here < peak - CUT && next < here {
                return (u, peak);
            }
            u += step;
            step *= 1.25;
        }
    }

    /// Composite rule on `[-U, U]` for frequency `t` with panel width at most `h`.
    fn u_rule(&self, t: f64, y: f64, refine: usize) -> Rule<f64> {
        let (u_max, _) = self.extent(y);
        let base_h = match self.kind {
            // branch points sit within ~0.6 of the line near |u| = g
            MollifierKind::Pow => 0.25,
            MollifierKind::Der => 0.5 / self.g as f64,
        };
        let osc_h = if t > 0.0 { 6.0 * std::f64::consts::PI / t } else { f64::INFINITY };
        let h = base_h.min(osc_h) / refine as f64;
        let tr = self.transition();
        composite(&breaks_with(-u_max, u_max, h, &[-tr, 0.0, tr]), &gauss_legendre(U_NODES))
    }

    /// `φ^{(s)}(t)` for `s = 0..=s_max`.
    pub fn sample(&self, t: f64, s_max: usize) -> Sample {
        self.sample_refined(t, s_max, 1)
    }

    /// As [`sample`](Self::sample) with `u`-panels split `refine` times.
    pub fn sample_refined(&self, t: f64, s_max: usize, refine: usize) -> Sample {
        let neg = t < 0.0;
        let ta = t.abs();
        let y = self.shift(ta);
        let rule = self.u_rule(ta, y, refine);
        let mut logs = Vec::with_capacity(rule.len());
        let mut zs = Vec::with_capacity(rule.len());
        let mut peak = f64::NEG_INFINITY;
        for &u in &rule.x {
            let z = Complex64::new(u, -y);
            let l = self.log_w(z) + Complex64::new(0.0, -ta) * z;
            peak = peak.max(l.re);
            logs.push(l);
            zs.push(z);
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); s_max + 1];
        let mut l1 = vec![0.0; s_max + 1];
        for ((l, z), &w) in logs.iter().zip(&zs).zip(&rule.w) {
            if l.re < peak - 2.0 * CUT {
                continue;
            }
            let mut p = (l - peak).exp() * w;
            let step = Complex64::new(z.im, -z.re); // −i z
            let za = z.norm();
            let mut mag = p.norm();
            for s in 0..=s_max {
                acc[s] += p;
                l1[s] += mag;
                p *= step;
                mag *= za;
            }
        }
        let scale = peak.exp() / TWO_PI;
        let sign = |s: usize| if neg && s % 2 == 1 { -1.0 } else { 1.0 };
        let imag_residue = if l1[0] > 0.0 { acc[0].im.abs() / l1[0] } else { 0.0 };
        Sample {
            values: acc.iter().enumerate().map(|(s, a)| sign(s) * a.re * scale).collect(),
            l1: l1.iter().map(|v| v * scale).collect(),
            imag_residue,
        }
    }

    /// `C = ∫ |w(u − iY)| du`, so that `|φ(t)| ≤ C e^{−tY} / 2π` for every `t ≥ 0`.
    pub fn line_mass(&self, y: f64) -> f64 {
        let (u_max, _) = self.extent(y);
        let h = match self.kind {
            MollifierKind::Pow => 0.5,
            MollifierKind::Der => 0.5 / self.g as f64,
        };
        let tr = self.transition();
        let rule = composite(&breaks_with(-u_max, u_max, h, &[-tr, tr]), &gauss_legendre(U_NODES));
        // the dropped tails are below e^{-CUT} of the peak; a 1% allowance covers them and the rule error
        1.01 * rule.integrate(|u| self.line_log_abs(u, y).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_profile_matches_closed_form() {
        // FT(e^{-ξ²})(t) / 2π = e^{-t²/4} / (2√π)
        let p = Profile::new(MollifierKind::Pow, 1);
        for &t in &[0.0, 0.7, 3.0, 12.0, 30.0] {
            let s = p.sample(t, 2);
            let exact = (-t * t / 4.0f64).exp() / (2.0 * std::f64::consts::PI.sqrt());
            assert!((s.values[0] - exact).abs() <= 1e-13 * exact, "t={t}: {} vs {exact}", s.values[0]);
            let d1 = -t / 2.0 * exact;
            assert!((s.values[1] - d1).abs() <= 1e-12 * exact.max(d1.abs()) + 1e-300);
        }
    }

    #[test]
    fn der_profile_matches_real_line_quadrature() {
        let p = Profile::new(MollifierKind::Der, 3);
        let rule = composite(&crate::quadrature::uniform_breaks(-2.0, 2.0, 400), &gauss_legendre::<f64>(16));
        for &t in &[0.0, 1.3, 5.0, 9.0] {
            let direct = rule.integrate(|x| (-(x.powi(6))).exp() * (t * x).cos()) / TWO_PI;
            let s = p.sample(t, 0);
            assert!((s.values[0] - direct).abs() < 1e-14, "t={t}");
            assert!(s.imag_residue < 1e-13);
        }
    }

    #[test]
    fn pow_profile_matches_real_line_quadrature() {
        let p = Profile::new(MollifierKind::Pow, 4);
        let rule = composite(&crate::quadrature::uniform_breaks(-20.0, 20.0, 800), &gauss_legendre::<f64>(16));
        for &t in &[0.0, 0.9, 2.5, 6.0] {
            let direct = rule.integrate(|x| log_h(4, x).exp() * (t * x).cos()) / TWO_PI;
            let s = p.sample(t, 0);
            assert!((s.values[0] - direct).abs() < 1e-14, "t={t}: {} vs {direct}", s.values[0]);
        }
    }

    #[test]
    fn derivative_orders_obey_parity() {
        let p = Profile::new(MollifierKind::Der, 5);
        let a = p.sample(2.3, 5);
        let b = p.sample(-2.3, 5);
        for s in 0..=5 {
            let sign = if s % 2 == 1 { -1.0 } else { 1.0 };
            assert_eq!(a.values[s] * sign, b.values[s]);
        }
    }

    #[test]
    fn refinement_pair_agrees() {
        for p in [Profile::new(MollifierKind::Der, 13), Profile::new(MollifierKind::Pow, 13)] {
            for &t in &[0.5, 20.0, 200.0] {
                let a = p.sample(t, 0);
                let b = p.sample_refined(t, 0, 2);
                assert!((a.values[0] - b.values[0]).abs() <= 1e-13 * a.l1[0], "{p:?} t={t}");
            }
        }
    }
}
