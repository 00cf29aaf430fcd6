//! Sup norms on the annulus `1/λ <= |z| <= λ` and the weighted coefficient sup.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::coefficients::{FourierSeq, TailCertificate};
use crate::error::{Error, Result};
use crate::logdomain::{ext_real, log_add, LogComplex};
use crate::sequences::{ultra_seminorm, SeminormNet, Thresholds, UltraNormEstimate, WeightSequence};

/// Default number of boundary points per circle.
pub const THETA_GRID: usize = 4096;

/// Both annulus norms of one coefficient sequence, as logarithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusNorms {
    pub lambda: f64,
    /// Max of `|f|` over the θ-grid on `|z| = λ` and `|z| = 1/λ`.
    #[serde(with = "ext_real")]
    pub q_val: f64,
    /// Upper bound on the true sup: grid max inflated by the resolution factor plus the certified tail.
    #[serde(with = "ext_real")]
    pub q_upper: f64,
    /// `ln 1/(1 − πD/N)` for degree `D` on `N` points.
    pub grid_resolution: f64,
    /// `ln Σ_{|k|>K} λ^{|k|}|c_k|` from the tail certificate.
    #[serde(with = "ext_real")]
    pub tail: f64,
    pub grid: usize,
    #[serde(with = "ext_real")]
    pub qhat_val: f64,
}

/// `ln max_j |Σ_k a_k e^{ikθ_j}|` on `grid` equispaced points, for `a_k` given in log-polar form.
fn boundary_max(c: &FourierSeq, ln_scale: impl Fn(i64) -> f64, grid: usize) -> f64 {
    let k = c.k_max() as i64;
    let shifted: Vec<(i64, f64, f64)> = c
        .coefficients()
        .iter()
        .enumerate()
        .filter(|(_, z)| !z.is_zero())
        .map(|(i, z)| {
            let idx = i as i64 - k;
            (idx, z.ln_abs + ln_scale(idx), z.arg)
        })
        .collect();
    let hi = shifted.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    let mut buf = vec![Complex::new(0.0, 0.0); grid];
    for &(idx, l, arg) in &shifted {
        buf[idx.rem_euclid(grid as i64) as usize] += Complex::from_polar((l - hi).exp(), arg);
    }
    FftPlanner::<f64>::new().plan_fft_inverse(grid).process(&mut buf);
    let m = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    hi + m.ln()
}

/// Grid size: at least `min_grid`, a power of two, above `2D + 1`.
fn grid_for(degree: u64, min_grid: usize) -> usize {
    let need = (4 * degree as usize + 2).next_power_of_two();
    min_grid.next_power_of_two().max(need)
}

/// `q^λ(f) = sup_{1/λ <= |z| <= λ} |f(z)|` on a θ-grid of at least `min_grid` points.
pub fn q_norm_on(c: &FourierSeq, lambda: f64, min_grid: usize) -> Result<AnnulusNorms> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidParameter(format!("λ must exceed 1, got {lambda}")));
    }
    let tail = c.tail().ln_weighted_tail(c.k_max(), lambda);
    if tail == f64::INFINITY {
        return Err(Error::TailUncertified { lambda });
    }
    let degree = c.degree().unwrap_or(0);
    let grid = grid_for(degree, min_grid);
    let ll = lambda.ln();
    let outer = boundary_max(c, |k| k as f64 * ll, grid);
    let inner = boundary_max(c, |k| -(k as f64) * ll, grid);
    let q_val = outer.max(inner);
    let grid_resolution = -(-(std::f64::consts::PI * degree as f64 / grid as f64)).ln_1p();
    Ok(AnnulusNorms {
        lambda,
        q_val,
        q_upper: log_add(q_val + grid_resolution, tail),
        grid_resolution,
        tail,
        grid,
        qhat_val: qhat_norm(c, lambda),
    })
}

pub fn q_norm(c: &FourierSeq, lambda: f64) -> Result<AnnulusNorms> {
    q_norm_on(c, lambda, THETA_GRID)
}

/// `ln sup_k λ^{|k|}|c_k|` over the stored coefficients.
pub fn qhat_norm(c: &FourierSeq, lambda: f64) -> f64 {
    let k = c.k_max() as i64;
    let ll = lambda.ln();
    c.coefficients()
        .iter()
        .enumerate()
        .map(|(i, z)| z.ln_abs + (i as i64 - k).unsigned_abs() as f64 * ll)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// [`qhat_norm`] extended by the certified sup beyond `K` (`+inf` without a certificate).
pub fn qhat_norm_certified(c: &FourierSeq, lambda: f64) -> f64 {
    qhat_norm(c, lambda).max(c.tail().ln_weighted_sup(c.k_max(), lambda))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleNorm {
    Q,
    Qhat,
}

/// `limsup_n p(f_n)^{r(n)}` for `p = q^λ` or `q̂^λ`.
pub fn ultra_norm_circle(
    net: &[(u64, FourierSeq)],
    w: &WeightSequence<f64>,
    lambda: f64,
    which: CircleNorm,
    th: &Thresholds,
) -> Result<UltraNormEstimate> {
    let logs: Result<Vec<(u64, f64)>> = net
        .par_iter()
        .map(|(n, f)| {
            let v = match which {
                CircleNorm::Q => q_norm(f, lambda)?.q_val,
                CircleNorm::Qhat => qhat_norm_certified(f, lambda),
            };
            Ok((*n, v))
        })
        .collect();
    ultra_seminorm(&SeminormNet::from_logs(logs?)?, w, th)
}

/// `C(λ, μ) = 1 / Σ_k (μ/λ)^{|k|}`, as a logarithm.
pub fn ln_chain_constant(lambda: f64, mu: f64) -> f64 {
    let t = mu / lambda;
    -((1.0 + t) / (1.0 - t)).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub n: u64,
    #[serde(with = "ext_real")]
    pub q_mu: f64,
    #[serde(with = "ext_real")]
    pub qhat_lambda: f64,
    #[serde(with = "ext_real")]
    pub q_lambda: f64,
    /// `ln q̂^λ − ln q^λ` with the certified tail added to `q^λ`; nonpositive when the Cauchy bound holds.
    #[serde(with = "ext_real")]
    pub cauchy_gap: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub mu: f64,
    pub lambda: f64,
    pub ln_c: f64,
    pub rows: Vec<ChainRow>,
    pub q_mu: UltraNormEstimate,
    pub qhat_lambda: UltraNormEstimate,
    pub q_lambda: UltraNormEstimate,
    /// Allowance in the final window: estimator slack plus `|ln C| r(ceil(N/2))`.
    pub slack: f64,
    pub ultra_chain_holds: bool,
}

/// Relative tolerance on the per-n comparisons.
const CHAIN_RTOL: f64 = 1e-12;

/// Checks `C q^μ(f_n) <= q̂^λ(f_n) <= q^λ(f_n)` for every `n` and the induced chain of ultra-norms.
pub fn prop_aba_check(
    net: &[(u64, FourierSeq)],
    mu: f64,
    lambda: f64,
    w: &WeightSequence<f64>,
    th: &Thresholds,
) -> Result<ChainReport> {
    if !(1.0 < mu && mu < lambda) {
        return Err(Error::InvalidParameter(format!("need 1 < μ < λ, got μ = {mu}, λ = {lambda}")));
    }
    let ln_c = ln_chain_constant(lambda, mu);
    let tol = |x: f64| CHAIN_RTOL * x.abs().max(1.0);
    let rows: Result<Vec<ChainRow>> = net
        .par_iter()
        .map(|(n, f)| {
            let a = q_norm(f, mu)?;
            let b = q_norm(f, lambda)?;
            let qhat = qhat_norm_certified(f, lambda);
            // discrete Cauchy: λ^{|k|}|c_k| is an average of grid values when N > 2K
            let q_lambda = log_add(b.q_val, b.tail);
            let cauchy_gap = if qhat == f64::NEG_INFINITY { f64::NEG_INFINITY } else { qhat - q_lambda };
            let left = a.q_val == f64::NEG_INFINITY || ln_c + a.q_val <= qhat + tol(qhat);
            let right = qhat == f64::NEG_INFINITY || qhat <= q_lambda + tol(q_lambda);
            Ok(ChainRow {
                n: *n,
                q_mu: a.q_val,
                qhat_lambda: qhat,
                q_lambda: b.q_val,
                cauchy_gap,
                holds: left && right,
            })
        })
        .collect();
    let rows = rows?;
    if let Some(bad) = rows.iter().find(|r| !r.holds) {
        return Err(Error::BoundViolated(format!(
            "chain fails at n = {}: ln q^μ = {}, ln q̂^λ = {}, ln q^λ = {}",
            bad.n, bad.q_mu, bad.qhat_lambda, bad.q_lambda
        )));
    }
    let net_of = |f: fn(&ChainRow) -> f64| SeminormNet::from_logs(rows.iter().map(|r| (r.n, f(r))).collect());
    let e_mu = ultra_seminorm(&net_of(|r| r.q_mu)?, w, th)?;
    let e_hat = ultra_seminorm(&net_of(|r| r.qhat_lambda)?, w, th)?;
    let e_lam = ultra_seminorm(&net_of(|r| r.q_lambda)?, w, th)?;
    let n_max = rows.iter().map(|r| r.n).max().unwrap_or(1);
    let slack = e_hat.slack + ln_c.abs() * w.r(n_max.div_ceil(2));
    let le = |a: f64, b: f64| a == f64::NEG_INFINITY || a <= b + slack;
    let ultra_chain_holds = le(e_mu.l_hat, e_hat.l_hat) && le(e_hat.l_hat, e_lam.l_hat);
    Ok(ChainReport {
        mu,
        lambda,
        ln_c,
        rows,
        q_mu: e_mu,
        qhat_lambda: e_hat,
        q_lambda: e_lam,
        slack,
        ultra_chain_holds,
    })
}

/// Net `n ↦ f_n` of Laurent polynomials on `|k| <= k_max` with exact tails, drawn from `draw` (uniform on `[0, 1)`).
///
/// `|c_k(n)| = s ρ^{−|k|} e^{g√n} e^{j_k}` with `ρ ∈ [1.2, 4)`, `g ∈ [−1, 1)`, `ln s ∈ [−2, 2)`,
/// per-coefficient jitter `j_k ∈ [−½, ½)` and uniform phases.
pub fn random_laurent_net(draw: &mut impl FnMut() -> f64, k_max: u64, n_max: u64) -> Vec<(u64, FourierSeq)> {
    let ln_rho = (1.2 + 2.8 * draw()).ln();
    let g = 2.0 * draw() - 1.0;
    let ln_s = 4.0 * draw() - 2.0;
    let k = k_max as i64;
    (1..=n_max)
        .map(|n| {
            let coefficients = (-k..=k)
                .map(|i| {
                    let l = ln_s + g * (n as f64).sqrt() - i.unsigned_abs() as f64 * ln_rho + draw() - 0.5;
                    LogComplex::from_polar_log(l, std::f64::consts::TAU * draw() - std::f64::consts::PI)
                })
                .collect();
            (n, FourierSeq::from_coefficients(coefficients, TailCertificate::Exact).expect("odd length"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::coefficients::CoeffGenerator;

    #[test]
    fn constant_and_monomial() {
        let one = FourierSeq::sparse(3, &[(0, 1.0)]).unwrap();
        let n = q_norm(&one, 2.0).unwrap();
        assert!(n.q_val.abs() < 1e-14 && n.qhat_val == 0.0);
        let z = FourierSeq::sparse(3, &[(1, 1.0)]).unwrap();
        let n = q_norm(&z, 2.0).unwrap();
        assert!((n.q_val - 2f64.ln()).abs() < 1e-14);
        assert!((n.qhat_val - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_sided_geometric() {
        let c = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: -3f64.ln(), p: 1.0 }, 200);
        let n = q_norm(&c, 2.0).unwrap();
        assert!(n.qhat_val.abs() < 1e-14);
        // Σ_{k>=0} (2/3)^k + Σ_{k>=1} 6^{−k} = 3.2 at θ = 0 on either circle
        assert!((n.q_val.exp() - 3.2).abs() < 1e-12, "{}", n.q_val.exp());
        assert!(n.tail < -70.0);
    }

    #[test]
    fn uncertified_tail_is_rejected() {
        let c = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: 1.0, p: 0.5 }, 64);
        assert!(matches!(q_norm(&c, 1.5), Err(Error::TailUncertified { .. })));
        assert_eq!(qhat_norm_certified(&c, 1.5), f64::INFINITY);
        assert!(qhat_norm(&c, 1.5).is_finite());
    }

    #[test]
    fn refined_grid_stays_within_resolution_bound() {
        let c =
            FourierSeq::from_generator(CoeffGenerator::OneSided { ratio: 0.8 }, 150).with_tail(TailCertificate::Exact);
        let coarse = q_norm_on(&c, 1.1, 512).unwrap();
        let fine = q_norm_on(&c, 1.1, 1024).unwrap();
        assert!(fine.q_val - coarse.q_val <= coarse.grid_resolution);
    }

    #[test]
    fn huge_coefficients_stay_finite() {
        let c = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: 1.0, p: 2.0 }, 1000)
            .with_tail(TailCertificate::Exact);
        let n = q_norm(&c, 1.5).unwrap();
        assert!(n.q_val > 1e6 && n.q_val.is_finite());
        assert!(n.q_val >= n.qhat_val - 1e-6);
    }

    #[test]
    fn chain_on_inverse_linear() {
        let f = FourierSeq::from_generator(CoeffGenerator::OneSided { ratio: -1.0 / 3.0 }, 120);
        let net: Vec<(u64, FourierSeq)> = (1..=64).map(|n| (n, f.clone())).collect();
        let w = WeightSequence::new(2.0).unwrap();
        let r = prop_aba_check(&net, 1.5, 2.0, &w, &Thresholds::default()).unwrap();
        assert!(r.ultra_chain_holds);
        // 1/(1+z/3) on |z| = 1.5 peaks at 2
        assert!((r.rows[0].q_mu - 2f64.ln()).abs() < 1e-12);
        assert!(r.rows[0].qhat_lambda.abs() < 1e-15);
        assert!((r.rows[0].q_lambda - 3f64.ln()).abs() < 1e-12);
        assert_eq!(r.qhat_lambda.verdict, crate::sequences::Verdict::Moderate);
    }

    #[test]
    fn zero_net_chain() {
        let z = FourierSeq::sparse(2, &[]).unwrap();
        let net: Vec<(u64, FourierSeq)> = (1..=32).map(|n| (n, z.clone())).collect();
        let w = WeightSequence::new(2.0).unwrap();
        let r = prop_aba_check(&net, 1.5, 2.0, &w, &Thresholds::default()).unwrap();
        for e in [&r.q_mu, &r.qhat_lambda, &r.q_lambda] {
            assert_eq!(e.value, 0.0);
        }
    }
}
