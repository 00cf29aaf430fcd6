//! Hyperfunctions on the circle as nets of Fourier partial sums.

use serde::{Deserialize, Serialize};

use super::classify::{classify_circle_object, CircleClass, CircleClassification, TAU_C};
use super::coefficients::{project_partial_sum, FourierSeq};
use super::norms::{qhat_norm, ultra_norm_circle, CircleNorm};
use crate::error::{Error, Result};
use crate::logdomain::log_add;
use crate::sequences::{ultra_seminorm, SeminormNet, Thresholds, UltraNormEstimate, Verdict, WeightSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub lambda: f64,
    pub n_max: u64,
    pub growth: CircleClassification,
    pub estimate: UltraNormEstimate,
    /// `ln λ²`.
    pub bound: f64,
    /// `estimate.l_hat <= bound + estimate.slack`.
    pub within_bound: bool,
}

/// Net `h_n = H ∗ ψ_n` for `n = 1..=n_max`.
pub fn partial_sum_net(h: &FourierSeq, w: &WeightSequence<f64>, n_max: u64) -> Result<Vec<(u64, FourierSeq)>> {
    (1..=n_max).map(|n| Ok((n, project_partial_sum(h, n, w)?))).collect()
}

/// Builds `h_n = H ∗ ψ_n` and bounds `⟨⟨h⟩⟩` under `q̂^λ` by `λ²`.
pub fn embed_hyperfunction(
    h: &FourierSeq,
    w: &WeightSequence<f64>,
    lambda: f64,
    n_max: u64,
    th: &Thresholds,
) -> Result<EmbeddingReport> {
    let growth = classify_circle_object(h, TAU_C)?;
    if !matches!(growth.class, CircleClass::Analytic | CircleClass::Hyperfunction) || growth.estimate >= lambda {
        return Err(Error::GrowthUncertified(format!(
            "{:?} with root-test estimate {} at λ = {lambda}",
            growth.class, growth.estimate
        )));
    }
    let net = partial_sum_net(h, w, n_max)?;
    let estimate = ultra_norm_circle(&net, w, lambda, CircleNorm::Qhat, th)?;
    let bound = 2.0 * lambda.ln();
    let within_bound = estimate.l_hat <= bound + estimate.slack;
    Ok(EmbeddingReport { lambda, n_max, growth, estimate, bound, within_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub lambda: f64,
    /// `f − f ∗ ψ_n` under `q̂^λ`.
    pub tail: UltraNormEstimate,
    /// Majorant of `q̂^λ((f∗ψ_n)(g∗ψ_n) − fg)` when a partner is given.
    pub product: Option<UltraNormEstimate>,
    pub verdict: Verdict,
}

/// `ln q̂^λ` of the Laurent product defect, bounded by `T_f(c) S_g + S_f T_g(c)`
/// with `S = Σ_k λ^{|k|}|c_k|` and `T(c)` the same sum over `|k| > c`.
fn ln_product_defect(f: &FourierSeq, g: &FourierSeq, cutoff: u64, lambda: f64) -> f64 {
    let (sf, sg) = (f.ln_weighted_l1_beyond(0, lambda), g.ln_weighted_l1_beyond(0, lambda));
    let (sf, sg) = (log_add(sf, f.ln_abs(0)), log_add(sg, g.ln_abs(0)));
    let (tf, tg) = (f.ln_weighted_l1_beyond(cutoff, lambda), g.ln_weighted_l1_beyond(cutoff, lambda));
    log_add(tf + sg, sf + tg)
}

/// Requires the tail net `f − f∗ψ_n` (and the product defect, if `g` is given) to be null under `q̂^λ`.
pub fn embedding_consistency_check(
    f: &FourierSeq,
    g: Option<&FourierSeq>,
    w: &WeightSequence<f64>,
    lambda: f64,
    n_max: u64,
    th: &Thresholds,
) -> Result<ConsistencyReport> {
    let cutoffs: Vec<(u64, u64)> = (1..=n_max).map(|n| (n, w.cutoff(n))).collect();
    let tail_net = cutoffs.iter().map(|&(n, c)| (n, f.ln_weighted_sup_beyond(c, lambda))).collect();
    let tail = ultra_seminorm(&SeminormNet::from_logs(tail_net)?, w, th)?;
    let product = match g {
        Some(g) => {
            let net = cutoffs.iter().map(|&(n, c)| (n, ln_product_defect(f, g, c, lambda))).collect();
            Some(ultra_seminorm(&SeminormNet::from_logs(net)?, w, th)?)
        }
        None => None,
    };
    let all_null = tail.verdict == Verdict::Null && product.as_ref().is_none_or(|p| p.verdict == Verdict::Null);
    let verdict = if all_null {
        Verdict::Null
    } else if tail.verdict != Verdict::Null {
        tail.verdict
    } else {
        product.as_ref().map_or(Verdict::Inconclusive, |p| p.verdict)
    };
    Ok(ConsistencyReport { lambda, tail, product, verdict })
}

/// Direct Laurent product of two stored ranges, as plain complex values on `|k| <= Ka + Kb`.
pub fn laurent_product(a: &FourierSeq, b: &FourierSeq) -> Vec<num_complex::Complex<f64>> {
    let (ka, kb) = (a.k_max() as i64, b.k_max() as i64);
    let mut out = vec![num_complex::Complex::new(0.0, 0.0); (2 * (ka + kb) + 1) as usize];
    for (i, x) in a.coefficients().iter().enumerate() {
        for (j, y) in b.coefficients().iter().enumerate() {
            let k = (i as i64 - ka) + (j as i64 - kb);
            out[(k + ka + kb) as usize] += x.mul(y).to_complex();
        }
    }
    out
}

/// `ln q̂^λ` of plain complex coefficients centred at index `len / 2`.
pub fn qhat_of_values(values: &[num_complex::Complex<f64>], lambda: f64) -> f64 {
    let seq = FourierSeq::from_complex(values).expect("odd length");
    qhat_norm(&seq, lambda)
}
