//! Null decay of `ψ∗φ_n − ψ`, moderate growth of `f∗φ_n`, weak equality of two regularizations and
//! product consistency, each reduced to a seminorm net and classified by the window estimator.
//!
//! Derivative sups come from Fourier-side majorants (see [`spectral`](super::spectral)); direct
//! quadrature against mollifier tables is used for cross-checks and for the negative controls.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regularize::{regularization_error, KernelNodes};
use super::spectral::{log_sup_majorants, seminorm_from_majorants, BumpSpectrum};
use crate::error::{Error, Result};
use crate::gevrey::catalog::CatalogFunction;
use crate::gevrey::{gevrey_seminorm, GevreyParams};
use crate::logdomain::{log_abs_diff, log_add, log_sum_exp};
use crate::mollifier::flat::{log_h, log_k};
use crate::mollifier::{index_map_g, MollifierKind, MollifierNet};
use crate::quadrature::{composite, gauss_legendre, uniform_breaks};
use crate::scalar::ln_factorials;
use crate::sequences::{
    null_k_sweep, ultra_seminorm, KSweep, SeminormNet, Thresholds, UltraNormEstimate, Verdict, WeightSequence,
};

/// Concrete compactly supported test ultradistributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UltraDistribution {
    /// `δ^{(k)}`
    DeltaDerivative { k: usize },
    /// `D^k F` for a compactly supported bounded catalog function `F`
    DerivativeOfContinuous { k: usize, f: CatalogFunction },
}

impl UltraDistribution {
    pub fn order(&self) -> usize {
        match self {
            Self::DeltaDerivative { k } | Self::DerivativeOfContinuous { k, .. } => *k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::DerivativeOfContinuous { f, .. } = self {
            f.validate()?;
            if f.support().is_none() {
                return Err(Error::InvalidParameter(format!("{f:?} is not compactly supported")));
            }
            if !matches!(f, CatalogFunction::Triangle { .. } | CatalogFunction::Bump { .. }) {
                return Err(Error::InvalidParameter(format!("no Fourier bound available for {f:?}")));
            }
        }
        Ok(())
    }

    /// `sup |F|` (1 for `δ^{(k)}`, where it is the total mass).
    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::DeltaDerivative { .. } => 1.0,
            Self::DerivativeOfContinuous { f, .. } => match f {
                CatalogFunction::Triangle { .. } => 1.0,
                CatalogFunction::Bump { .. } => (-1.0f64).exp(),
                _ => f64::INFINITY,
            },
        }
    }
}

/// Which mollifier profile a net uses: `g(n)` from the index map plus a fixed offset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    pub kind: MollifierKind,
    pub m: f64,
    #[serde(default)]
    pub g_offset: u32,
}

impl NetSpec {
    pub fn new(kind: MollifierKind, m: f64) -> Self {
        Self { kind, m, g_offset: 0 }
    }

    pub fn of(net: &MollifierNet) -> Self {
        Self::new(net.kind, net.m)
    }

    pub fn g(&self, n: u64) -> u32 {
        index_map_g(n, self.m) + self.g_offset
    }

    /// `ln ŵ_n(ξ) = ln w_{g(n)}(ξ/n)`, the transform of `φ_n`.
    pub fn ln_transform(&self, n: u64, xi: f64) -> f64 {
        let x = xi / n as f64;
        match self.kind {
            MollifierKind::Pow => log_h(self.g(n), x),
            MollifierKind::Der => log_k(self.g(n), x),
        }
    }

    /// Frequency beyond which `ŵ_n` is negligible against the bump transform tails.
    pub fn cutoff(&self, n: u64) -> f64 {
        let t = match self.kind {
            MollifierKind::Pow => self.g(n) as f64,
            MollifierKind::Der => 1.0,
        };
        n as f64 * (2.0 * t + 30.0)
    }
}

/// `|ψ̂|` envelope of a catalog bump.
#[derive(Clone, Debug)]
struct BumpEnvelope {
    spectrum: Arc<BumpSpectrum>,
    half_width: f64,
}

impl BumpEnvelope {
    /// Tabulated up to `xi_max + BUMP_REACH / a`.
    fn new(psi: &CatalogFunction, xi_max: f64) -> Result<Option<Self>> {
        psi.validate()?;
        match *psi {
            CatalogFunction::Bump { order, half_width, .. } => Ok(Some(Self {
                spectrum: Arc::new(BumpSpectrum::new(order, half_width * xi_max + BUMP_REACH)?),
                half_width,
            })),
            _ if psi.is_zero() => Ok(None),
            _ => Err(Error::InvalidParameter(format!("the spectral route needs a catalog bump, got {psi:?}"))),
        }
    }

    fn ln_bound(&self, xi: f64) -> Result<f64> {
        self.spectrum.ln_bound_scaled(xi, self.half_width)
    }
}

/// `ln |F̂(ξ)|` for the supported `F`.
fn ln_transform_abs(f: &CatalogFunction, env: Option<&BumpEnvelope>, xi: f64) -> Result<f64> {
    match *f {
        CatalogFunction::Triangle { half_width: a, .. } => {
            let h = 0.5 * a * xi;
            let sinc = if h == 0.0 { 1.0 } else { h.sin() / h };
            Ok(a.ln() + 2.0 * sinc.abs().ln())
        }
        CatalogFunction::Bump { .. } => env.expect("bump envelope").ln_bound(xi),
        _ => Err(Error::InvalidParameter(format!("no Fourier bound available for {f:?}"))),
    }
}

/// Slope of `ln p` against `n^{1/m'}` over one window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSlope {
    pub end: u64,
    #[serde(with = "crate::logdomain::ext_real")]
    pub slope: f64,
}

/// How the ordinates were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Fourier-side upper bounds.
    Majorant,
    /// Values, exact up to quadrature error.
    Value,
}

/// Decay data of one net against `n^{1/m'}` and its classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub nu: f64,
    pub ns: Vec<u64>,
    pub abscissas: Vec<f64>,
    #[serde(with = "crate::logdomain::ext_real_vec")]
    pub ordinates: Vec<f64>,
    /// Derivative order attaining each seminorm.
    pub argmax_order: Vec<usize>,
    /// The attaining order sits at the derivative cap, so the uncapped sup may be larger.
    pub cap_hit: Vec<bool>,
    pub window_slopes: Vec<WindowSlope>,
    /// Least-squares fit `ln p ≈ ln C − ℓ n^{1/m'}` over the finite ordinates.
    #[serde(with = "crate::logdomain::ext_real")]
    pub ell: f64,
    #[serde(with = "crate::logdomain::ext_real")]
    pub log_c: f64,
    pub estimate: UltraNormEstimate,
    pub k_sweep: Option<KSweep>,
    pub verdict: Verdict,
    pub bound: BoundKind,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, y)| y.is_finite()).map(|(&x, &y)| (x, y)).collect();
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

impl DecayFit {
    /// Classifies `(n, ln p_n)`; with `ks` the verdict is `Null` only if every tilted net is `Null`.
    pub fn from_net(
        nu: f64,
        entries: Vec<(u64, f64)>,
        argmax_order: Vec<usize>,
        s_cap: Option<usize>,
        w: &WeightSequence<f64>,
        ks: Option<&[f64]>,
        th: &Thresholds,
        bound: BoundKind,
    ) -> Result<Self> {
        let net = SeminormNet::from_logs(entries)?;
        let ns = net.indices();
        let abscissas: Vec<f64> = ns.iter().map(|&n| w.inv_r(n)).collect();
        let ordinates: Vec<f64> = net.entries().iter().map(|e| e.1).collect();
        let estimate = ultra_seminorm(&net, w, th)?;
        let window_slopes = estimate
            .window_trace
            .iter()
            .map(|p| {
                let lo = p.end.div_ceil(2);
                let (xs, ys): (Vec<f64>, Vec<f64>) = ns
                    .iter()
                    .zip(abscissas.iter().zip(&ordinates))
                    .filter(|(&n, _)| n >= lo && n <= p.end)
                    .map(|(_, (&x, &y))| (x, y))
                    .unzip();
                let slope = if ys.iter().all(|y| *y == f64::NEG_INFINITY) {
                    f64::NEG_INFINITY
                } else {
                    least_squares(&xs, &ys).0
                };
                WindowSlope { end: p.end, slope }
            })
            .collect();
        let (slope, icpt) = least_squares(&abscissas, &ordinates);
        let (ell, log_c) = if ordinates.iter().all(|y| *y == f64::NEG_INFINITY) {
            (f64::INFINITY, f64::NEG_INFINITY)
        } else {
            (-slope, icpt)
        };
        let k_sweep = match ks {
            Some(ks) => Some(null_k_sweep(&net, w, ks, th)?),
            None => None,
        };
        let verdict = match &k_sweep {
            Some(s) if s.passed => Verdict::Null,
            Some(_) if estimate.verdict == Verdict::Null => Verdict::Inconclusive,
            _ => estimate.verdict,
        };
        let cap_hit = argmax_order
            .iter()
            .zip(&ordinates)
            .map(|(&s, &l)| s_cap.is_some_and(|c| c > 0 && s == c && l > f64::NEG_INFINITY))
            .collect();
        Ok(Self {
            nu,
            ns,
            abscissas,
            ordinates,
            argmax_order,
            cap_hit,
            window_slopes,
            ell,
            log_c,
            estimate,
            k_sweep,
            verdict,
            bound,
        })
    }

    pub fn is_null(&self) -> bool {
        self.verdict == Verdict::Null
    }
}

/// Largest mollifier cutoff over the nets and indices involved.
fn frequency_reach(nets: &[NetSpec], ns: &[u64]) -> f64 {
    nets.iter().flat_map(|s| ns.iter().map(move |&n| s.cutoff(n))).fold(0.0, f64::max)
}

/// Integrands carrying `β̂` end here (scaled by `1/a` for half-width `a`); enough for derivative
/// orders up to a few hundred at bump order 1.5, and the tail check reports anything shorter.
const BUMP_REACH: f64 = 80000.0;

/// `ln sup|(ψ∗φ_n − ψ)^{(s)}|` bounds for `s = 0..=s_max`.
fn null_majorants(env: &BumpEnvelope, net: &NetSpec, n: u64, s_max: usize) -> Result<Vec<f64>> {
    let amp = |xi: f64| -> Result<f64> {
        let lw = net.ln_transform(n, xi);
        Ok(env.ln_bound(xi)? + (-lw.exp_m1()).ln())
    };
    log_sup_majorants(amp, net.cutoff(n) + BUMP_REACH / env.half_width, s_max)
}

fn check_ns(ns: &[u64]) -> Result<()> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::InvalidParameter("index list must be nonempty and positive".into()));
    }
    Ok(())
}

/// `p_ν^{m,μ}(ψ ∗ φ_n − ψ)` over `ns` for every `ν` in `nus`, each classified with the `k`-sweep.
pub fn null_decay_experiment(
    psi: &CatalogFunction,
    net: &NetSpec,
    params: &GevreyParams,
    nus: &[f64],
    ns: &[u64],
    w: &WeightSequence<f64>,
    ks: &[f64],
    th: &Thresholds,
) -> Result<Vec<DecayFit>> {
    params.validate()?;
    check_ns(ns)?;
    let env = BumpEnvelope::new(psi, frequency_reach(&[*net], ns))?;
    let majorants: Vec<Option<Vec<f64>>> = ns
        .par_iter()
        .map(|&n| env.as_ref().map(|e| null_majorants(e, net, n, params.s_max)).transpose())
        .collect::<Result<_>>()?;
    nus.iter()
        .map(|&nu| {
            let (entries, orders) = fold_seminorms(ns, &majorants, params.m, nu);
            DecayFit::from_net(nu, entries, orders, Some(params.s_max), w, Some(ks), th, BoundKind::Majorant)
        })
        .collect()
}

fn fold_seminorms(ns: &[u64], majorants: &[Option<Vec<f64>>], m: f64, nu: f64) -> (Vec<(u64, f64)>, Vec<usize>) {
    ns.iter()
        .zip(majorants)
        .map(|(&n, j)| match j {
            Some(j) => {
                let (l, s) = seminorm_from_majorants(j, m, nu);
                ((n, l), s)
            }
            None => ((n, f64::NEG_INFINITY), 0),
        })
        .unzip()
}

/// Negative control: the fixed kernel `e^{−t²}/√π` in place of `φ_n`, evaluated by direct quadrature.
///
/// The kernel does not depend on `n`, so one evaluation is repeated across `ns`.
pub fn null_decay_gaussian_control(
    psi: &CatalogFunction,
    params: &GevreyParams,
    nus: &[f64],
    ns: &[u64],
    w: &WeightSequence<f64>,
    ks: &[f64],
    th: &Thresholds,
) -> Result<Vec<DecayFit>> {
    check_ns(ns)?;
    let e = regularization_error(psi, Arc::new(KernelNodes::gaussian()), params.mu, 256, params.s_max)?;
    nus.iter()
        .map(|&nu| {
            let v = gevrey_seminorm(&e, &params.with_nu(nu))?;
            let entries = ns.iter().map(|&n| (n, v.log_value)).collect();
            DecayFit::from_net(
                nu,
                entries,
                vec![v.index; ns.len()],
                Some(params.s_max),
                w,
                Some(ks),
                th,
                BoundKind::Value,
            )
        })
        .collect()
}

/// Direct-quadrature value of `p_ν` for `ψ∗φ_n − ψ` against the Fourier majorant, both truncated at `s_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantCheck {
    pub n: u64,
    pub nu: f64,
    pub s_max: usize,
    #[serde(with = "crate::logdomain::ext_real")]
    pub direct: f64,
    #[serde(with = "crate::logdomain::ext_real")]
    pub majorant: f64,
    pub consistent: bool,
}

/// Compares the majorant with a grid evaluation through the mollifier table of `net`.
pub fn null_decay_cross_check(
    psi: &CatalogFunction,
    net: &MollifierNet,
    n: u64,
    params: &GevreyParams,
    intervals: usize,
) -> Result<MajorantCheck> {
    let spec = NetSpec::of(net);
    let env = BumpEnvelope::new(psi, frequency_reach(&[spec], &[n]))?
        .ok_or_else(|| Error::InvalidParameter("cross-check needs a nonzero bump".into()))?;
    let maj = seminorm_from_majorants(&null_majorants(&env, &spec, n, params.s_max)?, params.m, params.nu).0;
    let kernel = Arc::new(KernelNodes::from_table(&*net.get(n)?));
    let e = regularization_error(psi, kernel, params.mu, intervals, params.s_max)?;
    let direct = gevrey_seminorm(&e, params)?.log_value;
    Ok(MajorantCheck { n, nu: params.nu, s_max: params.s_max, direct, majorant: maj, consistent: direct <= maj + 1e-6 })
}

/// Moderate-growth data: the classified net plus the raw sup at order 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModerateGrowth {
    pub fit: DecayFit,
    /// `ln sup |f∗φ_n|` per index.
    #[serde(with = "crate::logdomain::ext_real_vec")]
    pub log_raw_sup: Vec<f64>,
    /// True where the attaining order gives an attained value, not just a bound.
    pub exact: Vec<bool>,
}

/// `p_ν^{m,μ}(f∗φ_n)` over `ns`, classified under `w` (normally `m' = m − 1`).
///
/// For `δ^{(k)}`, `sup_x |φ_n^{(j)}(x)| ≤ (1/π) ∫_0^∞ ŵ_n(ξ) ξ^j dξ` with equality for even `j`
/// (attained at `x = 0` because `ŵ_n ≥ 0`); for `D^k F` the integrand carries `|F̂|`.
pub fn moderate_growth_experiment(
    f: &UltraDistribution,
    net: &NetSpec,
    params: &GevreyParams,
    ns: &[u64],
    w: &WeightSequence<f64>,
    th: &Thresholds,
) -> Result<ModerateGrowth> {
    params.validate()?;
    f.validate()?;
    check_ns(ns)?;
    let k = f.order();
    let env = match f {
        UltraDistribution::DerivativeOfContinuous { f: g @ CatalogFunction::Bump { .. }, .. } => {
            BumpEnvelope::new(g, frequency_reach(&[*net], ns))?
        }
        _ => None,
    };
    let rows: Vec<(Vec<f64>, u64)> = ns
        .par_iter()
        .map(|&n| {
            let amp = |xi: f64| -> Result<f64> {
                let base = net.ln_transform(n, xi);
                match f {
                    UltraDistribution::DeltaDerivative { .. } => Ok(base),
                    UltraDistribution::DerivativeOfContinuous { f: g, .. } => {
                        Ok(base + ln_transform_abs(g, env.as_ref(), xi)?)
                    }
                }
            };
            Ok((log_sup_majorants(amp, net.cutoff(n), params.s_max + k)?, n))
        })
        .collect::<Result<_>>()?;
    let delta = matches!(f, UltraDistribution::DeltaDerivative { .. });
    let mut entries = Vec::new();
    let mut orders = Vec::new();
    let mut exact = Vec::new();
    let mut raw = Vec::new();
    for (j, n) in rows {
        let (l, s) = seminorm_from_majorants(&j[k..], params.m, params.nu);
        entries.push((n, l));
        orders.push(s);
        exact.push(delta && (s + k).is_multiple_of(2));
        raw.push(j[k]);
    }
    let fit = DecayFit::from_net(params.nu, entries, orders, Some(params.s_max), w, None, th, BoundKind::Majorant)?;
    Ok(ModerateGrowth { fit, log_raw_sup: raw, exact })
}

/// Pairing data `c_n = ⟨f∗φ_n − f∗φ'_n, ψ⟩` classified with the `k`-sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakEquality {
    pub fit: DecayFit,
    pub identical_nets: bool,
}

/// `|c_n| ≤ (1/π) ∫_0^∞ |ψ̂| |f̂| |ŵ_n − ŵ'_n| dξ` for two nets, classified at weight `n^{−1/m}`.
pub fn weak_equality_experiment(
    f: &UltraDistribution,
    net_a: &NetSpec,
    net_b: &NetSpec,
    psi: &CatalogFunction,
    ns: &[u64],
    ks: &[f64],
    th: &Thresholds,
) -> Result<WeakEquality> {
    f.validate()?;
    check_ns(ns)?;
    let w = WeightSequence::from_exponent(1.0 / net_a.m)?;
    let identical = net_a == net_b;
    let reach = frequency_reach(&[*net_a, *net_b], ns);
    let env = BumpEnvelope::new(psi, reach)?;
    let f_env = match f {
        UltraDistribution::DerivativeOfContinuous { f: g @ CatalogFunction::Bump { .. }, .. } => {
            BumpEnvelope::new(g, reach)?
        }
        _ => None,
    };
    let entries: Vec<(u64, f64)> = ns
        .par_iter()
        .map(|&n| {
            let Some(env) = env.as_ref().filter(|_| !identical) else {
                return Ok((n, f64::NEG_INFINITY));
            };
            let amp = |xi: f64| -> Result<f64> {
                let d = log_abs_diff(net_a.ln_transform(n, xi), net_b.ln_transform(n, xi));
                let fh = match f {
                    UltraDistribution::DeltaDerivative { k } => *k as f64 * xi.ln(),
                    UltraDistribution::DerivativeOfContinuous { k, f: g } => {
                        *k as f64 * xi.ln() + ln_transform_abs(g, f_env.as_ref(), xi)?
                    }
                };
                Ok(env.ln_bound(xi)? + fh + d)
            };
            let reach_n = net_a.cutoff(n).max(net_b.cutoff(n)) + BUMP_REACH / env.half_width;
            Ok((n, log_sup_majorants(amp, reach_n, 0)?[0]))
        })
        .collect::<Result<_>>()?;
    let fit = DecayFit::from_net(1.0, entries, vec![0; ns.len()], None, &w, Some(ks), th, BoundKind::Majorant)?;
    Ok(WeakEquality { fit, identical_nets: identical })
}

/// Negative control: `φ'_n = φ_n(· − a/n)`, whose first moment is `a/n` instead of 0; `f = δ`.
///
/// `c_n = (1/π) ∫_0^∞ ŵ_n(ξ) ψ̂-terms [cos(cξ) − cos((c − a/n)ξ)] dξ` is evaluated as a value.
pub fn weak_equality_shift_control(
    net: &NetSpec,
    psi: &CatalogFunction,
    shift: f64,
    ns: &[u64],
    ks: &[f64],
    th: &Thresholds,
) -> Result<WeakEquality> {
    check_ns(ns)?;
    let w = WeightSequence::from_exponent(1.0 / net.m)?;
    let (order, center, a) = match *psi {
        CatalogFunction::Bump { order, center, half_width } => (order, center, half_width),
        _ => return Err(Error::InvalidParameter(format!("the shift control needs a catalog bump, got {psi:?}"))),
    };
    let spectrum = BumpSpectrum::new(order, 1000.0)?;
    // |β̂(600)| is below e^{-40}; the range [0, 600/a] carries the pairing
    let top = 600.0 / a;
    let panels = (top * a.max(center.abs()).max(1.0) * 2.0).ceil() as usize;
    let rule = composite(&uniform_breaks(0.0, top, panels), &gauss_legendre::<f64>(16));
    let bhat: Vec<f64> = rule.x.iter().map(|&x| a * spectrum.value_direct(a * x)).collect();
    let entries = ns
        .iter()
        .map(|&n| {
            let s = shift / n as f64;
            let c: f64 = rule
                .x
                .iter()
                .zip(&rule.w)
                .zip(&bhat)
                .map(|((&x, &wt), &b)| {
                    wt * net.ln_transform(n, x).exp() * b * ((center * x).cos() - ((center - s) * x).cos())
                })
                .sum::<f64>()
                / std::f64::consts::PI;
            (n, c.abs().ln())
        })
        .collect();
    let fit = DecayFit::from_net(1.0, entries, vec![0; ns.len()], None, &w, Some(ks), th, BoundKind::Value)?;
    Ok(WeakEquality { fit, identical_nets: false })
}

/// `ln sup|(uv)^{(α)}| ≤ ln Σ_j binom(α, j) U_j V_{α−j}` from per-order sup bounds `U`, `V`.
fn leibniz(u: &[f64], v: &[f64]) -> Vec<f64> {
    let lf: Vec<f64> = ln_factorials(u.len().saturating_sub(1));
    (0..u.len()).map(|a| log_sum_exp((0..=a).map(|j| lf[a] - lf[j] - lf[a - j] + u[j] + v[a - j]))).collect()
}

/// Product consistency for two bumps: `(φ∗φ_n)(ψ∗φ_n) − φψ = φ e_ψ + ψ e_φ + e_φ e_ψ`, where
/// `e = · ∗ φ_n − ·`; each term's derivative sups are bounded by the Leibniz rule over the
/// per-order majorants.
#[allow(clippy::too_many_arguments)]
pub fn product_consistency_check(
    phi: &CatalogFunction,
    psi: &CatalogFunction,
    net: &NetSpec,
    params: &GevreyParams,
    nus: &[f64],
    ns: &[u64],
    w: &WeightSequence<f64>,
    ks: &[f64],
    th: &Thresholds,
) -> Result<Vec<DecayFit>> {
    params.validate()?;
    check_ns(ns)?;
    let reach = frequency_reach(&[*net], ns);
    let (ea, eb) = (BumpEnvelope::new(phi, reach)?, BumpEnvelope::new(psi, reach)?);
    let (Some(ea), Some(eb)) = (ea, eb) else {
        return nus
            .iter()
            .map(|&nu| {
                let entries = ns.iter().map(|&n| (n, f64::NEG_INFINITY)).collect();
                DecayFit::from_net(nu, entries, vec![0; ns.len()], None, w, Some(ks), th, BoundKind::Value)
            })
            .collect();
    };
    let whole = |e: &BumpEnvelope| log_sup_majorants(|xi| e.ln_bound(xi), BUMP_REACH / e.half_width, params.s_max);
    let (sa, sb) = (whole(&ea)?, whole(&eb)?);
    let bounds: Vec<Vec<f64>> = ns
        .par_iter()
        .map(|&n| {
            let da = null_majorants(&ea, net, n, params.s_max)?;
            let db = null_majorants(&eb, net, n, params.s_max)?;
            let (x, y, z) = (leibniz(&sa, &db), leibniz(&sb, &da), leibniz(&da, &db));
            Ok((0..=params.s_max).map(|a| log_add(log_add(x[a], y[a]), z[a])).collect())
        })
        .collect::<Result<_>>()?;
    nus.iter()
        .map(|&nu| {
            let (entries, orders): (Vec<(u64, f64)>, Vec<usize>) = ns
                .iter()
                .zip(&bounds)
                .map(|(&n, j)| {
                    let (l, s) = seminorm_from_majorants(j, params.m, nu);
                    ((n, l), s)
                })
                .unzip();
            DecayFit::from_net(nu, entries, orders, Some(params.s_max), w, Some(ks), th, BoundKind::Majorant)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::GridSpec;
    use crate::sequences::DEFAULT_KS;

    const NS: [u64; 6] = [8, 16, 32, 64, 128, 256];

    fn params(nu: f64) -> GevreyParams {
        GevreyParams::new(2.0, nu, 1.0, 30).unwrap()
    }

    fn w(m: f64) -> WeightSequence<f64> {
        WeightSequence::new(m).unwrap()
    }

    #[test]
    fn zero_psi_is_exactly_null() {
        let fits = null_decay_experiment(
            &CatalogFunction::Constant { value: 0.0 },
            &NetSpec::new(MollifierKind::Pow, 2.0),
            &params(1.0),
            &[1.0],
            &NS,
            &w(2.0),
            &DEFAULT_KS,
            &Thresholds::default(),
        )
        .unwrap();
        assert!(fits[0].ordinates.iter().all(|v| *v == f64::NEG_INFINITY));
        assert!(fits[0].is_null());
    }

    #[test]
    fn majorant_dominates_direct_evaluation() {
        let net = MollifierNet::new(MollifierKind::Pow, 2.0, GridSpec::default());
        let p = GevreyParams::new(2.0, 1.0, 1.0, 8).unwrap();
        let c = null_decay_cross_check(&CatalogFunction::bump(1.5), &net, 8, &p, 64).unwrap();
        assert!(c.consistent, "{c:?}");
        assert!(c.majorant - c.direct < 6.0, "majorant too loose: {c:?}");
    }

    #[test]
    fn identical_nets_pair_to_zero() {
        let s = NetSpec::new(MollifierKind::Pow, 2.0);
        let r = weak_equality_experiment(
            &UltraDistribution::DeltaDerivative { k: 0 },
            &s,
            &s,
            &CatalogFunction::bump(1.5),
            &NS,
            &DEFAULT_KS,
            &Thresholds::default(),
        )
        .unwrap();
        assert!(r.identical_nets && r.fit.is_null());
    }

    #[test]
    fn shift_control_matches_real_space_pairing() {
        // at small n the spectral value must agree with Σ w φ_n(t) [ψ(t) − ψ(t + a/n)]
        let net = MollifierNet::new(MollifierKind::Pow, 2.0, GridSpec::default());
        let psi = CatalogFunction::Bump { order: 1.5, center: 0.2, half_width: 1.0 };
        let n = 8;
        let k = KernelNodes::from_table(&net.get(n).unwrap());
        let shift = 1.0 / n as f64;
        let real: f64 = (0..k.t.len())
            .map(|i| {
                let v = |x: f64| crate::gevrey::DerivativeOracle::<f64>::derivatives(&psi, x, 0).unwrap()[0];
                k.c[i] * (v(k.t[i]) - v(k.t[i] + shift))
            })
            .sum();
        let ctl = weak_equality_shift_control(&NetSpec::of(&net), &psi, 1.0, &[n, 32], &[1.0], &Thresholds::default())
            .unwrap();
        let spectral = ctl.fit.ordinates[0];
        assert!((spectral - real.abs().ln()).abs() < 1e-8, "{spectral} vs {}", real.abs().ln());
    }

    #[test]
    fn delta_growth_matches_gamma_closed_form() {
        // der profile: (1/π)∫_0^∞ e^{−ξ^{2g}} ξ^j dξ = Γ((j+1)/2g) / (2πg)
        let net = NetSpec::new(MollifierKind::Der, 2.0);
        let r = moderate_growth_experiment(
            &UltraDistribution::DeltaDerivative { k: 0 },
            &net,
            &params(1.0),
            &NS,
            &w(1.0),
            &Thresholds::default(),
        )
        .unwrap();
        for (i, &n) in NS.iter().enumerate() {
            let g = net.g(n) as f64;
            let exact = statrs::function::gamma::ln_gamma(1.0 / (2.0 * g)) - (2.0 * std::f64::consts::PI * g).ln()
                + (n as f64).ln();
            assert!((r.log_raw_sup[i] - exact).abs() < 2e-6, "n={n}: {} vs {exact}", r.log_raw_sup[i]);
        }
    }
}
