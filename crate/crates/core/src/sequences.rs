//! Exponential-weight ultra-seminorms of truncated nets and their classification.
//!
//! A net is stored as `(n, ln p_n)` pairs. The limsup of `p_n^{r(n)}` is estimated by
//! the tail maximum of `ln p_n · r(n)` over dyadic windows `[ceil(E/2), E]` at three
//! window ends `E = N, N/2, N/4`, and the trend across those windows decides the verdict.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::{ext_real, log_abs_diff};
use crate::scalar::Real;

/// Smallest truncation index accepted by the estimator.
pub const MIN_TRUNCATION: u64 = 32;

/// Weight `r(n) = n^{-1/m'}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WeightSequence<T: Real> {
    m_prime: T,
}

impl<T: Real> WeightSequence<T> {
    pub fn new(m_prime: T) -> Result<Self> {
        if !(m_prime > T::zero()) || !m_prime.is_finite() {
            return Err(Error::InvalidParameter(format!("m' must be positive, got {m_prime}")));
        }
        Ok(Self { m_prime })
    }

    /// Weight `r(n) = n^{-exponent}`.
    pub fn from_exponent(exponent: T) -> Result<Self> {
        if !(exponent > T::zero()) {
            return Err(Error::InvalidParameter(format!("exponent must be positive, got {exponent}")));
        }
        Self::new(T::one() / exponent)
    }

    pub fn m_prime(&self) -> T {
        self.m_prime
    }

    pub fn r(&self, n: u64) -> T {
        T::one() / self.inv_r(n)
    }

    /// `1 / r(n) = n^{1/m'}`.
    pub fn inv_r(&self, n: u64) -> T {
        T::of(n as f64).powf(T::one() / self.m_prime)
    }

    /// Largest `k` with `k <= 1/r(n)`.
    pub fn cutoff(&self, n: u64) -> u64 {
        crate::scalar::floor_pow(n, 1.0 / self.m_prime.as_f64())
    }
}

/// Nonnegative values `p_n` over strictly increasing indices, held as `ln p_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SeminormNet<T: Real> {
    entries: Vec<(u64, T)>,
}

#[derive(Serialize, Deserialize)]
struct NetRow {
    n: u64,
    log_p: f64,
}

impl<T: Real> SeminormNet<T> {
    /// Builds a net from `(n, ln p_n)` pairs in any order; indices must be distinct and positive.
    pub fn from_logs(mut entries: Vec<(u64, T)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if entries.iter().any(|e| e.0 == 0) {
            return Err(Error::InvalidParameter("net indices start at 1".into()));
        }
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate net index".into()));
        }
        if entries.iter().any(|e| e.1.is_nan()) {
            return Err(Error::InvalidParameter("NaN log value".into()));
        }
        Ok(Self { entries })
    }

    /// Net `p_1, …, p_N` from plain nonnegative values.
    pub fn from_values(values: &[T]) -> Result<Self> {
        if values.iter().any(|&v| v < T::zero() || v.is_nan()) {
            return Err(Error::InvalidParameter("seminorm values must be nonnegative".into()));
        }
        Self::from_logs(values.iter().enumerate().map(|(i, &v)| (i as u64 + 1, v.ln())).collect())
    }

    pub fn entries(&self) -> &[(u64, T)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Truncation index `N`.
    pub fn truncation(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.0)
    }

    pub fn indices(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// Multiplies every `p_n` by `e^{k / r(n)}`.
    pub fn tilted(&self, k: T, w: &WeightSequence<T>) -> Self {
        Self { entries: self.entries.iter().map(|&(n, l)| (n, l + k * w.inv_r(n))).collect() }
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        for &(n, l) in &self.entries {
            wtr.write_record([n.to_string(), format!("{}", l.as_f64())])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
        let mut entries = Vec::new();
        for rec in rdr.deserialize::<NetRow>() {
            let row = rec?;
            entries.push((row.n, T::of(row.log_p)));
        }
        Self::from_logs(entries)
    }
}

/// Verdict thresholds: null below `-tau`, divergent above `big`, moderate oscillation at most `max_oscillation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub tau: f64,
    pub big: f64,
    pub max_oscillation: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { tau: 1.0, big: 50.0, max_oscillation: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Null,
    Moderate,
    Divergent,
    Inconclusive,
}

/// One window of the trace: its end index and the tail maximum over it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub end: u64,
    #[serde(with = "ext_real")]
    pub l_hat: f64,
}

/// Estimated ultra-seminorm with its window trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UltraNormEstimate {
    #[serde(rename = "L_hat", with = "ext_real")]
    pub l_hat: f64,
    #[serde(with = "ext_real")]
    pub value: f64,
    pub verdict: Verdict,
    /// Oldest window first.
    pub window_trace: Vec<WindowPoint>,
    /// `ln 2 · r(ceil(N/2))`, the slack of a two-term triangle step in the final window.
    pub slack: f64,
}

impl UltraNormEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Tail maximum of `ln p_n · r(n)` over `[ceil(end/2), end]`.
pub fn window_max<T: Real>(net: &SeminormNet<T>, w: &WeightSequence<T>, end: u64) -> Result<T> {
    let start = end.div_ceil(2);
    let mut best: Option<T> = None;
    for &(n, l) in net.entries.iter().filter(|e| e.0 >= start && e.0 <= end) {
        let v = if l == T::neg_infinity() { l } else { l * w.r(n) };
        best = Some(match best {
            Some(b) if b >= v => b,
            _ => v,
        });
    }
    best.ok_or(Error::EmptyWindow { end })
}

/// Estimates `limsup p_n^{r(n)}` and classifies the net.
pub fn ultra_seminorm<T: Real>(
    net: &SeminormNet<T>,
    w: &WeightSequence<T>,
    th: &Thresholds,
) -> Result<UltraNormEstimate> {
    let n_max = net.truncation();
    if n_max < MIN_TRUNCATION {
        return Err(Error::WindowTooShort { n: n_max, min: MIN_TRUNCATION });
    }
    let ends = [n_max / 4, n_max / 2, n_max];
    let mut trace = Vec::with_capacity(3);
    for &end in &ends {
        trace.push(WindowPoint { end, l_hat: window_max(net, w, end)?.as_f64() });
    }
    let l_hat = trace[2].l_hat;
    let slack = std::f64::consts::LN_2 * w.r(n_max.div_ceil(2)).as_f64();
    Ok(UltraNormEstimate {
        l_hat,
        value: l_hat.exp(),
        verdict: verdict_from_trace(&trace, th),
        window_trace: trace,
        slack,
    })
}

/// Applies the decision rule to a three-window trace (oldest first).
pub fn verdict_from_trace(trace: &[WindowPoint], th: &Thresholds) -> Verdict {
    let l: Vec<f64> = trace.iter().map(|p| p.l_hat).collect();
    let last = *l.last().expect("nonempty trace");
    if last == f64::NEG_INFINITY {
        return Verdict::Null;
    }
    let decreasing = l.windows(2).all(|p| p[1] < p[0]);
    let increasing = l.windows(2).all(|p| p[1] > p[0]);
    if decreasing && last < -th.tau {
        return Verdict::Null;
    }
    if last == f64::INFINITY || (increasing && last > th.big) {
        return Verdict::Divergent;
    }
    let lo = l.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo >= -th.tau && hi <= th.big && hi - lo <= th.max_oscillation {
        return Verdict::Moderate;
    }
    Verdict::Inconclusive
}

/// Ultra-seminorm of `|f_n − g_n|` for two nets of nonnegative values on a common index set.
pub fn ultrapseudometric<T: Real>(
    f: &SeminormNet<T>,
    g: &SeminormNet<T>,
    w: &WeightSequence<T>,
    th: &Thresholds,
) -> Result<UltraNormEstimate> {
    if f.indices() != g.indices() {
        return Err(Error::IndexMismatch(format!("{} vs {} entries", f.entries.len(), g.entries.len())));
    }
    let diff = f.entries.iter().zip(&g.entries).map(|(&(n, a), &(_, b))| (n, log_abs_diff(a, b))).collect();
    ultra_seminorm(&SeminormNet::from_logs(diff)?, w, th)
}

/// Classifies a scalar net `c_1, …, c_N` under weight `n^{-exponent}`.
pub fn classify_scalar_net<T: Real>(c: &[Complex<T>], exponent: T, th: &Thresholds) -> Result<UltraNormEstimate> {
    let logs = c.iter().enumerate().map(|(i, z)| (i as u64 + 1, z.norm().ln())).collect();
    classify_log_net(&SeminormNet::from_logs(logs)?, exponent, th)
}

/// Same as [`classify_scalar_net`] for a net already held as `ln |c_n|`.
pub fn classify_log_net<T: Real>(net: &SeminormNet<T>, exponent: T, th: &Thresholds) -> Result<UltraNormEstimate> {
    ultra_seminorm(net, &WeightSequence::from_exponent(exponent)?, th)
}

/// Outcome of the "null for every k" check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSweep {
    pub ks: Vec<f64>,
    pub estimates: Vec<UltraNormEstimate>,
    pub passed: bool,
}

/// Requires a Null verdict for the net tilted by `e^{k/r(n)}` at each `k`.
pub fn null_k_sweep<T: Real>(
    net: &SeminormNet<T>,
    w: &WeightSequence<T>,
    ks: &[f64],
    th: &Thresholds,
) -> Result<KSweep> {
    let mut estimates = Vec::with_capacity(ks.len());
    for &k in ks {
        estimates.push(ultra_seminorm(&net.tilted(T::of(k), w), w, th)?);
    }
    let passed = estimates.iter().all(|e| e.verdict == Verdict::Null);
    Ok(KSweep { ks: ks.to_vec(), estimates, passed })
}

/// Default sweep `k ∈ {1, 2, 3}`.
pub const DEFAULT_KS: [f64; 3] = [1.0, 2.0, 3.0];

#[cfg(test)]
mod tests {
    use super::*;

    fn net_from(f: impl Fn(f64) -> f64, n_max: u64) -> SeminormNet<f64> {
        SeminormNet::from_logs((1..=n_max).map(|n| (n, f(n as f64))).collect()).unwrap()
    }

    #[test]
    fn weight_is_one_at_one_and_decreasing() {
        let w = WeightSequence::new(2.0f64).unwrap();
        assert_eq!(w.r(1), 1.0);
        assert!(w.r(2) < w.r(1));
        assert_eq!(w.cutoff(9), 3);
        assert!(WeightSequence::new(0.0f64).is_err());
    }

    #[test]
    fn exponent_cancellation_is_exact() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let est = ultra_seminorm(&net_from(|n| 2.0 * n.sqrt(), 256), &w, &Thresholds::default()).unwrap();
        for p in &est.window_trace {
            assert!((p.l_hat - 2.0).abs() < 1e-14);
        }
        assert!((est.value - 2f64.exp()).abs() < 1e-12);
        assert_eq!(est.verdict, Verdict::Moderate);
    }

    #[test]
    fn zero_net_is_null_with_zero_value() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let net = SeminormNet::from_values(&[0.0f64; 64]).unwrap();
        let est = ultra_seminorm(&net, &w, &Thresholds::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.verdict, Verdict::Null);
    }

    #[test]
    fn factorial_net_diverges() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let mut acc = 0.0;
        let net = SeminormNet::from_logs(
            (1..=256u64)
                .map(|n| {
                    acc += (n as f64).ln();
                    (n, acc)
                })
                .collect(),
        )
        .unwrap();
        let est = ultra_seminorm(&net, &w, &Thresholds::default()).unwrap();
        assert_eq!(est.verdict, Verdict::Divergent);
        let l: Vec<f64> = est.window_trace.iter().map(|p| p.l_hat).collect();
        assert!(l[0] < l[1] && l[1] < l[2]);
    }

    #[test]
    fn exponential_decay_is_null_at_left_window_edge() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let est = ultra_seminorm(&net_from(|n| -n, 256), &w, &Thresholds::default()).unwrap();
        assert_eq!(est.verdict, Verdict::Null);
        assert!((est.l_hat + 128f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn short_nets_are_rejected() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let err = ultra_seminorm(&net_from(|_| 0.0, 31), &w, &Thresholds::default()).unwrap_err();
        assert!(matches!(err, Error::WindowTooShort { n: 31, .. }));
    }

    #[test]
    fn metric_of_identical_nets_is_null() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let f = net_from(|n| n.sqrt(), 64);
        let d = ultrapseudometric(&f, &f, &w, &Thresholds::default()).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.verdict, Verdict::Null);
        let zero = SeminormNet::from_logs((1..=64).map(|n| (n, f64::NEG_INFINITY)).collect()).unwrap();
        let d = ultrapseudometric(&f, &zero, &w, &Thresholds::default()).unwrap();
        assert!((d.value - 1f64.exp()).abs() < 1e-12);
        let short = net_from(|_| 0.0, 63);
        assert!(matches!(ultrapseudometric(&f, &short, &w, &Thresholds::default()), Err(Error::IndexMismatch(_))));
    }

    #[test]
    fn scalar_classification_examples() {
        let th = Thresholds::default();
        let ones = vec![Complex::new(1.0f64, 0.0); 256];
        let e = classify_scalar_net(&ones, 0.5, &th).unwrap();
        assert_eq!(e.verdict, Verdict::Moderate);
        assert_eq!(e.value, 1.0);
        // ln c_n · n^{-1/2} = √n only clears B = 50 once N > 2500
        let grow = net_from(|n| n, 4096);
        assert_eq!(classify_log_net(&grow, 0.5, &th).unwrap().verdict, Verdict::Divergent);
        let short = net_from(|n| n, 256);
        assert_eq!(classify_log_net(&short, 0.5, &th).unwrap().verdict, Verdict::Inconclusive);
        for k in [1.0f64, 2.0, 3.0] {
            let c: Vec<Complex<f64>> = (1..=256).map(|n| Complex::new((-k * (n as f64).sqrt()).exp(), 0.0)).collect();
            let e = classify_scalar_net(&c, 0.5, &th).unwrap();
            assert!((e.value - (-k).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn k_sweep_separates_faster_than_weight_decay() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let th = Thresholds::default();
        let fast = net_from(|n| -n, 256);
        assert!(null_k_sweep(&fast, &w, &DEFAULT_KS, &th).unwrap().passed);
        let borderline = net_from(|n| -2.0 * n.sqrt(), 256);
        assert!(!null_k_sweep(&borderline, &w, &DEFAULT_KS, &th).unwrap().passed);
    }

    #[test]
    fn json_round_trip_keeps_infinities() {
        let w = WeightSequence::new(2.0f64).unwrap();
        let net = SeminormNet::from_values(&[0.0f64; 40]).unwrap();
        let est = ultra_seminorm(&net, &w, &Thresholds::default()).unwrap();
        let s = est.to_json();
        assert!(s.contains("\"L_hat\":\"-inf\""));
        assert_eq!(UltraNormEstimate::from_json(&s).unwrap(), est);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.csv");
        let mut entries: Vec<(u64, f64)> = (1..=40).map(|n| (n, (n as f64).ln())).collect();
        entries[3].1 = f64::NEG_INFINITY;
        let net = SeminormNet::from_logs(entries).unwrap();
        net.write_csv(&p).unwrap();
        assert_eq!(SeminormNet::<f64>::read_csv(&p).unwrap(), net);
    }

    #[test]
    fn f32_nets_work() {
        let w = WeightSequence::new(2.0f32).unwrap();
        let net = SeminormNet::from_logs((1..=64u64).map(|n| (n, 3.0 * (n as f32).sqrt())).collect()).unwrap();
        let est = ultra_seminorm(&net, &w, &Thresholds::default()).unwrap();
        assert!((est.l_hat - 3.0).abs() < 1e-5);
    }
}
