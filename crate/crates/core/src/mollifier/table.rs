use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::contour::Profile;
use super::flat::{derivatives_at_zero, index_map_g, moment_order};
use super::MollifierKind;
use crate::cache::TableCache;
use crate::error::{Error, Result};
use crate::quadrature::{composite, gauss_legendre, uniform_breaks};
use crate::series::Coefficient;

const EPS: f64 = f64::EPSILON;

/// Discretisation of the `t`-axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Gauss–Legendre nodes per `t`-panel.
    pub nodes_per_panel: usize,
    /// `t`-panels per period `2π / frequency`.
    pub panels_per_period: usize,
    /// Bound on the dropped `|t| > R` contribution to every certified moment.
    pub tail_tol: f64,
    /// Largest admissible radius `R` before giving up.
    pub max_radius: f64,
    /// Every `stride`-th node is resampled with refined `ξ`-panels to estimate the sample error.
    pub refinement_stride: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nodes_per_panel: 16, panels_per_period: 1, tail_tol: 1e-13, max_radius: 1e4, refinement_stride: 8 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 2
            || self.panels_per_period < 1
            || !(self.tail_tol > 0.0)
            || !(self.max_radius > 0.0)
            || self.refinement_stride < 1
        {
            return Err(Error::InvalidParameter(format!("invalid grid spec {self:?}")));
        }
        Ok(())
    }
}

/// Identifies a table: the build is a pure function of this key.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableKey {
    pub kind: MollifierKind,
    pub m: f64,
    pub n: u64,
    pub spec: GridSpec,
}

/// Error budget of a table, per moment order `j = 0..=max_moment`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCertificate {
    pub radius: f64,
    pub max_moment: usize,
    /// Bound on `∫_{|t|>R} |t|^j |φ|`.
    pub truncation: Vec<f64>,
    /// `|M_j(fine) − M_j(coarse)|` with the coarse rule at twice the panel width.
    pub richardson: Vec<f64>,
    /// `Σ w |t|^j err_i` plus summation rounding.
    pub sampling: Vec<f64>,
    /// Largest `|Im| / L1` over the samples.
    pub imag_residue: f64,
    /// Largest relative change of a sample under `ξ`-panel refinement.
    pub refinement_rel: f64,
}

impl TableCertificate {
    pub fn moment(&self, j: usize) -> f64 {
        self.truncation[j] + self.richardson[j] + self.sampling[j]
    }
}

/// Samples of `φ^n` (or of `φ_n = nφ^n(n·)` after [`rescale`](MollifierTable::rescale)) on a
/// symmetric Gauss–Legendre grid over `[-R, R]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierTable {
    pub key: TableKey,
    pub g: u32,
    /// 1 for `φ^n`, `n` for `φ_n`.
    pub scale: f64,
    pub radius: f64,
    pub t: Vec<f64>,
    pub weights: Vec<f64>,
    pub phi: Vec<f64>,
    /// Bound on the error of each sample.
    pub err: Vec<f64>,
    pub certificate: TableCertificate,
}

impl MollifierTable {
    pub fn profile(&self) -> Profile {
        Profile::new(self.key.kind, self.g)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `φ_n(t) = n φ^n(nt)` on the grid scaled by `1/n`.
    pub fn rescale(&self) -> MollifierTable {
        let n = self.key.n as f64 / self.scale;
        MollifierTable {
            scale: self.scale * n,
            radius: self.radius / n,
            t: self.t.iter().map(|t| t / n).collect(),
            weights: self.weights.iter().map(|w| w / n).collect(),
            phi: self.phi.iter().map(|p| p * n).collect(),
            err: self.err.iter().map(|e| e * n).collect(),
            ..self.clone()
        }
    }

    /// Quadrature of `∫ t^j φ`.
    pub fn moment(&self, j: usize) -> f64 {
        paired_moment(&self.t, &self.weights, &self.phi, j)
    }

    /// `Σ w |t|^j |φ|`, the scale against which cancellation in [`moment`](Self::moment) is judged.
    pub fn abs_moment(&self, j: usize) -> f64 {
        self.t.iter().zip(&self.weights).zip(&self.phi).map(|((t, w), p)| w * t.abs().powi(j as i32) * p.abs()).sum()
    }

    /// Certificate of `∫ t^j φ` in the current scaling.
    pub fn moment_certificate(&self, j: usize) -> f64 {
        self.certificate.moment(j) * self.scale.powi(-(j as i32))
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().fold(0.0, |a, p| a.max(p.abs()))
    }
}

/// Result of checking `∫ t^j φ^n = δ_{j0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub j: usize,
    pub quadrature: f64,
    pub abs_scale: f64,
    pub certificate: f64,
    /// `(−i)^j w^{(j)}(0)` from exact Taylor coefficients.
    pub taylor: f64,
    pub within_certificate: bool,
    /// `|quadrature − taylor| / max(|taylor|, abs_scale)`.
    pub dual_rel: f64,
    pub dual_ok: bool,
}

/// Relative agreement required between quadrature and Taylor moments.
pub const DUAL_TOLERANCE: f64 = 1e-10;

/// Checks `j = 0..=upto` (default `moment_order(n)`).
pub fn moment_ladder(table: &MollifierTable, upto: Option<usize>) -> Result<Vec<MomentCheck>> {
    let jmax = upto.unwrap_or_else(|| moment_order(table.key.n, table.key.m));
    if jmax > table.certificate.max_moment {
        return Err(Error::InvalidParameter(format!(
            "moment {jmax} beyond the certified order {}",
            table.certificate.max_moment
        )));
    }
    let exact: Vec<BigRational> = derivatives_at_zero(table.key.kind.flat(), table.g, jmax + 1);
    Ok((0..=jmax)
        .map(|j| {
            let q = table.moment(j);
            let a = table.abs_moment(j);
            let c = table.moment_certificate(j);
            // FT(w) = 2πφ gives ∫ t^j φ = (−i)^j w^{(j)}(0) / scale^j; w is even
            let d = exact[j].to_f64();
            let taylor = match j % 4 {
                0 => d,
                2 => -d,
                _ => 0.0,
            } * table.scale.powi(-(j as i32));
            let target = if j == 0 { 1.0 } else { 0.0 };
            let dual_rel = (q - taylor).abs() / taylor.abs().max(a);
            MomentCheck {
                j,
                quadrature: q,
                abs_scale: a,
                certificate: c,
                taylor,
                within_certificate: (q - target).abs() <= c,
                dual_rel,
                dual_ok: dual_rel <= DUAL_TOLERANCE,
            }
        })
        .collect())
}

/// `ln Γ(j+1, x)` for integer `j`.
fn ln_upper_gamma(j: usize, x: f64) -> f64 {
    // Γ(j+1, x) = e^{-x} Σ_{k≤j} j!/k! x^k
    let mut terms = Vec::with_capacity(j + 1);
    let mut lt = 0.0; // ln(j!/j! x^j) built downward
    let lx = x.ln();
    for k in (0..=j).rev() {
        terms.push(lt + k as f64 * lx);
        lt += (k as f64).max(1.0).ln();
    }
    -x + crate::logdomain::log_sum_exp(terms)
}

struct Samples {
    t: Vec<f64>,
    w: Vec<f64>,
    phi: Vec<f64>,
    l1: Vec<f64>,
    imag: f64,
}

/// Half-line rule on `[0, R]` mirrored to `[-R, R]`; only `t ≥ 0` is sampled.
fn sample_symmetric(profile: &Profile, radius: f64, panel: f64, nodes: usize) -> Samples {
    let panels = (radius / panel).round().max(1.0) as usize;
    let half = composite(&uniform_breaks(0.0, radius, panels), &gauss_legendre::<f64>(nodes));
    let mut pos: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(half.len());
    let mut imag: f64 = 0.0;
    for (&t, &w) in half.x.iter().zip(&half.w) {
        let s = profile.sample(t, 0);
        imag = imag.max(s.imag_residue);
        pos.push((t, w, s.values[0], s.l1[0]));
    }
    let mut out = Samples { t: vec![], w: vec![], phi: vec![], l1: vec![], imag };
    for &(t, w, p, l) in pos.iter().rev() {
        out.t.push(-t);
        out.w.push(w);
        out.phi.push(p);
        out.l1.push(l);
    }
    for &(t, w, p, l) in &pos {
        out.t.push(t);
        out.w.push(w);
        out.phi.push(p);
        out.l1.push(l);
    }
    out
}

/// `Σ w t^j φ` summed in mirror pairs `(i, len−1−i)`, so odd orders cancel exactly on a symmetric grid.
fn paired_moment(t: &[f64], w: &[f64], phi: &[f64], j: usize) -> f64 {
    let n = t.len();
    let term = |i: usize| w[i] * t[i].powi(j as i32) * phi[i];
    let mut sum = 0.0;
    for i in 0..n / 2 {
        sum += term(i) + term(n - 1 - i);
    }
    if n % 2 == 1 {
        sum += term(n / 2);
    }
    sum
}

fn moments(s: &Samples, jmax: usize) -> Vec<f64> {
    (0..=jmax).map(|j| paired_moment(&s.t, &s.w, &s.phi, j)).collect()
}

/// Smallest panel-aligned `R` whose tail bound meets `tail_tol` for every `j ≤ jmax`.
fn certified_radius(profile: &Profile, spec: &GridSpec, panel: f64, jmax: usize) -> Result<(f64, Vec<f64>)> {
    let mut r = 4.0f64.max(panel);
    loop {
        let r_al = (r / panel).ceil() * panel;
        let y = profile.shift(r_al);
        let c = profile.line_mass(y);
        // 2 × (C/2π) ∫_R^∞ t^j e^{-tY} dt
        let tails: Vec<f64> = (0..=jmax)
            .map(|j| (c / std::f64::consts::PI) * (ln_upper_gamma(j, r_al * y) - (j as f64 + 1.0) * y.ln()).exp())
            .collect();
        if tails.iter().all(|&b| b <= spec.tail_tol) {
            return Ok((r_al, tails));
        }
        if r_al > spec.max_radius {
            return Err(Error::TruncationUncertified(format!(
                "{} mollifier g = {}: tail bound {:e} at R = {r_al}",
                profile.kind,
                profile.g,
                tails.iter().fold(0.0f64, |a, &b| a.max(b))
            )));
        }
        r *= 1.1;
    }
}

/// Largest tolerated `|M_0(fine) − M_0(coarse)|`.
pub const RICHARDSON_TOLERANCE: f64 = 1e-8;
/// Largest tolerated `|Im| / L1` of a sample.
pub const IMAG_TOLERANCE: f64 = 1e-12;

/// Builds the table of `φ^n` with its certificate.
pub fn build_mollifier(kind: MollifierKind, m: f64, n: u64, spec: &GridSpec) -> Result<MollifierTable> {
    spec.validate()?;
    if n == 0 || !(m > 1.0) {
        return Err(Error::InvalidParameter(format!("mollifier needs n >= 1 and m > 1 (got n = {n}, m = {m})")));
    }
    let g = index_map_g(n, m);
    let profile = Profile::new(kind, g);
    let jmax = moment_order(n, m);
    let period = 2.0 * std::f64::consts::PI / profile.frequency();
    let panel = period / spec.panels_per_period as f64;
    let (radius, truncation) = certified_radius(&profile, spec, panel, jmax)?;

    let fine = sample_symmetric(&profile, radius, panel, spec.nodes_per_panel);
    let coarse = sample_symmetric(&profile, radius, 2.0 * panel, spec.nodes_per_panel);
    let mf = moments(&fine, jmax);
    let mc = moments(&coarse, jmax);
    let richardson: Vec<f64> = mf.iter().zip(&mc).map(|(a, b)| (a - b).abs()).collect();
    let imag_residue = fine.imag.max(coarse.imag);
    if imag_residue > IMAG_TOLERANCE {
        return Err(Error::QuadratureDivergence(format!("imaginary residue {imag_residue:e} for {kind} n = {n}")));
    }
    if richardson[0] > RICHARDSON_TOLERANCE {
        return Err(Error::QuadratureDivergence(format!(
            "mass changes by {:e} under panel halving for {kind} n = {n}",
            richardson[0]
        )));
    }

    let half = fine.t.len() / 2;
    let mut refinement_rel: f64 = 0.0;
    for i in (half..fine.t.len()).step_by(spec.refinement_stride) {
        let r = profile.sample_refined(fine.t[i], 0, 2);
        if fine.l1[i] > 0.0 {
            refinement_rel = refinement_rel.max((r.values[0] - fine.phi[i]).abs() / fine.l1[i]);
        }
    }
    let per_sample = 64.0 * EPS + 2.0 * refinement_rel;
    let err: Vec<f64> = fine.l1.iter().map(|l| per_sample * l).collect();
    let count = fine.t.len() as f64;
    let sampling: Vec<f64> = (0..=jmax)
        .map(|j| {
            let mut prop = 0.0;
            let mut abs = 0.0;
            for i in 0..fine.t.len() {
                let tj = fine.t[i].abs().powi(j as i32) * fine.w[i];
                prop += tj * err[i];
                abs += tj * fine.phi[i].abs();
            }
            prop + count * EPS * abs
        })
        .collect();

    Ok(MollifierTable {
        key: TableKey { kind, m, n, spec: *spec },
        g,
        scale: 1.0,
        radius,
        t: fine.t,
        weights: fine.w,
        phi: fine.phi,
        err,
        certificate: TableCertificate {
            radius,
            max_moment: jmax,
            truncation,
            richardson,
            sampling,
            imag_residue,
            refinement_rel,
        },
    })
}

/// Lazily built, write-once family `n ↦ φ^n`, optionally backed by an on-disk cache.
pub struct MollifierNet {
    pub kind: MollifierKind,
    pub m: f64,
    pub spec: GridSpec,
    cache: Option<TableCache>,
    entries: RwLock<BTreeMap<u64, Arc<MollifierTable>>>,
    cache_hits: AtomicUsize,
    builds: AtomicUsize,
    rebuilt_corrupt: AtomicUsize,
}

impl std::fmt::Debug for MollifierNet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MollifierNet").field("kind", &self.kind).field("m", &self.m).field("spec", &self.spec).finish()
    }
}

/// Counters of a [`MollifierNet`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetStats {
    pub cache_hits: usize,
    pub builds: usize,
    pub rebuilt_corrupt: usize,
}

impl MollifierNet {
    pub fn new(kind: MollifierKind, m: f64, spec: GridSpec) -> Self {
        Self {
            kind,
            m,
            spec,
            cache: None,
            entries: RwLock::new(BTreeMap::new()),
            cache_hits: AtomicUsize::new(0),
            builds: AtomicUsize::new(0),
            rebuilt_corrupt: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache = Some(TableCache::new(dir));
        self
    }

    pub fn g(&self, n: u64) -> u32 {
        index_map_g(n, self.m)
    }

    pub fn moment_order(&self, n: u64) -> usize {
        moment_order(n, self.m)
    }

    pub fn profile(&self, n: u64) -> Profile {
        Profile::new(self.kind, self.g(n))
    }

    pub fn key(&self, n: u64) -> TableKey {
        TableKey { kind: self.kind, m: self.m, n, spec: self.spec }
    }

    /// The table of `φ^n`, built or loaded on first request.
    pub fn get(&self, n: u64) -> Result<Arc<MollifierTable>> {
        if let Some(t) = self.entries.read().expect("mollifier entries poisoned").get(&n) {
            return Ok(t.clone());
        }
        let key = self.key(n);
        let loaded = match &self.cache {
            Some(c) => match c.load(&key) {
                Ok(t) => t,
                Err(Error::CacheCorrupt(_)) => {
                    self.rebuilt_corrupt.fetch_add(1, Ordering::Relaxed);
                    None
                }
                Err(e) => return Err(e),
            },
            None => None,
        };
        let table = match loaded {
            Some(t) => {
                self.cache_hits.fetch_add(1, Ordering::Relaxed);
                t
            }
            None => {
                let t = build_mollifier(self.kind, self.m, n, &self.spec)?;
                self.builds.fetch_add(1, Ordering::Relaxed);
                if let Some(c) = &self.cache {
                    c.store(&t)?;
                }
                t
            }
        };
        let mut map = self.entries.write().expect("mollifier entries poisoned");
        Ok(map.entry(n).or_insert_with(|| Arc::new(table)).clone())
    }

    pub fn stats(&self) -> NetStats {
        NetStats {
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
            builds: self.builds.load(Ordering::Relaxed),
            rebuilt_corrupt: self.rebuilt_corrupt.load(Ordering::Relaxed),
        }
    }
}
