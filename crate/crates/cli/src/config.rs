//! TOML run configuration. Every experiment table doubles as the flag set of its subcommand.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use ultralab::circle::CoeffGenerator;
use ultralab::embedding::{NetSpec, UltraDistribution};
use ultralab::gevrey::catalog::CatalogFunction;
use ultralab::mollifier::MollifierKind;
use ultralab::sequences::Thresholds;

use crate::error::CliError;

/// Parses an inline JSON value given on the command line.
pub fn json_arg<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

pub fn kind_arg(s: &str) -> Result<MollifierKind, String> {
    match s {
        "pow" => Ok(MollifierKind::Pow),
        "der" => Ok(MollifierKind::Der),
        other => Err(format!("unknown mollifier kind {other:?} (pow or der)")),
    }
}

/// Inclusive integer range written `a..b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IndexRange {
    pub start: u64,
    pub end: u64,
}

impl FromStr for IndexRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
        let start: u64 = a.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
        let end: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("{s:?}: {e}"))?;
        if start == 0 || start > end {
            return Err(format!("range {s:?} must satisfy 1 <= a <= b"));
        }
        Ok(Self { start, end })
    }
}

impl TryFrom<String> for IndexRange {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<IndexRange> for String {
    fn from(r: IndexRange) -> String {
        format!("{}..{}", r.start, r.end)
    }
}

impl IndexRange {
    /// Every index, or `a, 2a, 4a, …` when `dyadic`.
    pub fn indices(&self, dyadic: bool) -> Vec<u64> {
        if dyadic {
            std::iter::successors(Some(self.start), |&n| n.checked_mul(2)).take_while(|&n| n <= self.end).collect()
        } else {
            (self.start..=self.end).collect()
        }
    }
}

fn bump15() -> CatalogFunction {
    CatalogFunction::bump(1.5)
}
fn bump_offset() -> CatalogFunction {
    CatalogFunction::Bump { order: 1.5, center: 0.25, half_width: 1.0 }
}
fn two() -> f64 {
    2.0
}
fn one() -> f64 {
    1.0
}
fn s_max() -> usize {
    30
}
fn yes() -> bool {
    true
}
fn pow() -> MollifierKind {
    MollifierKind::Pow
}
fn der() -> MollifierKind {
    MollifierKind::Der
}
fn dyadic_8_256() -> IndexRange {
    IndexRange { start: 8, end: 256 }
}
fn nus() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn nu_one() -> Vec<f64> {
    vec![1.0]
}
fn delta() -> UltraDistribution {
    UltraDistribution::DeltaDerivative { k: 0 }
}
fn net_a() -> NetSpec {
    NetSpec::new(MollifierKind::Pow, 2.0)
}
fn net_b() -> NetSpec {
    NetSpec { g_offset: 1, ..NetSpec::new(MollifierKind::Pow, 2.0) }
}

/// `p_ν(ψ ∗ φ_n − ψ)` with a fixed-Gaussian control.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct NullDecay {
    /// Catalog function as JSON.
    #[arg(long, value_parser = json_arg::<CatalogFunction>, default_value = r#"{"name":"bump","order":1.5,"center":0.0,"half_width":1.0}"#)]
    #[serde(default = "bump15")]
    pub psi: CatalogFunction,
    #[arg(long, value_parser = kind_arg, default_value = "pow")]
    #[serde(default = "pow")]
    pub kind: MollifierKind,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub m: f64,
    #[arg(long, value_delimiter = ',', default_values_t = nus())]
    #[serde(default = "nus")]
    pub nu: Vec<f64>,
    #[arg(long, default_value = "8..256")]
    #[serde(default = "dyadic_8_256")]
    pub n: IndexRange,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "yes")]
    pub dyadic: bool,
    /// Half-width of the sup window.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub mu: f64,
    #[arg(long, default_value_t = 30)]
    #[serde(default = "s_max")]
    pub s_max: usize,
    /// Weight `n^{-e}`; defaults to `1/m`.
    #[arg(long)]
    #[serde(default)]
    pub weight_exponent: Option<f64>,
    /// Also run the fixed-Gaussian kernel, which must not come out null.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "yes")]
    pub control: bool,
}

/// Growth of `f ∗ φ_n` for a compactly supported ultradistribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ModerateGrowth {
    #[arg(long, value_parser = json_arg::<UltraDistribution>, default_value = r#"{"kind":"delta_derivative","k":0}"#)]
    #[serde(default = "delta")]
    pub distribution: UltraDistribution,
    #[arg(long, value_parser = kind_arg, default_value = "der")]
    #[serde(default = "der")]
    pub kind: MollifierKind,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub nu: f64,
    #[arg(long, default_value = "8..256")]
    #[serde(default = "dyadic_8_256")]
    pub n: IndexRange,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "yes")]
    pub dyadic: bool,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub mu: f64,
    #[arg(long, default_value_t = 30)]
    #[serde(default = "s_max")]
    pub s_max: usize,
    /// Weight `n^{-e}`; defaults to `1/(m−1)`.
    #[arg(long)]
    #[serde(default)]
    pub weight_exponent: Option<f64>,
}

/// Pairing of `f ∗ φ_n − f ∗ φ'_n` against a test bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct WeakEquality {
    #[arg(long, value_parser = json_arg::<UltraDistribution>, default_value = r#"{"kind":"delta_derivative","k":0}"#)]
    #[serde(default = "delta")]
    pub distribution: UltraDistribution,
    #[arg(long, value_parser = json_arg::<CatalogFunction>, default_value = r#"{"name":"bump","order":1.5,"center":0.0,"half_width":1.0}"#)]
    #[serde(default = "bump15")]
    pub psi: CatalogFunction,
    #[arg(long, value_parser = json_arg::<NetSpec>, default_value = r#"{"kind":"pow","m":2.0}"#)]
    #[serde(default = "net_a")]
    pub net_a: NetSpec,
    #[arg(long, value_parser = json_arg::<NetSpec>, default_value = r#"{"kind":"pow","m":2.0,"g_offset":1}"#)]
    #[serde(default = "net_b")]
    pub net_b: NetSpec,
    #[arg(long, default_value = "8..256")]
    #[serde(default = "dyadic_8_256")]
    pub n: IndexRange,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "yes")]
    pub dyadic: bool,
    /// Kernel shift `s/n` of the moment-violating control; the control must not come out null.
    #[arg(long)]
    #[serde(default)]
    pub control_shift: Option<f64>,
}

/// `(φ∗φ_n)(ψ∗φ_n) − φψ` for two catalog bumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ProductConsistency {
    #[arg(long, value_parser = json_arg::<CatalogFunction>, default_value = r#"{"name":"bump","order":1.5,"center":0.0,"half_width":1.0}"#)]
    #[serde(default = "bump15")]
    pub phi: CatalogFunction,
    #[arg(long, value_parser = json_arg::<CatalogFunction>, default_value = r#"{"name":"bump","order":1.5,"center":0.25,"half_width":1.0}"#)]
    #[serde(default = "bump_offset")]
    pub psi: CatalogFunction,
    #[arg(long, value_parser = kind_arg, default_value = "pow")]
    #[serde(default = "pow")]
    pub kind: MollifierKind,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub m: f64,
    #[arg(long, value_delimiter = ',', default_values_t = nu_one())]
    #[serde(default = "nu_one")]
    pub nu: Vec<f64>,
    #[arg(long, default_value = "8..256")]
    #[serde(default = "dyadic_8_256")]
    pub n: IndexRange,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "yes")]
    pub dyadic: bool,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub mu: f64,
    #[arg(long, default_value_t = 30)]
    #[serde(default = "s_max")]
    pub s_max: usize,
    #[arg(long)]
    #[serde(default)]
    pub weight_exponent: Option<f64>,
}

fn root_exp() -> CoeffGenerator {
    CoeffGenerator::ExpPower { a: 1.0, p: 0.5 }
}
fn gauss_half() -> CoeffGenerator {
    CoeffGenerator::ExpPower { a: -std::f64::consts::LN_2, p: 2.0 }
}
fn k8192() -> u64 {
    8192
}
fn k64() -> u64 {
    64
}
fn k4096() -> u64 {
    4096
}
fn n512() -> u64 {
    512
}
fn lambda15() -> f64 {
    1.5
}
fn margin() -> f64 {
    0.05
}

/// Partial-sum net of a hyperfunction and its `q̂^λ` ultra-norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct CircleEmbed {
    #[arg(long, value_parser = json_arg::<CoeffGenerator>, default_value = r#"{"kind":"exp_power","a":1.0,"p":0.5}"#)]
    #[serde(default = "root_exp")]
    pub coefficients: CoeffGenerator,
    #[arg(long, default_value_t = 8192)]
    #[serde(default = "k8192")]
    pub k_max: u64,
    #[arg(long, default_value_t = 1.5)]
    #[serde(default = "lambda15")]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub m_prime: f64,
    #[arg(long, default_value_t = 512)]
    #[serde(default = "n512")]
    pub n_max: u64,
    /// Passes when the estimate is at most `λ² + margin`.
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "margin")]
    pub margin: f64,
}

/// Tail net `f − f∗ψ_n` (and a product defect) under `q̂^λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct CircleNull {
    #[arg(long, value_parser = json_arg::<CoeffGenerator>, default_value = r#"{"kind":"exp_power","a":-0.6931471805599453,"p":2.0}"#)]
    #[serde(default = "gauss_half")]
    pub coefficients: CoeffGenerator,
    #[arg(long, value_parser = json_arg::<CoeffGenerator>)]
    #[serde(default)]
    pub partner: Option<CoeffGenerator>,
    #[arg(long, default_value_t = 64)]
    #[serde(default = "k64")]
    pub k_max: u64,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub m_prime: f64,
    #[arg(long, default_value_t = 512)]
    #[serde(default = "n512")]
    pub n_max: u64,
    /// `false` for a negative control that must not come out null.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "yes")]
    pub expect_null: bool,
}

fn nets200() -> usize {
    200
}
fn seed() -> u64 {
    2024
}
fn k16() -> u64 {
    16
}
fn n64() -> u64 {
    64
}

/// Annulus-norm chain on seeded random nets of Laurent polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct PropAba {
    #[arg(long, default_value_t = 200)]
    #[serde(default = "nets200")]
    pub nets: usize,
    #[arg(long, default_value_t = 2024)]
    #[serde(default = "seed")]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    #[serde(default = "k16")]
    pub k_max: u64,
    #[arg(long, default_value_t = 64)]
    #[serde(default = "n64")]
    pub n_max: u64,
    #[arg(long, default_value_t = 1.5)]
    #[serde(default = "lambda15")]
    pub mu: f64,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub m_prime: f64,
}

fn half() -> Vec<f64> {
    vec![0.5]
}
fn hundred() -> Vec<f64> {
    vec![100.0]
}

/// Minimizer of `ρ^{−t} t^{m(t+½)} e^{−mt}` on a grid of `(m, ρ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct LemmaMin {
    #[arg(long, value_delimiter = ',', default_values_t = half())]
    #[serde(default = "half")]
    pub m: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = hundred())]
    #[serde(default = "hundred")]
    pub rho: Vec<f64>,
    /// Also assert `φ(ρ^{1/m} + ½) <= √ρ e^{−mρ^{1/m}}`.
    #[arg(long)]
    #[serde(default)]
    pub assert_shifted: bool,
}

fn n1_16() -> IndexRange {
    IndexRange { start: 1, end: 16 }
}
fn cap16() -> u32 {
    16
}

/// Exact flatness, uniform bounds and (optionally) moment ladders of a mollifier family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct MollifierCertify {
    #[arg(long, value_parser = kind_arg, default_value = "pow")]
    #[serde(default = "pow")]
    pub kind: MollifierKind,
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub m: f64,
    /// Flat-profile indices for the exact series route.
    #[arg(long, default_value = "1..16")]
    #[serde(default = "n1_16")]
    pub n: IndexRange,
    /// Indices for the uniform bound; defaults to `n`.
    #[arg(long)]
    #[serde(default)]
    pub bound_n: Option<IndexRange>,
    #[arg(long, default_value_t = 16)]
    #[serde(default = "cap16")]
    pub series_cap: u32,
    /// Net indices whose tables get a moment ladder.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub moments: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Analytic,
    Hyperfunction,
    NotHyperfunction,
    Member,
    NotMember,
    FiniteSupport,
}

/// `(k, c_k)` pairs; an alias so the flag takes one JSON value rather than repeats.
pub type SparseEntries = Vec<(i64, f64)>;

fn m_half() -> f64 {
    0.5
}

/// Root-test classification and `A_m` membership of a coefficient sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct AbeClassify {
    #[arg(long, value_parser = json_arg::<CoeffGenerator>)]
    #[serde(default)]
    pub coefficients: Option<CoeffGenerator>,
    /// Finitely supported input as `[[k, value], …]`.
    #[arg(long, value_parser = json_arg::<SparseEntries>)]
    #[serde(default)]
    pub sparse: Option<SparseEntries>,
    #[arg(long, default_value_t = 4096)]
    #[serde(default = "k4096")]
    pub k_max: u64,
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "m_half")]
    pub m: f64,
    #[arg(long, value_enum)]
    #[serde(default)]
    pub expect: Option<Expectation>,
}

/// One experiment, tagged by its id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum Experiment {
    NullDecay(NullDecay),
    ModerateGrowth(ModerateGrowth),
    WeakEquality(WeakEquality),
    ProductConsistency(ProductConsistency),
    CircleEmbed(CircleEmbed),
    CircleNull(CircleNull),
    PropAba(PropAba),
    LemmaMin(LemmaMin),
    MollifierCertify(MollifierCertify),
    AbeClassify(AbeClassify),
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Self::NullDecay(_) => "null-decay",
            Self::ModerateGrowth(_) => "moderate-growth",
            Self::WeakEquality(_) => "weak-equality",
            Self::ProductConsistency(_) => "product-consistency",
            Self::CircleEmbed(_) => "circle-embed",
            Self::CircleNull(_) => "circle-null",
            Self::PropAba(_) => "prop-aba",
            Self::LemmaMin(_) => "lemma-min",
            Self::MollifierCertify(_) => "mollifier-certify",
            Self::AbeClassify(_) => "abe-classify",
        }
    }
}

fn default_ks() -> Vec<f64> {
    ultralab::sequences::DEFAULT_KS.to_vec()
}
fn tau() -> f64 {
    1.0
}
fn big() -> f64 {
    50.0
}
fn osc() -> f64 {
    0.5
}
fn tau_c() -> f64 {
    ultralab::circle::TAU_C
}

/// Decision thresholds shared by every experiment in a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "tau")]
    pub tau: f64,
    #[serde(default = "big")]
    pub big: f64,
    #[serde(default = "osc")]
    pub max_oscillation: f64,
    #[serde(default = "tau_c")]
    pub tau_c: f64,
    #[serde(default = "default_ks")]
    pub ks: Vec<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self { tau: tau(), big: big(), max_oscillation: osc(), tau_c: tau_c(), ks: default_ks() }
    }
}

impl ThresholdConfig {
    pub fn estimator(&self) -> Thresholds {
        Thresholds { tau: self.tau, big: self.big, max_oscillation: self.max_oscillation }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Top-level run file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub experiment: Vec<Experiment>,
}

impl RunConfig {
    pub fn single(e: Experiment) -> Self {
        Self { thresholds: ThresholdConfig::default(), output: OutputConfig::default(), experiment: vec![e] }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.experiment.is_empty() {
            return Err(CliError::ConfigInvalid("no experiments listed".into()));
        }
        let t = &self.thresholds;
        let positive = [t.tau, t.big, t.max_oscillation, t.tau_c];
        if positive.iter().any(|v| !(*v > 0.0)) || t.ks.iter().any(|k| !(*k > 0.0)) {
            return Err(CliError::ConfigInvalid(format!("thresholds must be positive: {t:?}")));
        }
        for e in &self.experiment {
            validate_experiment(e)?;
        }
        Ok(())
    }
}

fn invalid(id: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::ConfigInvalid(format!("{id}: {msg}"))
}

fn check_catalog(id: &str, f: &CatalogFunction) -> Result<(), CliError> {
    f.validate().map_err(|e| invalid(id, e))
}

fn validate_experiment(e: &Experiment) -> Result<(), CliError> {
    let id = e.id();
    match e {
        Experiment::NullDecay(c) => check_catalog(id, &c.psi),
        Experiment::ModerateGrowth(c) => c.distribution.validate().map_err(|e| invalid(id, e)),
        Experiment::WeakEquality(c) => {
            check_catalog(id, &c.psi)?;
            c.distribution.validate().map_err(|e| invalid(id, e))
        }
        Experiment::ProductConsistency(c) => {
            check_catalog(id, &c.phi)?;
            check_catalog(id, &c.psi)
        }
        Experiment::CircleEmbed(c) if !(c.lambda > 1.0) => Err(invalid(id, "λ must exceed 1")),
        Experiment::CircleNull(c) if !(c.lambda > 1.0) => Err(invalid(id, "λ must exceed 1")),
        Experiment::PropAba(c) if !(1.0 < c.mu && c.mu < c.lambda) => Err(invalid(id, "need 1 < μ < λ")),
        Experiment::LemmaMin(c) if c.m.is_empty() || c.rho.is_empty() => Err(invalid(id, "empty parameter grid")),
        Experiment::AbeClassify(c) if c.coefficients.is_some() == c.sparse.is_some() => {
            Err(invalid(id, "give exactly one of coefficients or sparse"))
        }
        _ => Ok(()),
    }
}
