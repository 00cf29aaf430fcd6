//! Numerical laboratory for sequence-space generalized functions with exponential weights,
//! Gevrey mollifier nets and periodic hyperfunctions.

pub mod cache;
pub mod circle;
pub mod embedding;
pub mod gevrey;
pub mod logdomain;
pub mod mollifier;
pub mod quadrature;
pub mod scalar;
pub mod sequences;
pub mod series;

mod error;
pub use error::{Error, Result};

/// Seminorm net over `f64`.
pub type Net = sequences::SeminormNet<f64>;
/// Weight `n^{-1/m'}` over `f64`.
pub type Weight = sequences::WeightSequence<f64>;
/// Log-domain complex number over `f64`.
pub type LogC = logdomain::LogComplex<f64>;
/// Sampled derivative table over `f64`.
pub type Sampled = gevrey::SampledFunction<f64>;
