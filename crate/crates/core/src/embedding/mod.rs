//! Regularization of test functions and ultradistributions by mollifier nets, and the
//! null/moderate/weak-equality experiments built on it.

mod experiments;
pub mod regularize;
pub mod spectral;

pub use experiments::{
    moderate_growth_experiment, null_decay_cross_check, null_decay_experiment, null_decay_gaussian_control,
    product_consistency_check, weak_equality_experiment, weak_equality_shift_control, BoundKind, DecayFit,
    MajorantCheck, ModerateGrowth, NetSpec, UltraDistribution, WeakEquality, WindowSlope,
};
pub use regularize::{regularization_error, regularize, Convolved, KernelNodes};
pub use spectral::BumpSpectrum;
