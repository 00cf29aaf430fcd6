//! Functions and hyperfunctions on the unit circle through their Laurent coefficients.

mod classify;
mod coefficients;
mod embed;
mod minimizer;
mod norms;

pub use classify::{
    classify_am, classify_circle_object, AmClassification, CircleClass, CircleClassification, Membership, MIN_ORDER,
    TAU_C,
};
pub use coefficients::{
    partial_sum_projector, project_partial_sum, star_product, CoeffGenerator, FourierSeq, TailCertificate,
};
pub use embed::{
    embed_hyperfunction, embedding_consistency_check, laurent_product, partial_sum_net, qhat_of_values,
    ConsistencyReport, EmbeddingReport,
};
pub use minimizer::{lemma_aaa_minimize, ln_phi, ln_phi_second_derivative, MinimizerBounds, MinimizerResult};
pub use norms::{
    ln_chain_constant, prop_aba_check, q_norm, q_norm_on, qhat_norm, qhat_norm_certified, random_laurent_net,
    ultra_norm_circle, AnnulusNorms, ChainReport, ChainRow, CircleNorm, THETA_GRID,
};
