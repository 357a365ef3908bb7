//! Influence functions and the efficient one-step estimator for a single
//! predictor, plus the marginal (Bonferroni), oracle and conservative-variance
//! procedures built on it.

mod marginal;
mod nuisance;
mod one_step;

pub use marginal::{
    bonferroni_test, conservative_from_bundle, conservative_variance, default_m_bound,
    oracle_test, BonferroniResult, ConservativeVariance, OracleResult, DEFAULT_GRID_SIZE,
};
pub use nuisance::{ipw_term, NuisanceBundle, QuMoments};
pub use one_step::{
    ksv_slope, one_step, one_step_with, OneStepConfig, OneStepResult, SampleSplit,
    SharedNuisance, SIGMA_FLOOR,
};
