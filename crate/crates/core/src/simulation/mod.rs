//! Simulation study: exchangeable-normal predictor scenarios with
//! accelerated-failure-time survival, exponential censoring calibrated to a
//! target rate, and seeded Monte-Carlo rejection-rate studies.

mod calibration;
mod monte_carlo;
mod scenario;
mod stats;

pub use calibration::{
    calibrate_censoring_rate, censoring_fraction, CALIBRATION_DRAWS, CALIBRATION_SEED,
    DEFAULT_TOLERANCE,
};
pub use monte_carlo::{
    monte_carlo_rejection, write_reports_csv, Method, MonteCarloConfig, MonteCarloReport,
    ReplicateOutcome,
};
pub use scenario::{generate_scenario, Censoring, ErrorLaw, GeneratedScenario, Model, ScenarioSpec};
pub use stats::{kolmogorov_survival, ks_test, ks_test_normal, KsTest};
