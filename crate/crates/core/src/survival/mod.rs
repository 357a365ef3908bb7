//! Dataset model, censoring Kaplan-Meier estimation, synthetic responses
//! and censoring-martingale integrals.

mod csv_input;
mod dataset;
mod kaplan_meier;
mod martingale;

pub use csv_input::{read_csv, read_csv_path};
pub use dataset::{IngestOptions, Observation, Record, SurvivalDataset, TauRule};
pub use kaplan_meier::{
    fit_km_censoring, synthetic_response, CensoringModel, Coarsening, KaplanMeierFit,
    SyntheticResponses, WEIGHT_FLOOR,
};
pub use martingale::martingale_integral;
