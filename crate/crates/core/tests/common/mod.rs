#![allow(dead_code)]

use proptest::prelude::*;
use survscreen::survival::{IngestOptions, SurvivalDataset, TauRule};
use survscreen_reference::RefData;

/// Raw columns of a random instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub times: Vec<f64>,
    pub status: Vec<bool>,
    pub columns: Vec<Vec<f64>>,
}

impl Instance {
    pub fn dataset(&self, standardize: bool) -> SurvivalDataset {
        let names = (1..=self.columns.len()).map(|k| format!("u{k}")).collect();
        SurvivalDataset::from_columns(
            self.times.clone(),
            self.status.clone(),
            self.columns.clone(),
            names,
            IngestOptions {
                tau_rule: TauRule::MaxObserved,
                standardize,
            },
        )
        .expect("valid instance")
    }
}

/// Copies the processed observations and predictors into the reference layout.
pub fn to_ref(data: &SurvivalDataset) -> RefData {
    RefData {
        x: data.observations().iter().map(|o| o.x).collect(),
        delta: data.observations().iter().map(|o| o.delta).collect(),
        u: (0..data.p()).map(|k| data.column(k).to_vec()).collect(),
    }
}

/// Instances with `n` in `[n_min, 30]`, `p <= 5`, about 20% censoring and
/// times on a 0.1 grid so that ties occur.
pub fn instances(n_min: usize) -> impl Strategy<Value = Instance> {
    (n_min..=30usize, 1..=5usize).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(0u32..60, n),
            prop::collection::vec(prop::bool::weighted(0.8), n),
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n), p),
        )
            .prop_map(|(t, status, columns)| Instance {
                times: t.into_iter().map(|v| v as f64 / 10.0).collect(),
                status,
                columns,
            })
    })
}

pub fn uncensored(instance: Instance) -> Instance {
    let n = instance.times.len();
    Instance {
        status: vec![true; n],
        ..instance
    }
}

/// The eight-observation, two-predictor example with two censored times.
pub fn eight_point_example() -> Instance {
    Instance {
        times: vec![0.7, 1.9, 0.2, 2.6, 1.3, 3.1, 0.9, 2.2],
        status: vec![true, false, true, true, false, true, true, true],
        columns: vec![
            vec![0.4, -1.1, 0.9, 1.6, -0.3, 2.0, -0.8, 0.5],
            vec![-0.6, 0.8, 1.2, -1.5, 0.1, 0.3, 1.9, -0.2],
        ],
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
