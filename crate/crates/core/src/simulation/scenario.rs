use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::calibration::calibrate_censoring_rate;
use crate::error::{Error, Result};
use crate::rng;
use crate::survival::{IngestOptions, SurvivalDataset, TauRule};

/// Survival-time model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// `T = eps`.
    N,
    /// `T = U_1 / 4 + eps`.
    A1,
    /// `T = sum_j beta_j U_j + eps` with `beta_1..5 = 0.15`, `beta_6..10 = -0.1`.
    A2,
}

impl Model {
    pub fn label(&self) -> &'static str {
        match self {
            Model::N => "N",
            Model::A1 => "A1",
            Model::A2 => "A2",
        }
    }

    /// Nonzero regression coefficients `(index, beta)`.
    pub fn coefficients(&self) -> &'static [(usize, f64)] {
        match self {
            Model::N => &[],
            Model::A1 => &[(0, 0.25)],
            Model::A2 => &[
                (0, 0.15),
                (1, 0.15),
                (2, 0.15),
                (3, 0.15),
                (4, 0.15),
                (5, -0.1),
                (6, -0.1),
                (7, -0.1),
                (8, -0.1),
                (9, -0.1),
            ],
        }
    }

    /// Number of leading predictors entering `T`.
    pub fn active_predictors(&self) -> usize {
        self.coefficients().len()
    }
}

/// Law of the error term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorLaw {
    /// `N(0, 1)`.
    Independent,
    /// `N(0, 0.7 (|U_1| + 0.7))`, second argument a variance.
    Dependent,
}

impl ErrorLaw {
    pub fn label(&self) -> &'static str {
        match self {
            ErrorLaw::Independent => "independent",
            ErrorLaw::Dependent => "dependent",
        }
    }

    /// Standard deviation of the error given `u_1`.
    pub fn scale(&self, u1: f64) -> f64 {
        match self {
            ErrorLaw::Independent => 1.0,
            ErrorLaw::Dependent => (0.7 * (u1.abs() + 0.7)).sqrt(),
        }
    }
}

/// Target censoring fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Censoring {
    None,
    /// 10%.
    Light,
    /// 30%.
    Heavy,
}

impl Censoring {
    pub fn target(&self) -> f64 {
        match self {
            Censoring::None => 0.0,
            Censoring::Light => 0.10,
            Censoring::Heavy => 0.30,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Censoring::None => "none",
            Censoring::Light => "light",
            Censoring::Heavy => "heavy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub model: Model,
    pub error: ErrorLaw,
    pub censoring: Censoring,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub const DEFAULT_RHO: f64 = 0.75;

    pub fn new(model: Model, error: ErrorLaw, censoring: Censoring, n: usize, p: usize, seed: u64) -> Self {
        ScenarioSpec {
            model,
            error,
            censoring,
            n,
            p,
            rho: Self::DEFAULT_RHO,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidArgument(format!("n must be at least 3, got {}", self.n)));
        }
        if self.p < self.model.active_predictors().max(1) {
            return Err(Error::InvalidArgument(format!(
                "model {} needs p >= {}, got {}",
                self.model.label(),
                self.model.active_predictors().max(1),
                self.p
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidArgument(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        Ok(())
    }

    /// Population marginal slopes `Cov(T, U_k) / Var(U_k)` for every predictor:
    /// `beta_k + rho sum_{j != k} beta_j`.
    pub fn true_slopes(&self) -> Vec<f64> {
        let total: f64 = self.model.coefficients().iter().map(|c| c.1).sum();
        let mut beta = vec![0.0; self.p];
        for &(k, b) in self.model.coefficients() {
            beta[k] = b;
        }
        beta.iter().map(|&b| b + self.rho * (total - b)).collect()
    }

    /// Target parameter `max_k |slope_k|` and the predictors attaining it.
    pub fn true_target(&self) -> (f64, Vec<usize>) {
        let slopes = self.true_slopes();
        let max = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        let argmax = (0..self.p)
            .filter(|&k| (slopes[k].abs() - max).abs() <= 1e-12)
            .collect();
        (max, argmax)
    }
}

/// Raw draws for one replicate before censoring is applied.
pub(crate) struct LatentSample {
    pub columns: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    /// Standard exponential draws for the censoring times.
    pub e: Vec<f64>,
}

/// Draws predictors (only the first `columns` of them), survival times and
/// censoring exponentials. Row-level draws use stream 0 of `seed`; predictor
/// `k` uses stream `1 + k`, so the values of a column do not depend on how
/// many columns are drawn.
pub(crate) fn draw_latent(
    model: Model,
    error: ErrorLaw,
    rho: f64,
    n: usize,
    columns: usize,
    seed: u64,
) -> LatentSample {
    let mut rows = rng::stream(seed, 0);
    let mut z0 = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for _ in 0..n {
        z0.push(rows.sample::<f64, _>(StandardNormal));
        eps.push(rows.sample::<f64, _>(StandardNormal));
        e.push(rows.sample::<f64, _>(Exp1));
    }
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let columns: Vec<Vec<f64>> = (0..columns)
        .map(|k| {
            let mut r = rng::stream(seed, 1 + k as u64);
            z0.iter()
                .map(|&z| a * z + b * r.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let t = (0..n)
        .map(|i| {
            let signal: f64 = model
                .coefficients()
                .iter()
                .map(|&(k, beta)| beta * columns[k][i])
                .sum();
            signal + error.scale(columns[0][i]) * eps[i]
        })
        .collect();
    LatentSample { columns, t, e }
}

/// Log censoring time `ln(E / lambda)` for `E ~ Exp(1)`; no censoring when
/// `lambda = 0`.
pub(crate) fn censoring_time(e: f64, lambda: f64) -> f64 {
    if lambda > 0.0 {
        e.ln() - lambda.ln()
    } else {
        f64::INFINITY
    }
}

/// Simulated dataset with its ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedScenario {
    pub data: SurvivalDataset,
    pub true_slopes: Vec<f64>,
    /// Rate of the exponential censoring variable.
    pub lambda: f64,
}

/// Generates one dataset for `spec`. Predictors are not sample-standardized:
/// they already have unit population variance.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<GeneratedScenario> {
    spec.validate()?;
    let lambda = match spec.censoring {
        Censoring::None => 0.0,
        c => calibrate_censoring_rate(spec.model, spec.error, spec.rho, c.target(), None)?,
    };
    let latent = draw_latent(spec.model, spec.error, spec.rho, spec.n, spec.p, spec.seed);
    let mut times = Vec::with_capacity(spec.n);
    let mut status = Vec::with_capacity(spec.n);
    for (&t, &e) in latent.t.iter().zip(&latent.e) {
        let c = censoring_time(e, lambda);
        times.push(t.min(c));
        status.push(t <= c);
    }
    let names = (1..=spec.p).map(|k| format!("U{k}")).collect();
    let data = SurvivalDataset::from_columns(
        times,
        status,
        latent.columns,
        names,
        IngestOptions {
            tau_rule: TauRule::MaxObserved,
            standardize: false,
        },
    )?;
    Ok(GeneratedScenario {
        data,
        true_slopes: spec.true_slopes(),
        lambda,
    })
}
