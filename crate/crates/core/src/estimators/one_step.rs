use serde::{Deserialize, Serialize};

use super::nuisance::NuisanceBundle;
use crate::error::{Error, Result};
use crate::normal;
use crate::residual_life::VARIANCE_FLOOR;
use crate::survival::{
    fit_km_censoring, synthetic_response, CensoringModel, Coarsening, SurvivalDataset,
    SyntheticResponses,
};

/// Influence-function standard deviations below this are treated as degenerate.
pub const SIGMA_FLOOR: f64 = 1e-8;

const FORM_TOLERANCE: f64 = 1e-8;

/// Which rows feed the residual-life model, the predictor moments and the
/// empirical average. The censoring fit always uses the full sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSplit {
    Full,
    /// The first `j` rows.
    Prefix(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneStepConfig {
    pub split: SampleSplit,
    pub strata: Coarsening,
    pub alpha: f64,
}

impl Default for OneStepConfig {
    fn default() -> Self {
        OneStepConfig {
            split: SampleSplit::Full,
            strata: Coarsening::Single,
            alpha: 0.05,
        }
    }
}

/// One-step estimate of the marginal slope of one predictor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneStepResult {
    pub k: usize,
    pub psi_plugin: f64,
    pub s_onestep: f64,
    #[serde(skip)]
    pub if_values: Vec<f64>,
    /// Square root of the uncentered second moment of the influence values.
    pub sigma_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
    /// `|plug-in form - direct form|` of the one-step estimate.
    pub form_gap: f64,
}

impl OneStepResult {
    /// `sqrt(m) S / sigma` with `m` the number of averaged influence values.
    pub fn statistic(&self) -> f64 {
        (self.if_values.len() as f64).sqrt() * self.s_onestep / self.sigma_hat
    }
}

/// Full-sample censoring fit and synthetic responses shared by every predictor.
#[derive(Debug, Clone)]
pub struct SharedNuisance {
    pub censoring: CensoringModel,
    pub y: SyntheticResponses,
}

impl SharedNuisance {
    pub fn fit(data: &SurvivalDataset, strata: &Coarsening) -> Result<Self> {
        let censoring = fit_km_censoring(data, strata)?;
        let y = synthetic_response(data, &censoring)?;
        Ok(SharedNuisance { censoring, y })
    }
}

/// Koul-Susarla-Van Ryzin slope `Cov(U, Y) / Var(U)` over `rows` (divisor = row count).
pub fn ksv_slope(
    data: &SurvivalDataset,
    y: &SyntheticResponses,
    k: usize,
    rows: &[usize],
) -> Result<f64> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "slope needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let column = data.column(k);
    let count = rows.len() as f64;
    let u_mean = rows.iter().map(|&r| column[r]).sum::<f64>() / count;
    let y_mean = rows.iter().map(|&r| y.get(r)).sum::<f64>() / count;
    let (mut cov, mut var) = (0.0, 0.0);
    for &r in rows {
        let d = column[r] - u_mean;
        cov += d * (y.get(r) - y_mean);
        var += d * d;
    }
    let (cov, var) = (cov / count, var / count);
    if !(var >= VARIANCE_FLOOR) {
        return Err(Error::VarianceBelowFloor {
            what: format!("predictor `{}`", data.names()[k]),
            value: var,
        });
    }
    Ok(cov / var)
}

/// Efficient one-step estimator for predictor `k`.
pub fn one_step(data: &SurvivalDataset, k: usize, config: &OneStepConfig) -> Result<OneStepResult> {
    check_predictor(data, k)?;
    let shared = SharedNuisance::fit(data, &config.strata)?;
    let rows: Vec<usize> = match config.split {
        SampleSplit::Full => (0..data.n()).collect(),
        SampleSplit::Prefix(j) => {
            if j < 2 || j > data.n() {
                return Err(Error::InvalidArgument(format!(
                    "prefix size {j} outside [2, {}]",
                    data.n()
                )));
            }
            (0..j).collect()
        }
    };
    one_step_with(data, k, &shared, &rows, config.alpha)
}

/// One-step estimator over `rows` with precomputed censoring nuisances.
///
/// Both algebraic forms are evaluated: the plug-in plus mean influence
/// function, and the direct weighted-response form. A disagreement beyond
/// `1e-8` is reported as an error.
pub fn one_step_with(
    data: &SurvivalDataset,
    k: usize,
    shared: &SharedNuisance,
    rows: &[usize],
    alpha: f64,
) -> Result<OneStepResult> {
    let bundle = NuisanceBundle::fit(data, k, &shared.censoring, &shared.y, rows)?;
    let moments = *bundle.moments();
    let count = rows.len() as f64;

    let mut if_values = Vec::with_capacity(rows.len());
    let (mut weighted_y, mut weighted_martingale) = (0.0, 0.0);
    for &r in rows {
        let d = bundle.u(r) - moments.u_mean;
        weighted_y += d * shared.y.get(r);
        weighted_martingale += d * bundle.martingale_term(r);
        if_values.push(bundle.if_star(r));
    }
    let psi_plugin = bundle.psi();
    let plugin_form = psi_plugin + if_values.iter().sum::<f64>() / count;
    let direct_form = (weighted_y - weighted_martingale) / count / moments.u_var;
    let form_gap = (plugin_form - direct_form).abs();
    if !(form_gap <= FORM_TOLERANCE * (1.0 + direct_form.abs())) {
        return Err(Error::FormMismatch {
            plugin_form,
            direct_form,
        });
    }

    let sigma_hat = (if_values.iter().map(|v| v * v).sum::<f64>() / count).sqrt();
    if !(sigma_hat >= SIGMA_FLOOR) {
        return Err(Error::DegenerateInfluence {
            j: rows.len(),
            sigma: sigma_hat,
        });
    }
    let half_width = normal::z_two_sided(alpha) * sigma_hat / count.sqrt();
    Ok(OneStepResult {
        k,
        psi_plugin,
        s_onestep: direct_form,
        if_values,
        sigma_hat,
        ci_low: direct_form - half_width,
        ci_high: direct_form + half_width,
        p_value: normal::two_sided_p(count.sqrt() * direct_form / sigma_hat),
        form_gap,
    })
}

pub(crate) fn check_predictor(data: &SurvivalDataset, k: usize) -> Result<()> {
    if k >= data.p() {
        return Err(Error::InvalidArgument(format!(
            "predictor index {k} out of range for {} predictors",
            data.p()
        )));
    }
    Ok(())
}
