use crate::error::{Error, Result};
use crate::residual_life::{ResidualLifeModel, VARIANCE_FLOOR};
use crate::survival::{CensoringModel, KaplanMeierFit, SurvivalDataset, SyntheticResponses};

/// Moments of the predictor distribution `Q_u` used by the influence functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuMoments {
    pub u_mean: f64,
    pub u_var: f64,
    /// `Cov(U, E(U))` with `E(U) = E(U, -inf)`.
    pub cov_u_e: f64,
    /// Mean of `E(U)`.
    pub e_mean: f64,
}

impl QuMoments {
    /// Plug-in slope `Cov(U, E(U)) / Var(U)`.
    pub fn psi(&self) -> f64 {
        self.cov_u_e / self.u_var
    }
}

/// Inverse-probability-weighted influence function at predictor value `u`
/// and synthetic response `y`.
pub fn ipw_term(u: f64, y: f64, moments: &QuMoments) -> f64 {
    let d = u - moments.u_mean;
    d * (y - moments.e_mean) / moments.u_var - moments.cov_u_e * d * d / moments.u_var.powi(2)
}

/// Cumulative sums of `E(u, s) dLambda(s)` over the jumps of one censoring
/// fit, split into the `u`-free part and the coefficient of `u`.
#[derive(Debug, Clone)]
struct Compensator {
    cum_free: Vec<f64>,
    cum_slope: Vec<f64>,
}

impl Compensator {
    fn new(model: &ResidualLifeModel, km: &KaplanMeierFit) -> Self {
        let jumps = km.jump_times().len();
        let mut cum_free = Vec::with_capacity(jumps + 1);
        let mut cum_slope = Vec::with_capacity(jumps + 1);
        let (mut free, mut slope) = (0.0, 0.0);
        cum_free.push(free);
        cum_slope.push(slope);
        for (&s, &dl) in km.jump_times().iter().zip(km.hazard_increments()) {
            let c = model.coefficients_at(s);
            free += (c.intercept - c.slope * c.center) * dl;
            slope += c.slope * dl;
            cum_free.push(free);
            cum_slope.push(slope);
        }
        Compensator {
            cum_free,
            cum_slope,
        }
    }
}

/// Fitted nuisance components for one predictor: censoring fit, synthetic
/// responses, residual-life model and `Q_u` moments.
///
/// The residual-life model and the moments come from the rows passed to
/// [`NuisanceBundle::fit`]; the censoring model and responses are taken as
/// given, so a prefix-fitted bundle may still use full-sample censoring.
#[derive(Debug, Clone)]
pub struct NuisanceBundle<'a> {
    data: &'a SurvivalDataset,
    k: usize,
    censoring: &'a CensoringModel,
    y: &'a SyntheticResponses,
    residual_life: ResidualLifeModel,
    moments: QuMoments,
    sample_size: usize,
    compensators: Vec<Compensator>,
}

impl<'a> NuisanceBundle<'a> {
    pub fn fit(
        data: &'a SurvivalDataset,
        k: usize,
        censoring: &'a CensoringModel,
        y: &'a SyntheticResponses,
        rows: &[usize],
    ) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "nuisance fit needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        let column = data.column(k);
        let count = rows.len() as f64;
        let u_mean = rows.iter().map(|&r| column[r]).sum::<f64>() / count;
        let u_var = rows.iter().map(|&r| (column[r] - u_mean).powi(2)).sum::<f64>() / count;
        if !(u_var >= VARIANCE_FLOOR) {
            return Err(Error::VarianceBelowFloor {
                what: format!("predictor `{}`", data.names()[k]),
                value: u_var,
            });
        }
        let residual_life = ResidualLifeModel::fit(data, y, k, rows);
        let ols = residual_life.ols();
        let e_mean = rows.iter().map(|&r| ols.eval(column[r])).sum::<f64>() / count;
        let cov_u_e = rows
            .iter()
            .map(|&r| (column[r] - u_mean) * (ols.eval(column[r]) - e_mean))
            .sum::<f64>()
            / count;
        let compensators = censoring
            .fits()
            .iter()
            .map(|km| Compensator::new(&residual_life, km))
            .collect();
        Ok(NuisanceBundle {
            data,
            k,
            censoring,
            y,
            residual_life,
            moments: QuMoments {
                u_mean,
                u_var,
                cov_u_e,
                e_mean,
            },
            sample_size: rows.len(),
            compensators,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn moments(&self) -> &QuMoments {
        &self.moments
    }

    pub fn residual_life(&self) -> &ResidualLifeModel {
        &self.residual_life
    }

    pub fn censoring(&self) -> &CensoringModel {
        self.censoring
    }

    pub fn responses(&self) -> &SyntheticResponses {
        self.y
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Plug-in estimate `Cov_Q(U, E(U)) / Var_Q(U)`.
    pub fn psi(&self) -> f64 {
        self.moments.psi()
    }

    pub fn u(&self, row: usize) -> f64 {
        self.data.value(row, self.k)
    }

    /// `int E(u_row, s) dM(s)` for observation `row`.
    pub fn martingale_term(&self, row: usize) -> f64 {
        let obs = self.data.observation(row);
        let u = self.u(row);
        let stratum = self.censoring.strata().label(row);
        let km = &self.censoring.fits()[stratum];
        let compensator = &self.compensators[stratum];
        let idx = km.jumps_through(obs.x);
        let counting = if obs.delta {
            0.0
        } else {
            self.residual_life.evaluate(u, obs.x)
        };
        counting - (compensator.cum_free[idx] + u * compensator.cum_slope[idx])
    }

    pub fn if_ipw(&self, row: usize) -> f64 {
        ipw_term(self.u(row), self.y.get(row), &self.moments)
    }

    pub fn if_car(&self, row: usize) -> f64 {
        (self.u(row) - self.moments.u_mean) / self.moments.u_var * self.martingale_term(row)
    }

    /// Efficient influence function `IF_ipw - IF_car`.
    pub fn if_star(&self, row: usize) -> f64 {
        self.if_ipw(row) - self.if_car(row)
    }
}
