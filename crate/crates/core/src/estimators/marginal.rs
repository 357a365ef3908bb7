use rayon::prelude::*;
use serde::Serialize;

use super::nuisance::NuisanceBundle;
use super::one_step::{check_predictor, one_step_with, OneStepResult, SharedNuisance};
use crate::error::{Error, Result};
use crate::survival::{Coarsening, SurvivalDataset};

/// Marginal one-step tests of every predictor with a Bonferroni correction.
#[derive(Debug, Clone, Serialize)]
pub struct BonferroniResult {
    /// `B_k = sqrt(n) S_k / sigma_k`.
    pub statistics: Vec<f64>,
    pub estimates: Vec<f64>,
    pub p_values: Vec<f64>,
    pub min_p: f64,
    pub best_k: usize,
    /// `min(1, p min_p)`.
    pub adjusted_p: f64,
    pub reject: bool,
    /// Full result for the predictor with the smallest p-value.
    pub best: OneStepResult,
}

pub fn bonferroni_test(
    data: &SurvivalDataset,
    alpha: f64,
    strata: &Coarsening,
) -> Result<BonferroniResult> {
    check_alpha(alpha)?;
    let shared = SharedNuisance::fit(data, strata)?;
    let rows: Vec<usize> = (0..data.n()).collect();
    let summaries = (0..data.p())
        .into_par_iter()
        .map(|k| {
            one_step_with(data, k, &shared, &rows, alpha)
                .map(|r| (r.statistic(), r.s_onestep, r.p_value))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best_k = 0;
    for (k, s) in summaries.iter().enumerate() {
        if s.2 < summaries[best_k].2 {
            best_k = k;
        }
    }
    let p = data.p() as f64;
    let min_p = summaries[best_k].2;
    let best = one_step_with(data, best_k, &shared, &rows, alpha)?;
    Ok(BonferroniResult {
        statistics: summaries.iter().map(|s| s.0).collect(),
        estimates: summaries.iter().map(|s| s.1).collect(),
        p_values: summaries.iter().map(|s| s.2).collect(),
        min_p,
        best_k,
        adjusted_p: (p * min_p).min(1.0),
        reject: min_p < alpha / p,
        best,
    })
}

/// One-step test of a predictor chosen in advance.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub result: OneStepResult,
    pub reject: bool,
}

pub fn oracle_test(
    data: &SurvivalDataset,
    k: usize,
    alpha: f64,
    strata: &Coarsening,
) -> Result<OracleResult> {
    check_alpha(alpha)?;
    check_predictor(data, k)?;
    let shared = SharedNuisance::fit(data, strata)?;
    let rows: Vec<usize> = (0..data.n()).collect();
    let result = one_step_with(data, k, &shared, &rows, alpha)?;
    let reject = result.p_value < alpha;
    Ok(OracleResult { result, reject })
}

/// Upper bound on the influence-function variance obtained by maximising
/// over the unknown covariance `m` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservativeVariance {
    pub sigma_sq: f64,
    pub m_at_max: f64,
    pub grid: Vec<f64>,
    /// Second moment of the corrected influence function at each grid point.
    pub moments: Vec<f64>,
}

/// Default half-width of the `m` grid: four standard deviations of `E(U)`
/// over the sample.
pub fn default_m_bound(bundle: &NuisanceBundle<'_>, rows: &[usize]) -> f64 {
    let ols = bundle.residual_life().ols();
    let count = rows.len() as f64;
    let values: Vec<f64> = rows.iter().map(|&r| ols.eval(bundle.u(r))).collect();
    let mean = values.iter().sum::<f64>() / count;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count).sqrt();
    (4.0 * sd).max(f64::EPSILON)
}

pub const DEFAULT_GRID_SIZE: usize = 101;

/// Conservative variance for predictor `k` over a uniform grid of
/// `grid_size` points on `[-m_bound, m_bound]`. `m_bound = None` uses
/// [`default_m_bound`].
pub fn conservative_variance(
    data: &SurvivalDataset,
    k: usize,
    m_bound: Option<f64>,
    grid_size: usize,
    strata: &Coarsening,
) -> Result<ConservativeVariance> {
    check_predictor(data, k)?;
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be at least 2, got {grid_size}"
        )));
    }
    let shared = SharedNuisance::fit(data, strata)?;
    let rows: Vec<usize> = (0..data.n()).collect();
    let bundle = NuisanceBundle::fit(data, k, &shared.censoring, &shared.y, &rows)?;
    let bound = m_bound.unwrap_or_else(|| default_m_bound(&bundle, &rows));
    if !(bound > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid half-width must be positive, got {bound}"
        )));
    }
    let grid: Vec<f64> = (0..grid_size)
        .map(|g| -bound + 2.0 * bound * g as f64 / (grid_size - 1) as f64)
        .collect();
    Ok(conservative_from_bundle(&bundle, &rows, grid))
}

/// Maximises the second moment of `IF* + IF_m` over the supplied grid.
pub fn conservative_from_bundle(
    bundle: &NuisanceBundle<'_>,
    rows: &[usize],
    grid: Vec<f64>,
) -> ConservativeVariance {
    let m = *bundle.moments();
    let count = rows.len() as f64;
    let terms: Vec<(f64, f64)> = rows
        .iter()
        .map(|&r| {
            let d = bundle.u(r) - m.u_mean;
            (bundle.if_star(r), (d * d - m.u_var) / m.u_var.powi(2))
        })
        .collect();
    let moments: Vec<f64> = grid
        .iter()
        .map(|&mv| {
            let scale = m.cov_u_e - mv;
            terms
                .iter()
                .map(|&(star, shape)| (star + scale * shape).powi(2))
                .sum::<f64>()
                / count
        })
        .collect();
    let mut best = 0;
    for (g, &v) in moments.iter().enumerate() {
        if v > moments[best] {
            best = g;
        }
    }
    ConservativeVariance {
        sigma_sq: moments[best],
        m_at_max: grid[best],
        grid,
        moments,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{one_step, OneStepConfig};
    use crate::survival::{IngestOptions, TauRule};

    fn dataset(columns: Vec<Vec<f64>>) -> SurvivalDataset {
        let names = (0..columns.len()).map(|k| format!("u{}", k + 1)).collect();
        SurvivalDataset::from_columns(
            vec![0.3, 1.1, -0.5, 2.0, 0.9, 1.4, 0.2, 1.8],
            vec![true, false, true, true, false, true, false, true],
            columns,
            names,
            IngestOptions {
                tau_rule: TauRule::MaxObserved,
                standardize: true,
            },
        )
        .unwrap()
    }

    fn a() -> Vec<f64> {
        vec![0.1, 0.7, -1.2, 1.9, 0.0, -0.4, 0.8, 1.1]
    }

    fn b() -> Vec<f64> {
        vec![1.0, -0.3, 0.2, 0.5, -1.4, 0.9, 0.1, -0.6]
    }

    #[test]
    fn single_predictor_matches_one_step() {
        let data = dataset(vec![a()]);
        let bonf = bonferroni_test(&data, 0.05, &Coarsening::Single).unwrap();
        let single = one_step(&data, 0, &OneStepConfig::default()).unwrap();
        assert_eq!(bonf.p_values[0], single.p_value);
        assert_eq!(bonf.reject, single.p_value < 0.05);
        assert_eq!(bonf.adjusted_p, single.p_value.min(1.0));
    }

    #[test]
    fn duplicate_columns_share_statistics() {
        let data = dataset(vec![a(), b(), a()]);
        let bonf = bonferroni_test(&data, 0.05, &Coarsening::Single).unwrap();
        assert_eq!(bonf.statistics[0], bonf.statistics[2]);
        assert_ne!(bonf.statistics[0], bonf.statistics[1]);
        assert!(bonf.best_k != 2, "ties go to the smallest index");
    }

    #[test]
    fn oracle_equals_one_step() {
        let data = dataset(vec![a(), b()]);
        let oracle = oracle_test(&data, 1, 0.05, &Coarsening::Single).unwrap();
        let single = one_step(&data, 1, &OneStepConfig::default()).unwrap();
        assert_eq!(oracle.result, single);
        assert_eq!(oracle.reject, single.p_value < 0.05);
    }

    #[test]
    fn conservative_variance_dominates_and_grows_with_the_grid() {
        let data = dataset(vec![a(), b()]);
        let shared = SharedNuisance::fit(&data, &Coarsening::Single).unwrap();
        let rows: Vec<usize> = (0..data.n()).collect();
        let bundle = NuisanceBundle::fit(&data, 0, &shared.censoring, &shared.y, &rows).unwrap();
        let cov = bundle.moments().cov_u_e;
        let sigma_sq = rows.iter().map(|&r| bundle.if_star(r).powi(2)).sum::<f64>() / rows.len() as f64;

        let with_cov = conservative_from_bundle(&bundle, &rows, vec![-1.0, cov, 1.0]);
        assert!(with_cov.sigma_sq >= sigma_sq);
        assert!((with_cov.moments[1] - sigma_sq).abs() < 1e-12);

        let narrow = conservative_variance(&data, 0, Some(0.5), 11, &Coarsening::Single).unwrap();
        let wide = conservative_variance(&data, 0, Some(1.0), 21, &Coarsening::Single).unwrap();
        assert!(wide.sigma_sq >= narrow.sigma_sq);

        assert!(conservative_variance(&data, 0, Some(0.0), 11, &Coarsening::Single).is_err());
        assert!(conservative_variance(&data, 0, None, 1, &Coarsening::Single).is_err());
    }

    #[test]
    fn conservative_variance_matches_three_point_oracle() {
        let data = dataset(vec![b()]);
        let got = conservative_variance(&data, 0, Some(2.0), 3, &Coarsening::Single).unwrap();
        assert_eq!(got.grid, vec![-2.0, 0.0, 2.0]);

        // Independent recomputation of the three moments from the one-step output.
        let r = one_step(&data, 0, &OneStepConfig::default()).unwrap();
        let u = data.column(0);
        let n = u.len() as f64;
        let mean = u.iter().sum::<f64>() / n;
        let var = u.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let cov = r.psi_plugin * var;
        let expected = [-2.0, 0.0, 2.0]
            .iter()
            .map(|&m| {
                r.if_values
                    .iter()
                    .zip(u)
                    .map(|(f, ui)| {
                        let extra = (cov - m) / (var * var) * ((ui - mean).powi(2) - var);
                        (f + extra).powi(2)
                    })
                    .sum::<f64>()
                    / n
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((got.sigma_sq - expected).abs() < 1e-12);
    }
}
