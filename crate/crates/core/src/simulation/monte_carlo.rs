use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::scenario::{generate_scenario, ScenarioSpec};
use crate::error::{Error, Result};
use crate::estimators::{bonferroni_test, oracle_test};
use crate::rng;
use crate::stabilized::{multi_ordering_test, StabilizedConfig, StabilizedResult, Variant};
use crate::survival::Coarsening;

/// Testing procedure applied to each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Stabilized one-step, prefix nuisances, one random ordering.
    StabilizedPrefix,
    /// Stabilized one-step, full-sample nuisances, one random ordering.
    StabilizedFull,
    /// Full-sample stabilized one-step over `R` orderings with Bonferroni.
    StabilizedMulti(usize),
    Bonferroni,
    /// One-step test of a predictor fixed in advance.
    Oracle(usize),
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::StabilizedPrefix => "stabilized_prefix".into(),
            Method::StabilizedFull => "stabilized_full".into(),
            Method::StabilizedMulti(r) => format!("stabilized_multiR{r}"),
            Method::Bonferroni => "bonferroni".into(),
            Method::Oracle(_) => "oracle".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub reps: usize,
    pub alpha: f64,
    /// Stabilized start index; `None` means `n / 2`.
    pub q_n: Option<usize>,
}

impl MonteCarloConfig {
    pub fn new(reps: usize) -> Self {
        MonteCarloConfig {
            reps,
            alpha: 0.05,
            q_n: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub rep: usize,
    pub seed: u64,
    pub estimate: f64,
    /// Standardized statistic, approximately `N(0, 1)` under the null.
    pub statistic: f64,
    /// p-value after any multiplicity adjustment.
    pub p_value: f64,
    pub reject: bool,
    pub selected_k: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `None` when the selected predictor is not a true maximiser.
    pub covered: Option<bool>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub spec: ScenarioSpec,
    pub method: String,
    pub reps: usize,
    pub alpha: f64,
    /// Calibrated exponential censoring rate (0 without censoring).
    pub censoring_rate: f64,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// Fraction of eligible replicates whose interval covers the truth.
    pub coverage: Option<f64>,
    pub coverage_eligible: usize,
    pub mean_runtime_ms: f64,
    pub outcomes: Vec<ReplicateOutcome>,
}

/// Runs `config.reps` seeded replicates of `spec` in parallel. Replicate
/// `r` uses the data seed `child_seed(spec.seed, r)`; a failing replicate
/// aborts the run with its seed.
pub fn monte_carlo_rejection(
    spec: &ScenarioSpec,
    method: Method,
    config: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    spec.validate()?;
    if config.reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    if let Method::Oracle(k) = method {
        if k >= spec.p {
            return Err(Error::InvalidArgument(format!("oracle predictor {k} >= p = {}", spec.p)));
        }
    }
    let outcomes = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = rng::child_seed(spec.seed, rep as u64);
            run_replicate(spec, method, config, rep, seed).map_err(|e| Error::Replicate {
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let censoring_rate = generate_scenario(&ScenarioSpec { n: 3, ..*spec })?.lambda;
    let rejections = outcomes.iter().filter(|o| o.reject).count();
    let eligible: Vec<bool> = outcomes.iter().filter_map(|o| o.covered).collect();
    let reps = config.reps as f64;
    Ok(MonteCarloReport {
        spec: *spec,
        method: method.name(),
        reps: config.reps,
        alpha: config.alpha,
        censoring_rate,
        rejections,
        rejection_rate: rejections as f64 / reps,
        coverage: (!eligible.is_empty())
            .then(|| eligible.iter().filter(|&&c| c).count() as f64 / eligible.len() as f64),
        coverage_eligible: eligible.len(),
        mean_runtime_ms: outcomes.iter().map(|o| o.runtime_ms).sum::<f64>() / reps,
        outcomes,
    })
}

fn run_replicate(
    spec: &ScenarioSpec,
    method: Method,
    config: &MonteCarloConfig,
    rep: usize,
    seed: u64,
) -> Result<ReplicateOutcome> {
    let scenario = generate_scenario(&ScenarioSpec { seed, ..*spec })?;
    let data = &scenario.data;
    let slopes = &scenario.true_slopes;
    let (target, argmax) = spec.true_target();
    let stabilized = |variant: Variant, orderings: usize| -> Result<(StabilizedResult, f64, bool)> {
        let cfg = StabilizedConfig {
            q_n: config.q_n.unwrap_or(spec.n / 2),
            variant,
            alpha: config.alpha,
        };
        let multi = multi_ordering_test(data, &cfg, orderings, seed)?;
        Ok((multi.best, multi.adjusted_p, multi.reject))
    };

    let start = Instant::now();
    let outcome = match method {
        Method::StabilizedPrefix | Method::StabilizedFull | Method::StabilizedMulti(_) => {
            let (variant, orderings) = match method {
                Method::StabilizedPrefix => (Variant::Prefix, 1),
                Method::StabilizedMulti(r) => (Variant::FullSample, r),
                _ => (Variant::FullSample, 1),
            };
            let (best, p_value, reject) = stabilized(variant, orderings)?;
            let eligible = best.traces.iter().all(|t| argmax.contains(&t.k));
            ReplicateOutcome {
                rep,
                seed,
                estimate: best.s_star,
                statistic: best.statistic(),
                p_value,
                reject,
                selected_k: best.modal_predictor().0,
                ci_low: best.ci_low,
                ci_high: best.ci_high,
                covered: eligible.then_some(best.ci_low <= target && target <= best.ci_high),
                runtime_ms: 0.0,
            }
        }
        Method::Bonferroni => {
            let b = bonferroni_test(data, config.alpha, &Coarsening::Single)?;
            let truth = slopes[b.best_k];
            ReplicateOutcome {
                rep,
                seed,
                estimate: b.best.s_onestep,
                statistic: b.statistics[b.best_k],
                p_value: b.adjusted_p,
                reject: b.reject,
                selected_k: b.best_k,
                ci_low: b.best.ci_low,
                ci_high: b.best.ci_high,
                covered: argmax
                    .contains(&b.best_k)
                    .then_some(b.best.ci_low <= truth && truth <= b.best.ci_high),
                runtime_ms: 0.0,
            }
        }
        Method::Oracle(k) => {
            let o = oracle_test(data, k, config.alpha, &Coarsening::Single)?;
            let truth = slopes[k];
            ReplicateOutcome {
                rep,
                seed,
                estimate: o.result.s_onestep,
                statistic: o.result.statistic(),
                p_value: o.result.p_value,
                reject: o.reject,
                selected_k: k,
                ci_low: o.result.ci_low,
                ci_high: o.result.ci_high,
                covered: Some(o.result.ci_low <= truth && truth <= o.result.ci_high),
                runtime_ms: 0.0,
            }
        }
    };
    Ok(ReplicateOutcome {
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        ..outcome
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    model: &'a str,
    error: &'a str,
    censoring: &'a str,
    n: usize,
    p: usize,
    censoring_rate: f64,
    method: &'a str,
    reps: usize,
    rejection_rate: f64,
    coverage: Option<f64>,
    mean_runtime_ms: f64,
}

/// Writes one CSV row per report under the header
/// `model,error,censoring,n,p,method,reps,rejection_rate,coverage,mean_runtime_ms`.
pub fn write_reports_csv<W: Write>(reports: &[MonteCarloReport], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    if reports.is_empty() {
        out.write_record([
            "model",
            "error",
            "censoring",
            "n",
            "p",
            "censoring_rate",
            "method",
            "reps",
            "rejection_rate",
            "coverage",
            "mean_runtime_ms",
        ])?;
    }
    for r in reports {
        out.serialize(CsvRow {
            model: r.spec.model.label(),
            error: r.spec.error.label(),
            censoring: r.spec.censoring.label(),
            n: r.spec.n,
            p: r.spec.p,
            censoring_rate: r.censoring_rate,
            method: &r.method,
            reps: r.reps,
            rejection_rate: r.rejection_rate,
            coverage: r.coverage,
            mean_runtime_ms: r.mean_runtime_ms,
        })?;
    }
    out.flush()?;
    Ok(())
}
