//! Stabilized one-step estimator.
//!
//! Along an ordering of the observations, every prefix of size
//! `j = q_n..n-1` selects the predictor with the strongest marginal slope,
//! evaluates the one-step increment of that predictor at observation `j+1`,
//! and scales it by the inverse of the prefix influence-function standard
//! deviation. The average of these increments is asymptotically normal
//! whatever the number of predictors.

mod kernel;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::{select_along, select_predictor, Selection};

use crate::error::{Error, Result};
use crate::estimators::{NuisanceBundle, SharedNuisance, SIGMA_FLOOR};
use crate::normal;
use crate::rng;
use crate::survival::{Coarsening, SurvivalDataset};

/// Which nuisance estimates feed the increments. Selection is always
/// computed on the prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Residual-life model and predictor moments fitted on the prefix;
    /// censoring fitted on the full sample.
    Prefix,
    /// All nuisances fitted on the full sample.
    FullSample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizedConfig {
    pub q_n: usize,
    pub variant: Variant,
    pub alpha: f64,
}

impl StabilizedConfig {
    /// `q_n = floor(n / 2)`.
    pub fn half(n: usize) -> usize {
        n / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixTrace {
    pub j: usize,
    pub k: usize,
    /// Sign of the selected slope, `+1` or `-1`.
    pub m: f64,
    pub sigma: f64,
    pub weight: f64,
    /// One-step estimate `S_k` at the next observation, before sign and weight.
    pub one_step: f64,
    /// `weight * m * one_step`.
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizedResult {
    pub s_star: f64,
    pub sigma_bar: f64,
    pub traces: Vec<PrefixTrace>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
    pub n: usize,
    pub q_n: usize,
    pub variant: Variant,
    pub alpha: f64,
    /// Seed that generated the ordering, when it was random.
    pub ordering_seed: Option<u64>,
}

impl StabilizedResult {
    /// `sqrt(n - q_n) s* / sigma_bar`.
    pub fn statistic(&self) -> f64 {
        ((self.n - self.q_n) as f64).sqrt() * self.s_star / self.sigma_bar
    }

    /// Most frequently selected predictor and its share of the prefixes;
    /// ties go to the smallest index.
    pub fn modal_predictor(&self) -> (usize, f64) {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for t in &self.traces {
            *counts.entry(t.k).or_default() += 1;
        }
        let mut best = (0, 0);
        for (&k, &c) in &counts {
            if c > best.1 {
                best = (k, c);
            }
        }
        (best.0, best.1 as f64 / self.traces.len() as f64)
    }
}

/// Confidence interval and two-sided p-value from `s*`, `sigma_bar` and the
/// number of increments `count = n - q_n`.
pub fn ci_pvalue(s_star: f64, sigma_bar: f64, count: usize, alpha: f64) -> (f64, f64, f64) {
    let root = (count as f64).sqrt();
    let half_width = normal::z_two_sided(alpha) * sigma_bar / root;
    (
        s_star - half_width,
        s_star + half_width,
        normal::two_sided_p(root * s_star / sigma_bar),
    )
}

/// Stabilized one-step estimate along `ordering` (a permutation of `0..n`).
pub fn stabilized_estimate(
    data: &SurvivalDataset,
    config: &StabilizedConfig,
    ordering: &[usize],
) -> Result<StabilizedResult> {
    let n = data.n();
    let q = config.q_n;
    if q < 2 || q + 1 > n {
        return Err(Error::InvalidArgument(format!(
            "q_n must lie in [2, n - 1] = [2, {}], got {q}",
            n.saturating_sub(1)
        )));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {}",
            config.alpha
        )));
    }
    check_permutation(ordering, n)?;

    let shared = SharedNuisance::fit(data, &Coarsening::Single)?;
    let selections = select_along(data, ordering, q..n)?;

    // (sigma_j, S_j) per prefix.
    let steps: Vec<(f64, f64)> = match config.variant {
        Variant::FullSample => {
            let all: Vec<usize> = (0..n).collect();
            let mut cache: BTreeMap<usize, (f64, Vec<f64>)> = BTreeMap::new();
            for s in &selections {
                cache.entry(s.k).or_insert((0.0, Vec::new()));
            }
            let fitted = cache
                .keys()
                .copied()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|k| {
                    let bundle = NuisanceBundle::fit(data, k, &shared.censoring, &shared.y, &all)?;
                    let values = all.iter().map(|&r| bundle.if_star(r)).collect();
                    Ok((k, (bundle.psi(), values)))
                })
                .collect::<Result<Vec<_>>>()?;
            cache.extend(fitted);
            selections
                .iter()
                .zip(q..n)
                .map(|(s, j)| {
                    let (psi, values) = &cache[&s.k];
                    let sigma = centered_sd(ordering[..j].iter().map(|&r| values[r]), j);
                    (sigma, psi + values[ordering[j]])
                })
                .collect()
        }
        Variant::Prefix => selections
            .par_iter()
            .zip((q..n).into_par_iter())
            .map(|(s, j)| {
                let prefix = &ordering[..j];
                let bundle = NuisanceBundle::fit(data, s.k, &shared.censoring, &shared.y, prefix)?;
                let sigma = centered_sd(prefix.iter().map(|&r| bundle.if_star(r)), j);
                Ok((sigma, bundle.psi() + bundle.if_star(ordering[j])))
            })
            .collect::<Result<Vec<_>>>()?,
    };

    for (&(sigma, _), j) in steps.iter().zip(q..n) {
        if !(sigma >= SIGMA_FLOOR) {
            return Err(Error::DegenerateInfluence { j, sigma });
        }
    }
    let count = n - q;
    let sigma_bar = count as f64 / steps.iter().map(|s| 1.0 / s.0).sum::<f64>();
    let traces: Vec<PrefixTrace> = selections
        .iter()
        .zip(&steps)
        .zip(q..n)
        .map(|((s, &(sigma, one_step)), j)| {
            let weight = sigma_bar / sigma;
            PrefixTrace {
                j,
                k: s.k,
                m: s.sign,
                sigma,
                weight,
                one_step,
                increment: weight * s.sign * one_step,
            }
        })
        .collect();
    let s_star = traces.iter().map(|t| t.increment).sum::<f64>() / count as f64;
    let (ci_low, ci_high, p_value) = ci_pvalue(s_star, sigma_bar, count, config.alpha);
    Ok(StabilizedResult {
        s_star,
        sigma_bar,
        traces,
        ci_low,
        ci_high,
        p_value,
        n,
        q_n: q,
        variant: config.variant,
        alpha: config.alpha,
        ordering_seed: None,
    })
}

/// Uniform random permutation of `0..n` determined by `seed`.
pub fn random_ordering(n: usize, seed: u64) -> Vec<usize> {
    let mut ordering: Vec<usize> = (0..n).collect();
    ordering.shuffle(&mut rng::stream(seed, 0));
    ordering
}

/// Seed of ordering `index` under a run seed.
pub fn ordering_seed(seed: u64, index: usize) -> u64 {
    rng::child_seed(seed, index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingSummary {
    pub index: usize,
    pub seed: u64,
    pub s_star: f64,
    pub sigma_bar: f64,
    pub p_value: f64,
    pub modal_k: usize,
    pub modal_share: f64,
}

/// Stabilized tests over `R` random orderings combined by Bonferroni.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiOrderingResult {
    pub orderings: Vec<OrderingSummary>,
    pub min_p: f64,
    pub best_ordering: usize,
    /// `min(1, R min_p)`.
    pub adjusted_p: f64,
    pub reject: bool,
    /// Full result of the ordering with the smallest p-value.
    pub best: StabilizedResult,
}

pub fn multi_ordering_test(
    data: &SurvivalDataset,
    config: &StabilizedConfig,
    orderings: usize,
    seed: u64,
) -> Result<MultiOrderingResult> {
    if orderings == 0 {
        return Err(Error::InvalidArgument("at least one ordering is required".into()));
    }
    let results = (0..orderings)
        .into_par_iter()
        .map(|r| {
            let s = ordering_seed(seed, r);
            let mut result = stabilized_estimate(data, config, &random_ordering(data.n(), s))?;
            result.ordering_seed = Some(s);
            Ok(result)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (r, res) in results.iter().enumerate() {
        if res.p_value < results[best].p_value {
            best = r;
        }
    }
    let summaries = results
        .iter()
        .enumerate()
        .map(|(index, res)| {
            let (modal_k, modal_share) = res.modal_predictor();
            OrderingSummary {
                index,
                seed: res.ordering_seed.unwrap_or_default(),
                s_star: res.s_star,
                sigma_bar: res.sigma_bar,
                p_value: res.p_value,
                modal_k,
                modal_share,
            }
        })
        .collect();
    let min_p = results[best].p_value;
    let r = orderings as f64;
    Ok(MultiOrderingResult {
        orderings: summaries,
        min_p,
        best_ordering: best,
        adjusted_p: (r * min_p).min(1.0),
        reject: min_p < config.alpha / r,
        best: results.into_iter().nth(best).expect("non-empty"),
    })
}

fn centered_sd<I: Iterator<Item = f64>>(values: I, count: usize) -> f64 {
    let values: Vec<f64> = values.collect();
    let mean = values.iter().sum::<f64>() / count as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64).sqrt()
}

fn check_permutation(ordering: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if ordering.len() != n {
        return Err(Error::InvalidArgument(format!(
            "ordering has length {}, expected {n}",
            ordering.len()
        )));
    }
    for &r in ordering {
        if r >= n || std::mem::replace(&mut seen[r], true) {
            return Err(Error::InvalidArgument(
                "ordering is not a permutation of the observations".into(),
            ));
        }
    }
    Ok(())
}
