use super::dataset::SurvivalDataset;
use crate::error::{Error, Result};

/// Censorings whose Kaplan-Meier weight falls below this floor at an event
/// time are reported as an error instead of being truncated.
pub const WEIGHT_FLOOR: f64 = 1e-10;

/// Product-limit estimate of the censoring survival function
/// `G(t) = P(C >= t)`, treating `delta = 0` as the event.
///
/// `G` is left-continuous: a censoring at `s` only affects `G(t)` for
/// `t > s`. Hazard increments are Nelson-Aalen `d_c(s) / Y(s)` with
/// `Y(s) = #{X >= s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KaplanMeierFit {
    jump_times: Vec<f64>,
    survival_after: Vec<f64>,
    hazard_increments: Vec<f64>,
    n_used: usize,
}

impl KaplanMeierFit {
    /// Fits the censoring distribution from `(x, delta)` pairs.
    pub fn fit<I>(observations: I) -> Self
    where
        I: IntoIterator<Item = (f64, bool)>,
    {
        let mut sorted: Vec<(f64, bool)> = observations.into_iter().collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::fit_sorted(&sorted)
    }

    /// Fits from pairs already sorted by time.
    pub fn fit_sorted(sorted: &[(f64, bool)]) -> Self {
        let n = sorted.len();
        let mut jump_times = Vec::new();
        let mut survival_after = Vec::new();
        let mut hazard_increments = Vec::new();
        let mut survival = 1.0;
        let mut start = 0;
        while start < n {
            let t = sorted[start].0;
            let mut end = start;
            let mut censored = 0usize;
            while end < n && sorted[end].0 == t {
                if !sorted[end].1 {
                    censored += 1;
                }
                end += 1;
            }
            if censored > 0 {
                let at_risk = (n - start) as f64;
                let increment = censored as f64 / at_risk;
                survival *= 1.0 - increment;
                jump_times.push(t);
                survival_after.push(survival);
                hazard_increments.push(increment);
            }
            start = end;
        }
        KaplanMeierFit {
            jump_times,
            survival_after,
            hazard_increments,
            n_used: n,
        }
    }

    /// `G(t)`: product over censoring jumps strictly before `t`.
    pub fn survival(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&s| s < t) {
            0 => 1.0,
            idx => self.survival_after[idx - 1],
        }
    }

    /// Cumulative hazard over jumps at or before `t`.
    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        let idx = self.jumps_through(t);
        self.hazard_increments[..idx].iter().sum()
    }

    /// Number of jump times `s <= t`.
    pub fn jumps_through(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn survival_after(&self) -> &[f64] {
        &self.survival_after
    }

    pub fn hazard_increments(&self) -> &[f64] {
        &self.hazard_increments
    }

    pub fn n_used(&self) -> usize {
        self.n_used
    }
}

/// A finite stratification `c(U)` of the observations used for stratified
/// censoring estimation. The default is a single stratum.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum Coarsening {
    #[default]
    Single,
    Labels {
        labels: Vec<usize>,
        n_strata: usize,
    },
}

impl Coarsening {
    /// Stratifies on predictor `k` through a user-supplied labelling of its values.
    pub fn from_predictor<F>(data: &SurvivalDataset, k: usize, label: F) -> Self
    where
        F: Fn(f64) -> usize,
    {
        let labels: Vec<usize> = data.column(k).iter().map(|&u| label(u)).collect();
        let n_strata = labels.iter().max().map_or(1, |m| m + 1);
        Coarsening::Labels { labels, n_strata }
    }

    pub fn from_labels(labels: Vec<usize>, n_strata: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_strata) {
            return Err(Error::InvalidArgument(format!(
                "stratum label {bad} out of range for {n_strata} strata"
            )));
        }
        Ok(Coarsening::Labels { labels, n_strata })
    }

    pub fn n_strata(&self) -> usize {
        match self {
            Coarsening::Single => 1,
            Coarsening::Labels { n_strata, .. } => *n_strata,
        }
    }

    pub fn label(&self, row: usize) -> usize {
        match self {
            Coarsening::Single => 0,
            Coarsening::Labels { labels, .. } => labels[row],
        }
    }
}

/// Per-stratum censoring fits together with the stratification that produced them.
#[derive(Debug, Clone)]
pub struct CensoringModel {
    strata: Coarsening,
    fits: Vec<KaplanMeierFit>,
}

impl CensoringModel {
    pub fn single(fit: KaplanMeierFit) -> Self {
        CensoringModel {
            strata: Coarsening::Single,
            fits: vec![fit],
        }
    }

    pub fn fit_for_row(&self, row: usize) -> &KaplanMeierFit {
        &self.fits[self.strata.label(row)]
    }

    pub fn survival(&self, row: usize, t: f64) -> f64 {
        self.fit_for_row(row).survival(t)
    }

    pub fn fits(&self) -> &[KaplanMeierFit] {
        &self.fits
    }

    pub fn strata(&self) -> &Coarsening {
        &self.strata
    }
}

/// Fits one censoring Kaplan-Meier estimate per stratum over the whole dataset.
pub fn fit_km_censoring(data: &SurvivalDataset, strata: &Coarsening) -> Result<CensoringModel> {
    if let Coarsening::Labels { labels, .. } = strata {
        if labels.len() != data.n() {
            return Err(Error::InvalidArgument(format!(
                "{} stratum labels for {} observations",
                labels.len(),
                data.n()
            )));
        }
    }
    let mut groups = vec![Vec::new(); strata.n_strata()];
    for obs in data.observations() {
        groups[strata.label(obs.row_index)].push((obs.x, obs.delta));
    }
    let tau = data.tau();
    let fits = groups
        .into_iter()
        .enumerate()
        .map(|(label, group)| {
            if group.is_empty() {
                return Err(Error::EmptyStratum { label });
            }
            if !group.iter().any(|&(x, _)| x >= tau) {
                return Err(Error::NoSubjectAtRisk { label, tau });
            }
            Ok(KaplanMeierFit::fit(group))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CensoringModel {
        strata: strata.clone(),
        fits,
    })
}

/// Inverse-probability-of-censoring weighted responses `Y = delta X / G(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticResponses {
    pub y: Vec<f64>,
}

impl SyntheticResponses {
    pub fn get(&self, row: usize) -> f64 {
        self.y[row]
    }
}

/// Computes `delta_i x_i / G(x_i)` for every observation, using the stratum
/// fit of each observation.
pub fn synthetic_response(
    data: &SurvivalDataset,
    censoring: &CensoringModel,
) -> Result<SyntheticResponses> {
    let y = data
        .observations()
        .iter()
        .map(|obs| {
            if !obs.delta {
                return Ok(0.0);
            }
            let g = censoring.survival(obs.row_index, obs.x);
            if g < WEIGHT_FLOOR {
                return Err(Error::WeightBlowUp {
                    row: obs.row_index + 1,
                    x: obs.x,
                    g,
                });
            }
            Ok(obs.x / g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticResponses { y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::{IngestOptions, TauRule};

    fn dataset(times: &[f64], status: &[bool]) -> SurvivalDataset {
        let column: Vec<f64> = (0..times.len()).map(|i| i as f64).collect();
        SurvivalDataset::from_columns(
            times.to_vec(),
            status.to_vec(),
            vec![column],
            vec!["u".into()],
            IngestOptions {
                tau_rule: TauRule::MaxObserved,
                standardize: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn no_censoring_gives_unit_survival() {
        let km = KaplanMeierFit::fit([(1.0, true), (2.0, true), (3.0, true)]);
        assert!(km.jump_times().is_empty());
        for t in [-5.0, 1.0, 2.5, 10.0] {
            assert_eq!(km.survival(t), 1.0);
            assert_eq!(km.cumulative_hazard(t), 0.0);
        }
    }

    #[test]
    fn hand_product_limit() {
        let km = KaplanMeierFit::fit([(1.0, false), (2.0, true), (3.0, false)]);
        assert_eq!(km.survival(1.0), 1.0);
        assert!((km.survival(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((km.survival(3.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(km.survival(3.5), 0.0);
        assert_eq!(km.hazard_increments(), [1.0 / 3.0, 1.0]);
    }

    #[test]
    fn tied_event_uses_survival_before_the_tie() {
        let km = KaplanMeierFit::fit([(1.0, false), (1.0, true)]);
        assert_eq!(km.survival(1.0), 1.0);
        assert_eq!(km.hazard_increments(), [0.5]);
        assert_eq!(km.survival(1.5), 0.5);
    }

    #[test]
    fn synthetic_response_examples() {
        let data = dataset(&[1.0, 2.0, 3.0], &[false, true, false]);
        let model = fit_km_censoring(&data, &Coarsening::Single).unwrap();
        let y = synthetic_response(&data, &model).unwrap();
        assert_eq!(y.get(0), 0.0);
        assert!((y.get(1) - 3.0).abs() < 1e-14);
        assert_eq!(y.get(2), 0.0);

        let uncensored = dataset(&[0.5, -1.0, 2.0], &[true, true, true]);
        let model = fit_km_censoring(&uncensored, &Coarsening::Single).unwrap();
        let y = synthetic_response(&uncensored, &model).unwrap();
        assert_eq!(y.y, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn weight_floor_is_a_hard_error() {
        let data = dataset(&[1.0, 2.0, 3.0], &[true, true, true]);
        // A fit from other data whose survival is zero after t = 1.
        let foreign = CensoringModel::single(KaplanMeierFit::fit([(1.0, false)]));
        assert!(matches!(
            synthetic_response(&data, &foreign),
            Err(Error::WeightBlowUp { row: 2, .. })
        ));
    }

    #[test]
    fn strata_are_fit_separately() {
        let data = dataset(&[1.0, 2.0, 3.0, 1.5, 2.5, 3.0], &[false, true, true, true, false, true]);
        let strata = Coarsening::from_labels(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let model = fit_km_censoring(&data, &strata).unwrap();
        assert_eq!(model.fits()[0].jump_times(), [1.0]);
        assert_eq!(model.fits()[1].jump_times(), [2.5]);
        assert!((model.survival(1, 2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((model.survival(4, 3.0) - 0.5).abs() < 1e-15);

        let empty = Coarsening::from_labels(vec![0; 6], 2).unwrap();
        assert!(matches!(
            fit_km_censoring(&data, &empty),
            Err(Error::EmptyStratum { label: 1 })
        ));
        let fine = Coarsening::from_labels(vec![0, 0, 1, 1, 1, 0], 2).unwrap();
        assert!(fit_km_censoring(&data, &fine).is_ok());
        let no_risk = Coarsening::from_labels(vec![0, 0, 1, 0, 0, 1], 2).unwrap();
        assert!(matches!(
            fit_km_censoring(&data, &no_risk),
            Err(Error::NoSubjectAtRisk { label: 0, .. })
        ));
    }
}
