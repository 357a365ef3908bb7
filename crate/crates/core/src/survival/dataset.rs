use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One right-censored observation: follow-up time `x` (log scale, capped at
/// tau) and event indicator `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub x: f64,
    pub delta: bool,
    pub row_index: usize,
}

/// How the end of follow-up tau is chosen from the observed times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "q")]
pub enum TauRule {
    /// tau is the largest observed time; no observation is modified.
    MaxObserved,
    /// tau is the lower (type-1) empirical quantile of the observed times:
    /// the `ceil(n q)`-th order statistic.
    Quantile(f64),
}

impl TauRule {
    pub fn resolve(&self, times: &[f64]) -> Result<f64> {
        if times.is_empty() {
            return Err(Error::TooFewObservations { n: 0 });
        }
        match *self {
            TauRule::MaxObserved => Ok(times.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            TauRule::Quantile(q) => {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "tau quantile must lie in (0, 1], got {q}"
                    )));
                }
                let mut sorted = times.to_vec();
                sorted.sort_by(f64::total_cmp);
                let n = sorted.len();
                let rank = ((n as f64) * q).ceil() as usize;
                Ok(sorted[rank.clamp(1, n) - 1])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub tau_rule: TauRule,
    pub standardize: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            tau_rule: TauRule::MaxObserved,
            standardize: true,
        }
    }
}

/// A single input row before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub time: f64,
    pub status: u8,
    pub predictors: Vec<f64>,
}

/// Immutable survival dataset with predictors stored column-major, one
/// contiguous slice per predictor.
#[derive(Debug, Clone)]
pub struct SurvivalDataset {
    observations: Vec<Observation>,
    predictors: Vec<f64>,
    names: Vec<String>,
    tau: f64,
    standardized: bool,
    censored_by_tau: usize,
}

impl SurvivalDataset {
    /// Builds a dataset from row records.
    pub fn ingest(records: &[Record], names: Vec<String>, options: IngestOptions) -> Result<Self> {
        let p = names.len();
        let n = records.len();
        let mut times = Vec::with_capacity(n);
        let mut status = Vec::with_capacity(n);
        let mut columns = vec![Vec::with_capacity(n); p];
        for (row, record) in records.iter().enumerate() {
            if record.status > 1 {
                return Err(Error::InvalidStatus {
                    row: row + 1,
                    value: record.status.to_string(),
                });
            }
            if record.predictors.len() != p {
                return Err(Error::RaggedRow {
                    row: row + 1,
                    expected: p + 2,
                    found: record.predictors.len() + 2,
                });
            }
            times.push(record.time);
            status.push(record.status == 1);
            for (column, &value) in columns.iter_mut().zip(&record.predictors) {
                column.push(value);
            }
        }
        Self::from_columns(times, status, columns, names, options)
    }

    /// Builds a dataset directly from column vectors.
    pub fn from_columns(
        times: Vec<f64>,
        status: Vec<bool>,
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
        options: IngestOptions,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::TooFewObservations { n });
        }
        if status.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} status values for {n} times",
                status.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::InvalidArgument("at least one predictor is required".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} predictor columns",
                names.len(),
                columns.len()
            )));
        }
        for (row, t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite {
                    row: row + 1,
                    column: "time".into(),
                    value: t.to_string(),
                });
            }
        }

        let p = columns.len();
        let mut predictors = Vec::with_capacity(n * p);
        for (index, column) in columns.into_iter().enumerate() {
            if column.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "predictor `{}` has {} values, expected {n}",
                    names[index],
                    column.len()
                )));
            }
            if let Some(row) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    row: row + 1,
                    column: names[index].clone(),
                    value: column[row].to_string(),
                });
            }
            let first = column[0];
            if column.iter().all(|&v| v == first) {
                return Err(Error::ConstantColumn {
                    index,
                    name: names[index].clone(),
                });
            }
            predictors.extend(column);
        }

        let tau = options.tau_rule.resolve(&times)?;
        let mut censored_by_tau = 0;
        let observations = times
            .iter()
            .zip(&status)
            .enumerate()
            .map(|(row_index, (&x, &delta))| {
                if x > tau {
                    censored_by_tau += 1;
                    Observation {
                        x: tau,
                        delta: false,
                        row_index,
                    }
                } else {
                    Observation { x, delta, row_index }
                }
            })
            .collect();

        let mut data = SurvivalDataset {
            observations,
            predictors,
            names,
            tau,
            standardized: false,
            censored_by_tau,
        };
        if options.standardize {
            data.standardize()?;
        }
        Ok(data)
    }

    fn standardize(&mut self) -> Result<()> {
        let n = self.n();
        for k in 0..self.p() {
            let column = &mut self.predictors[k * n..(k + 1) * n];
            let mean = column.iter().sum::<f64>() / n as f64;
            let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            if !(var > 0.0) {
                return Err(Error::ConstantColumn {
                    index: k,
                    name: self.names[k].clone(),
                });
            }
            let sd = var.sqrt();
            for v in column.iter_mut() {
                *v = (*v - mean) / sd;
            }
        }
        self.standardized = true;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Number of observations administratively censored at tau during ingestion.
    pub fn censored_by_tau(&self) -> usize {
        self.censored_by_tau
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn observation(&self, row: usize) -> &Observation {
        &self.observations[row]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The `k`-th predictor column (0-based), contiguous over all rows.
    pub fn column(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.predictors[k * n..(k + 1) * n]
    }

    pub fn value(&self, row: usize, k: usize) -> f64 {
        self.predictors[k * self.n() + row]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|candidate| candidate == name)
    }

    pub fn censoring_fraction(&self) -> f64 {
        let censored = self.observations.iter().filter(|o| !o.delta).count();
        censored as f64 / self.n() as f64
    }
}
