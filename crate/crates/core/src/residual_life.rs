//! Conditional residual-life regression `E(u, s)`: the linear regression of
//! `Y 1(X >= s)` on `U 1(X >= s)` over a fitting sample, with the indicator
//! zeros kept in every moment (divisor = sample size).

use crate::survival::{SurvivalDataset, SyntheticResponses};

/// Below this variance of `U 1(X >= s)` the slope is set to zero.
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// Coefficients of the centered line `intercept + slope (u - center)` for one
/// risk set `{X >= s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub intercept: f64,
    pub slope: f64,
    pub center: f64,
    pub floored: bool,
}

impl Coefficients {
    pub fn eval(&self, u: f64) -> f64 {
        self.intercept + self.slope * (u - self.center)
    }

    fn from_sums(count: f64, sum_y: f64, sum_u: f64, sum_uu: f64, sum_uy: f64) -> Self {
        let mean_y = sum_y / count;
        let mean_u = sum_u / count;
        let var = sum_uu / count - mean_u * mean_u;
        let cov = sum_uy / count - mean_u * mean_y;
        if var < VARIANCE_FLOOR {
            Coefficients {
                intercept: mean_y,
                slope: 0.0,
                center: mean_u,
                floored: true,
            }
        } else {
            Coefficients {
                intercept: mean_y,
                slope: cov / var,
                center: mean_u,
                floored: false,
            }
        }
    }
}

/// Piecewise-constant (in `s`) residual-life model.
///
/// Entry `l` of the table holds the coefficients for the risk set
/// `{X >= times[l]}`; the final entry is the empty risk set beyond the last
/// observed time. Lookup is left-continuous: `s` maps to the first cached
/// time `>= s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualLifeModel {
    times: Vec<f64>,
    coefficients: Vec<Coefficients>,
    sample_size: usize,
}

impl ResidualLifeModel {
    /// Fits predictor `k` on the rows of `rows`, using synthetic responses `y`.
    pub fn fit(data: &SurvivalDataset, y: &SyntheticResponses, k: usize, rows: &[usize]) -> Self {
        let column = data.column(k);
        Self::fit_points(
            rows.iter()
                .map(|&r| (data.observation(r).x, column[r], y.get(r))),
        )
    }

    /// Fits from `(x, u, y)` triples.
    pub fn fit_points<I>(points: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64, f64)>,
    {
        let mut points: Vec<(f64, f64, f64)> = points.into_iter().collect();
        assert!(!points.is_empty(), "residual-life fit needs at least one point");
        points.sort_by(|a, b| b.0.total_cmp(&a.0));
        let count = points.len() as f64;

        let mut times = Vec::new();
        let mut coefficients = vec![Coefficients {
            intercept: 0.0,
            slope: 0.0,
            center: 0.0,
            floored: true,
        }];
        let (mut sum_y, mut sum_u, mut sum_uu, mut sum_uy) = (0.0, 0.0, 0.0, 0.0);
        let mut i = 0;
        while i < points.len() {
            let t = points[i].0;
            while i < points.len() && points[i].0 == t {
                let (_, u, y) = points[i];
                sum_y += y;
                sum_u += u;
                sum_uu += u * u;
                sum_uy += u * y;
                i += 1;
            }
            times.push(t);
            coefficients.push(Coefficients::from_sums(count, sum_y, sum_u, sum_uu, sum_uy));
        }
        times.reverse();
        coefficients.reverse();
        ResidualLifeModel {
            times,
            coefficients,
            sample_size: points.len(),
        }
    }

    /// Index into the coefficient table for time `s`.
    pub fn index_at(&self, s: f64) -> usize {
        self.times.partition_point(|&t| t < s)
    }

    pub fn coefficients_at(&self, s: f64) -> Coefficients {
        self.coefficients[self.index_at(s)]
    }

    /// `E(u, s)`.
    pub fn evaluate(&self, u: f64, s: f64) -> f64 {
        self.coefficients_at(s).eval(u)
    }

    /// Coefficients at `s = -inf`: the ordinary least-squares line of `Y` on `U`.
    pub fn ols(&self) -> Coefficients {
        self.coefficients[0]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coefficients(&self) -> &[Coefficients] {
        &self.coefficients
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }
}
