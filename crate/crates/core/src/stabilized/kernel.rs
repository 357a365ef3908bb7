//! Predictor selection kernel.
//!
//! For a block of prefix sizes, one centered synthetic-response weight
//! vector is built per prefix and scattered into an `n x BLOCK` row-major
//! buffer indexed by original row. Every predictor column is then streamed
//! once per block: a single pass computes its dot products with all weight
//! vectors of the block, and its prefix sums of `u` and `u^2` give the
//! prefix variances.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::residual_life::VARIANCE_FLOOR;
use crate::survival::{KaplanMeierFit, SurvivalDataset, WEIGHT_FLOOR};

const BLOCK: usize = 32;
const COLUMNS_PER_TASK: usize = 64;

/// Predictor selected on a prefix: the index maximising the absolute
/// slope, and the sign of that slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub k: usize,
    pub sign: f64,
    pub slope: f64,
}

impl Selection {
    const NONE: Selection = Selection {
        k: usize::MAX,
        sign: 1.0,
        slope: 0.0,
    };

    fn better(self, other: Selection) -> Selection {
        let (a, b) = (self.slope.abs(), other.slope.abs());
        if a > b || (a == b && self.k <= other.k) {
            self
        } else {
            other
        }
    }

    fn finish(self) -> Selection {
        if self.k == usize::MAX || self.slope == 0.0 {
            // All slopes zero: first predictor, positive sign.
            Selection {
                k: if self.k == usize::MAX { 0 } else { self.k },
                sign: 1.0,
                slope: 0.0,
            }
        } else {
            Selection {
                sign: self.slope.signum(),
                ..self
            }
        }
    }
}

/// Selects the predictor with the largest absolute slope on the given rows.
pub fn select_predictor(data: &SurvivalDataset, rows: &[usize]) -> Result<Selection> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "selection needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    Ok(select_block(data, rows, &[rows.len()])?[0])
}

/// Selections for every prefix size `j` in `sizes` of `ordering`.
pub fn select_along(
    data: &SurvivalDataset,
    ordering: &[usize],
    sizes: std::ops::Range<usize>,
) -> Result<Vec<Selection>> {
    let sizes: Vec<usize> = sizes.collect();
    let mut out = Vec::with_capacity(sizes.len());
    for block in sizes.chunks(BLOCK) {
        out.extend(select_block(data, ordering, block)?);
    }
    Ok(out)
}

/// Centered prefix weights `Y_i - mean(Y)` with `Y = delta X / G_j(X)`,
/// `G_j` the censoring Kaplan-Meier fit of the prefix.
fn prefix_weights(data: &SurvivalDataset, prefix: &[usize]) -> Result<Vec<f64>> {
    let mut pairs: Vec<(f64, bool)> = prefix
        .iter()
        .map(|&r| {
            let o = data.observation(r);
            (o.x, o.delta)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let km = KaplanMeierFit::fit_sorted(&pairs);
    let mut y = Vec::with_capacity(prefix.len());
    for &r in prefix {
        let o = data.observation(r);
        if o.delta {
            let g = km.survival(o.x);
            if g < WEIGHT_FLOOR {
                return Err(Error::WeightBlowUp {
                    row: r + 1,
                    x: o.x,
                    g,
                });
            }
            y.push(o.x / g);
        } else {
            y.push(0.0);
        }
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    for v in &mut y {
        *v -= mean;
    }
    Ok(y)
}

fn select_block(data: &SurvivalDataset, ordering: &[usize], sizes: &[usize]) -> Result<Vec<Selection>> {
    debug_assert!(sizes.len() <= BLOCK);
    let n = data.n();
    let width = sizes.len();
    let max_j = sizes.iter().copied().max().unwrap_or(0);

    let mut weights = vec![0.0; n * BLOCK];
    for (b, &j) in sizes.iter().enumerate() {
        let prefix = &ordering[..j];
        for (&r, w) in prefix.iter().zip(prefix_weights(data, prefix)?) {
            weights[r * BLOCK + b] = w;
        }
    }

    let scan = |best: [Selection; BLOCK], k: usize| -> [Selection; BLOCK] {
        let column = data.column(k);
        let mut dots = [0.0f64; BLOCK];
        for (r, &u) in column.iter().enumerate() {
            let row = &weights[r * BLOCK..(r + 1) * BLOCK];
            for (acc, &w) in dots.iter_mut().zip(row) {
                *acc += u * w;
            }
        }

        // Prefix variances from running sums of the shifted column.
        let shift = column[ordering[0]];
        let mut variances = [0.0f64; BLOCK];
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut next = 0;
        let mut order: [usize; BLOCK] = [0; BLOCK];
        for (b, slot) in order.iter_mut().enumerate().take(width) {
            *slot = b;
        }
        order[..width].sort_by_key(|&b| sizes[b]);
        for (pos, &r) in ordering[..max_j].iter().enumerate() {
            let v = column[r] - shift;
            s1 += v;
            s2 += v * v;
            while next < width && sizes[order[next]] == pos + 1 {
                let j = (pos + 1) as f64;
                let mean = s1 / j;
                variances[order[next]] = s2 / j - mean * mean;
                next += 1;
            }
        }

        let mut best = best;
        for b in 0..width {
            let var = variances[b];
            let slope = if var >= VARIANCE_FLOOR {
                dots[b] / sizes[b] as f64 / var
            } else {
                0.0
            };
            best[b] = best[b].better(Selection { k, sign: 1.0, slope });
        }
        best
    };

    let merged = (0..data.p())
        .into_par_iter()
        .with_min_len(COLUMNS_PER_TASK)
        .fold(|| [Selection::NONE; BLOCK], scan)
        .reduce(
            || [Selection::NONE; BLOCK],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.better(y);
                }
                a
            },
        );
    Ok(merged[..width].iter().map(|s| s.finish()).collect())
}
