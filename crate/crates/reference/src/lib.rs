//! Brute-force evaluation of every estimator directly from its defining
//! sums, with no caching, sorting tricks or shared code with the library.
//! Cost is polynomial of high degree; meant for `n <= 50`.

/// Observations after the tau cap, with predictors as `u[k][i]`.
#[derive(Debug, Clone)]
pub struct RefData {
    pub x: Vec<f64>,
    pub delta: Vec<bool>,
    pub u: Vec<Vec<f64>>,
}

impl RefData {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn p(&self) -> usize {
        self.u.len()
    }
}

/// Censoring hazard jumps `(s, dN_c(s) / Y(s))` of the sample `rows`, where
/// `Y(s)` counts every `X >= s` including tied events.
pub fn censoring_jumps(data: &RefData, rows: &[usize]) -> Vec<(f64, f64)> {
    let mut times: Vec<f64> = rows.iter().filter(|&&i| !data.delta[i]).map(|&i| data.x[i]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .map(|s| {
            let censored = rows.iter().filter(|&&i| !data.delta[i] && data.x[i] == s).count();
            let at_risk = rows.iter().filter(|&&i| data.x[i] >= s).count();
            (s, censored as f64 / at_risk as f64)
        })
        .collect()
}

/// Left-continuous censoring Kaplan-Meier `G(t-)` fitted on `rows`.
pub fn censoring_survival(data: &RefData, rows: &[usize], t: f64) -> f64 {
    censoring_jumps(data, rows)
        .iter()
        .filter(|&&(s, _)| s < t)
        .map(|&(_, h)| 1.0 - h)
        .product()
}

/// Synthetic responses `delta X / G(X-)` for every row, with `G` fitted on `g_rows`.
pub fn synthetic(data: &RefData, g_rows: &[usize]) -> Vec<f64> {
    (0..data.n())
        .map(|i| {
            if data.delta[i] {
                data.x[i] / censoring_survival(data, g_rows, data.x[i])
            } else {
                0.0
            }
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Residual-life regression `E(u, s)` of `Y 1(X >= s)` on `U_k 1(X >= s)`
/// over `rows`, zeros included; slope zero below variance `1e-8`.
pub fn residual_life(data: &RefData, y: &[f64], k: usize, rows: &[usize], u: f64, s: f64) -> f64 {
    let ind: Vec<f64> = rows.iter().map(|&i| if data.x[i] >= s { 1.0 } else { 0.0 }).collect();
    let uu: Vec<f64> = rows.iter().zip(&ind).map(|(&i, w)| data.u[k][i] * w).collect();
    let yy: Vec<f64> = rows.iter().zip(&ind).map(|(&i, w)| y[i] * w).collect();
    let (mu, my) = (mean(&uu), mean(&yy));
    let var = mean(&uu.iter().map(|v| (v - mu).powi(2)).collect::<Vec<_>>());
    let cov = mean(&uu.iter().zip(&yy).map(|(a, b)| (a - mu) * (b - my)).collect::<Vec<_>>());
    if var < 1e-8 {
        my
    } else {
        my + cov / var * (u - mu)
    }
}

/// `int e(s) dM_i(s)` with `M_i` the censoring martingale of row `i`:
/// `e(X_i) 1(delta_i = 0) - sum_{s <= X_i} e(s) dLambda(s)`.
pub fn martingale<F: Fn(f64) -> f64>(data: &RefData, jumps: &[(f64, f64)], i: usize, e: F) -> f64 {
    let counting = if data.delta[i] { 0.0 } else { e(data.x[i]) };
    counting
        - jumps
            .iter()
            .filter(|&&(s, _)| s <= data.x[i])
            .map(|&(s, h)| e(s) * h)
            .sum::<f64>()
}

/// Plug-in, influence values and both forms of the one-step estimator.
#[derive(Debug, Clone)]
pub struct RefOneStep {
    pub psi: f64,
    /// `IF*` at every row of the data set (not only the fitting rows).
    pub if_star: Vec<f64>,
    pub if_ipw: Vec<f64>,
    pub plugin_form: f64,
    pub direct_form: f64,
    /// Uncentered root mean square of `IF*` over the fitting rows.
    pub sigma: f64,
}

/// One-step estimator for predictor `k` with residual-life model and
/// predictor moments from `rows`, censoring fitted on every row.
pub fn one_step(data: &RefData, k: usize, rows: &[usize]) -> RefOneStep {
    let all: Vec<usize> = (0..data.n()).collect();
    let y = synthetic(data, &all);
    let jumps = censoring_jumps(data, &all);
    let u = &data.u[k];
    let count = rows.len() as f64;

    let u_mean = rows.iter().map(|&i| u[i]).sum::<f64>() / count;
    let u_var = rows.iter().map(|&i| (u[i] - u_mean).powi(2)).sum::<f64>() / count;
    let e_ols = |v: f64| residual_life(data, &y, k, rows, v, f64::NEG_INFINITY);
    let e_mean = rows.iter().map(|&i| e_ols(u[i])).sum::<f64>() / count;
    let cov_u_e = rows.iter().map(|&i| (u[i] - u_mean) * (e_ols(u[i]) - e_mean)).sum::<f64>() / count;
    let psi = cov_u_e / u_var;

    let mart: Vec<f64> = (0..data.n())
        .map(|i| martingale(data, &jumps, i, |s| residual_life(data, &y, k, rows, u[i], s)))
        .collect();
    let if_ipw: Vec<f64> = (0..data.n())
        .map(|i| {
            let d = u[i] - u_mean;
            d * (y[i] - e_mean) / u_var - cov_u_e * d * d / (u_var * u_var)
        })
        .collect();
    let if_star: Vec<f64> = (0..data.n())
        .map(|i| if_ipw[i] - (u[i] - u_mean) / u_var * mart[i])
        .collect();

    let plugin_form = psi + rows.iter().map(|&i| if_star[i]).sum::<f64>() / count;
    let direct_form = rows
        .iter()
        .map(|&i| (u[i] - u_mean) * (y[i] - mart[i]))
        .sum::<f64>()
        / count
        / u_var;
    let sigma = (rows.iter().map(|&i| if_star[i].powi(2)).sum::<f64>() / count).sqrt();
    RefOneStep {
        psi,
        if_star,
        if_ipw,
        plugin_form,
        direct_form,
        sigma,
    }
}

/// Least-squares slope of `y` on `u`.
pub fn ols_slope(u: &[f64], y: &[f64]) -> f64 {
    let (mu, my) = (mean(u), mean(y));
    let cov: f64 = u.iter().zip(y).map(|(a, b)| (a - mu) * (b - my)).sum();
    let var: f64 = u.iter().map(|a| (a - mu).powi(2)).sum();
    cov / var
}

/// Predictor with the largest `|Cov(U_k, Y_j) / Var(U_k)|` on `prefix`,
/// `Y_j` built with the prefix censoring fit; ties to the smallest index,
/// all-zero slopes to `(0, +1)`.
pub fn select(data: &RefData, prefix: &[usize]) -> (usize, f64) {
    let y = synthetic(data, prefix);
    let count = prefix.len() as f64;
    let my = prefix.iter().map(|&i| y[i]).sum::<f64>() / count;
    let mut best = (0, 0.0f64);
    for k in 0..data.p() {
        let u = &data.u[k];
        let mu = prefix.iter().map(|&i| u[i]).sum::<f64>() / count;
        let var = prefix.iter().map(|&i| (u[i] - mu).powi(2)).sum::<f64>() / count;
        let cov = prefix.iter().map(|&i| (u[i] - mu) * (y[i] - my)).sum::<f64>() / count;
        let slope = if var < 1e-8 { 0.0 } else { cov / var };
        if slope.abs() > best.1.abs() {
            best = (k, slope);
        }
    }
    (best.0, if best.1 < 0.0 { -1.0 } else { 1.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefTrace {
    pub j: usize,
    pub k: usize,
    pub m: f64,
    pub sigma: f64,
    pub one_step: f64,
    pub weight: f64,
    pub increment: f64,
}

#[derive(Debug, Clone)]
pub struct RefStabilized {
    pub traces: Vec<RefTrace>,
    pub s_star: f64,
    pub sigma_bar: f64,
    pub statistic: f64,
}

/// Stabilized estimator along `ordering` from prefix size `q` on.
/// `full_sample` fits the residual-life model and predictor moments on all
/// rows instead of the prefix.
pub fn stabilized(data: &RefData, q: usize, full_sample: bool, ordering: &[usize]) -> RefStabilized {
    let n = data.n();
    let all: Vec<usize> = (0..n).collect();
    let mut raw = Vec::new();
    for j in q..n {
        let prefix = &ordering[..j];
        let (k, m) = select(data, prefix);
        let fit = one_step(data, k, if full_sample { &all } else { prefix });
        let values: Vec<f64> = prefix.iter().map(|&i| fit.if_star[i]).collect();
        let centre = mean(&values);
        let sigma = mean(&values.iter().map(|v| (v - centre).powi(2)).collect::<Vec<_>>()).sqrt();
        raw.push((j, k, m, sigma, fit.psi + fit.if_star[ordering[j]]));
    }
    let count = (n - q) as f64;
    let sigma_bar = count / raw.iter().map(|r| 1.0 / r.3).sum::<f64>();
    let traces: Vec<RefTrace> = raw
        .into_iter()
        .map(|(j, k, m, sigma, one_step)| RefTrace {
            j,
            k,
            m,
            sigma,
            one_step,
            weight: sigma_bar / sigma,
            increment: sigma_bar / sigma * m * one_step,
        })
        .collect();
    let s_star = traces.iter().map(|t| t.increment).sum::<f64>() / count;
    RefStabilized {
        traces,
        s_star,
        sigma_bar,
        statistic: count.sqrt() * s_star / sigma_bar,
    }
}
