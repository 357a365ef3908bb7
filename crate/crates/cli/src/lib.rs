//! Front end for `survscreen`: run configuration, the JSON screening
//! report, and the `screen`, `simulate` and `bench` commands.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use survscreen::estimators::{bonferroni_test, oracle_test};
use survscreen::simulation::{
    generate_scenario, monte_carlo_rejection, Censoring, ErrorLaw, Method, Model,
    MonteCarloConfig, MonteCarloReport, ScenarioSpec,
};
use survscreen::stabilized::{
    multi_ordering_test, random_ordering, stabilized_estimate, StabilizedConfig, Variant,
};
use survscreen::survival::{read_csv_path, Coarsening, IngestOptions, SurvivalDataset, TauRule};

pub const TOOL: &str = "survscreen";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input or configuration (exit code 2).
    Input(String),
    /// Error raised by the estimators.
    Core(survscreen::Error),
}

impl CliError {
    /// 2 for input errors, 3 for numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<survscreen::Error> for CliError {
    fn from(e: survscreen::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum MethodChoice {
    Stabilized,
    Bonferroni,
    /// One-step test of the named predictor.
    Oracle { predictor: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QnChoice {
    Half,
    Fixed(usize),
}

impl QnChoice {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            QnChoice::Half => n / 2,
            QnChoice::Fixed(q) => q,
        }
    }
}

/// Parses `half` or a positive integer.
pub fn parse_qn(s: &str) -> Result<QnChoice, String> {
    if s == "half" {
        return Ok(QnChoice::Half);
    }
    s.parse::<usize>()
        .map(QnChoice::Fixed)
        .map_err(|_| format!("expected `half` or an integer, got `{s}`"))
}

/// Parses `max` or `q:<x>`.
pub fn parse_tau(s: &str) -> Result<TauRule, String> {
    if s == "max" {
        return Ok(TauRule::MaxObserved);
    }
    s.strip_prefix("q:")
        .and_then(|q| q.parse::<f64>().ok())
        .filter(|q| *q > 0.0 && *q <= 1.0)
        .map(TauRule::Quantile)
        .ok_or_else(|| format!("expected `max` or `q:<x>` with x in (0, 1], got `{s}`"))
}

/// Parses `prefix` or `full`.
pub fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "prefix" => Ok(Variant::Prefix),
        "full" => Ok(Variant::FullSample),
        _ => Err(format!("expected `prefix` or `full`, got `{s}`")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: MethodChoice,
    pub q_n: QnChoice,
    pub orderings: usize,
    pub alpha: f64,
    pub variant: Variant,
    pub tau_rule: TauRule,
    pub standardize: bool,
    pub seed: u64,
    /// Worker threads; not part of the echoed configuration because results
    /// do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: MethodChoice::Stabilized,
            q_n: QnChoice::Half,
            orderings: 1,
            alpha: 0.05,
            variant: Variant::FullSample,
            tau_rule: TauRule::MaxObserved,
            standardize: true,
            seed: 0,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.orderings == 0 {
            return Err(CliError::Input("--orderings must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Input(format!("--alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if let MethodChoice::Oracle { predictor } = &self.method {
            if predictor.is_empty() {
                return Err(CliError::Input("oracle method requires --oracle-k NAME".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub index: usize,
    pub seed: u64,
    pub estimate: f64,
    pub sigma_bar: f64,
    pub p_value: f64,
    pub selected_predictor: String,
    /// Share of prefixes that selected `selected_predictor`.
    pub selected_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Execution {
    pub threads: usize,
    pub elapsed_ms: f64,
}

/// JSON report of one screening run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub method: String,
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    pub censoring_fraction: f64,
    pub estimate: f64,
    pub sigma: f64,
    pub ci: [f64; 2],
    /// Unadjusted p-value of the reported estimate (the minimum over
    /// orderings or predictors).
    pub p_value: f64,
    /// Multiplicity-adjusted p-value.
    pub adjusted_p: f64,
    pub reject: bool,
    pub selected_predictor: String,
    pub orderings: Vec<OrderingReport>,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution: Option<Execution>,
}

/// Seed from the clock, for runs without `--seed`.
pub fn auto_seed() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}

/// Reads `path` and screens it.
pub fn cmd_screen(path: &Path, config: &RunConfig, timing: bool) -> Result<Report, CliError> {
    config.validate()?;
    let start = Instant::now();
    let data = read_csv_path(
        path,
        IngestOptions {
            tau_rule: config.tau_rule,
            standardize: config.standardize,
        },
    )
    .map_err(|e| match e {
        e if e.is_numerical() => CliError::Core(e),
        e => CliError::Input(format!("{}: {e}", path.display())),
    })?;
    let mut report = survscreen::with_threads(config.threads, || screen_dataset(&data, config))?;
    if timing {
        report.execution = Some(Execution {
            threads: config.threads.unwrap_or_else(rayon_threads),
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(report)
}

fn rayon_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Screens an in-memory dataset.
pub fn screen_dataset(data: &SurvivalDataset, config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let names = data.names();
    let base = |method: &str, estimate, sigma, ci, p_value, adjusted_p, reject, selected: usize| Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        method: method.into(),
        n: data.n(),
        p: data.p(),
        tau: data.tau(),
        censoring_fraction: data.censoring_fraction(),
        estimate,
        sigma,
        ci,
        p_value,
        adjusted_p,
        reject,
        selected_predictor: names[selected].clone(),
        orderings: Vec::new(),
        config: config.clone(),
        execution: None,
    };
    match &config.method {
        MethodChoice::Stabilized => {
            let q_n = config.q_n.resolve(data.n());
            if q_n < 2 || q_n + 1 > data.n() {
                return Err(CliError::Input(format!(
                    "--qn must lie in [2, n - 1] = [2, {}], got {q_n}",
                    data.n().saturating_sub(1)
                )));
            }
            let cfg = StabilizedConfig {
                q_n,
                variant: config.variant,
                alpha: config.alpha,
            };
            let multi = multi_ordering_test(data, &cfg, config.orderings, config.seed)?;
            let best = &multi.best;
            let (modal, _) = best.modal_predictor();
            let mut report = base(
                "stabilized",
                best.s_star,
                best.sigma_bar,
                [best.ci_low, best.ci_high],
                multi.min_p,
                multi.adjusted_p,
                multi.reject,
                modal,
            );
            report.orderings = multi
                .orderings
                .iter()
                .map(|o| OrderingReport {
                    index: o.index,
                    seed: o.seed,
                    estimate: o.s_star,
                    sigma_bar: o.sigma_bar,
                    p_value: o.p_value,
                    selected_predictor: names[o.modal_k].clone(),
                    selected_share: o.modal_share,
                })
                .collect();
            Ok(report)
        }
        MethodChoice::Bonferroni => {
            let b = bonferroni_test(data, config.alpha, &Coarsening::Single)?;
            Ok(base(
                "bonferroni",
                b.best.s_onestep,
                b.best.sigma_hat,
                [b.best.ci_low, b.best.ci_high],
                b.min_p,
                b.adjusted_p,
                b.reject,
                b.best_k,
            ))
        }
        MethodChoice::Oracle { predictor } => {
            let k = data
                .column_index(predictor)
                .ok_or_else(|| CliError::Input(format!("unknown predictor `{predictor}`")))?;
            let o = oracle_test(data, k, config.alpha, &Coarsening::Single)?;
            let r = &o.result;
            Ok(base(
                "oracle",
                r.s_onestep,
                r.sigma_hat,
                [r.ci_low, r.ci_high],
                r.p_value,
                r.p_value,
                o.reject,
                k,
            ))
        }
    }
}

/// Options of the `simulate` command.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub spec: ScenarioSpec,
    pub methods: Vec<Method>,
    pub config: MonteCarloConfig,
    pub threads: Option<usize>,
}

pub fn parse_model(s: &str) -> Result<Model, String> {
    match s.to_ascii_uppercase().as_str() {
        "N" => Ok(Model::N),
        "A1" => Ok(Model::A1),
        "A2" => Ok(Model::A2),
        _ => Err(format!("unknown model `{s}`; expected N, A1 or A2")),
    }
}

pub fn parse_error_law(s: &str) -> Result<ErrorLaw, String> {
    match s {
        "independent" => Ok(ErrorLaw::Independent),
        "dependent" => Ok(ErrorLaw::Dependent),
        _ => Err(format!("unknown error law `{s}`; expected independent or dependent")),
    }
}

pub fn parse_censoring(s: &str) -> Result<Censoring, String> {
    match s {
        "none" => Ok(Censoring::None),
        "light" => Ok(Censoring::Light),
        "heavy" => Ok(Censoring::Heavy),
        _ => Err(format!("unknown censoring `{s}`; expected none, light or heavy")),
    }
}

/// Runs every requested method and returns one report per method.
pub fn cmd_simulate(options: &SimulateOptions) -> Result<Vec<MonteCarloReport>, CliError> {
    if options.methods.is_empty() {
        return Err(CliError::Input("at least one --method is required".into()));
    }
    survscreen::with_threads(options.threads, || {
        options
            .methods
            .iter()
            .map(|&m| monte_carlo_rejection(&options.spec, m, &options.config).map_err(CliError::from))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub n: usize,
    pub p: usize,
    pub q_n: usize,
    pub variant: String,
    pub threads: usize,
    pub generate_ms: f64,
    pub screen_ms: f64,
}

/// Times one stabilized screen on a simulated null dataset with light censoring.
pub fn cmd_bench(
    n: usize,
    p: usize,
    q_n: Option<usize>,
    variant: Variant,
    threads: Option<usize>,
    seed: u64,
) -> Result<BenchResult, CliError> {
    survscreen::with_threads(threads, || {
        let start = Instant::now();
        let spec = ScenarioSpec::new(Model::N, ErrorLaw::Independent, Censoring::Light, n, p, seed);
        let data = generate_scenario(&spec)?.data;
        let generate_ms = start.elapsed().as_secs_f64() * 1e3;
        let q_n = q_n.unwrap_or(n / 2);
        let cfg = StabilizedConfig {
            q_n,
            variant,
            alpha: 0.05,
        };
        let start = Instant::now();
        stabilized_estimate(&data, &cfg, &random_ordering(n, seed))?;
        Ok(BenchResult {
            n,
            p,
            q_n,
            variant: match variant {
                Variant::Prefix => "prefix".into(),
                Variant::FullSample => "full".into(),
            },
            threads: rayon::current_num_threads(),
            generate_ms,
            screen_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_qn("half").unwrap(), QnChoice::Half);
        assert_eq!(parse_qn("12").unwrap(), QnChoice::Fixed(12));
        assert!(parse_qn("x").is_err());
        assert_eq!(parse_tau("max").unwrap(), TauRule::MaxObserved);
        assert_eq!(parse_tau("q:0.9").unwrap(), TauRule::Quantile(0.9));
        assert!(parse_tau("q:1.5").is_err());
        assert_eq!(parse_variant("full").unwrap(), Variant::FullSample);
        assert!(parse_model("B").is_err());
        assert_eq!(parse_model("a1").unwrap(), Model::A1);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.orderings = 0;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        c.orderings = 1;
        c.alpha = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn exit_codes_split_numerical_errors() {
        let numerical = CliError::Core(survscreen::Error::DegenerateInfluence { j: 3, sigma: 0.0 });
        assert_eq!(numerical.exit_code(), 3);
        let input = CliError::Core(survscreen::Error::BadHeader("x".into()));
        assert_eq!(input.exit_code(), 2);
    }
}
