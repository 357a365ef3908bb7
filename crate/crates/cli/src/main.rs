use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use survscreen::simulation::{write_reports_csv, Method, MonteCarloConfig, ScenarioSpec};
use survscreen::stabilized::Variant;
use survscreen::survival::TauRule;
use survscreen_cli::{
    auto_seed, cmd_bench, cmd_screen, cmd_simulate, parse_censoring, parse_error_law, parse_model,
    parse_qn, parse_tau, parse_variant, CliError, MethodChoice, QnChoice, RunConfig,
    SimulateOptions,
};

#[derive(Parser)]
#[command(name = "survscreen", version, about = "Screen predictors for association with a censored survival outcome")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen a CSV file (`time,status,<predictors...>`) and print a JSON report.
    Screen(ScreenArgs),
    /// Run a Monte-Carlo study and print rejection rates as CSV.
    Simulate(SimulateArgs),
    /// Time one stabilized screen on simulated data and print a CSV line.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScreenMethod {
    Stabilized,
    Bonferroni,
    Oracle,
}

#[derive(clap::Args)]
struct ScreenArgs {
    /// Input CSV, optionally gzip-compressed.
    csv: PathBuf,
    #[arg(long, value_enum, default_value = "stabilized")]
    method: ScreenMethod,
    /// Smallest prefix size, or `half` for n/2.
    #[arg(long = "qn", value_parser = parse_qn, default_value = "half")]
    q_n: QnChoice,
    /// Number of random orderings combined by Bonferroni.
    #[arg(long, default_value_t = 1)]
    orderings: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Nuisance estimates for the increments: `prefix` or `full`.
    #[arg(long, value_parser = parse_variant, default_value = "full")]
    variant: Variant,
    /// End of follow-up: `max` or `q:<x>` for the x-quantile of observed times.
    #[arg(long, value_parser = parse_tau, default_value = "max")]
    tau: TauRule,
    /// Keep predictors on their original scale.
    #[arg(long)]
    no_standardize: bool,
    /// Random seed for the orderings; generated and reported when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "SURVSCREEN_THREADS")]
    threads: Option<usize>,
    /// Predictor tested by the oracle method.
    #[arg(long = "oracle-k", value_name = "NAME")]
    oracle_k: Option<String>,
    /// Add an `execution` block with thread count and wall time.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SimMethod {
    StabilizedPrefix,
    StabilizedFull,
    StabilizedMulti,
    Bonferroni,
    Oracle,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_model, default_value = "N")]
    model: survscreen::simulation::Model,
    #[arg(long, value_parser = parse_error_law, default_value = "independent")]
    error: survscreen::simulation::ErrorLaw,
    #[arg(long, value_parser = parse_censoring, default_value = "light")]
    censoring: survscreen::simulation::Censoring,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = ScenarioSpec::DEFAULT_RHO)]
    rho: f64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Methods to run; repeat or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "stabilized-full")]
    method: Vec<SimMethod>,
    /// Orderings for `stabilized-multi`.
    #[arg(long, default_value_t = 10)]
    orderings: usize,
    /// Predictor (1-based) tested by `oracle`.
    #[arg(long = "oracle-k", default_value_t = 1)]
    oracle_k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "qn", value_parser = parse_qn, default_value = "half")]
    q_n: QnChoice,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, env = "SURVSCREEN_THREADS")]
    threads: Option<usize>,
    /// Also write the full reports, with per-replicate outcomes, as JSON.
    #[arg(long, value_name = "PATH")]
    details: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    p: usize,
    #[arg(long = "qn")]
    q_n: Option<usize>,
    #[arg(long, value_parser = parse_variant, default_value = "full")]
    variant: Variant,
    #[arg(long, env = "SURVSCREEN_THREADS")]
    threads: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let io = |e: std::io::Error| CliError::Input(e.to_string());
    match cli.command {
        Command::Screen(args) => {
            let method = match args.method {
                ScreenMethod::Stabilized => MethodChoice::Stabilized,
                ScreenMethod::Bonferroni => MethodChoice::Bonferroni,
                ScreenMethod::Oracle => MethodChoice::Oracle {
                    predictor: args.oracle_k.clone().unwrap_or_default(),
                },
            };
            let config = RunConfig {
                method,
                q_n: args.q_n,
                orderings: args.orderings,
                alpha: args.alpha,
                variant: args.variant,
                tau_rule: args.tau,
                standardize: !args.no_standardize,
                seed: args.seed.unwrap_or_else(auto_seed),
                threads: args.threads,
            };
            let report = cmd_screen(&args.csv, &config, args.timing)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            writeln!(stdout, "{json}").map_err(io)?;
        }
        Command::Simulate(args) => {
            if args.oracle_k == 0 {
                return Err(CliError::Input("--oracle-k is 1-based".into()));
            }
            let methods = args
                .method
                .iter()
                .map(|m| match m {
                    SimMethod::StabilizedPrefix => Method::StabilizedPrefix,
                    SimMethod::StabilizedFull => Method::StabilizedFull,
                    SimMethod::StabilizedMulti => Method::StabilizedMulti(args.orderings),
                    SimMethod::Bonferroni => Method::Bonferroni,
                    SimMethod::Oracle => Method::Oracle(args.oracle_k - 1),
                })
                .collect();
            let options = SimulateOptions {
                spec: ScenarioSpec {
                    rho: args.rho,
                    ..ScenarioSpec::new(args.model, args.error, args.censoring, args.n, args.p, args.seed)
                },
                methods,
                config: MonteCarloConfig {
                    reps: args.reps,
                    alpha: args.alpha,
                    q_n: match args.q_n {
                        QnChoice::Half => None,
                        QnChoice::Fixed(q) => Some(q),
                    },
                },
                threads: args.threads,
            };
            let reports = cmd_simulate(&options)?;
            if let Some(path) = args.details {
                let file = std::fs::File::create(&path).map_err(io)?;
                serde_json::to_writer_pretty(file, &reports)
                    .map_err(|e| CliError::Input(e.to_string()))?;
            }
            write_reports_csv(&reports, &mut stdout)?;
        }
        Command::Bench(args) => {
            let r = cmd_bench(args.n, args.p, args.q_n, args.variant, args.threads, args.seed)?;
            writeln!(stdout, "n,p,q_n,variant,threads,generate_ms,screen_ms").map_err(io)?;
            writeln!(
                stdout,
                "{},{},{},{},{},{:.1},{:.1}",
                r.n, r.p, r.q_n, r.variant, r.threads, r.generate_ms, r.screen_ms
            )
            .map_err(io)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
