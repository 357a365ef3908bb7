use survscreen::simulation::{
    generate_scenario, ks_test_normal, monte_carlo_rejection, Censoring, ErrorLaw, Method, Model,
    MonteCarloConfig, ScenarioSpec,
};

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn exchangeable_predictors_have_the_target_correlation() {
    let spec = ScenarioSpec::new(Model::N, ErrorLaw::Independent, Censoring::None, 100_000, 3, 5);
    let data = generate_scenario(&spec).unwrap().data;
    let r = correlation(data.column(0), data.column(1));
    assert!((r - 0.75).abs() < 0.01, "{r}");
    let r = correlation(data.column(1), data.column(2));
    assert!((r - 0.75).abs() < 0.01, "{r}");
}

#[test]
fn calibrated_censoring_reaches_its_target() {
    for (model, error, censoring) in [
        (Model::N, ErrorLaw::Independent, Censoring::Light),
        (Model::A1, ErrorLaw::Dependent, Censoring::Light),
        (Model::A2, ErrorLaw::Independent, Censoring::Heavy),
    ] {
        let spec = ScenarioSpec::new(model, error, censoring, 10_000, 10, 17);
        let data = generate_scenario(&spec).unwrap().data;
        let f = data.censoring_fraction();
        assert!((f - censoring.target()).abs() < 0.02, "{model:?} {censoring:?}: {f}");
    }
}

#[test]
fn dependent_errors_have_the_stated_conditional_variance() {
    // Under model N the survival time is the error itself.
    let spec = ScenarioSpec::new(Model::N, ErrorLaw::Dependent, Censoring::None, 200_000, 1, 23);
    let data = generate_scenario(&spec).unwrap().data;
    let mut pairs: Vec<(f64, f64)> = data
        .column(0)
        .iter()
        .zip(data.observations())
        .map(|(&u, o)| (u, o.x))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut chi_sq = 0.0;
    let bins = 10;
    for chunk in pairs.chunks(pairs.len() / bins) {
        let m = chunk.len() as f64;
        let mean = chunk.iter().map(|p| p.1).sum::<f64>() / m;
        let var = chunk.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let expected = chunk.iter().map(|p| 0.7 * (p.0.abs() + 0.7)).sum::<f64>() / m;
        // Sample variance of (near-)normal data: sd = sigma^2 sqrt(2 / (m - 1)).
        let z = (var - expected) / (expected * (2.0 / (m - 1.0)).sqrt());
        chi_sq += z * z;
    }
    // 99.9% quantile of chi-square with 10 degrees of freedom.
    assert!(chi_sq < 29.59, "{chi_sq}");
}

#[test]
fn one_step_is_consistent_for_the_a1_slope() {
    let spec = ScenarioSpec::new(Model::A1, ErrorLaw::Independent, Censoring::None, 1000, 1, 31);
    let report = monte_carlo_rejection(&spec, Method::Oracle(0), &MonteCarloConfig::new(500)).unwrap();
    let mean = report.outcomes.iter().map(|o| o.estimate).sum::<f64>() / 500.0;
    assert!((mean - 0.25).abs() < 0.02, "{mean}");
}

#[test]
fn null_statistics_look_standard_normal() {
    let spec = ScenarioSpec::new(Model::N, ErrorLaw::Independent, Censoring::Light, 100, 20, 41);
    let report = monte_carlo_rejection(&spec, Method::StabilizedFull, &MonteCarloConfig::new(200)).unwrap();
    let z: Vec<f64> = report.outcomes.iter().map(|o| o.statistic).collect();
    let ks = ks_test_normal(&z);
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn failing_replicates_report_their_seed() {
    // With n = 3 the default start index is 1, which is out of range.
    let spec = ScenarioSpec::new(Model::N, ErrorLaw::Independent, Censoring::None, 3, 2, 1);
    let err = monte_carlo_rejection(&spec, Method::StabilizedFull, &MonteCarloConfig::new(2)).unwrap_err();
    assert!(matches!(err, survscreen::Error::Replicate { .. }), "{err}");
}
