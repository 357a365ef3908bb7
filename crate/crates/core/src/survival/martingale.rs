use super::dataset::Observation;
use super::kaplan_meier::KaplanMeierFit;

/// Integral of `e(s)` against the censoring martingale residual of one
/// observation:
///
/// `e(X) 1(delta = 0) - sum_{jump s <= X} e(s) dLambda(s)`.
///
/// `e` is the integrand as a function of time for this observation's
/// predictor value. The sum runs over the censoring jump times of `km`.
pub fn martingale_integral<F>(e: F, obs: &Observation, km: &KaplanMeierFit) -> f64
where
    F: Fn(f64) -> f64,
{
    let jumps = km.jumps_through(obs.x);
    let compensator: f64 = km.jump_times()[..jumps]
        .iter()
        .zip(&km.hazard_increments()[..jumps])
        .map(|(&s, &dl)| e(s) * dl)
        .sum();
    let counting = if obs.delta { 0.0 } else { e(obs.x) };
    counting - compensator
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(x: f64, delta: bool, row_index: usize) -> Observation {
        Observation { x, delta, row_index }
    }

    #[test]
    fn vanishes_without_censoring() {
        let data = [obs(1.0, true, 0), obs(2.0, true, 1)];
        let km = KaplanMeierFit::fit(data.iter().map(|o| (o.x, o.delta)));
        for o in &data {
            assert_eq!(martingale_integral(|s| s * s + 3.0, o, &km), 0.0);
        }
    }

    #[test]
    fn single_censored_observation() {
        let o = obs(4.0, false, 0);
        let km = KaplanMeierFit::fit([(o.x, o.delta)]);
        assert_eq!(martingale_integral(|_| 2.5, &o, &km), 0.0);
    }

    #[test]
    fn event_after_one_censoring() {
        let data = [obs(1.0, false, 0), obs(2.0, true, 1)];
        let km = KaplanMeierFit::fit(data.iter().map(|o| (o.x, o.delta)));
        assert_eq!(martingale_integral(|_| 1.0, &data[1], &km), -0.5);
        assert_eq!(martingale_integral(|_| 1.0, &data[0], &km), 0.5);
    }
}
