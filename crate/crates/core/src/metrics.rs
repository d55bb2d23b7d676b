//! Aggregation across Monte Carlo trials and curve fits over the results.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::engine::TrialResult;
use crate::error::{Error, Result};
use crate::model::RewardModel;

/// Pointwise statistics over a set of trials, indexed by round `t - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateSeries {
    pub trials: usize,
    pub agents: usize,
    pub regret_mean: Vec<f64>,
    pub regret_stderr: Vec<f64>,
    /// Mean group communication cost `L(t)`.
    pub cost_mean: Vec<f64>,
    pub cost_stderr: Vec<f64>,
    /// Mean `L(t) / K`.
    pub cost_per_agent_mean: Vec<f64>,
    pub cost_per_agent_stderr: Vec<f64>,
}

impl AggregateSeries {
    pub fn horizon(&self) -> usize {
        self.regret_mean.len()
    }

    pub fn final_regret(&self) -> f64 {
        *self.regret_mean.last().expect("nonempty horizon")
    }

    pub fn final_cost_per_agent(&self) -> f64 {
        *self.cost_per_agent_mean.last().expect("nonempty horizon")
    }
}

/// Mean and standard error of `values`, independent of their order.
///
/// Values are summed in ascending order. When every value is identical the
/// mean is that value exactly and the standard error is exactly zero.
pub fn mean_stderr(values: &mut [f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0, "mean of an empty sample");
    values.sort_by(f64::total_cmp);
    let mean = if values[0] == values[n - 1] {
        values[0]
    } else {
        values.iter().sum::<f64>() / n as f64
    };
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn aggregate(trials: &[TrialResult]) -> Result<AggregateSeries> {
    let first = trials
        .first()
        .ok_or_else(|| Error::usage("cannot aggregate an empty trial set"))?;
    let horizon = first.horizon();
    let agents = first.pull_counts.len();
    if horizon == 0 || agents == 0 {
        return Err(Error::usage("trial has an empty horizon or no agents"));
    }
    for (j, tr) in trials.iter().enumerate() {
        if tr.horizon() != horizon || tr.comm_cost.len() != horizon {
            return Err(Error::usage(format!(
                "trial {j} has horizon {} but trial 0 has {horizon}",
                tr.horizon()
            )));
        }
        if tr.pull_counts.len() != agents {
            return Err(Error::usage(format!(
                "trial {j} has {} agents but trial 0 has {agents}",
                tr.pull_counts.len()
            )));
        }
    }

    let n = trials.len();
    let mut regret_mean = Vec::with_capacity(horizon);
    let mut regret_stderr = Vec::with_capacity(horizon);
    let mut cost_mean = Vec::with_capacity(horizon);
    let mut cost_stderr = Vec::with_capacity(horizon);
    let mut column = vec![0.0; n];
    for t in 0..horizon {
        for (slot, tr) in column.iter_mut().zip(trials) {
            *slot = tr.regret[t];
        }
        let (m, se) = mean_stderr(&mut column);
        regret_mean.push(m);
        regret_stderr.push(se);

        for (slot, tr) in column.iter_mut().zip(trials) {
            *slot = tr.comm_cost[t] as f64;
        }
        let (m, se) = mean_stderr(&mut column);
        cost_mean.push(m);
        cost_stderr.push(se);
    }
    let k = agents as f64;
    let cost_per_agent_mean = cost_mean.iter().map(|c| c / k).collect();
    let cost_per_agent_stderr = cost_stderr.iter().map(|c| c / k).collect();

    Ok(AggregateSeries {
        trials: n,
        agents,
        regret_mean,
        regret_stderr,
        cost_mean,
        cost_stderr,
        cost_per_agent_mean,
        cost_per_agent_stderr,
    })
}

/// `sum_k sum_i gap(i) * counts[k][i]`.
pub fn regret_from_counts(model: &RewardModel, counts: &[Vec<u64>]) -> f64 {
    let gaps = model.gaps();
    counts
        .iter()
        .map(|row| {
            assert_eq!(row.len(), gaps.len(), "count row does not cover every arm");
            row.iter()
                .zip(&gaps)
                .map(|(&n, g)| g * n as f64)
                .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`. A zero-variance response is fit
/// exactly and reports `r_squared = 1`.
fn least_squares(xs: &[f64], ys: &[f64]) -> Fit {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Fit {
        slope,
        intercept,
        r_squared,
    }
}

fn window_points<'a>(
    series: &'a [f64],
    window: &RangeInclusive<usize>,
) -> Result<(Vec<f64>, &'a [f64])> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo < 2 {
        return Err(Error::usage(format!(
            "fit window must start at round >= 2, got {lo}"
        )));
    }
    if hi > series.len() {
        return Err(Error::usage(format!(
            "fit window ends at round {hi} but the series has {} rounds",
            series.len()
        )));
    }
    if hi < lo || hi - lo + 1 < 3 {
        return Err(Error::usage(format!(
            "fit window {lo}..={hi} holds fewer than 3 points"
        )));
    }
    let ts = (lo..=hi).map(|t| t as f64).collect();
    Ok((ts, &series[lo - 1..hi]))
}

/// Fits `series(t) ≈ slope * ln t + intercept` over the rounds in `window`.
/// `series[t - 1]` is the value at round `t`.
pub fn log_fit(series: &[f64], window: RangeInclusive<usize>) -> Result<Fit> {
    let (ts, ys) = window_points(series, &window)?;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    Ok(least_squares(&xs, ys))
}

/// Fits `series(t) ≈ slope * t + intercept` over the rounds in `window`.
pub fn linear_fit(series: &[f64], window: RangeInclusive<usize>) -> Result<Fit> {
    let (ts, ys) = window_points(series, &window)?;
    Ok(least_squares(&ts, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(regret: Vec<f64>, cost: Vec<u64>, agents: usize) -> TrialResult {
        TrialResult {
            seed: 0,
            regret,
            comm_cost: cost,
            pull_counts: vec![vec![0; 2]; agents],
            observation_counts: vec![vec![0; 2]; agents],
        }
    }

    #[test]
    fn single_trial_aggregates_to_itself() {
        let t = trial(vec![0.0, 1.0, 3.0], vec![1, 2, 2], 2);
        let agg = aggregate(std::slice::from_ref(&t)).unwrap();
        assert_eq!(agg.regret_mean, t.regret);
        assert_eq!(agg.cost_mean, vec![1.0, 2.0, 2.0]);
        assert_eq!(agg.cost_per_agent_mean, vec![0.5, 1.0, 1.0]);
        assert!(agg.regret_stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn per_agent_cost_is_mean_over_agents() {
        let k = 7;
        let a = trial(vec![0.0], vec![0], k);
        let b = trial(vec![0.0], vec![2 * k as u64], k);
        let agg = aggregate(&[a, b]).unwrap();
        assert_eq!(agg.cost_per_agent_mean, vec![1.0]);
    }

    #[test]
    fn identical_trials_have_zero_stderr() {
        let t = trial(vec![0.1, 0.7, 1.3], vec![3, 5, 9], 3);
        let many = vec![t.clone(); 100];
        let agg = aggregate(&many).unwrap();
        assert!(agg.regret_stderr.iter().all(|&s| s == 0.0));
        assert!(agg.cost_stderr.iter().all(|&s| s == 0.0));
        assert_eq!(agg.regret_mean, t.regret);
    }

    #[test]
    fn aggregate_rejects_bad_inputs() {
        assert!(matches!(aggregate(&[]), Err(Error::Usage(_))));
        let a = trial(vec![0.0, 1.0], vec![0, 0], 1);
        let b = trial(vec![0.0], vec![0], 1);
        assert!(matches!(aggregate(&[a, b]), Err(Error::Usage(_))));
    }

    #[test]
    fn stderr_matches_textbook_formula() {
        let mut xs = vec![2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let (m, se) = mean_stderr(&mut xs);
        assert_eq!(m, 5.0);
        // sample variance 32 / 7
        assert!((se - (32.0f64 / 7.0 / 8.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn regret_from_counts_examples() {
        let model = RewardModel::gaussian(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(regret_from_counts(&model, &[vec![990, 10]]), 10.0);
        assert_eq!(regret_from_counts(&model, &[vec![1000, 0]]), 0.0);
        assert_eq!(
            regret_from_counts(&model, &vec![vec![990, 10]; 100]),
            1000.0
        );
    }

    #[test]
    fn log_fit_recovers_exact_logarithm() {
        let series: Vec<f64> = (1..=1000).map(|t| 5.0 * (t as f64).ln()).collect();
        let fit = log_fit(&series, 100..=1000).unwrap();
        assert!((fit.slope - 5.0).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_fit_of_constant_is_flat() {
        let series = vec![3.25; 50];
        let fit = log_fit(&series, 2..=50).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!((fit.intercept - 3.25).abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn linear_series_fits_a_line_better_than_a_log() {
        // Oracle: r^2 of a simple regression equals the squared Pearson
        // correlation, computed here without the fitting code.
        fn pearson_sq(xs: &[f64], ys: &[f64]) -> f64 {
            let n = xs.len() as f64;
            let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
            let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let syy: f64 = ys.iter().map(|y| y * y).sum();
            let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
            r * r
        }
        let series: Vec<f64> = (1..=1000).map(|t| 0.3 * t as f64).collect();
        let ts: Vec<f64> = (100..=1000).map(|t| t as f64).collect();
        let logs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let ys = &series[99..];
        let oracle_log = pearson_sq(&logs, ys);
        let oracle_lin = pearson_sq(&ts, ys);

        let log = log_fit(&series, 100..=1000).unwrap();
        let lin = linear_fit(&series, 100..=1000).unwrap();
        assert!((log.r_squared - oracle_log).abs() < 1e-9);
        assert!((lin.r_squared - oracle_lin).abs() < 1e-9);
        assert!((lin.r_squared - 1.0).abs() < 1e-12);
        assert!(log.r_squared < 0.95, "{}", log.r_squared);
        assert!((lin.slope - 0.3).abs() < 1e-12);
    }

    #[test]
    fn degenerate_windows_are_rejected() {
        let s = vec![1.0; 10];
        assert!(log_fit(&s, 1..=10).is_err());
        assert!(log_fit(&s, 2..=3).is_err());
        assert!(log_fit(&s, 5..=11).is_err());
        assert!(log_fit(&s, std::ops::RangeInclusive::new(8, 4)).is_err());
        assert!(log_fit(&s, 2..=4).is_ok());
    }
}
