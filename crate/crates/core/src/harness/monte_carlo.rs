//! Trials and their ordered reduction into an [`ErrorReport`].

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::observe;
use crate::regression::{estimate_static, estimate_time_field, TruncationSet};
use crate::solver::{backward_solve_regularized, error_at, TrajectorySolution};
use crate::spectral::make_grid;

use super::config::{ExperimentConfig, Resolved};
use super::rate::log_theory_order;

/// Squared errors at the configured evaluation times, plus the trajectory.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub squared_errors: Vec<f64>,
    pub solution: TrajectorySolution<f64>,
}

/// One full pipeline pass: observe, estimate, solve backward, measure.
pub fn run_trial_detailed(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<TrialOutcome> {
    let wrap = |e: Error| Error::Trial {
        n,
        trial,
        source: Box::new(e),
    };
    let inner = || -> Result<TrialOutcome> {
        let r = cfg.resolve(n)?;
        let rp = cfg.reg_params(&r)?;
        let tg = cfg.timegrid(&r)?;
        let grid = make_grid::<f64>(n)?;
        let problem = cfg.problem.build()?;

        let truth_h = problem.sample_h(&grid)?;
        let truth_g = problem.sample_g(&grid, &tg);
        let truth_a = problem.sample_a(&grid, &tg);
        let noise = cfg.noise_config(n)?.for_trial(n, trial);
        let obs = observe(&truth_h, &truth_g, &truth_a, &tg, &noise)?;

        let ts = TruncationSet::new(r.beta_n)?;
        let h_hat = estimate_static(&obs.h_tilde, &ts)?;
        let g_hat = estimate_time_field(&obs.g_tilde, &tg, &ts)?;
        let a_hat = estimate_time_field(&obs.a_tilde, &tg, &ts)?;

        let solution = backward_solve_regularized(
            &h_hat,
            &g_hat,
            &a_hat,
            &rp,
            &grid,
            &tg,
            &cfg.backward_options(),
        )?;
        let squared_errors = cfg
            .eval_times()
            .iter()
            .map(|&t| error_at(t, &solution, &problem).map(|e| e * e))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialOutcome {
            squared_errors,
            solution,
        })
    };
    inner().map_err(wrap)
}

/// Squared `L²` errors of one trial at the configured evaluation times.
pub fn run_trial(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<Vec<f64>> {
    run_trial_detailed(cfg, n, trial).map(|o| o.squared_errors)
}

/// Sample mean and unbiased sample variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub variance: f64,
}

impl SampleStats {
    /// Accumulates in slice order, so equal inputs give equal bits.
    pub fn from_samples(xs: &[f64]) -> Self {
        let k = xs.len();
        if k == 0 {
            return Self {
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        if xs.iter().all(|&x| x == xs[0]) {
            // exact for identical samples, where summation could round
            return Self {
                mean: xs[0],
                variance: 0.0,
            };
        }
        let mean = xs.iter().sum::<f64>() / k as f64;
        let variance = if k > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64
        } else {
            0.0
        };
        Self { mean, variance }
    }

    pub fn std_error(&self, trials: usize) -> f64 {
        (self.variance / trials as f64).sqrt()
    }
}

/// Results for one grid size.
#[derive(Clone, Debug)]
pub struct LadderPoint {
    pub resolved: Resolved,
    pub trials: usize,
    /// `samples[trial][time]`.
    pub samples: Vec<Vec<f64>>,
    /// One entry per evaluation time.
    pub stats: Vec<SampleStats>,
    /// Natural log of the theoretical order, per evaluation time.
    pub log_theory: Vec<f64>,
    pub wall_clock: Duration,
}

impl LadderPoint {
    pub fn n(&self) -> usize {
        self.resolved.n
    }

    pub fn theory_order(&self, time_index: usize) -> f64 {
        self.log_theory[time_index].exp()
    }
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub times: Vec<f64>,
    pub points: Vec<LadderPoint>,
}

impl ErrorReport {
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| s == t)
    }
}

/// Runs every trial of every ladder point. Trials execute in parallel; the
/// reduction is in `(n, trial)` order.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let times = cfg.eval_times();
    let mut points = Vec::with_capacity(cfg.ladder.len());
    for &n in &cfg.ladder {
        let start = Instant::now();
        let resolved = cfg.resolve(n)?;
        let samples = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_trial(cfg, n, trial))
            .collect::<Result<Vec<_>>>()?;
        let stats = (0..times.len())
            .map(|i| {
                let column: Vec<f64> = samples.iter().map(|s| s[i]).collect();
                SampleStats::from_samples(&column)
            })
            .collect();
        let log_theory = times
            .iter()
            .map(|&t| log_theory_order(cfg, &resolved, t))
            .collect();
        let wall_clock = start.elapsed();
        log::info!("n = {n}: {} trials in {:.2?}", cfg.trials, wall_clock);
        points.push(LadderPoint {
            resolved,
            trials: cfg.trials,
            samples,
            stats,
            log_theory,
            wall_clock,
        });
    }
    Ok(ErrorReport { times, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(overrides: &[&str]) -> ExperimentConfig {
        let mut ov: Vec<String> = vec!["ladder=[16, 32, 64]".into(), "trials=4".into()];
        ov.extend(overrides.iter().map(|s| s.to_string()));
        ExperimentConfig::with_overrides(&ov).unwrap()
    }

    #[test]
    fn stats_of_known_samples() {
        let s = SampleStats::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(SampleStats::from_samples(&[7.0]).variance, 0.0);
    }

    #[test]
    fn trial_is_deterministic_and_nonnegative() {
        let cfg = small(&[]);
        let a = run_trial(&cfg, 32, 3).unwrap();
        let b = run_trial(&cfg, 32, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&e| e >= 0.0));
        assert_ne!(a, run_trial(&cfg, 32, 4).unwrap());
    }

    #[test]
    fn noiseless_trials_coincide() {
        let cfg = small(&["noise.sigma=0.0", "noise.vartheta=0.0", "noise.varthetabar=0.0"]);
        assert_eq!(run_trial(&cfg, 32, 0).unwrap(), run_trial(&cfg, 32, 9).unwrap());
        let report = run_monte_carlo(&cfg).unwrap();
        assert!(report.points.iter().all(|p| p.stats.iter().all(|s| s.variance == 0.0)));
    }

    #[test]
    fn single_trial_mean_is_the_trial() {
        let cfg = small(&["trials=1"]);
        let report = run_monte_carlo(&cfg).unwrap();
        for p in &report.points {
            assert_eq!(p.stats[0].mean, p.samples[0][0]);
            assert_eq!(p.stats[1].mean, p.samples[0][1]);
        }
    }

    #[test]
    fn report_is_reproducible() {
        let cfg = small(&[]);
        let a = run_monte_carlo(&cfg).unwrap();
        let b = run_monte_carlo(&cfg).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.samples, q.samples);
            assert_eq!(p.stats, q.stats);
        }
    }

    #[test]
    fn failures_carry_trial_identity() {
        // evaluation beyond T fails inside the trial
        let mut cfg = small(&[]);
        cfg.eval_times = Some(vec![5.0]);
        match run_trial(&cfg, 16, 2) {
            Err(Error::Trial { n: 16, trial: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
