//! Regression-only experiment: truncated sine-series estimates of
//! `H(x) = x(π − x)` from noisy samples, without any PDE solve.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{sample_gaussian_errors, NoiseConfig};
use crate::regression::{
    estimate_static, squared_error, theoretical_mse_order, BandLimited, ParabolaProfile,
    TruncationSet,
};
use crate::spectral::{make_grid, GridFunction, SineBasis, SpectralCoeffs};

use super::monte_carlo::SampleStats;
use super::output::write_atomic;
use super::rate::{fit_loglog, LogLogFit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionStudyConfig {
    pub ladder: Vec<usize>,
    pub trials: usize,
    pub sigma: f64,
    /// Bound the noise level must stay below.
    pub vmax: f64,
    /// `β = beta_scale · n`.
    pub beta_scale: f64,
    /// Smoothness used for the theoretical order.
    pub mu0: f64,
}

impl Default for RegressionStudyConfig {
    fn default() -> Self {
        Self {
            ladder: vec![64, 128, 256, 512, 1024, 2048, 4096],
            trials: 10_000,
            sigma: 0.01,
            vmax: 1.0,
            beta_scale: 1.0,
            mu0: 1.49,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionPoint {
    pub n: usize,
    pub beta_n: f64,
    pub pcut: usize,
    /// Squared coefficient-space error against the exact series.
    pub mse: SampleStats,
    /// The same estimator applied to the noise alone.
    pub noise_energy: SampleStats,
    /// `pcut · σ² π / n`.
    pub noise_energy_exact: f64,
    pub theory_order: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionReport {
    pub points: Vec<RegressionPoint>,
    pub fit: LogLogFit,
    pub theory_fit: LogLogFit,
}

pub fn run_regression_study(cfg: &RegressionStudyConfig, seed: u64) -> Result<RegressionReport> {
    if cfg.trials == 0 || cfg.ladder.is_empty() {
        return Err(Error::Config("regression study needs trials and a ladder".into()));
    }
    if cfg.ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("ladder must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(cfg.ladder.len());
    for &n in &cfg.ladder {
        let beta_n = cfg.beta_scale * n as f64;
        let ts = TruncationSet::new(beta_n)?;
        let grid = make_grid::<f64>(n)?;
        let truth = GridFunction::from_fn(grid.clone(), ParabolaProfile::eval)?;
        let clean = estimate_static(&truth, &ts)?;
        let basis = SineBasis::new(&grid, ts.pcut())?;
        let noise = NoiseConfig::uniform(n, cfg.sigma, 0.0, 0.0, cfg.vmax, seed)?;
        let zero = BandLimited(Vec::new());
        let pairs = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let eps = sample_gaussian_errors(n, &noise.for_trial(n, trial))?;
                // The estimator is linear: estimate(H + ε) = estimate(H) + estimate(ε).
                let pure = basis.analyze(&eps)?;
                let est = SpectralCoeffs::new(
                    clean.as_slice().iter().zip(pure.as_slice()).map(|(a, b)| a + b).collect(),
                )?;
                Ok((squared_error(&est, &ParabolaProfile), squared_error(&pure, &zero)))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let (errs, noise_only): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        points.push(RegressionPoint {
            n,
            beta_n,
            pcut: ts.pcut(),
            mse: SampleStats::from_samples(&errs),
            noise_energy: SampleStats::from_samples(&noise_only),
            noise_energy_exact: ts.pcut() as f64 * cfg.sigma * cfg.sigma * std::f64::consts::PI
                / n as f64,
            theory_order: theoretical_mse_order(n, beta_n, cfg.mu0)?,
        });
    }
    let ns: Vec<usize> = points.iter().map(|p| p.n).collect();
    let fit = fit_loglog(&ns, &points.iter().map(|p| p.mse.mean).collect::<Vec<_>>())?;
    let theory_fit = fit_loglog(&ns, &points.iter().map(|p| p.theory_order).collect::<Vec<_>>())?;
    Ok(RegressionReport {
        points,
        fit,
        theory_fit,
    })
}

pub const REGRESSION_HEADER: &str =
    "n,beta_n,pcut,trials,mean_sq_error,var_sq_error,noise_energy,noise_energy_exact,theory_order";

pub fn write_regression_csv(report: &RegressionReport, trials: usize, path: &Path) -> Result<()> {
    let mut text = String::from(REGRESSION_HEADER);
    text.push('\n');
    for p in &report.points {
        text.push_str(&format!(
            "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            p.n,
            p.beta_n,
            p.pcut,
            trials,
            p.mse.mean,
            p.mse.variance,
            p.noise_energy.mean,
            p.noise_energy_exact,
            p.theory_order
        ));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_atomic(path, &text)
}
