//! Quick invariant suites behind the `check` subcommand.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::noise::TimeGrid;
use crate::operators::{apply_p_trunc, cutoff_f, CutoffMode, RegParams};
use crate::regression::TimeField;
use crate::solver::{
    backward_solve_regularized, forward_solve, manufacture, BackwardOptions, ConstantCoefficient,
    DecayingMode, ForwardOptions,
};
use crate::spectral::{analyze, basis_eval, make_grid, synthesize, GridFunction, SpectralCoeffs};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

fn spectral_suite(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst_orth = 0.0f64;
    let mut worst_round = 0.0f64;
    for n in [16usize, 64] {
        let grid = make_grid::<f64>(n)?;
        let h = grid.spacing();
        for p in 1..n {
            for q in p..n {
                let ip: f64 = grid
                    .points()
                    .iter()
                    .map(|&x| basis_eval::<f64>(p, x) * basis_eval::<f64>(q, x))
                    .sum::<f64>()
                    * h;
                let want = if p == q { 1.0 } else { 0.0 };
                worst_orth = worst_orth.max((ip - want).abs());
            }
        }
        for _ in 0..20 {
            let c = SpectralCoeffs::new((1..n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            let back = analyze(&synthesize(&c, &grid), n - 1)?;
            let d = back
                .as_slice()
                .iter()
                .zip(c.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst_round = worst_round.max(d);
        }
    }
    Ok(CheckOutcome::new(
        "spectral orthogonality and round trip",
        worst_orth <= 1e-12 && worst_round <= 1e-10,
        format!("max orthogonality defect {worst_orth:.1e}, round trip {worst_round:.1e}"),
    ))
}

fn operator_suite(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for rho in [1.0, 4.0, 16.0, 64.0] {
        let rp = RegParams::new(1.0, 2.0, rho, 16.0, 1.0, 1.0, 1.0)?;
        for _ in 0..100 {
            let c = SpectralCoeffs::new((0..32).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            let ratio = apply_p_trunc(&c, &rp).l2_norm() / (rho * c.l2_norm());
            worst = worst.max(ratio);
        }
    }
    Ok(CheckOutcome::new(
        "truncated operator norm bound",
        worst <= 1.0 + 1e-14,
        format!("max |P_rho v| / (rho |v|) = {worst:.15}"),
    ))
}

fn lipschitz_suite(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let q: f64 = 3.0;
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let mut draw = || -> f64 { rng.random_range(-3.0 * q..3.0 * q) };
        let (v, vh, w, wh) = (draw(), draw(), draw(), draw());
        let lhs = (cutoff_f(v, vh, q, CutoffMode::Clamped) - cutoff_f(w, wh, q, CutoffMode::Clamped)).abs();
        if lhs > q * ((v - w).abs() + (vh - wh).abs()) * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(CheckOutcome::new(
        "clamped nonlinearity Lipschitz",
        violations == 0,
        format!("{violations} violations in 10000 draws"),
    ))
}

fn forward_suite() -> Result<CheckOutcome> {
    let p = manufacture(
        Arc::new(DecayingMode::canonical()),
        Arc::new(ConstantCoefficient(1.0)),
        1.0,
    )?;
    let grid = make_grid::<f64>(128)?;
    let tg = TimeGrid::new(256, 1.0)?;
    let sol = forward_solve(&p, &grid, &tg, &ForwardOptions::default())?;
    let e = sol.terminal().l2_distance(&p.sample_h(&grid)?)?;
    Ok(CheckOutcome::new(
        "forward manufactured solve",
        e <= 1e-3,
        format!("terminal L2 error {e:.3e}"),
    ))
}

fn backward_suite() -> Result<CheckOutcome> {
    let n = 128;
    let grid = make_grid::<f64>(n)?;
    let tg = TimeGrid::new(512, 1.0)?;
    let a = analyze(&GridFunction::from_fn(grid.clone(), |_| 1.0)?, n - 1)?;
    let a_hat = TimeField::constant(tg.clone(), a);
    let g_hat = TimeField::constant(tg.clone(), SpectralCoeffs::zeros(1));
    let rp = RegParams::new(1.0, 2.0, 8.0, ((n - 1) * (n - 1)) as f64, 2.0, 1.0, 1.0)?;
    let opts = BackwardOptions {
        nonlinearity: false,
        ..Default::default()
    };
    let scale = (2.0 / std::f64::consts::PI).sqrt();
    let h_hat = SpectralCoeffs::new(vec![(-1.0f64).exp() / scale])?;
    let sol = backward_solve_regularized(&h_hat, &g_hat, &a_hat, &rp, &grid, &tg, &opts)?;
    let e = sol
        .initial()
        .l2_distance(&GridFunction::from_fn(grid.clone(), f64::sin)?)?;
    let zero = backward_solve_regularized(
        &SpectralCoeffs::zeros(1),
        &g_hat,
        &a_hat,
        &rp,
        &grid,
        &tg,
        &BackwardOptions::default(),
    )?;
    let zero_ok = zero.states().iter().all(|s| s.max_abs() == 0.0);
    Ok(CheckOutcome::new(
        "backward single-mode recovery",
        e <= 1e-2 && zero_ok,
        format!("L2 error at t = 0: {e:.3e}; zero data stays zero: {zero_ok}"),
    ))
}

/// Runs every suite; a suite that errors is reported as failed.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let results = [
        ("spectral orthogonality and round trip", spectral_suite(&mut rng)),
        ("truncated operator norm bound", operator_suite(&mut rng)),
        ("clamped nonlinearity Lipschitz", lipschitz_suite(&mut rng)),
        ("forward manufactured solve", forward_suite()),
        ("backward single-mode recovery", backward_suite()),
    ];
    results
        .into_iter()
        .map(|(name, r)| r.unwrap_or_else(|e| CheckOutcome::new(name, false, e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_checks(7) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
