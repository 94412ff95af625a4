//! Forward reference solve of `u_t = (A u_x)_x + u u_x + G` from `t = 0`.

use crate::error::{Error, Result};
use crate::noise::TimeGrid;
use crate::operators::{centered_gradient, diffusion_matrix};
use crate::scalar::Scalar;
use crate::spectral::{GridFunction, SpatialGrid};

use super::{Imex, ManufacturedProblem, TimeScheme, TrajectorySolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForwardOptions {
    pub scheme: TimeScheme,
    /// Abort once `‖U‖` exceeds this multiple of `max(‖U(0)‖, 1)`.
    pub growth_limit: f64,
    /// Solver steps per observation interval.
    pub substeps: usize,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::default(),
            growth_limit: 1e3,
            substeps: 1,
        }
    }
}

/// Integrates the manufactured problem forward from `u(·, 0)`, using the
/// exact `A` and `G`. Diffusion is implicit, convection and source explicit.
pub fn forward_solve<T: Scalar>(
    problem: &ManufacturedProblem<T>,
    grid: &SpatialGrid<T>,
    tg: &TimeGrid<T>,
    opts: &ForwardOptions,
) -> Result<TrajectorySolution<T>> {
    if opts.substeps == 0 || !(opts.growth_limit > 1.0) {
        return Err(Error::invalid("substeps >= 1 and growth_limit > 1 required"));
    }
    let n = grid.n();
    let h = grid.spacing();
    let s = opts.substeps;
    let dt = tg.dt() / T::from_index(s);
    let x = grid.points();

    if problem.has_convection() {
        // centered convection stays stable while dt·|u|² ≤ 2·min A
        let vmax = problem.sup_bound(grid, tg);
        let amin = tg
            .nodes()
            .iter()
            .flat_map(|&t| x.iter().map(move |&xk| problem.a(xk, t)))
            .fold(T::infinity(), T::min);
        if dt * vmax * vmax > T::lit(2.0) * amin {
            return Err(Error::Unstable {
                time: 0.0,
                reason: format!(
                    "step {dt} violates dt*|u|^2 <= 2 min A with |u| = {vmax}, min A = {amin}"
                ),
            });
        }
    }

    let mut u = problem.sample_u(grid, T::zero())?.into_values();
    let limit = T::lit(opts.growth_limit) * GridFunction::new(grid.clone(), u.clone())?.l2_norm().max(T::one());
    let mut states = Vec::with_capacity(tg.m() + 1);
    states.push(GridFunction::new(grid.clone(), u.clone())?);

    let offset = T::lit(opts.scheme.implicit_offset());
    let mut imex = Imex::new(opts.scheme);
    let mut ux = vec![T::zero(); n];
    let mut coef = vec![T::zero(); n];
    let total = tg.m() * s;
    for k in 0..total {
        let t = T::from_index(k) * dt;
        let mut expl: Vec<T> = x.iter().map(|&xk| problem.g(xk, t)).collect();
        if problem.has_convection() {
            centered_gradient(&u, h, &mut ux);
            for i in 0..n {
                expl[i] = expl[i] + u[i] * ux[i];
            }
        }
        let t_imp = t + offset * dt;
        for (c, &xk) in coef.iter_mut().zip(x) {
            *c = problem.a(xk, t_imp);
        }
        let l = diffusion_matrix(&coef, h)?;
        imex.step(&mut u, expl, &l, dt)?;

        let t_new = T::from_index(k + 1) * dt;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                direction: "forward",
                time: t_new.to_f64_lossy(),
            });
        }
        let norm = (h * u.iter().map(|&v| v * v).sum::<T>()).sqrt();
        if norm > limit {
            return Err(Error::Unstable {
                time: t_new.to_f64_lossy(),
                reason: format!("norm {norm} exceeds growth limit {limit}"),
            });
        }
        if (k + 1) % s == 0 {
            states.push(GridFunction::new(grid.clone(), u.clone())?);
        }
    }
    TrajectorySolution::new(tg.clone(), states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{
        manufacture, manufacture_linear, ConstantCoefficient, DecayingMode, OscillatingCoefficient,
        ZeroSolution,
    };
    use crate::spectral::make_grid;
    use std::sync::Arc;

    fn terminal_error(p: &ManufacturedProblem<f64>, n: usize, m: usize, scheme: TimeScheme) -> f64 {
        let grid = make_grid(n).unwrap();
        let tg = TimeGrid::new(m, p.final_time()).unwrap();
        let opts = ForwardOptions {
            scheme,
            ..Default::default()
        };
        let sol = forward_solve(p, &grid, &tg, &opts).unwrap();
        sol.terminal().l2_distance(&p.sample_h(&grid).unwrap()).unwrap()
    }

    #[test]
    fn nonlinear_constant_coefficient() {
        let p = manufacture(
            Arc::new(DecayingMode::canonical()),
            Arc::new(ConstantCoefficient(1.0)),
            1.0,
        )
        .unwrap();
        for scheme in [TimeScheme::BackwardEuler, TimeScheme::CrankNicolson, TimeScheme::Sbdf2] {
            let e = terminal_error(&p, 256, 512, scheme);
            assert!(e <= 1e-3, "{scheme:?}: {e}");
        }
    }

    #[test]
    fn linear_heat_mode() {
        let p = manufacture_linear(
            Arc::new(DecayingMode::canonical()),
            Arc::new(ConstantCoefficient(1.0)),
            1.0,
        )
        .unwrap();
        assert!(terminal_error(&p, 256, 512, TimeScheme::BackwardEuler) <= 1e-3);
        assert!(terminal_error(&p, 256, 512, TimeScheme::Sbdf2) <= 1e-4);
    }

    #[test]
    fn zero_stays_zero() {
        let p = manufacture(Arc::new(ZeroSolution), Arc::new(ConstantCoefficient(1.0)), 1.0).unwrap();
        let grid = make_grid(32).unwrap();
        let tg = TimeGrid::new(16, 1.0).unwrap();
        let sol = forward_solve(&p, &grid, &tg, &ForwardOptions::default()).unwrap();
        assert!(sol.states().iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn converges_under_refinement() {
        let p = manufacture(
            Arc::new(DecayingMode::canonical()),
            Arc::new(OscillatingCoefficient { base: 2.0, amplitude: 1.0 }),
            1.0,
        )
        .unwrap();
        let coarse = terminal_error(&p, 32, 32, TimeScheme::Sbdf2);
        let fine = terminal_error(&p, 64, 64, TimeScheme::Sbdf2);
        assert!(coarse / fine > 3.0, "{coarse} {fine}");
    }

    #[test]
    fn cfl_violation_rejected() {
        let big = DecayingMode {
            amplitude: 50.0,
            rate: 0.0,
            wavenumber: 1,
        };
        let p = manufacture(Arc::new(big), Arc::new(ConstantCoefficient(1.0)), 1.0).unwrap();
        let grid = make_grid(16).unwrap();
        let tg = TimeGrid::new(4, 1.0).unwrap();
        let err = forward_solve(&p, &grid, &tg, &ForwardOptions::default());
        assert!(matches!(err, Err(Error::Unstable { .. })));
    }
}
