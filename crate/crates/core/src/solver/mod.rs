//! Time integration: manufactured ground truth, a forward reference solver,
//! and the regularized backward solver.

mod backward;
mod forward;
pub mod manufactured;

pub use backward::{backward_solve_regularized, BackwardOptions};
pub use forward::{forward_solve, ForwardOptions};
pub use manufactured::{
    manufacture, manufacture_linear, CoefficientField, ConstantCoefficient, DecayingMode,
    ManufacturedProblem, OscillatingCoefficient, SolutionField, ZeroSolution,
};

use crate::error::{Error, Result};
use crate::noise::TimeGrid;
use crate::scalar::Scalar;
use crate::spectral::GridFunction;
use crate::tridiag::Tridiagonal;

/// Implicit-explicit time integrator for the split `u' = L u + N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// Backward Euler on `L`, forward Euler on `N`.
    BackwardEuler,
    /// Crank–Nicolson on `L`, second-order Adams–Bashforth on `N`.
    CrankNicolson,
    /// Second-order backward differentiation with extrapolated `N`
    /// (backward Euler start).
    #[default]
    Sbdf2,
}

impl TimeScheme {
    /// Fraction of a step at which the implicit coefficient is frozen.
    pub fn implicit_offset(self) -> f64 {
        match self {
            TimeScheme::CrankNicolson => 0.5,
            TimeScheme::BackwardEuler | TimeScheme::Sbdf2 => 1.0,
        }
    }
}

/// Multistep state of an IMEX run.
#[derive(Debug)]
pub(crate) struct Imex<T> {
    scheme: TimeScheme,
    prev_state: Option<Vec<T>>,
    prev_explicit: Option<Vec<T>>,
}

impl<T: Scalar> Imex<T> {
    pub(crate) fn new(scheme: TimeScheme) -> Self {
        Self {
            scheme,
            prev_state: None,
            prev_explicit: None,
        }
    }

    /// Advances `u` by `dt` given the explicit term `n_cur` at the current
    /// level and the implicit operator `l`.
    pub(crate) fn step(
        &mut self,
        u: &mut Vec<T>,
        n_cur: Vec<T>,
        l: &Tridiagonal<T>,
        dt: T,
    ) -> Result<()> {
        let half = T::lit(0.5);
        let (mat, mut rhs): (Tridiagonal<T>, Vec<T>) = match (self.scheme, &self.prev_state, &self.prev_explicit) {
            (TimeScheme::Sbdf2, Some(up), Some(np)) => {
                let rhs = (0..u.len())
                    .map(|k| {
                        T::lit(2.0) * u[k] - half * up[k]
                            + dt * (T::lit(2.0) * n_cur[k] - np[k])
                    })
                    .collect();
                (l.shifted(T::lit(1.5), -dt), rhs)
            }
            (TimeScheme::CrankNicolson, _, prev) => {
                let mut lu = vec![T::zero(); u.len()];
                l.apply(u, &mut lu);
                let rhs = (0..u.len())
                    .map(|k| {
                        let expl = match prev {
                            Some(np) => T::lit(1.5) * n_cur[k] - half * np[k],
                            None => n_cur[k],
                        };
                        u[k] + half * dt * lu[k] + dt * expl
                    })
                    .collect();
                (l.shifted(T::one(), -half * dt), rhs)
            }
            _ => {
                let rhs = (0..u.len()).map(|k| u[k] + dt * n_cur[k]).collect();
                (l.shifted(T::one(), -dt), rhs)
            }
        };
        mat.solve_in_place(&mut rhs)?;
        self.prev_state = Some(std::mem::replace(u, rhs));
        self.prev_explicit = Some(n_cur);
        Ok(())
    }
}

/// Node values of a piecewise-constant-in-time field at time `t`: the
/// nearest observation node, averaged when `t` sits halfway between two.
pub(crate) fn nearest_profile<'a, T: Scalar>(
    nodes: &'a [Vec<T>],
    tg: &TimeGrid<T>,
    t: T,
    scratch: &'a mut Vec<T>,
) -> &'a [T] {
    let r = t / tg.dt();
    let lo = r.floor();
    let frac = r - lo;
    let m = tg.m();
    let j0 = lo.to_usize().unwrap_or(0).min(m);
    if (frac - T::lit(0.5)).abs() <= T::lit(1e-9) && j0 < m {
        let (a, b) = (&nodes[j0], &nodes[j0 + 1]);
        scratch.clear();
        scratch.extend(a.iter().zip(b).map(|(&x, &y)| T::lit(0.5) * (x + y)));
        scratch
    } else {
        &nodes[tg.nearest_index(t)]
    }
}

/// Snapshots `U(·, t_j)`, `j = 0..m`, ordered by increasing time.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySolution<T> {
    timegrid: TimeGrid<T>,
    states: Vec<GridFunction<T>>,
}

impl<T: Scalar> TrajectorySolution<T> {
    pub fn new(timegrid: TimeGrid<T>, states: Vec<GridFunction<T>>) -> Result<Self> {
        if states.len() != timegrid.m() + 1 {
            return Err(Error::LengthMismatch {
                expected: timegrid.m() + 1,
                found: states.len(),
            });
        }
        for (j, s) in states.iter().enumerate() {
            if s.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState {
                    direction: "stored",
                    time: timegrid.nodes()[j].to_f64_lossy(),
                });
            }
        }
        Ok(Self { timegrid, states })
    }

    pub fn timegrid(&self) -> &TimeGrid<T> {
        &self.timegrid
    }

    pub fn states(&self) -> &[GridFunction<T>] {
        &self.states
    }

    pub fn state(&self, j: usize) -> &GridFunction<T> {
        &self.states[j]
    }

    pub fn initial(&self) -> &GridFunction<T> {
        &self.states[0]
    }

    pub fn terminal(&self) -> &GridFunction<T> {
        &self.states[self.timegrid.m()]
    }

    /// Snapshot at the node nearest to `t ∈ [0, T]`.
    pub fn at_time(&self, t: T) -> Result<&GridFunction<T>> {
        let final_time = self.timegrid.final_time();
        let slack = final_time * T::lit(1e-12);
        if !(t >= -slack && t <= final_time + slack) {
            return Err(Error::TimeOutOfRange {
                t: t.to_f64_lossy(),
                final_time: final_time.to_f64_lossy(),
            });
        }
        Ok(&self.states[self.timegrid.nearest_index(t)])
    }
}

/// Discrete `L²` distance between the solution and the exact `u` at the
/// node nearest to `t`.
pub fn error_at<T: Scalar>(
    t: T,
    sol: &TrajectorySolution<T>,
    truth: &ManufacturedProblem<T>,
) -> Result<T> {
    let state = sol.at_time(t)?;
    let j = sol.timegrid().nearest_index(t);
    let tj = sol.timegrid().nodes()[j];
    let exact = truth.sample_u(state.grid(), tj)?;
    state.l2_distance(&exact)
}
