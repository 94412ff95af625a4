//! Regularized backward solve, integrated in reversed time `τ = T − t`:
//!
//! `U_τ = (B̄ U_x)_x − P_ρ U − F̄(U, U_x) − Ĝ(·, T − τ)`, `B̄ = A₁ − Â`,
//! starting from `U(τ = 0) = Ĥ`.

use crate::error::{Error, Result};
use crate::noise::TimeGrid;
use crate::operators::{centered_gradient, cutoff_f, diffusion_matrix, CutoffMode, RegParams};
use crate::regression::TimeField;
use crate::scalar::Scalar;
use crate::spectral::{GridFunction, SineBasis, SpatialGrid, SpectralCoeffs};

use super::{nearest_profile, Imex, TimeScheme, TrajectorySolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackwardOptions {
    pub scheme: TimeScheme,
    /// Sub-stepping keeps `Δτ · ρ ≤ c_stab`.
    pub c_stab: f64,
    /// When false the clamped Burgers term is dropped.
    pub nonlinearity: bool,
    pub cutoff: CutoffMode,
}

impl Default for BackwardOptions {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::default(),
            c_stab: 0.5,
            nonlinearity: true,
            cutoff: CutoffMode::Clamped,
        }
    }
}

fn check_timegrid<T: Scalar>(field: &TimeField<T>, tg: &TimeGrid<T>, name: &str) -> Result<()> {
    let other = field.timegrid();
    if other.m() != tg.m() || other.final_time() != tg.final_time() {
        return Err(Error::invalid(format!(
            "{name} lives on a time grid with m = {}, T = {}; expected m = {}, T = {}",
            other.m(),
            other.final_time(),
            tg.m(),
            tg.final_time()
        )));
    }
    Ok(())
}

fn grid_values<T: Scalar>(grid: &SpatialGrid<T>, c: &SpectralCoeffs<T>) -> Result<Vec<T>> {
    let basis = SineBasis::new(grid, c.pmax())?;
    Ok(basis.synthesize(c)?.into_values())
}

/// Solves the regularized terminal-value problem from estimated data and
/// returns the snapshots at the observation nodes.
pub fn backward_solve_regularized<T: Scalar>(
    h_hat: &SpectralCoeffs<T>,
    g_hat: &TimeField<T>,
    a_hat: &TimeField<T>,
    rp: &RegParams<T>,
    grid: &SpatialGrid<T>,
    tg: &TimeGrid<T>,
    opts: &BackwardOptions,
) -> Result<TrajectorySolution<T>> {
    rp.validate()?;
    if !(opts.c_stab > 0.0) {
        return Err(Error::invalid("c_stab must be positive"));
    }
    check_timegrid(g_hat, tg, "source estimate")?;
    check_timegrid(a_hat, tg, "coefficient estimate")?;
    let n = grid.n();
    let h = grid.spacing();
    let final_time = tg.final_time();

    let pcut = rp.rho_cutoff();
    if pcut >= n {
        return Err(Error::Aliasing {
            pmax: pcut,
            n,
            max_usable: grid.max_orthonormal_mode(),
        });
    }
    let p_basis = if pcut > 0 {
        Some(SineBasis::new(grid, pcut)?)
    } else {
        None
    };
    let weights: Vec<T> = (1..=pcut)
        .map(|p| rp.a1 * T::from_index(p * p))
        .collect();

    let g_nodes = g_hat
        .nodes()
        .iter()
        .map(|c| grid_values(grid, c))
        .collect::<Result<Vec<_>>>()?;
    let mut clipped = 0usize;
    let mut worst = rp.a0;
    let b_nodes = a_hat
        .nodes()
        .iter()
        .map(|c| {
            let vals = grid_values(grid, c)?;
            Ok(vals
                .into_iter()
                .map(|a| {
                    if a > rp.a0 {
                        clipped += 1;
                        worst = worst.max(a);
                    }
                    rp.a1 - a.min(rp.a0)
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    if clipped > 0 {
        log::debug!(
            "coefficient estimate exceeded A0 = {} at {clipped} samples (max {worst}); clipped",
            rp.a0
        );
    }

    let substeps = (tg.dt() * rp.rho_n / T::lit(opts.c_stab))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let dtau = tg.dt() / T::from_index(substeps);
    let total = tg.m() * substeps;
    let offset = T::lit(opts.scheme.implicit_offset());

    let mut u = grid_values(grid, h_hat)?;
    let mut reversed = Vec::with_capacity(tg.m() + 1);
    reversed.push(GridFunction::new(grid.clone(), u.clone())?);

    let mut imex = Imex::new(opts.scheme);
    let mut ux = vec![T::zero(); n];
    let mut low = vec![T::zero(); n];
    let mut scratch_g = Vec::new();
    let mut scratch_b = Vec::new();
    for k in 0..total {
        let tau = T::from_index(k) * dtau;
        let t = (final_time - tau).max(T::zero());
        let g = nearest_profile(&g_nodes, tg, t, &mut scratch_g);
        let mut expl: Vec<T> = g.iter().map(|&v| -v).collect();

        if let Some(basis) = &p_basis {
            let mut c = basis.analyze(&u)?;
            for (cp, &w) in c.as_mut_slice().iter_mut().zip(&weights) {
                *cp = *cp * w;
            }
            basis.synthesize_into(c.as_slice(), &mut low)?;
            for (e, &l) in expl.iter_mut().zip(&low) {
                *e = *e + l;
            }
        }
        if opts.nonlinearity {
            centered_gradient(&u, h, &mut ux);
            for i in 0..n {
                expl[i] = expl[i] - cutoff_f(u[i], ux[i], rp.qhat_n, opts.cutoff);
            }
        }

        let t_imp = (final_time - tau - offset * dtau).max(T::zero());
        let b = nearest_profile(&b_nodes, tg, t_imp, &mut scratch_b);
        let l = diffusion_matrix(b, h)?;
        imex.step(&mut u, expl, &l, dtau)?;

        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                direction: "backward",
                time: (tau + dtau).to_f64_lossy(),
            });
        }
        if (k + 1) % substeps == 0 {
            reversed.push(GridFunction::new(grid.clone(), u.clone())?);
        }
    }
    reversed.reverse();
    TrajectorySolution::new(tg.clone(), reversed)
}
