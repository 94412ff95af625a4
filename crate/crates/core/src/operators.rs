//! Stabilizing operators of the quasi-reversibility scheme, the cutoff
//! nonlinearity, and the conservative variable-coefficient diffusion stencil.
//!
//! `P = A₁Δ` acts on sine coefficients as `c_p ↦ −A₁ p² c_p`. Its truncation
//! `P_ρ` keeps the modes `p ≤ √(ρ/A₁)`, so `‖P_ρ v‖ ≤ ρ‖v‖` and `P − P_ρ` is a
//! pure high-mode tail.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{GridFunction, SpatialGrid, SpectralCoeffs};
use crate::tridiag::Tridiagonal;

/// Regularization knobs for one grid size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegParams<T> {
    /// Upper bound `A₀` on the diffusion coefficient and its estimate.
    pub a0: T,
    /// Shift constant `A₁ > A₀`.
    pub a1: T,
    /// Spectral cutoff `ρ`.
    pub rho_n: T,
    /// Regression truncation `β`.
    pub beta_n: T,
    /// Nonlinearity clamp `Q̂`.
    pub qhat_n: T,
    /// Exponential weight rate `κ` (defaults to `ρ`).
    pub kappa_n: T,
    /// Smoothness index `γ` of the truth.
    pub gamma: T,
    /// Data smoothness `μ₀ > 1/2`.
    pub mu0: T,
}

impl<T: Scalar> RegParams<T> {
    /// Builds the parameter set with `κ = ρ`.
    pub fn new(a0: T, a1: T, rho_n: T, beta_n: T, qhat_n: T, gamma: T, mu0: T) -> Result<Self> {
        let rp = Self {
            a0,
            a1,
            rho_n,
            beta_n,
            qhat_n,
            kappa_n: rho_n,
            gamma,
            mu0,
        };
        rp.validate()?;
        Ok(rp)
    }

    pub fn with_kappa(mut self, kappa_n: T) -> Result<Self> {
        self.kappa_n = kappa_n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        pos("A0", self.a0)?;
        pos("A1", self.a1)?;
        pos("rho_n", self.rho_n)?;
        pos("beta_n", self.beta_n)?;
        pos("qhat_n", self.qhat_n)?;
        pos("kappa_n", self.kappa_n)?;
        if !(self.a1 > self.a0) {
            return Err(Error::invalid(format!(
                "A1 = {} must exceed A0 = {}",
                self.a1, self.a0
            )));
        }
        if !(self.gamma >= T::zero()) {
            return Err(Error::invalid("gamma must be nonnegative"));
        }
        if !(self.mu0 > T::lit(0.5)) {
            return Err(Error::invalid("mu0 must exceed 1/2"));
        }
        Ok(())
    }

    /// Largest mode kept by `P_ρ`: `⌊√(ρ/A₁)⌋` (may be 0).
    pub fn rho_cutoff(&self) -> usize {
        mode_cutoff(self.rho_n, self.a1)
    }
}

/// `⌊√(rho/a1)⌋`, robust against rounding at exact squares.
pub fn mode_cutoff<T: Scalar>(rho: T, a1: T) -> usize {
    let ratio = rho / a1;
    if !(ratio >= T::one()) {
        return 0;
    }
    let mut p = ratio.sqrt().floor().to_usize().unwrap_or(0);
    while T::from_index((p + 1) * (p + 1)) * a1 <= rho {
        p += 1;
    }
    while p > 0 && T::from_index(p * p) * a1 > rho {
        p -= 1;
    }
    p
}

/// How the bilinear term `v v̂` is made globally Lipschitz.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMode {
    /// `clip(v) · clip(v̂)` with `clip` onto `[−Q̂, Q̂]`.
    #[default]
    Clamped,
    /// Three cases keyed on `max{v, v̂}`, exactly as originally written:
    /// `Q̂²` above `Q̂`, `v v̂` inside `[−Q̂, Q̂]`, `Q̂²` below `−Q̂`.
    PaperLiteral,
}

/// `P v = A₁ Δ v`: `c_p ↦ −A₁ p² c_p`.
pub fn apply_p<T: Scalar>(c: &SpectralCoeffs<T>, rp: &RegParams<T>) -> SpectralCoeffs<T> {
    scale_modes(c, rp.a1, usize::MAX)
}

/// Band truncation of [`apply_p`] to the modes `p ≤ ⌊√(ρ/A₁)⌋`.
pub fn apply_p_trunc<T: Scalar>(c: &SpectralCoeffs<T>, rp: &RegParams<T>) -> SpectralCoeffs<T> {
    scale_modes(c, rp.a1, rp.rho_cutoff())
}

fn scale_modes<T: Scalar>(c: &SpectralCoeffs<T>, a1: T, pcut: usize) -> SpectralCoeffs<T> {
    let mut out = c.clone();
    for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
        let p = i + 1;
        *v = if p <= pcut {
            -a1 * T::from_index(p * p) * *v
        } else {
            T::zero()
        };
    }
    out
}

/// Orthogonal projection onto the modes `p ≤ pcut`.
pub fn band_projection<T: Scalar>(c: &SpectralCoeffs<T>, pcut: usize) -> SpectralCoeffs<T> {
    c.band_limited(pcut)
}

#[inline]
fn clip<T: Scalar>(z: T, q: T) -> T {
    z.max(-q).min(q)
}

/// Cutoff nonlinearity `F̄(v, v̂)` with clamp `qhat`.
#[inline]
pub fn cutoff_f<T: Scalar>(v: T, vhat: T, qhat: T, mode: CutoffMode) -> T {
    match mode {
        CutoffMode::Clamped => clip(v, qhat) * clip(vhat, qhat),
        CutoffMode::PaperLiteral => {
            let m = v.max(vhat);
            if m > qhat || m < -qhat {
                qhat * qhat
            } else {
                v * vhat
            }
        }
    }
}

/// Face coefficients `a_{k±1/2}` of the conservative stencil: arithmetic
/// means inside, linear extrapolation to the walls.
fn face_coefficients<T: Scalar>(a: &[T]) -> Vec<T> {
    let n = a.len();
    let half = T::lit(0.5);
    let mut faces = Vec::with_capacity(n + 1);
    let wall = |inner: T, next: T| {
        let extrap = T::lit(1.5) * inner - half * next;
        extrap.max(half * inner)
    };
    if n == 1 {
        return vec![a[0], a[0]];
    }
    faces.push(wall(a[0], a[1]));
    for k in 0..n - 1 {
        faces.push(half * (a[k] + a[k + 1]));
    }
    faces.push(wall(a[n - 1], a[n - 2]));
    faces
}

fn check_elliptic<T: Scalar>(a: &[T]) -> Result<()> {
    if let Some((index, &value)) = a
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > T::zero()) || !v.is_finite())
    {
        return Err(Error::NonElliptic {
            index,
            value: value.to_f64_lossy(),
            floor: 0.0,
        });
    }
    Ok(())
}

/// Tridiagonal matrix of `u ↦ (a u_x)_x` on the midpoint grid with
/// `u(0) = u(π) = 0` imposed through odd ghost values `u_0 = −u_1`,
/// `u_{n+1} = −u_n`.
pub fn diffusion_matrix<T: Scalar>(a: &[T], h: T) -> Result<Tridiagonal<T>> {
    check_elliptic(a)?;
    let n = a.len();
    let faces = face_coefficients(a);
    let inv_h2 = T::one() / (h * h);
    let two = T::lit(2.0);
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let left = if k == 0 { two * faces[0] } else { faces[k] };
        let right = if k == n - 1 { two * faces[n] } else { faces[k + 1] };
        diag.push(-(left + right) * inv_h2);
    }
    let off: Vec<T> = faces[1..n].iter().map(|&f| f * inv_h2).collect();
    Tridiagonal::new(off.clone(), diag, off)
}

/// Second-order conservative approximation of `(a u_x)_x` with homogeneous
/// Dirichlet data.
pub fn variable_diffusion<T: Scalar>(
    u: &GridFunction<T>,
    a_field: &GridFunction<T>,
    grid: &SpatialGrid<T>,
) -> Result<GridFunction<T>> {
    let n = grid.n();
    for len in [u.values().len(), a_field.values().len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let mat = diffusion_matrix(a_field.values(), grid.spacing())?;
    let mut out = vec![T::zero(); n];
    mat.apply(u.values(), &mut out);
    GridFunction::new(grid.clone(), out)
}

/// Centered first derivative with the same odd ghost values.
pub fn centered_gradient<T: Scalar>(u: &[T], h: T, out: &mut [T]) {
    let n = u.len();
    let inv = T::one() / (T::lit(2.0) * h);
    for k in 0..n {
        let left = if k == 0 { -u[0] } else { u[k - 1] };
        let right = if k + 1 == n { -u[n - 1] } else { u[k + 1] };
        out[k] = (right - left) * inv;
    }
}
