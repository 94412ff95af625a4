//! Dirichlet sine basis on `(0, π)`, the midpoint sample grid, and the
//! discrete analysis/synthesis transforms between grid samples and sine
//! coefficients.
//!
//! The eigenfunctions of `-d²/dx²` with `u(0) = u(π) = 0` are
//! `ψ_p(x) = √(2/π) sin(p x)` with eigenvalues `p²`. On the midpoint grid
//! `x_k = π(2k − 1)/(2n)` the quadrature `(π/n) Σ_k ψ_p(x_k) ψ_q(x_k)` equals
//! `δ_pq` exactly for `1 ≤ p, q ≤ n − 1`. Mode `p = n` has discrete norm 2,
//! so it is accepted by [`analyze`] but is not part of the orthonormal band.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Midpoint sample grid on `(0, π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid<T> {
    points: Arc<[T]>,
}

impl<T: Scalar> SpatialGrid<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        let two_n = T::from_index(2 * n);
        let points = (1..=n)
            .map(|k| T::PI() * T::from_index(2 * k - 1) / two_n)
            .collect::<Vec<_>>();
        Ok(Self {
            points: points.into(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// Cell width `h = π/n`, which is also the quadrature weight.
    #[inline]
    pub fn spacing(&self) -> T {
        T::PI() / T::from_index(self.n())
    }

    /// Largest mode index that is discretely orthonormal on this grid.
    #[inline]
    pub fn max_orthonormal_mode(&self) -> usize {
        self.n().saturating_sub(1)
    }
}

/// Builds the midpoint grid `x_k = π(2k − 1)/(2n)`, `k = 1..n`.
pub fn make_grid<T: Scalar>(n: usize) -> Result<SpatialGrid<T>> {
    SpatialGrid::new(n)
}

/// Samples of a real function on a [`SpatialGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    grid: SpatialGrid<T>,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: SpatialGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid<T>) -> Self {
        let values = vec![T::zero(); grid.n()];
        Self { grid, values }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: SpatialGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Discrete L² norm `sqrt((π/n) Σ v_k²)`.
    pub fn l2_norm(&self) -> T {
        let sum: T = self.values.iter().map(|&v| v * v).sum();
        (self.grid.spacing() * sum).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Discrete L² distance to `other` (same grid size required).
    pub fn l2_distance(&self, other: &GridFunction<T>) -> Result<T> {
        if self.values.len() != other.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                found: other.values.len(),
            });
        }
        let sum: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        Ok((self.grid.spacing() * sum).sqrt())
    }
}

/// Coefficients `c_p` of `ψ_p`, `p = 1..pmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs<T> {
    c: Vec<T>,
}

impl<T: Scalar> SpectralCoeffs<T> {
    pub fn new(c: Vec<T>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::invalid("coefficient vector must have pmax >= 1"));
        }
        if let Some(index) = c.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self { c })
    }

    pub fn zeros(pmax: usize) -> Self {
        Self {
            c: vec![T::zero(); pmax.max(1)],
        }
    }

    /// The single mode `ψ_p` in a vector of length `pmax`.
    pub fn unit(p: usize, pmax: usize) -> Result<Self> {
        if p == 0 || p > pmax {
            return Err(Error::invalid(format!("mode {p} outside 1..={pmax}")));
        }
        let mut c = vec![T::zero(); pmax];
        c[p - 1] = T::one();
        Ok(Self { c })
    }

    pub fn from_fn(pmax: usize, f: impl Fn(usize) -> T) -> Result<Self> {
        Self::new((1..=pmax).map(f).collect())
    }

    #[inline]
    pub fn pmax(&self) -> usize {
        self.c.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.c
    }

    #[inline]
    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.c
    }

    /// Coefficient of `ψ_p` (1-based); zero beyond `pmax`.
    #[inline]
    pub fn get(&self, p: usize) -> T {
        if p == 0 {
            return T::zero();
        }
        self.c.get(p - 1).copied().unwrap_or_else(T::zero)
    }

    /// Parseval L² norm `sqrt(Σ c_p²)`.
    pub fn l2_norm(&self) -> T {
        self.c.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.c.iter().zip(&other.c).map(|(&a, &b)| a * b).sum()
    }

    /// Copy with modes above `pcut` set to zero (length unchanged).
    pub fn band_limited(&self, pcut: usize) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, &v)| if i < pcut { v } else { T::zero() })
            .collect();
        Self { c }
    }

    pub fn into_vec(self) -> Vec<T> {
        self.c
    }
}

/// Weights of the Gevrey-type space: power index `gamma`, exponential
/// index `big_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessParams<T> {
    gamma: T,
    big_b: T,
}

impl<T: Scalar> SmoothnessParams<T> {
    pub fn new(gamma: T, big_b: T) -> Result<Self> {
        if !(gamma >= T::zero()) || !(big_b >= T::zero()) {
            return Err(Error::invalid(format!(
                "smoothness indices must be nonnegative (gamma = {gamma}, B = {big_b})"
            )));
        }
        Ok(Self { gamma, big_b })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn big_b(&self) -> T {
        self.big_b
    }
}

/// `ψ_p(x) = √(2/π) sin(p x)`.
#[inline]
pub fn basis_eval<T: Scalar>(p: usize, x: T) -> T {
    (T::lit(2.0) / T::PI()).sqrt() * (T::from_index(p) * x).sin()
}

fn check_band(pmax: usize, n: usize) -> Result<()> {
    if pmax == 0 {
        return Err(Error::invalid("pmax must be at least 1"));
    }
    if pmax > n {
        return Err(Error::Aliasing {
            pmax,
            n,
            max_usable: n.saturating_sub(1),
        });
    }
    Ok(())
}

/// Discrete sine analysis `c_p = (π/n) Σ_k f(x_k) ψ_p(x_k)`, `p = 1..pmax`.
///
/// Rejects `pmax > n`. This is the direct `O(n·pmax)` sum; [`SineBasis`]
/// evaluates the same sums from a cached table.
pub fn analyze<T: Scalar>(f: &GridFunction<T>, pmax: usize) -> Result<SpectralCoeffs<T>> {
    let grid = f.grid();
    check_band(pmax, grid.n())?;
    let w = grid.spacing();
    let c = (1..=pmax)
        .map(|p| {
            let s: T = grid
                .points()
                .iter()
                .zip(f.values())
                .map(|(&x, &v)| v * basis_eval(p, x))
                .sum();
            w * s
        })
        .collect();
    SpectralCoeffs::new(c)
}

/// Evaluates `Σ_p c_p ψ_p(x_k)` at every grid point.
pub fn synthesize<T: Scalar>(c: &SpectralCoeffs<T>, grid: &SpatialGrid<T>) -> GridFunction<T> {
    let values = grid
        .points()
        .iter()
        .map(|&x| {
            c.as_slice()
                .iter()
                .enumerate()
                .map(|(i, &cp)| cp * basis_eval(i + 1, x))
                .sum()
        })
        .collect();
    GridFunction {
        grid: grid.clone(),
        values,
    }
}

/// `‖v‖_{H^γ} = sqrt(Σ_p p^{4γ} c_p²)`, i.e. weights `λ_p^{2γ}` with `λ_p = p²`.
pub fn sobolev_norm<T: Scalar>(c: &SpectralCoeffs<T>, gamma: T) -> T {
    let four_gamma = T::lit(4.0) * gamma;
    c.as_slice()
        .iter()
        .enumerate()
        .map(|(i, &cp)| T::from_index(i + 1).powf(four_gamma) * cp * cp)
        .sum::<T>()
        .sqrt()
}

/// `sqrt(Σ_p p^{2+2γ} e^{2 B p²} c_p²)`.
///
/// Summed in log space, so the exponential weights do not overflow before
/// the final result does. An unrepresentable result is returned as `+∞`.
pub fn gevrey_norm<T: Scalar>(c: &SpectralCoeffs<T>, s: &SmoothnessParams<T>) -> T {
    let two = T::lit(2.0);
    let power = two + two * s.gamma;
    let log_terms: Vec<T> = c
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, cp)| **cp != T::zero())
        .map(|(i, &cp)| {
            let p = T::from_index(i + 1);
            power * p.ln() + two * s.big_b * p * p + two * cp.abs().ln()
        })
        .collect();
    let Some(max) = log_terms.iter().copied().reduce(T::max) else {
        return T::zero();
    };
    if max == T::infinity() {
        return T::infinity();
    }
    let sum: T = log_terms.iter().map(|&l| (l - max).exp()).sum();
    // log of the squared norm, halved
    ((max + sum.ln()) / two).exp()
}

/// Cached table `ψ_p(x_k)` for repeated transforms on one grid.
#[derive(Clone, Debug)]
pub struct SineBasis<T> {
    grid: SpatialGrid<T>,
    pmax: usize,
    // row-major, one row of n samples per mode
    table: Vec<T>,
}

impl<T: Scalar> SineBasis<T> {
    pub fn new(grid: &SpatialGrid<T>, pmax: usize) -> Result<Self> {
        check_band(pmax, grid.n())?;
        let mut table = Vec::with_capacity(pmax * grid.n());
        for p in 1..=pmax {
            table.extend(grid.points().iter().map(|&x| basis_eval(p, x)));
        }
        Ok(Self {
            grid: grid.clone(),
            pmax,
            table,
        })
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn pmax(&self) -> usize {
        self.pmax
    }

    #[inline]
    fn row(&self, p: usize) -> &[T] {
        let n = self.grid.n();
        &self.table[(p - 1) * n..p * n]
    }

    /// Same sums as [`analyze`] with `pmax` taken from the table.
    pub fn analyze(&self, values: &[T]) -> Result<SpectralCoeffs<T>> {
        self.analyze_band(values, self.pmax)
    }

    /// Analysis truncated to the first `pcut <= pmax` modes.
    pub fn analyze_band(&self, values: &[T], pcut: usize) -> Result<SpectralCoeffs<T>> {
        if values.len() != self.grid.n() {
            return Err(Error::LengthMismatch {
                expected: self.grid.n(),
                found: values.len(),
            });
        }
        check_band(pcut, self.pmax)?;
        let w = self.grid.spacing();
        let c = (1..=pcut)
            .map(|p| w * self.row(p).iter().zip(values).map(|(&b, &v)| b * v).sum::<T>())
            .collect();
        SpectralCoeffs::new(c)
    }

    /// Synthesis into `out`; coefficients beyond the table's `pmax` are an error.
    pub fn synthesize_into(&self, c: &[T], out: &mut [T]) -> Result<()> {
        if c.len() > self.pmax {
            return Err(Error::Aliasing {
                pmax: c.len(),
                n: self.pmax,
                max_usable: self.pmax,
            });
        }
        if out.len() != self.grid.n() {
            return Err(Error::LengthMismatch {
                expected: self.grid.n(),
                found: out.len(),
            });
        }
        out.iter_mut().for_each(|v| *v = T::zero());
        for (i, &cp) in c.iter().enumerate() {
            if cp == T::zero() {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(i + 1)) {
                *o = *o + cp * b;
            }
        }
        Ok(())
    }

    pub fn synthesize(&self, c: &SpectralCoeffs<T>) -> Result<GridFunction<T>> {
        let mut values = vec![T::zero(); self.grid.n()];
        self.synthesize_into(c.as_slice(), &mut values)?;
        GridFunction::new(self.grid.clone(), values)
    }
}
