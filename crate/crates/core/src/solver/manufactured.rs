//! Closed-form test problems for `u_t − (A u_x)_x = u u_x + G`.
//!
//! The source `G` is derived from a chosen `u` and `A` so the equation holds
//! exactly; the terminal data is `H = u(·, T)`.

use std::fmt::Debug;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::noise::TimeGrid;
use crate::scalar::Scalar;
use crate::spectral::{GridFunction, SpatialGrid};

/// A solution candidate with analytic partial derivatives.
pub trait SolutionField<T>: Debug + Send + Sync {
    fn u(&self, x: T, t: T) -> T;
    fn u_x(&self, x: T, t: T) -> T;
    fn u_xx(&self, x: T, t: T) -> T;
    fn u_t(&self, x: T, t: T) -> T;
}

/// A diffusion coefficient with its analytic `x` derivative.
pub trait CoefficientField<T>: Debug + Send + Sync {
    fn a(&self, x: T, t: T) -> T;
    fn a_x(&self, x: T, t: T) -> T;
}

/// `u = amplitude · e^{−rate·t} · sin(wavenumber·x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayingMode<T> {
    pub amplitude: T,
    pub rate: T,
    pub wavenumber: usize,
}

impl<T: Scalar> DecayingMode<T> {
    /// `e^{−t} sin x`.
    pub fn canonical() -> Self {
        Self {
            amplitude: T::one(),
            rate: T::one(),
            wavenumber: 1,
        }
    }

    fn envelope(&self, t: T) -> T {
        self.amplitude * (-self.rate * t).exp()
    }

    fn k(&self) -> T {
        T::from_index(self.wavenumber)
    }
}

impl<T: Scalar> SolutionField<T> for DecayingMode<T> {
    fn u(&self, x: T, t: T) -> T {
        self.envelope(t) * (self.k() * x).sin()
    }
    fn u_x(&self, x: T, t: T) -> T {
        self.envelope(t) * self.k() * (self.k() * x).cos()
    }
    fn u_xx(&self, x: T, t: T) -> T {
        -self.envelope(t) * self.k() * self.k() * (self.k() * x).sin()
    }
    fn u_t(&self, x: T, t: T) -> T {
        -self.rate * self.u(x, t)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ZeroSolution;

impl<T: Scalar> SolutionField<T> for ZeroSolution {
    fn u(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn u_x(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn u_xx(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn u_t(&self, _: T, _: T) -> T {
        T::zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantCoefficient<T>(pub T);

impl<T: Scalar> CoefficientField<T> for ConstantCoefficient<T> {
    fn a(&self, _: T, _: T) -> T {
        self.0
    }
    fn a_x(&self, _: T, _: T) -> T {
        T::zero()
    }
}

/// `A = base + amplitude · sin x · cos t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatingCoefficient<T> {
    pub base: T,
    pub amplitude: T,
}

impl<T: Scalar> CoefficientField<T> for OscillatingCoefficient<T> {
    fn a(&self, x: T, t: T) -> T {
        self.base + self.amplitude * x.sin() * t.cos()
    }
    fn a_x(&self, x: T, t: T) -> T {
        self.amplitude * x.cos() * t.cos()
    }
}

/// A problem with known solution, built by [`manufacture`].
#[derive(Clone, Debug)]
pub struct ManufacturedProblem<T> {
    solution: Arc<dyn SolutionField<T>>,
    coefficient: Arc<dyn CoefficientField<T>>,
    final_time: T,
    convection: bool,
}

const BOUNDARY_SAMPLES: usize = 33;

/// Derives `G` and `H` from closed-form `u` and `A`, after checking
/// `u(0, t) = u(π, t) = 0` and `A > 0` on a sample of times.
pub fn manufacture<T: Scalar>(
    solution: Arc<dyn SolutionField<T>>,
    coefficient: Arc<dyn CoefficientField<T>>,
    final_time: T,
) -> Result<ManufacturedProblem<T>> {
    build(solution, coefficient, final_time, true)
}

/// As [`manufacture`] for the equation without the `u u_x` term.
pub fn manufacture_linear<T: Scalar>(
    solution: Arc<dyn SolutionField<T>>,
    coefficient: Arc<dyn CoefficientField<T>>,
    final_time: T,
) -> Result<ManufacturedProblem<T>> {
    build(solution, coefficient, final_time, false)
}

fn build<T: Scalar>(
    solution: Arc<dyn SolutionField<T>>,
    coefficient: Arc<dyn CoefficientField<T>>,
    final_time: T,
    convection: bool,
) -> Result<ManufacturedProblem<T>> {
    if !(final_time > T::zero()) {
        return Err(Error::invalid("final time must be positive"));
    }
    let tol = T::lit(1e-10);
    let last = T::from_index(BOUNDARY_SAMPLES - 1);
    for i in 0..BOUNDARY_SAMPLES {
        let t = final_time * T::from_index(i) / last;
        for x in [T::zero(), T::PI()] {
            let v = solution.u(x, t);
            if !(v.abs() <= tol) {
                return Err(Error::BoundaryViolation {
                    x: x.to_f64_lossy(),
                    t: t.to_f64_lossy(),
                    value: v.to_f64_lossy(),
                });
            }
        }
        for j in 0..BOUNDARY_SAMPLES {
            let x = T::PI() * T::from_index(j) / last;
            let a = coefficient.a(x, t);
            if !(a > T::zero()) {
                return Err(Error::NonElliptic {
                    index: j,
                    value: a.to_f64_lossy(),
                    floor: 0.0,
                });
            }
        }
    }
    Ok(ManufacturedProblem {
        solution,
        coefficient,
        final_time,
        convection,
    })
}

impl<T: Scalar> ManufacturedProblem<T> {
    pub fn final_time(&self) -> T {
        self.final_time
    }

    /// Whether the `u u_x` term is part of the equation.
    pub fn has_convection(&self) -> bool {
        self.convection
    }

    pub fn u(&self, x: T, t: T) -> T {
        self.solution.u(x, t)
    }

    pub fn u_x(&self, x: T, t: T) -> T {
        self.solution.u_x(x, t)
    }

    pub fn a(&self, x: T, t: T) -> T {
        self.coefficient.a(x, t)
    }

    /// `G = u_t − (A u_x)_x − u u_x` (last term only with convection).
    pub fn g(&self, x: T, t: T) -> T {
        let s = &self.solution;
        let c = &self.coefficient;
        let flux_div = c.a_x(x, t) * s.u_x(x, t) + c.a(x, t) * s.u_xx(x, t);
        let conv = if self.convection {
            s.u(x, t) * s.u_x(x, t)
        } else {
            T::zero()
        };
        s.u_t(x, t) - flux_div - conv
    }

    /// Terminal data `H(x) = u(x, T)`.
    pub fn h(&self, x: T) -> T {
        self.solution.u(x, self.final_time)
    }

    pub fn sample_u(&self, grid: &SpatialGrid<T>, t: T) -> Result<GridFunction<T>> {
        GridFunction::from_fn(grid.clone(), |x| self.u(x, t))
    }

    pub fn sample_h(&self, grid: &SpatialGrid<T>) -> Result<GridFunction<T>> {
        GridFunction::from_fn(grid.clone(), |x| self.h(x))
    }

    /// `G(x_k, t_j)` as an `n × (m+1)` matrix.
    pub fn sample_g(&self, grid: &SpatialGrid<T>, tg: &TimeGrid<T>) -> Array2<T> {
        sample_space_time(grid, tg, |x, t| self.g(x, t))
    }

    /// `A(x_k, t_j)` as an `n × (m+1)` matrix.
    pub fn sample_a(&self, grid: &SpatialGrid<T>, tg: &TimeGrid<T>) -> Array2<T> {
        sample_space_time(grid, tg, |x, t| self.a(x, t))
    }

    /// Largest sampled `max(|u|, |u_x|)` over the grid and time nodes.
    pub fn sup_bound(&self, grid: &SpatialGrid<T>, tg: &TimeGrid<T>) -> T {
        let mut m = T::zero();
        for &t in tg.nodes() {
            for &x in grid.points() {
                m = m.max(self.u(x, t).abs()).max(self.u_x(x, t).abs());
            }
        }
        m
    }
}

fn sample_space_time<T: Scalar>(
    grid: &SpatialGrid<T>,
    tg: &TimeGrid<T>,
    f: impl Fn(T, T) -> T,
) -> Array2<T> {
    Array2::from_shape_fn((grid.n(), tg.m() + 1), |(k, j)| {
        f(grid.points()[k], tg.nodes()[j])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn canonical(coef: Arc<dyn CoefficientField<f64>>) -> ManufacturedProblem<f64> {
        manufacture(Arc::new(DecayingMode::canonical()), coef, 1.0).unwrap()
    }

    // Residual of the PDE with every derivative replaced by a fourth-order
    // central difference of the closed forms u and A (independent of the
    // analytic partials used to build G).
    fn fd_residual(p: &ManufacturedProblem<f64>, x: f64, t: f64) -> f64 {
        let h = 1e-3;
        let d = |f: &dyn Fn(f64) -> f64, z: f64| {
            (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
        };
        let u_t = d(&|s| p.u(x, s), t);
        let flux = |y: f64| p.a(y, t) * d(&|z| p.u(z, t), y);
        let flux_x = d(&flux, x);
        u_t - flux_x - p.u(x, t) * d(&|z| p.u(z, t), x) - p.g(x, t)
    }

    #[test]
    fn source_for_constant_coefficient() {
        // u = e^{-t} sin x, A = 1: u_t − u_xx = 0, so G = −u u_x
        let p = canonical(Arc::new(ConstantCoefficient(1.0)));
        for &(x, t) in &[(0.3f64, 0.1f64), (1.7, 0.9), (2.9, 0.5)] {
            let want = -(-2.0f64 * t).exp() * x.sin() * x.cos();
            assert!((p.g(x, t) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn source_for_oscillating_coefficient() {
        let p = canonical(Arc::new(OscillatingCoefficient { base: 2.0, amplitude: 1.0 }));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = rng.random::<f64>() * PI;
            let t = rng.random::<f64>();
            // hand-derived closed form
            let want = (-t).exp() * x.sin() - (-t).exp() * t.cos() * (2.0 * x).cos()
                - 0.5 * (-2.0 * t).exp() * (2.0 * x).sin();
            assert!((p.g(x, t) - want).abs() <= 1e-12);
            // nested differences bottom out near eps/h² ≈ 1e-10
            assert!(fd_residual(&p, x.clamp(0.01, PI - 0.01), t.clamp(0.01, 0.99)).abs() <= 1e-8);
        }
    }

    #[test]
    fn zero_solution_has_zero_data() {
        let p = manufacture(Arc::new(ZeroSolution), Arc::new(ConstantCoefficient(1.5)), 2.0).unwrap();
        assert_eq!(p.g(1.0, 0.5), 0.0);
        assert_eq!(p.h(1.0), 0.0);
    }

    #[test]
    fn linear_variant_drops_convection() {
        let p = manufacture_linear(
            Arc::new(DecayingMode::<f64>::canonical()),
            Arc::new(ConstantCoefficient(1.0)),
            1.0,
        )
        .unwrap();
        assert!(p.g(0.7, 0.3).abs() <= 1e-15);
        assert!(!p.has_convection());
    }

    #[derive(Debug)]
    struct Shifted;
    impl SolutionField<f64> for Shifted {
        fn u(&self, x: f64, _: f64) -> f64 {
            x.cos()
        }
        fn u_x(&self, x: f64, _: f64) -> f64 {
            -x.sin()
        }
        fn u_xx(&self, x: f64, _: f64) -> f64 {
            -x.cos()
        }
        fn u_t(&self, _: f64, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn boundary_violation_rejected() {
        let err = manufacture(Arc::new(Shifted), Arc::new(ConstantCoefficient(1.0)), 1.0);
        assert!(matches!(err, Err(Error::BoundaryViolation { .. })));
        let err = manufacture(
            Arc::new(DecayingMode::<f64>::canonical()),
            Arc::new(ConstantCoefficient(-1.0)),
            1.0,
        );
        assert!(matches!(err, Err(Error::NonElliptic { .. })));
    }

    #[test]
    fn terminal_data_and_bounds() {
        let p = canonical(Arc::new(ConstantCoefficient(1.0)));
        assert!((p.h(PI / 2.0) - (-1.0f64).exp()).abs() < 1e-15);
        let grid = crate::spectral::make_grid::<f64>(16).unwrap();
        let tg = TimeGrid::new(4, 1.0).unwrap();
        let b = p.sup_bound(&grid, &tg);
        assert!(b <= 1.0 && b > 0.95);
        assert_eq!(p.sample_g(&grid, &tg).dim(), (16, 5));
    }
}
