//! Truncated sine-series regression of noisy grid samples.
//!
//! The estimator keeps the modes `p ∈ W = {1 ≤ p ≤ √β}` and estimates each
//! coefficient by the midpoint quadrature of the observations:
//! `ĉ_p = (π/n) Σ_k D̃_k ψ_p(x_k)`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::noise::TimeGrid;
use crate::scalar::Scalar;
use crate::spectral::{make_grid, GridFunction, SineBasis, SpectralCoeffs};

/// Truncation parameter `β` and the resulting mode cutoff `⌊√β⌋`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationSet {
    beta_n: f64,
    pcut: usize,
}

impl TruncationSet {
    pub fn new(beta_n: f64) -> Result<Self> {
        if !(beta_n >= 1.0) || !beta_n.is_finite() {
            return Err(Error::invalid(format!(
                "truncation parameter must be finite and >= 1 (so that the mode set is nonempty), got {beta_n}"
            )));
        }
        let mut pcut = beta_n.sqrt().floor() as usize;
        // guard against sqrt rounding just below an exact integer root
        while ((pcut + 1) * (pcut + 1)) as f64 <= beta_n {
            pcut += 1;
        }
        while (pcut * pcut) as f64 > beta_n {
            pcut -= 1;
        }
        Ok(Self { beta_n, pcut })
    }

    /// The set that keeps every orthonormal mode of an `n`-point grid.
    pub fn full_band(n: usize) -> Result<Self> {
        let p = n.saturating_sub(1).max(1);
        Self::new((p * p) as f64)
    }

    pub fn beta_n(&self) -> f64 {
        self.beta_n
    }

    pub fn pcut(&self) -> usize {
        self.pcut
    }

    fn check_grid(&self, n: usize) -> Result<()> {
        if self.pcut > n.saturating_sub(1) {
            return Err(Error::Aliasing {
                pmax: self.pcut,
                n,
                max_usable: n.saturating_sub(1),
            });
        }
        Ok(())
    }
}

/// One coefficient vector per time node.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeField<T> {
    timegrid: TimeGrid<T>,
    coeffs: Vec<SpectralCoeffs<T>>,
}

impl<T: Scalar> TimeField<T> {
    pub fn new(timegrid: TimeGrid<T>, coeffs: Vec<SpectralCoeffs<T>>) -> Result<Self> {
        if coeffs.len() != timegrid.m() + 1 {
            return Err(Error::LengthMismatch {
                expected: timegrid.m() + 1,
                found: coeffs.len(),
            });
        }
        let pmax = coeffs[0].pmax();
        if let Some(bad) = coeffs.iter().find(|c| c.pmax() != pmax) {
            return Err(Error::LengthMismatch {
                expected: pmax,
                found: bad.pmax(),
            });
        }
        Ok(Self { timegrid, coeffs })
    }

    /// The same coefficients at every node.
    pub fn constant(timegrid: TimeGrid<T>, c: SpectralCoeffs<T>) -> Self {
        let coeffs = vec![c; timegrid.m() + 1];
        Self { timegrid, coeffs }
    }

    pub fn timegrid(&self) -> &TimeGrid<T> {
        &self.timegrid
    }

    pub fn pmax(&self) -> usize {
        self.coeffs[0].pmax()
    }

    pub fn node(&self, j: usize) -> &SpectralCoeffs<T> {
        &self.coeffs[j]
    }

    pub fn nodes(&self) -> &[SpectralCoeffs<T>] {
        &self.coeffs
    }
}

/// Series estimate of a static function from its noisy samples.
pub fn estimate_static<T: Scalar>(
    samples: &GridFunction<T>,
    ts: &TruncationSet,
) -> Result<SpectralCoeffs<T>> {
    ts.check_grid(samples.grid().n())?;
    crate::spectral::analyze(samples, ts.pcut())
}

/// Column-wise [`estimate_static`] for an `n × (m+1)` matrix of paths.
pub fn estimate_time_field<T: Scalar>(
    paths: &Array2<T>,
    tg: &TimeGrid<T>,
    ts: &TruncationSet,
) -> Result<TimeField<T>> {
    let (n, cols) = paths.dim();
    if cols != tg.m() + 1 {
        return Err(Error::ShapeMismatch {
            expected: (n, tg.m() + 1),
            found: (n, cols),
        });
    }
    let grid = make_grid::<T>(n)?;
    ts.check_grid(n)?;
    let basis = SineBasis::new(&grid, ts.pcut())?;
    let mut column = vec![T::zero(); n];
    let coeffs = paths
        .columns()
        .into_iter()
        .map(|col| {
            column.iter_mut().zip(col).for_each(|(c, &v)| *c = v);
            basis.analyze(&column)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeField::new(tg.clone(), coeffs)
}

/// Order `max(√β n^{−4μ₀}, β^{−μ₀})` of the regression mean-squared error.
pub fn theoretical_mse_order(n: usize, beta_n: f64, mu0: f64) -> Result<f64> {
    if !(mu0 > 0.5) {
        return Err(Error::invalid(format!("mu0 must exceed 1/2, got {mu0}")));
    }
    if n == 0 || !(beta_n > 0.0) {
        return Err(Error::invalid("n and beta_n must be positive"));
    }
    let variance_branch = beta_n.sqrt() * (n as f64).powf(-4.0 * mu0);
    let bias_branch = beta_n.powf(-mu0);
    Ok(variance_branch.max(bias_branch))
}

/// `β` that equates both branches of [`theoretical_mse_order`]:
/// `β^{1/2 + μ₀} = n^{4μ₀}`.
pub fn balanced_beta(n: usize, mu0: f64) -> f64 {
    (n as f64).powf(4.0 * mu0 / (mu0 + 0.5))
}

/// A truth whose exact sine coefficients and tail energies are known.
pub trait KnownSeries: Sync {
    /// Exact coefficient `⟨f, ψ_p⟩`.
    fn coeff(&self, p: usize) -> f64;
    /// `Σ_{p > pcut} ⟨f, ψ_p⟩²`.
    fn tail_energy(&self, pcut: usize) -> f64;
}

/// `x(π − x)` on `(0, π)`: `⟨f, ψ_p⟩ = 8/(√(2π) p³)` for odd `p`, 0 otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParabolaProfile;

impl ParabolaProfile {
    pub fn eval(x: f64) -> f64 {
        x * (std::f64::consts::PI - x)
    }

    /// `‖f‖² = π⁵/30`.
    pub fn energy() -> f64 {
        std::f64::consts::PI.powi(5) / 30.0
    }
}

impl KnownSeries for ParabolaProfile {
    fn coeff(&self, p: usize) -> f64 {
        if p % 2 == 1 {
            8.0 / (2.0 * std::f64::consts::PI).sqrt() / (p as f64).powi(3)
        } else {
            0.0
        }
    }

    fn tail_energy(&self, pcut: usize) -> f64 {
        // direct sum (energy − head cancels badly), then the integral of the
        // odd-index remainder Σ_{odd q ≥ Q} C q^{-6} ≈ C / (10 (Q−1)^5)
        const TERMS: usize = 4000;
        let c = 32.0 / std::f64::consts::PI;
        let last = pcut + TERMS;
        let head: f64 = (pcut + 1..=last).rev().map(|p| self.coeff(p).powi(2)).sum();
        let q = if last.is_multiple_of(2) { last + 1 } else { last + 2 };
        head + c / (10.0 * ((q - 1) as f64).powi(5))
    }
}

/// A truth that is exactly a finite sine series.
#[derive(Clone, Debug)]
pub struct BandLimited(pub Vec<f64>);

impl KnownSeries for BandLimited {
    fn coeff(&self, p: usize) -> f64 {
        if p == 0 {
            return 0.0;
        }
        self.0.get(p - 1).copied().unwrap_or(0.0)
    }

    fn tail_energy(&self, pcut: usize) -> f64 {
        self.0.iter().skip(pcut).map(|c| c * c).sum()
    }
}

/// Squared L² distance between one estimate and the truth: band part in
/// coefficient space plus the exact tail beyond the estimate's length.
pub fn squared_error<T: Scalar>(estimate: &SpectralCoeffs<T>, truth: &dyn KnownSeries) -> f64 {
    let band: f64 = estimate
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.to_f64_lossy() - truth.coeff(i + 1)).powi(2))
        .sum();
    band + truth.tail_energy(estimate.pmax())
}

/// Monte-Carlo mean of [`squared_error`] over the trial estimates.
pub fn empirical_mse<T: Scalar>(
    estimates: &[SpectralCoeffs<T>],
    truth: &dyn KnownSeries,
) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::invalid("empirical MSE needs at least one trial"));
    }
    let total: f64 = estimates.iter().map(|e| squared_error(e, truth)).sum();
    Ok(total / estimates.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_gaussian_errors, NoiseConfig};
    use crate::spectral::{basis_eval, synthesize};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn truncation_cutoff() {
        assert_eq!(TruncationSet::new(1.0).unwrap().pcut(), 1);
        assert_eq!(TruncationSet::new(63.9).unwrap().pcut(), 7);
        assert_eq!(TruncationSet::new(64.0).unwrap().pcut(), 8);
        assert_eq!(TruncationSet::new(100.0).unwrap().pcut(), 10);
        assert_eq!(TruncationSet::full_band(256).unwrap().pcut(), 255);
        assert!(TruncationSet::new(0.5).is_err());
        assert!(TruncationSet::new(f64::NAN).is_err());
    }

    #[test]
    fn noiseless_single_mode() {
        let g = make_grid::<f64>(64).unwrap();
        let f = GridFunction::from_fn(g, |x| basis_eval(1, x)).unwrap();
        let c = estimate_static(&f, &TruncationSet::new(30.0).unwrap()).unwrap();
        assert_eq!(c.pmax(), 5);
        assert_abs_diff_eq!(c.get(1), 1.0, epsilon = 1e-12);
        assert!(c.as_slice()[1..].iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn rejects_band_beyond_grid() {
        let f = GridFunction::zeros(make_grid::<f64>(8).unwrap());
        assert!(estimate_static(&f, &TruncationSet::new(49.0).unwrap()).is_ok());
        assert!(matches!(
            estimate_static(&f, &TruncationSet::new(64.0).unwrap()),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn zero_samples_give_zero_estimate() {
        let f = GridFunction::zeros(make_grid::<f64>(32).unwrap());
        let c = estimate_static(&f, &TruncationSet::new(16.0).unwrap()).unwrap();
        assert!(c.as_slice().iter().all(|&v| v == 0.0));
    }

    // Oracle: ∫₀^π x(π−x) sin(px) dx = 2(1 − (−1)^p)/p³, checked by
    // composite Simpson quadrature independent of the closed form used above.
    #[test]
    fn parabola_coefficients_match_quadrature() {
        let m = 20_000;
        let h = PI / m as f64;
        for p in 1..=7 {
            let f = |x: f64| ParabolaProfile::eval(x) * basis_eval(p, x);
            let mut s = f(0.0) + f(PI);
            for i in 1..m {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            let simpson = s * h / 3.0;
            assert_abs_diff_eq!(ParabolaProfile.coeff(p), simpson, epsilon = 1e-12);
        }
        // total energy π⁵/30 against a long partial sum
        let partial: f64 = (1..200_000).map(|p| ParabolaProfile.coeff(p).powi(2)).sum();
        assert_abs_diff_eq!(partial, ParabolaProfile::energy(), epsilon = 1e-12);
    }

    #[test]
    fn parabola_estimate_error_is_bounded_by_tail_plus_aliasing() {
        let n = 512;
        let ts = TruncationSet::new(64.0).unwrap();
        let g = make_grid::<f64>(n).unwrap();
        let f = GridFunction::from_fn(g, ParabolaProfile::eval).unwrap();
        let c = estimate_static(&f, &ts).unwrap();
        let err = squared_error(&c, &ParabolaProfile);
        let tail: f64 = (9..400_000).map(|p| ParabolaProfile.coeff(p).powi(2)).sum();
        assert!(err >= tail);
        // aliasing bias of the quadrature coefficients is O(n^-4) here
        assert!(err <= tail * (1.0 + 1e-6), "{err} vs tail {tail}");
    }

    #[test]
    fn time_field_constant_and_zero() {
        let tg = TimeGrid::new(4, 1.0).unwrap();
        let g = make_grid::<f64>(16).unwrap();
        let row: Vec<f64> = g.points().iter().map(|&x| (2.0 * x).sin()).collect();
        let paths = Array2::from_shape_fn((16, 5), |(k, _)| row[k]);
        let ts = TruncationSet::new(9.0).unwrap();
        let field = estimate_time_field(&paths, &tg, &ts).unwrap();
        for j in 1..5 {
            assert_eq!(field.node(j), field.node(0));
        }
        let zero = estimate_time_field(&Array2::zeros((16, 5)), &tg, &ts).unwrap();
        assert!(zero.nodes().iter().all(|c| c.as_slice().iter().all(|&v| v == 0.0)));
        assert!(estimate_time_field(&Array2::zeros((16, 4)), &tg, &ts).is_err());
    }

    #[test]
    fn coefficient_field_error_equals_constant_offset_tail() {
        // A = 2 + sin x cos t; A − 2 is the single mode √(π/2) cos t ψ_1, so
        // the error is exactly the truncation error of the constant 2.
        let n = 256;
        let tg = TimeGrid::<f64>::new(8, 1.0).unwrap();
        let grid = make_grid::<f64>(n).unwrap();
        let paths = Array2::from_shape_fn((n, 9), |(k, j)| {
            2.0 + grid.points()[k].sin() * tg.nodes()[j].cos()
        });
        let ts = TruncationSet::new(100.0).unwrap();
        let field = estimate_time_field(&paths, &tg, &ts).unwrap();
        // constant 2: ⟨2, ψ_p⟩ = 4√(2/π)/p for odd p
        let offset = BandLimited(
            (1..=400_000)
                .map(|p| if p % 2 == 1 { 4.0 * (2.0 / PI).sqrt() / p as f64 } else { 0.0 })
                .collect(),
        );
        let tail = offset.tail_energy(10);
        let mut worst: f64 = 0.0;
        for (j, c) in field.nodes().iter().enumerate() {
            let t = tg.nodes()[j];
            let shifted = SpectralCoeffs::from_fn(10, |p| {
                c.get(p) - if p == 1 { (PI / 2.0).sqrt() * t.cos() } else { 0.0 }
            })
            .unwrap();
            let err = squared_error(&shifted, &offset).sqrt();
            worst = worst.max((err - tail.sqrt()).abs());
        }
        // band coefficients carry only the O(p²/n²) quadrature bias
        assert!(worst <= 1e-3 * tail.sqrt(), "deviation {worst}, tail {}", tail.sqrt());
    }

    #[test]
    fn mse_order_formula() {
        assert_abs_diff_eq!(theoretical_mse_order(10, 10.0, 1.0).unwrap(), 0.1, epsilon = 1e-15);
        for n in [4, 50, 1000] {
            assert_abs_diff_eq!(theoretical_mse_order(n, 1.0, 0.8).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert!(theoretical_mse_order(10, 10.0, 0.5).is_err());
        for (n, mu0) in [(64, 1.0), (1000, 0.75), (4096, 1.49)] {
            let beta = balanced_beta(n, mu0);
            let a = beta.sqrt() * (n as f64).powf(-4.0 * mu0);
            let b = beta.powf(-mu0);
            assert_abs_diff_eq!(a / b, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn empirical_mse_noiseless_cases() {
        let n = 64;
        let g = make_grid::<f64>(n).unwrap();
        let truth = BandLimited(vec![0.5, 0.0, -1.0]);
        let c = SpectralCoeffs::new(truth.0.clone()).unwrap();
        let f = synthesize(&c, &g);
        let est = estimate_static(&f, &TruncationSet::new(25.0).unwrap()).unwrap();
        assert!(empirical_mse(&[est], &truth).unwrap() <= 1e-20);

        // truth with a tail beyond the band: error is the tail energy
        let truth = BandLimited(vec![1.0, 0.5, 0.25, 0.125]);
        let f = synthesize(&SpectralCoeffs::new(truth.0.clone()).unwrap(), &g);
        let est = estimate_static(&f, &TruncationSet::new(4.0).unwrap()).unwrap();
        let mse = empirical_mse(&[est], &truth).unwrap();
        assert_abs_diff_eq!(mse, 0.25f64.powi(2) + 0.125f64.powi(2), epsilon = 1e-14);

        assert!(empirical_mse::<f64>(&[], &truth).is_err());
    }

    #[test]
    fn pure_noise_variance_term() {
        // each ĉ_p ~ N(0, σ²π/n), so E‖Ĥ‖² = pcut σ² π / n
        let n = 128;
        let sigma = 0.2;
        let ts = TruncationSet::new(30.0).unwrap();
        let grid = make_grid::<f64>(n).unwrap();
        let base = NoiseConfig::uniform(n, sigma, 0.0, 0.0, 1.0, 77).unwrap();
        let estimates: Vec<_> = (0..10_000)
            .map(|t| {
                let e = sample_gaussian_errors(n, &base.for_trial(n, t)).unwrap();
                let f = GridFunction::new(grid.clone(), e).unwrap();
                estimate_static(&f, &ts).unwrap()
            })
            .collect();
        let mse = empirical_mse(&estimates, &BandLimited(vec![])).unwrap();
        let expected = ts.pcut() as f64 * sigma * sigma * PI / n as f64;
        assert!((mse - expected).abs() <= 0.05 * expected, "{mse} vs {expected}");
    }

    proptest! {
        #[test]
        fn estimator_is_linear(
            a in proptest::collection::vec(-2.0f64..2.0, 40),
            b in proptest::collection::vec(-2.0f64..2.0, 40),
            beta in 1.0f64..1500.0,
        ) {
            let g = make_grid::<f64>(40).unwrap();
            let ts = TruncationSet::new(beta).unwrap();
            let fa = GridFunction::new(g.clone(), a.clone()).unwrap();
            let fb = GridFunction::new(g.clone(), b.clone()).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let fs = GridFunction::new(g, sum).unwrap();
            let ca = estimate_static(&fa, &ts).unwrap();
            let cb = estimate_static(&fb, &ts).unwrap();
            let cs = estimate_static(&fs, &ts).unwrap();
            for p in 1..=ts.pcut() {
                prop_assert!((cs.get(p) - ca.get(p) - cb.get(p)).abs() <= 1e-12);
            }
        }
    }
}
