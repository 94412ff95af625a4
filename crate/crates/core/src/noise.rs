//! Observation model: Gaussian errors on the terminal samples and Brownian
//! perturbations on the source and diffusion-coefficient paths.
//!
//! Randomness comes from `ChaCha8Rng` (rand_chacha 0.9). A [`NoiseConfig`]
//! names a `(seed, stream)` pair; each noise family draws from its own
//! ChaCha stream `4 * stream + family` so the families are independent and
//! each can be regenerated on its own:
//!
//! | family | stream offset | draws                                   |
//! |--------|---------------|-----------------------------------------|
//! | ε      | 0             | `n` standard normals                    |
//! | ξ      | 1             | `n` paths × `m` increments, point-major  |
//! | ξ'     | 2             | same layout (unused with `shared_noise`) |
//!
//! Normals are drawn with `rand_distr::StandardNormal` (ziggurat).

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::GridFunction;

/// Uniform time grid `t_j = j T / m`, `j = 0..m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid<T> {
    final_time: T,
    nodes: Vec<T>,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(m: usize, final_time: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("time grid needs at least one interval"));
        }
        if !(final_time > T::zero()) || !final_time.is_finite() {
            return Err(Error::invalid(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        let mm = T::from_index(m);
        let nodes = (0..=m)
            .map(|j| final_time * T::from_index(j) / mm)
            .collect();
        Ok(Self { final_time, nodes })
    }

    /// Number of intervals.
    #[inline]
    pub fn m(&self) -> usize {
        self.nodes.len() - 1
    }

    #[inline]
    pub fn final_time(&self) -> T {
        self.final_time
    }

    #[inline]
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.final_time / T::from_index(self.m())
    }

    /// Index of the node nearest to `t`, clamped into `0..=m`.
    pub fn nearest_index(&self, t: T) -> usize {
        let j = (t / self.dt()).round();
        if !(j > T::zero()) {
            return 0;
        }
        j.to_usize().unwrap_or(usize::MAX).min(self.m())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    /// Per-point standard deviations `σ_k` of the terminal-data errors.
    pub sigma: Vec<f64>,
    /// Source perturbation amplitude `ϑ`.
    pub vartheta: f64,
    /// Coefficient perturbation amplitude `ϑ̄`.
    pub varthetabar: f64,
    /// Common bound on the `σ_k`.
    pub vmax: f64,
    pub seed: u64,
    /// ChaCha stream selecting an independent sub-sequence for this draw.
    pub stream: u64,
    /// Reuse the source Brownian family for the coefficient perturbation.
    pub shared_noise: bool,
}

impl NoiseConfig {
    /// Equal `σ_k = sigma` at all `n` points.
    pub fn uniform(
        n: usize,
        sigma: f64,
        vartheta: f64,
        varthetabar: f64,
        vmax: f64,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            sigma: vec![sigma; n],
            vartheta,
            varthetabar,
            vmax,
            seed,
            stream: 0,
            shared_noise: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vmax > 0.0) {
            return Err(Error::invalid(format!("V_max must be positive, got {}", self.vmax)));
        }
        if let Some((k, s)) = self
            .sigma
            .iter()
            .enumerate()
            .find(|(_, &s)| !(s >= 0.0 && s < self.vmax))
        {
            return Err(Error::invalid(format!(
                "sigma[{k}] = {s} must lie in [0, V_max = {})",
                self.vmax
            )));
        }
        if !(self.vartheta >= 0.0) || !(self.varthetabar >= 0.0) {
            return Err(Error::invalid("noise amplitudes must be nonnegative"));
        }
        if self.stream >= 1 << 62 {
            return Err(Error::invalid("stream index must be below 2^62"));
        }
        Ok(())
    }

    /// Same configuration on the independent stream of one Monte-Carlo trial.
    pub fn for_trial(&self, n: usize, trial: usize) -> Self {
        Self {
            stream: trial_stream(n, trial),
            ..self.clone()
        }
    }

    fn rng(&self, family: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.stream << 2) | family);
        rng
    }
}

const FAMILY_EPSILON: u64 = 0;
const FAMILY_SOURCE: u64 = 1;
const FAMILY_COEFFICIENT: u64 = 2;

/// Stream index of trial `trial` at grid size `n` (splitmix64 finalizer,
/// truncated to 62 bits).
pub fn trial_stream(n: usize, trial: usize) -> u64 {
    let mut z = ((n as u64) << 32) ^ (trial as u64);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) >> 2
}

/// Standard Brownian path sampled on a [`TimeGrid`], with the amplitude it
/// is applied with kept separately.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    timegrid: TimeGrid<f64>,
    amplitude: f64,
    w: Vec<f64>,
}

impl BrownianPath {
    fn sample(rng: &mut impl Rng, timegrid: &TimeGrid<f64>, amplitude: f64) -> Self {
        let sd = timegrid.dt().sqrt();
        let mut w = Vec::with_capacity(timegrid.m() + 1);
        let mut acc = 0.0;
        w.push(acc);
        for _ in 0..timegrid.m() {
            let z: f64 = rng.sample(StandardNormal);
            acc += sd * z;
            w.push(acc);
        }
        Self {
            timegrid: timegrid.clone(),
            amplitude,
            w,
        }
    }

    /// Standard path values `w(t_j)`, `w[0] = 0`.
    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn timegrid(&self) -> &TimeGrid<f64> {
        &self.timegrid
    }

    /// Perturbation `amplitude · w(t_j)`.
    #[inline]
    pub fn perturbation(&self, j: usize) -> f64 {
        self.amplitude * self.w[j]
    }
}

fn draw_paths(
    rng: &mut impl Rng,
    count: usize,
    tg: &TimeGrid<f64>,
    amplitude: f64,
) -> Vec<BrownianPath> {
    (0..count)
        .map(|_| BrownianPath::sample(rng, tg, amplitude))
        .collect()
}

/// `σ_k ε_k` with `ε_k` i.i.d. standard normal.
pub fn sample_gaussian_errors(n: usize, cfg: &NoiseConfig) -> Result<Vec<f64>> {
    if cfg.sigma.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: cfg.sigma.len(),
        });
    }
    cfg.validate()?;
    let mut rng = cfg.rng(FAMILY_EPSILON);
    Ok(cfg
        .sigma
        .iter()
        .map(|&s| {
            let e: f64 = rng.sample(StandardNormal);
            s * e
        })
        .collect())
}

/// `count` mutually independent standard Brownian paths from the source
/// family of `cfg`.
pub fn sample_brownian_paths(
    count: usize,
    tg: &TimeGrid<f64>,
    amplitude: f64,
    cfg: &NoiseConfig,
) -> Result<Vec<BrownianPath>> {
    if !(amplitude >= 0.0) {
        return Err(Error::invalid("Brownian amplitude must be nonnegative"));
    }
    cfg.validate()?;
    Ok(draw_paths(&mut cfg.rng(FAMILY_SOURCE), count, tg, amplitude))
}

/// Perturbed measurements of terminal data, source and coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyObservations {
    pub h_tilde: GridFunction<f64>,
    /// `G̃_k(t_j)`, shape `n × (m+1)`.
    pub g_tilde: Array2<f64>,
    /// `Ã_k(t_j)`, shape `n × (m+1)`.
    pub a_tilde: Array2<f64>,
    pub timegrid: TimeGrid<f64>,
}

/// Applies the observation model to sampled truth.
pub fn observe(
    truth_h: &GridFunction<f64>,
    truth_g: &Array2<f64>,
    truth_a: &Array2<f64>,
    tg: &TimeGrid<f64>,
    cfg: &NoiseConfig,
) -> Result<NoisyObservations> {
    let n = truth_h.grid().n();
    let shape = (n, tg.m() + 1);
    for mat in [truth_g, truth_a] {
        if mat.dim() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: mat.dim(),
            });
        }
    }
    let eps = sample_gaussian_errors(n, cfg)?;
    let h_values = truth_h
        .values()
        .iter()
        .zip(&eps)
        .map(|(h, e)| h + e)
        .collect();
    let h_tilde = GridFunction::new(truth_h.grid().clone(), h_values)?;

    let source = draw_paths(&mut cfg.rng(FAMILY_SOURCE), n, tg, cfg.vartheta);
    let coefficient = if cfg.shared_noise {
        source
            .iter()
            .map(|p| BrownianPath {
                amplitude: cfg.varthetabar,
                ..p.clone()
            })
            .collect()
    } else {
        draw_paths(&mut cfg.rng(FAMILY_COEFFICIENT), n, tg, cfg.varthetabar)
    };

    let perturb = |truth: &Array2<f64>, paths: &[BrownianPath]| {
        Array2::from_shape_fn(shape, |(k, j)| truth[[k, j]] + paths[k].perturbation(j))
    };
    let g_tilde = perturb(truth_g, &source);
    let a_tilde = perturb(truth_a, &coefficient);
    if g_tilde.iter().chain(a_tilde.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite observation"));
    }
    Ok(NoisyObservations {
        h_tilde,
        g_tilde,
        a_tilde,
        timegrid: tg.clone(),
    })
}
