//! Experiment configuration: a TOML tree with dotted-key overrides and
//! parameter schedules resolved per grid size.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseConfig, TimeGrid};
use crate::operators::{mode_cutoff, CutoffMode, RegParams};
use crate::regression::{balanced_beta, TruncationSet};

use super::regression_study::RegressionStudyConfig;
use crate::solver::{
    manufacture, manufacture_linear, BackwardOptions, ConstantCoefficient, DecayingMode,
    ManufacturedProblem, OscillatingCoefficient, TimeScheme,
};

/// Built-in manufactured problems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// `u = e^{−t} sin x`, `A = 2 + sin x cos t`, with convection.
    #[default]
    Canonical,
    /// `u = e^{−t} sin x`, `A ≡ 1`, without convection.
    HeatMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub final_time: f64,
    pub a0: f64,
    pub a1: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Canonical,
            final_time: 1.0,
            a0: 3.0,
            a1: 4.0,
        }
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ManufacturedProblem<f64>> {
        let u = Arc::new(DecayingMode::canonical());
        match self.kind {
            ProblemKind::Canonical => manufacture(
                u,
                Arc::new(OscillatingCoefficient {
                    base: 2.0,
                    amplitude: 1.0,
                }),
                self.final_time,
            ),
            ProblemKind::HeatMode => {
                manufacture_linear(u, Arc::new(ConstantCoefficient(1.0)), self.final_time)
            }
        }
    }

    /// Whether the solver should carry the clamped Burgers term.
    pub fn nonlinear(&self) -> bool {
        matches!(self.kind, ProblemKind::Canonical)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma: f64,
    pub vartheta: f64,
    pub varthetabar: f64,
    pub vmax: f64,
    pub shared: bool,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            sigma: 0.01,
            vartheta: 0.01,
            varthetabar: 0.01,
            vmax: 1.0,
            shared: false,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_q0() -> f64 {
    2.0
}

/// `β(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaRule {
    /// `β = scale · n`.
    Linear {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `β^{1/2 + μ₀} = n^{4μ₀}`, capped at the full band `(n−1)²`.
    Balanced,
    /// `β = (n−1)²`.
    FullBand,
    Fixed { value: f64 },
}

/// `ρ(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoRule {
    /// `ρ = α ln n`, `α = μ₀ / (2T)` when omitted.
    Log {
        #[serde(default)]
        alpha: Option<f64>,
    },
    Fixed { value: f64 },
}

/// `Q̂(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum QhatRule {
    Constant {
        #[serde(default = "default_q0")]
        q0: f64,
    },
    /// `q0 · (ln ln(n + 16))^{1/2}`.
    Growing {
        #[serde(default = "default_q0")]
        q0: f64,
    },
}

/// `κ(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaRule {
    Rho,
    Fixed { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedules {
    pub beta: BetaRule,
    pub rho: RhoRule,
    pub qhat: QhatRule,
    pub kappa: KappaRule,
    pub gamma: f64,
    pub mu0: f64,
    /// `m = max(1, round(m_factor · n))`.
    pub m_factor: f64,
}

impl Default for Schedules {
    fn default() -> Self {
        Self {
            beta: BetaRule::Linear { scale: 1.0 },
            rho: RhoRule::Log { alpha: None },
            qhat: QhatRule::Constant { q0: 2.0 },
            kappa: KappaRule::Rho,
            gamma: 1.0,
            mu0: 2.0,
            m_factor: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub scheme: TimeScheme,
    pub c_stab: f64,
    pub cutoff: CutoffMode,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::default(),
            c_stab: 0.5,
            cutoff: CutoffMode::Clamped,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub ladder: Vec<usize>,
    pub trials: usize,
    /// Defaults to `{0, T/2}`.
    pub eval_times: Option<Vec<f64>>,
    pub problem: ProblemConfig,
    pub noise: NoiseSection,
    pub schedules: Schedules,
    pub solver: SolverSection,
    /// Settings of the regression-only study.
    pub regression: RegressionStudyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            ladder: vec![64, 128, 256, 512],
            trials: 64,
            eval_times: None,
            problem: ProblemConfig::default(),
            noise: NoiseSection::default(),
            schedules: Schedules::default(),
            solver: SolverSection::default(),
            regression: RegressionStudyConfig::default(),
        }
    }
}

/// Schedule values for one ladder point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    pub n: usize,
    pub m: usize,
    pub beta_n: f64,
    pub rho_n: f64,
    pub qhat_n: f64,
    pub kappa_n: f64,
}

impl ExperimentConfig {
    /// Parses TOML text, applies `key=value` overrides and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides)
    }

    /// Defaults with overrides.
    pub fn with_overrides(overrides: &[String]) -> Result<Self> {
        Self::from_toml_str("", overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn eval_times(&self) -> Vec<f64> {
        self.eval_times
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.5 * self.problem.final_time])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.ladder.is_empty() {
            return bad("ladder is empty".into());
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("ladder {:?} is not strictly increasing", self.ladder));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let t_final = self.problem.final_time;
        if !(t_final > 0.0) {
            return bad("problem.final_time must be positive".into());
        }
        let times = self.eval_times();
        if times.is_empty() {
            return bad("eval_times is empty".into());
        }
        if let Some(t) = times.iter().find(|&&t| !(0.0..=t_final).contains(&t)) {
            return bad(format!("evaluation time {t} outside [0, {t_final}]"));
        }
        if !(self.schedules.m_factor > 0.0) {
            return bad("schedules.m_factor must be positive".into());
        }
        if !(self.solver.c_stab > 0.0) {
            return bad("solver.c_stab must be positive".into());
        }
        if self.noise.sigma >= self.noise.vmax {
            return bad("noise.sigma must stay below noise.vmax".into());
        }
        for &n in &self.ladder {
            let r = self.resolve(n)?;
            self.reg_params(&r)?;
            TruncationSet::new(r.beta_n)
                .and_then(|ts| {
                    if ts.pcut() + 1 > n {
                        Err(Error::invalid(format!("beta cutoff {} aliases", ts.pcut())))
                    } else {
                        Ok(())
                    }
                })
                .map_err(|e| Error::Config(format!("n = {n}: {e}")))?;
            if mode_cutoff(r.rho_n, self.problem.a1) + 1 > n {
                return bad(format!("n = {n}: rho cutoff exceeds the grid"));
            }
        }
        Ok(())
    }

    /// Evaluates every schedule at grid size `n`.
    pub fn resolve(&self, n: usize) -> Result<Resolved> {
        if n < 2 {
            return Err(Error::Config(format!("grid size {n} too small")));
        }
        let s = &self.schedules;
        let nf = n as f64;
        let full = ((n - 1) * (n - 1)) as f64;
        let beta_n = match s.beta {
            BetaRule::Linear { scale } => scale * nf,
            BetaRule::Balanced => balanced_beta(n, s.mu0).min(full),
            BetaRule::FullBand => full,
            BetaRule::Fixed { value } => value,
        };
        let rho_n = match s.rho {
            RhoRule::Log { alpha } => {
                alpha.unwrap_or(s.mu0 / (2.0 * self.problem.final_time)) * nf.ln()
            }
            RhoRule::Fixed { value } => value,
        };
        let qhat_n = match s.qhat {
            QhatRule::Constant { q0 } => q0,
            QhatRule::Growing { q0 } => q0 * (nf + 16.0).ln().ln().sqrt(),
        };
        let kappa_n = match s.kappa {
            KappaRule::Rho => rho_n,
            KappaRule::Fixed { value } => value,
        };
        let m = ((s.m_factor * nf).round() as usize).max(1);
        Ok(Resolved {
            n,
            m,
            beta_n,
            rho_n,
            qhat_n,
            kappa_n,
        })
    }

    pub fn reg_params(&self, r: &Resolved) -> Result<RegParams<f64>> {
        RegParams::new(
            self.problem.a0,
            self.problem.a1,
            r.rho_n,
            r.beta_n,
            r.qhat_n,
            self.schedules.gamma,
            self.schedules.mu0,
        )
        .and_then(|rp| rp.with_kappa(r.kappa_n))
        .map_err(|e| Error::Config(format!("n = {}: {e}", r.n)))
    }

    pub fn timegrid(&self, r: &Resolved) -> Result<TimeGrid<f64>> {
        TimeGrid::new(r.m, self.problem.final_time)
    }

    pub fn noise_config(&self, n: usize) -> Result<NoiseConfig> {
        let mut cfg = NoiseConfig::uniform(
            n,
            self.noise.sigma,
            self.noise.vartheta,
            self.noise.varthetabar,
            self.noise.vmax,
            self.seed,
        )?;
        cfg.shared_noise = self.noise.shared;
        Ok(cfg)
    }

    pub fn backward_options(&self) -> BackwardOptions {
        BackwardOptions {
            scheme: self.solver.scheme,
            c_stab: self.solver.c_stab,
            nonlinearity: self.problem.nonlinear(),
            cutoff: self.solver.cutoff,
        }
    }
}

/// Sets `a.b.c = value` in a TOML table. The value is parsed as TOML and
/// falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::Config(format!("empty segment in key {key:?}")));
        }
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key}: {part} is not a table")))?;
    }
    Err(Error::Config(format!("empty override key in {assignment:?}")))
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::with_overrides(&[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.eval_times(), vec![0.0, 0.5]);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = ExperimentConfig::with_overrides(&[
            "trials=3".into(),
            "ladder=[16, 32, 64]".into(),
            "schedules.mu0=1.5".into(),
            "solver.scheme=backward_euler".into(),
            "schedules.qhat.rule=growing".into(),
            "noise.shared=true".into(),
            "regression.trials=10".into(),
        ])
        .unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.ladder, vec![16, 32, 64]);
        assert_eq!(cfg.schedules.mu0, 1.5);
        assert_eq!(cfg.solver.scheme, TimeScheme::BackwardEuler);
        assert_eq!(cfg.schedules.qhat, QhatRule::Growing { q0: 2.0 });
        assert!(cfg.noise.shared);
        assert_eq!(cfg.regression.trials, 10);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::default();
        cfg.schedules.beta = BetaRule::Fixed { value: 9.0 };
        cfg.eval_times = Some(vec![0.25]);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text, &[]).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for ov in [
            "ladder=[64, 32]",
            "ladder=[]",
            "trials=0",
            "eval_times=[2.0]",
            "unknown_key=1",
            "schedules.beta.rule=fixed",
            "problem.a1=2.0",
        ] {
            assert!(ExperimentConfig::with_overrides(&[ov.into()]).is_err(), "{ov}");
        }
        assert!(ExperimentConfig::with_overrides(&["no-equals".into()]).is_err());
    }

    #[test]
    fn schedules_resolve() {
        let cfg = ExperimentConfig::default();
        let r = cfg.resolve(256).unwrap();
        assert_eq!(r.beta_n, 256.0);
        assert!((r.rho_n - 256f64.ln()).abs() < 1e-12);
        assert_eq!(r.kappa_n, r.rho_n);
        assert_eq!(r.qhat_n, 2.0);
        assert_eq!(r.m, 256);
        let mut g = cfg.clone();
        g.schedules.qhat = QhatRule::Growing { q0: 1.0 };
        let q = g.resolve(64).unwrap().qhat_n;
        assert!((q - 80f64.ln().ln().sqrt()).abs() < 1e-15);
        g.schedules.beta = BetaRule::Balanced;
        assert_eq!(g.resolve(64).unwrap().beta_n, 63.0 * 63.0);
    }
}
