//! Log-log rate fits and the theoretical error order.

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, Resolved};
use super::monte_carlo::ErrorReport;

/// `ln` of
/// `exp(16 Q̂² T/(A₁−A₀)) e^{−2κt} max(e^{2ρT} β^{1/2} n^{−4μ₀}, e^{2ρT} β^{−μ₀}, ρ^{−2γ})`.
pub fn log_theory_order(cfg: &ExperimentConfig, r: &Resolved, t: f64) -> f64 {
    let p = &cfg.problem;
    let s = &cfg.schedules;
    let big_t = p.final_time;
    let n = r.n as f64;
    let growth = 2.0 * r.rho_n * big_t;
    let variance = growth + 0.5 * r.beta_n.ln() - 4.0 * s.mu0 * n.ln();
    let bias = growth - s.mu0 * r.beta_n.ln();
    let reg = -2.0 * s.gamma * r.rho_n.ln();
    16.0 * r.qhat_n * r.qhat_n * big_t / (p.a1 - p.a0) - 2.0 * r.kappa_n * t
        + variance.max(bias).max(reg)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals in log space.
    pub residual_norm: f64,
}

/// Fits `ln y = slope · ln x + intercept`; needs three or more points and
/// positive `y`.
pub fn fit_loglog(xs: &[usize], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let lx: Vec<f64> = xs.iter().map(|&x| (x as f64).ln()).collect();
    let ly = xs
        .iter()
        .zip(ys)
        .map(|(&n, &y)| {
            if y > 0.0 && y.is_finite() {
                Ok(y.ln())
            } else {
                Err(Error::NonPositiveMean { n, value: y })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    fit_lines(&lx, &ly)
}

fn fit_lines(lx: &[f64], ly: &[f64]) -> Result<LogLogFit> {
    let k = lx.len();
    if k < 3 {
        return Err(Error::InsufficientPoints { needed: 3, found: k });
    }
    let kf = k as f64;
    let mx = lx.iter().sum::<f64>() / kf;
    let my = ly.iter().sum::<f64>() / kf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("rate fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = lx
        .iter()
        .zip(ly)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LogLogFit {
        slope,
        intercept,
        residual_norm,
    })
}

/// Empirical slope next to the slope of the theoretical order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub time: f64,
    pub slope: f64,
    pub intercept: f64,
    pub residual_norm: f64,
    pub theory_slope: f64,
}

/// One fit per requested time, each over the whole ladder.
pub fn fit_rate(report: &ErrorReport, times: &[f64]) -> Result<Vec<RateFit>> {
    times
        .iter()
        .map(|&t| {
            let i = report
                .time_index(t)
                .ok_or_else(|| Error::invalid(format!("time {t} was not evaluated")))?;
            let ns: Vec<usize> = report.points.iter().map(|p| p.n()).collect();
            let means: Vec<f64> = report.points.iter().map(|p| p.stats[i].mean).collect();
            let fit = fit_loglog(&ns, &means)?;
            let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
            let lt: Vec<f64> = report.points.iter().map(|p| p.log_theory[i]).collect();
            let theory = fit_lines(&lx, &lt)?;
            Ok(RateFit {
                time: t,
                slope: fit.slope,
                intercept: fit.intercept,
                residual_norm: fit.residual_norm,
                theory_slope: theory.slope,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let ns = [64, 128, 256, 512];
        let ys: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powi(-2)).collect();
        let f = fit_loglog(&ns, &ys).unwrap();
        assert!((f.slope + 2.0).abs() <= 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() <= 1e-10);
        assert!(f.residual_norm <= 1e-10);
    }

    #[test]
    fn constant_means() {
        let f = fit_loglog(&[10, 20, 40], &[0.5; 3]).unwrap();
        assert!(f.slope.abs() <= 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            fit_loglog(&[1, 2], &[1.0, 1.0]),
            Err(Error::InsufficientPoints { .. })
        ));
        assert!(matches!(
            fit_loglog(&[1, 2, 4], &[1.0, 0.0, 1.0]),
            Err(Error::NonPositiveMean { n: 2, .. })
        ));
    }

    #[test]
    fn theory_order_terms() {
        let mut cfg = ExperimentConfig::default();
        cfg.schedules.mu0 = 1.0;
        cfg.schedules.gamma = 1.0;
        let r = Resolved {
            n: 100,
            m: 100,
            beta_n: 100.0,
            rho_n: 2.0,
            qhat_n: 0.5,
            kappa_n: 2.0,
        };
        // A1 − A0 = 1, T = 1: 16·0.25 − 2·2·t + max(4 + ln 10 − 4 ln 100, 4 − ln 100, −2 ln 2)
        let want = 4.0 - 2.0 + (4.0 - 100f64.ln()).max(-2.0 * 2f64.ln());
        assert!((log_theory_order(&cfg, &r, 0.5) - want).abs() < 1e-12);
    }
}
