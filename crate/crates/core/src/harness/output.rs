//! CSV and gnuplot artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

use super::monte_carlo::ErrorReport;
use super::rate::RateFit;

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "t",
    "beta_n",
    "rho_n",
    "qhat_n",
    "kappa_n",
    "trials",
    "mean_sq_error",
    "var_sq_error",
    "theory_order",
];

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub n: usize,
    pub t: f64,
    pub beta_n: f64,
    pub rho_n: f64,
    pub qhat_n: f64,
    pub kappa_n: f64,
    pub trials: usize,
    pub mean_sq_error: f64,
    pub var_sq_error: f64,
    pub theory_order: f64,
}

/// Where [`emit_outputs`] put its files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub plot: PathBuf,
}

/// 17 significant digits, enough to reproduce every `f64` exactly.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows in `(n, t)` order.
pub fn report_rows(report: &ErrorReport) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for p in &report.points {
        let r = &p.resolved;
        for (i, &t) in report.times.iter().enumerate() {
            rows.push(CsvRow {
                n: r.n,
                t,
                beta_n: r.beta_n,
                rho_n: r.rho_n,
                qhat_n: r.qhat_n,
                kappa_n: r.kappa_n,
                trials: p.trials,
                mean_sq_error: p.stats[i].mean,
                var_sq_error: p.stats[i].variance,
                theory_order: p.theory_order(i),
            });
        }
    }
    rows
}

pub fn render_csv(rows: &[CsvRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Csv {
        path: PathBuf::from("<memory>"),
        message: e.to_string(),
    };
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.t),
            fmt_f64(r.beta_n),
            fmt_f64(r.rho_n),
            fmt_f64(r.qhat_n),
            fmt_f64(r.kappa_n),
            r.trials.to_string(),
            fmt_f64(r.mean_sq_error),
            fmt_f64(r.var_sq_error),
            fmt_f64(r.theory_order),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv {
        path: PathBuf::from("<memory>"),
        message: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::Csv {
        path: PathBuf::from("<memory>"),
        message: e.to_string(),
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.into(),
        message: e.to_string(),
    })?;
    let headers = rdr.headers().map_err(|e| Error::Csv {
        path: path.into(),
        message: e.to_string(),
    })?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Csv {
            path: path.into(),
            message: format!("unexpected header {headers:?}"),
        });
    }
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| Error::Csv {
                path: path.into(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("not a file path")))?;
    let tmp = match dir {
        Some(d) => d.join(format!(".{}.tmp", name.to_string_lossy())),
        None => PathBuf::from(format!(".{}.tmp", name.to_string_lossy())),
    };
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Log-log plot of mean squared error against `n`, one curve per time, with
/// the theoretical order on the second axis.
pub fn render_plot_script(csv_name: &str, times: &[f64], fits: &[RateFit]) -> String {
    let png = format!("{}.png", csv_name.trim_end_matches(".csv"));
    let mut s = String::new();
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{png}'\n"));
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale xy\nset logscale y2\nset y2tics\nset ytics nomirror\n");
    s.push_str("set xlabel 'n'\nset ylabel 'mean squared error'\nset y2label 'theoretical order'\n");
    s.push_str("set key top right\n");
    let mut curves = Vec::new();
    for &t in times {
        let label = match fits.iter().find(|f| f.time == t) {
            Some(f) => format!(
                "t = {t}, slope {:.2} (theory {:.2})",
                f.slope, f.theory_slope
            ),
            None => format!("t = {t}"),
        };
        let sel = |col: usize| format!("(abs($2 - {t:e}) < 1e-12 ? ${col} : 1/0)");
        curves.push(format!(
            "'{csv_name}' every ::1 using 1:{} with linespoints title '{label}'",
            sel(8)
        ));
        curves.push(format!(
            "'{csv_name}' every ::1 using 1:{} axes x1y2 with lines dashtype 2 title 'theory, t = {t}'",
            sel(10)
        ));
    }
    s.push_str("plot ");
    s.push_str(&curves.join(", \\\n     "));
    s.push('\n');
    s
}

/// Writes `<stem>.csv` and `<stem>.gp` into `dir`.
pub fn emit_outputs(report: &ErrorReport, fits: &[RateFit], dir: &Path, stem: &str) -> Result<OutputPaths> {
    if report.points.is_empty() {
        return Err(Error::Config("refusing to write an empty ladder".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let plot_path = dir.join(format!("{stem}.gp"));
    let text = render_csv(&report_rows(report))?;
    write_atomic(&csv_path, &text)?;
    let script = render_plot_script(&format!("{stem}.csv"), &report.times, fits);
    write_atomic(&plot_path, &script)?;
    Ok(OutputPaths {
        csv: csv_path,
        plot: plot_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Resolved;
    use crate::harness::monte_carlo::{LadderPoint, SampleStats};
    use std::time::Duration;

    fn report(ns: &[usize]) -> ErrorReport {
        let points = ns
            .iter()
            .map(|&n| LadderPoint {
                resolved: Resolved {
                    n,
                    m: n,
                    beta_n: n as f64,
                    rho_n: (n as f64).ln(),
                    qhat_n: 2.0,
                    kappa_n: (n as f64).ln(),
                },
                trials: 3,
                samples: vec![vec![0.1, 0.2]; 3],
                stats: vec![
                    SampleStats {
                        mean: 1.0 / 3.0 / n as f64,
                        variance: std::f64::consts::PI * 1e-9,
                    },
                    SampleStats {
                        mean: 0.1 / n as f64,
                        variance: 0.0,
                    },
                ],
                log_theory: vec![64.0 + 0.1 * n as f64, -1.0 / 7.0],
                wall_clock: Duration::ZERO,
            })
            .collect();
        ErrorReport {
            times: vec![0.0, 0.5],
            points,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let rep = report(&[64, 128, 256]);
        let paths = emit_outputs(&rep, &[], dir.path(), "converge").unwrap();
        let rows = read_csv(&paths.csv).unwrap();
        assert_eq!(rows.len(), 3 * 2);
        assert_eq!(rows, report_rows(&rep));
        let text = fs::read_to_string(&paths.csv).unwrap();
        assert!(text.starts_with("n,t,beta_n,rho_n,qhat_n,kappa_n,trials,mean_sq_error,var_sq_error,theory_order\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn rewrite_replaces_previous_file() {
        let dir = tempfile::tempdir().unwrap();
        emit_outputs(&report(&[8, 16, 32, 64]), &[], dir.path(), "x").unwrap();
        let paths = emit_outputs(&report(&[8, 16, 32]), &[], dir.path(), "x").unwrap();
        assert_eq!(read_csv(&paths.csv).unwrap().len(), 6);
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn empty_ladder_rejected_before_write() {
        let dir = tempfile::tempdir().unwrap();
        let empty = ErrorReport {
            times: vec![0.0],
            points: vec![],
        };
        assert!(emit_outputs(&empty, &[], dir.path(), "e").is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn plot_script_reads_only_the_csv() {
        let s = render_plot_script("converge.csv", &[0.0, 0.5], &[]);
        assert!(s.contains("'converge.csv'"));
        assert!(s.contains("logscale xy"));
        assert!(s.contains("axes x1y2"));
        let quoted: Vec<&str> = s.split('\'').skip(1).step_by(2).collect();
        assert!(quoted
            .iter()
            .filter(|q| q.ends_with(".csv") || q.ends_with(".dat"))
            .all(|q| *q == "converge.csv"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "").unwrap();
        let err = emit_outputs(&report(&[8, 16, 32]), &[], &blocker.join("sub"), "x").unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
