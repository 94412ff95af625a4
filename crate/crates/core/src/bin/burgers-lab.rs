use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use backward_burgers::harness::output::write_atomic;
use backward_burgers::harness::regression_study::write_regression_csv;
use backward_burgers::harness::{
    emit_outputs, fit_rate, run_checks, run_monte_carlo, run_regression_study, run_trial_detailed,
    ExperimentConfig,
};
use clap::{Args, Parser, Subcommand};

/// Regularized backward Burgers experiments.
#[derive(Debug, Parser)]
#[command(name = "burgers-lab", version)]
struct Cli {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override any configuration key, e.g. `--set schedules.mu0=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Base seed (`seed`).
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One pipeline pass; writes the reconstructed trajectory.
    Trial {
        #[command(flatten)]
        common: Common,
        /// Grid size.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Monte-Carlo error study over the grid ladder.
    Converge {
        /// Base seed (`seed`), required for reproducible output.
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Grid ladder (`ladder`), comma separated.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Trials per ladder point (`trials`).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Regression-only study of the terminal-data estimator.
    Regression {
        #[command(flatten)]
        common: Common,
        /// Grid ladder (`regression.ladder`), comma separated.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Trials per ladder point (`regression.trials`).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Runs the quick invariant suites.
    Check {
        /// Seed of the random draws (`seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Any error, flattened to its message for stderr.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn list(values: &[usize]) -> String {
    let items: Vec<String> = values.iter().map(usize::to_string).collect();
    format!("[{}]", items.join(", "))
}

fn load(cli: &Cli, mut extra: Vec<String>) -> Result<ExperimentConfig, Failure> {
    let mut overrides = cli.overrides.clone();
    overrides.append(&mut extra);
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path, &overrides)?,
        None => ExperimentConfig::with_overrides(&overrides)?,
    };
    Ok(cfg)
}

fn trial(cfg: &ExperimentConfig, n: usize, trial: usize, out: &Path) -> Result<(), Failure> {
    let outcome = run_trial_detailed(cfg, n, trial)?;
    let problem = cfg.problem.build()?;
    let sol = &outcome.solution;
    let mut text = String::from("x,t,u_reconstructed,u_exact\n");
    for (j, &t) in sol.timegrid().nodes().iter().enumerate() {
        let state = sol.state(j);
        for (&x, &v) in state.grid().points().iter().zip(state.values()) {
            writeln!(text, "{x:.16e},{t:.16e},{v:.16e},{:.16e}", problem.u(x, t))?;
        }
    }
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("trial_n{n}_k{trial}.csv"));
    write_atomic(&path, &text)?;
    for (t, e) in cfg.eval_times().iter().zip(&outcome.squared_errors) {
        println!("t = {t}: squared L2 error {e:.6e}");
    }
    println!("snapshots written to {}", path.display());
    Ok(())
}

fn converge(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let report = run_monte_carlo(cfg)?;
    let fits = fit_rate(&report, &report.times)?;
    let paths = emit_outputs(&report, &fits, out, "converge")?;
    println!("{:>6} {:>6} {:>14} {:>14} {:>10}", "n", "t", "mean", "std err", "seconds");
    for p in &report.points {
        for (i, t) in report.times.iter().enumerate() {
            println!(
                "{:>6} {:>6} {:>14.6e} {:>14.6e} {:>10.2}",
                p.n(),
                t,
                p.stats[i].mean,
                p.stats[i].std_error(p.trials),
                p.wall_clock.as_secs_f64()
            );
        }
    }
    for f in &fits {
        println!(
            "t = {}: slope {:.3} (theory {:.3}), residual {:.3e}",
            f.time, f.slope, f.theory_slope, f.residual_norm
        );
    }
    println!("wrote {} and {}", paths.csv.display(), paths.plot.display());
    Ok(())
}

fn regression(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let report = run_regression_study(&cfg.regression, cfg.seed)?;
    let path = out.join("regression.csv");
    write_regression_csv(&report, cfg.regression.trials, &path)?;
    println!("{:>6} {:>5} {:>14} {:>14} {:>14}", "n", "pcut", "mse", "noise", "noise exact");
    for p in &report.points {
        println!(
            "{:>6} {:>5} {:>14.6e} {:>14.6e} {:>14.6e}",
            p.n, p.pcut, p.mse.mean, p.noise_energy.mean, p.noise_energy_exact
        );
    }
    println!(
        "slope {:.3} (theory {:.3}); wrote {}",
        report.fit.slope,
        report.theory_fit.slope,
        path.display()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Trial { common, n, trial: k } => {
            let extra = common.seed.map(|s| vec![format!("seed={s}")]).unwrap_or_default();
            trial(&load(cli, extra)?, *n, *k, &common.out)?;
        }
        Command::Converge {
            seed,
            out,
            ladder,
            trials,
        } => {
            let mut extra = vec![format!("seed={seed}")];
            if let Some(l) = ladder {
                extra.push(format!("ladder={}", list(l)));
            }
            if let Some(t) = trials {
                extra.push(format!("trials={t}"));
            }
            converge(&load(cli, extra)?, out)?;
        }
        Command::Regression {
            common,
            ladder,
            trials,
        } => {
            let mut extra = common.seed.map(|s| vec![format!("seed={s}")]).unwrap_or_default();
            if let Some(l) = ladder {
                extra.push(format!("regression.ladder={}", list(l)));
            }
            if let Some(t) = trials {
                extra.push(format!("regression.trials={t}"));
            }
            regression(&load(cli, extra)?, &common.out)?;
        }
        Command::Check { seed } => {
            let extra = seed.map(|s| vec![format!("seed={s}")]).unwrap_or_default();
            let cfg = load(cli, extra)?;
            let mut ok = true;
            for c in run_checks(cfg.seed) {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
