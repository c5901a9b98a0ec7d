use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use dnflow::harness::{run_experiment, write_outputs, ExperimentKind};
use dnflow::inequalities::{named_family, run_suite, SuiteSettings};
use dnflow::solver::{write_series_csv, ObservationSchedule, Solver};
use dnflow::theory::{classify, predicted_rates, sweep_alpha, write_sweep_csv};
use dnflow::{ProblemConfig, Result};

#[derive(Parser)]
#[command(name = "dnflow", version, about = "Degenerate diffusion on model manifolds with decaying density")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regime classification and assumption report as JSON.
    Theory {
        #[arg(long)]
        config: PathBuf,
        /// Emit an alpha sweep of the regime flags as CSV instead.
        #[arg(long)]
        csv: bool,
        /// Sweep range `start:stop:step`.
        #[arg(long, default_value = "0:3.5:0.1")]
        alphas: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolves a bump and writes the observed series as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        out: PathBuf,
        /// Linear observation interval; geometric (10 per decade) when absent.
        #[arg(long)]
        every: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Also write a JSON checkpoint of the final state.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Empirical constants of the functional inequalities as JSON.
    Inequalities {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "bumps100")]
        family: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs one experiment and writes CSVs, result JSON and plot data into a directory.
    Experiment {
        #[arg(value_parser = ["decay", "fsp", "universal", "blowup", "barenblatt"])]
        kind: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_range(s: &str) -> Option<Vec<f64>> {
    let v: Vec<f64> = s.split(':').map(|x| x.trim().parse().ok()).collect::<Option<_>>()?;
    let [a, b, h] = v[..] else { return None };
    if !(h > 0.0 && b >= a) {
        return None;
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Some((0..=n).map(|i| a + i as f64 * h).collect())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Theory { config, csv, alphas, out } => {
            let cfg = ProblemConfig::from_path(&config)?;
            let mut w = writer(out.as_deref())?;
            if csv {
                let alphas = parse_range(&alphas)
                    .ok_or_else(|| dnflow::Error::InvalidInput(format!("bad range '{alphas}'")))?;
                write_sweep_csv(&sweep_alpha(&cfg, &alphas), &mut w)?;
            } else {
                let bundle = cfg.bundle()?;
                let report = classify(&bundle)?;
                let rates = predicted_rates(&bundle).ok();
                let doc = serde_json::json!({ "report": report, "rates": rates });
                writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
            }
            w.flush()?;
        }
        Command::Simulate {
            config,
            t_end,
            out,
            every,
            r0,
            mass,
            checkpoint,
        } => {
            let cfg = ProblemConfig::from_path(&config)?;
            let bundle = Arc::new(cfg.bundle()?);
            let mut solver = Solver::new(bundle, cfg.solver.clone().unwrap_or_default())?;
            let mut state = solver.init_bump(r0, mass)?;
            let schedule = match every {
                Some(every) => ObservationSchedule::Linear { every },
                None => ObservationSchedule::Geometric { per_decade: 10 },
            };
            let mut obs = vec![solver.observe(&state)];
            let series = solver.run(&mut state, t_end, schedule)?;
            obs.extend(series.observations);
            for w in &series.warnings {
                eprintln!("warning: {w}");
            }
            write_series_csv(&obs, BufWriter::new(File::create(&out)?))?;
            if let Some(cp) = checkpoint {
                std::fs::write(cp, serde_json::to_string(&solver.checkpoint(&state))?)?;
            }
        }
        Command::Inequalities { config, family, out } => {
            let cfg = ProblemConfig::from_path(&config)?;
            let bundle = cfg.bundle()?;
            let settings = SuiteSettings {
                family: named_family(&family)?,
                ..SuiteSettings::default()
            };
            let report = run_suite(&bundle, &settings)?;
            let mut w = writer(out.as_deref())?;
            writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
            w.flush()?;
        }
        Command::Experiment { kind, config, out } => {
            let kind: ExperimentKind = kind.parse()?;
            let cfg = ProblemConfig::from_path(&config)?;
            let result = run_experiment(kind, &cfg)?;
            for p in write_outputs(&result, &out)? {
                println!("{}", p.display());
            }
            for v in &result.verdicts {
                println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            if let Some(proxy) = &result.proxy {
                println!("note: {proxy}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
