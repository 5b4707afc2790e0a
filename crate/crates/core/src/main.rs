use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fo_pulse::config::{with_overrides, RunConfig};
use fo_pulse::eigen::{classify_threshold, DEFAULT_MARGIN};
use fo_pulse::experiments::{run_eigen, run_simulate, run_steady, run_sweep, EigenSelection};
use fo_pulse::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fo-pulse",
    version,
    about = "Pulsed faecal-oral reaction-diffusion experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (key=value lines).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a preset without a configuration file.
    #[arg(long)]
    preset: Option<String>,
    /// Override one key, e.g. --set impulse=beverton_holt. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the pulsed model and write trajectory, summary and manifest.
    Simulate(Common),
    /// Principal eigenvalue estimates.
    Eigen {
        #[command(flatten)]
        common: Common,
        /// all | period_map | adjoint | exact | bounds
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// Positive periodic solution from upper and lower seeds.
    Steady(Common),
    /// Principal eigenvalue along sweep_values of sweep_key.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn load(c: &Common) -> Result<RunConfig> {
    let text = match (&c.config, &c.preset) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        (None, Some(name)) => format!("preset={name}\n"),
        (None, None) => {
            return Err(Error::Config {
                line: None,
                msg: "either --config or --preset is required".into(),
            })
        }
    };
    with_overrides(&text, &c.overrides)
}

fn opt(t: Option<f64>) -> String {
    t.map(|x| format!("{x:.6}")).unwrap_or_else(|| "none".into())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let o = run_simulate(&cfg, &c.out)?;
            let a = &o.assumptions;
            println!(
                "assumptions: a1={} a2={} a3={} a4={}",
                a.a1.passed, a.a2.passed, a.a3.passed, a.a4.passed
            );
            println!("snapshots: {}", o.trajectory.snapshots.len());
            println!("extinction_time: {}", opt(o.extinction_time));
            println!(
                "tail_defect: {}",
                o.tail_defect
                    .map(|x| format!("{x:.3e}"))
                    .unwrap_or_else(|| "none".into())
            );
            println!("tail_peak_u: {:.6}", o.tail_peak_u);
        }
        Command::Eigen { common, method } => {
            let selection = EigenSelection::parse(&method).ok_or_else(|| Error::Config {
                line: None,
                msg: format!("unknown --method {method:?}"),
            })?;
            let cfg = load(&common)?;
            let o = run_eigen(&cfg, selection, &common.out)?;
            for r in &o.results {
                println!(
                    "{}: lambda1={:.6} verdict={}",
                    r.method.name(),
                    r.lambda1,
                    classify_threshold(r, DEFAULT_MARGIN).name()
                );
            }
            for (m, e) in &o.failures {
                println!("{}: unavailable ({e})", m.name());
            }
            println!("verdict: {}", o.verdict.name());
        }
        Command::Steady(c) => {
            let cfg = load(&c)?;
            let o = run_steady(&cfg, &c.out)?;
            println!("lambda1: {:.6}", o.pair.eigen.lambda1);
            println!(
                "iterations: upper={} lower={}",
                o.pair.upper.iterations, o.pair.lower.iterations
            );
            println!("agreement: {:.3e}", o.pair.agreement);
            println!("max_order_violation: {:.3e}", o.pair.max_order_violation);
            println!("fixed_point_residual: {:.3e}", o.fixed_point_residual);
        }
        Command::Sweep { common, workers } => {
            let cfg = load(&common)?;
            let spec = cfg.sweep_spec()?;
            let o = run_sweep(&spec, workers, &common.out)?;
            for (v, l) in &o.rows {
                match l {
                    Ok(l) => println!("{}={v:.6}: lambda1={l:.6}", spec.key.name()),
                    Err(e) => println!("{}={v:.6}: failed ({e})", spec.key.name()),
                }
            }
            match o.monotone {
                Some(true) => println!("monotonicity: holds"),
                Some(false) => {
                    println!("monotonicity: violated");
                    return Ok(ExitCode::from(3));
                }
                None => println!("monotonicity: not asserted"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
