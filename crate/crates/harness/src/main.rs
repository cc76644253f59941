use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use axiring::config::{load_run, load_sweep};
use axiring::run::{diagnose, predict, sample_times, simulate};
use axiring::selftest::{format_table, run_selftest, Mutation};
use axiring::sweep::run_sweep;
use axiring::HarnessError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "axiring", version, about = "Axisymmetric viscous vortex-ring simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration; writes manifest.json, diagnostics.csv and snapshots/.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an ε-sweep; writes one run directory per ε and sweep_table.{csv,json}.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check kernels, the elliptic solver, tail masses and a miniature run.
    Selftest {
        #[arg(long, value_enum, default_value_t = Mutation::None)]
        mutate: Mutation,
    },
    /// Recompute diagnostics from a run's snapshots and compare with its CSV.
    Diagnose {
        #[arg(long)]
        run: PathBuf,
    },
    /// Print the limiting ring centres at the run's sample times (or `--times`).
    Predict {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let mut stdout = std::io::stdout().lock();
    let io_err = |e: std::io::Error| HarnessError::Io { path: "<stdout>".into(), message: e.to_string() };
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = load_run(&config)?;
            let s = simulate(&cfg, &out)?;
            let totals = s.manifest.totals.as_ref();
            writeln!(
                stdout,
                "{} rows, {} steps, T_eps {}",
                s.output.records.len(),
                totals.map_or(0, |t| t.steps),
                s.output.t_eps.map_or("not fired".to_string(), |t| format!("fired at t = {t}"))
            )
            .map_err(io_err)?;
        }
        Command::Sweep { config, out } => {
            let cfg = load_sweep(&config)?;
            let (table, _) = run_sweep(&cfg, &out)?;
            for r in &table.rows {
                writeln!(
                    stdout,
                    "ε = {:<8} {:<6} speed {:.6} (U {:.6}, limit {:.6}) centre error {:.3e}",
                    r.epsilon, r.status, r.measured_speed, r.reference_speed, r.limit_speed, r.center_error
                )
                .map_err(io_err)?;
            }
            writeln!(stdout, "{}", serde_json::to_string(&table.verdicts).unwrap_or_default()).map_err(io_err)?;
        }
        Command::Selftest { mutate } => {
            let results = run_selftest(mutate);
            write!(stdout, "{}", format_table(&results)).map_err(io_err)?;
            let bad: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if !bad.is_empty() {
                return Err(HarnessError::Selftest(bad.join(", ")));
            }
        }
        Command::Diagnose { run } => {
            let r = diagnose(&run)?;
            if !r.identical {
                return Err(HarnessError::Mismatch {
                    path: run.join(axiring::run::CSV_NAME).display().to_string(),
                    message: format!("{} recomputed rows are not byte-identical", r.rows),
                });
            }
            writeln!(stdout, "{} rows reproduced bit-for-bit", r.rows).map_err(io_err)?;
        }
        Command::Predict { config, times } => {
            let cfg = load_run(&config)?;
            let params = cfg.params()?;
            let times = times.unwrap_or_else(|| sample_times(cfg.t_final, params.sample_interval));
            stdout.write_all(&predict(&cfg, &times)?).map_err(io_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(if matches!(e, HarnessError::Schema { .. }) { 2 } else { 1 })
        }
    }
}
