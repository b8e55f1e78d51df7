use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ermakov::catalog::{geometric_frequency, lookup_system, SYSTEM_KEYS};
use ermakov::runner::{self, exit_code, RunConfig};
use ermakov::Error;

#[derive(Parser)]
#[command(name = "ermakov", version, about = "Ermakov-Pinney amplitudes and Bohmian guiding fields for separable problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write field tables and report.json
    Run { config: PathBuf },
    /// Validate a configuration without computing fields
    Check { config: PathBuf },
    /// List coordinate systems with their sector weights and geometric frequencies
    Catalog,
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code(&err) as u8)
}

fn catalog() -> Result<(), Error> {
    for name in SYSTEM_KEYS {
        let system = lookup_system(name)?;
        println!("{name}");
        for sector in system.sectors() {
            let (lo, hi) = sector.domain();
            let var = sector.label();
            println!("  {var:<7} [{lo}, {hi}]  s = {}", sector.weight().formula(var));
            let samples: Vec<String> = [0.25, 0.5, 0.75]
                .iter()
                .map(|f| {
                    let q = lo + f * (hi - lo);
                    geometric_frequency(sector, q).map(|w| format!("{q:.4}: {w:.6e}"))
                })
                .collect::<Result<_, _>>()?;
            println!("          Omega2_geom  {}", samples.join("  "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog => match catalog() {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Check { config } => {
            let config = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match runner::check(&config) {
                Ok(setups) => {
                    let labels: Vec<&str> = setups.iter().map(|s| s.label.as_str()).collect();
                    println!("ok: {} ({})", config.problem.kind, labels.join(", "));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Run { config } => {
            let config = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let (outcome, written) = match runner::run_config(&config) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let report = &outcome.report;
            for s in &report.sectors {
                let status = if s.failures.is_empty() { "pass".to_string() } else { format!("fail ({})", s.failures.join(", ")) };
                println!(
                    "{:<3} {:<20} drift {:.3e}  wronskian {:.3e}  ode {:.3e}  {}",
                    s.label, s.pair, s.residuals.invariant_drift.0, s.residuals.wronskian_drift.0, s.residuals.ode_residual.0, status
                );
            }
            println!("flux residual {:.3e} ({})", outcome.flux.residual, if outcome.flux.pass { "pass" } else { "fail" });
            for path in &written {
                println!("wrote {}", path.display());
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("verdict: fail ({})", report.offenders().join(", "));
                ExitCode::from(2)
            }
        }
    }
}
