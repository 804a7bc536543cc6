use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cpstab::runner::{parse_config_with, run, RunOutcome};
use cpstab::Error;

/// Worker threads for the line sweeps (defaults to all cores).
const THREADS_ENV: &str = "CPSTAB_THREADS";

#[derive(Parser)]
#[command(
    name = "cpstab",
    version,
    about = "Hydrogen in an intense circularly polarized pulse"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key=value configuration file; missing keys take the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Run even when the resolution check fails.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Report cutoff wavenumber, resolution margin, U_p and quiver radius per field.
    Check,
    /// Relax the lattice ground state and write it to the output directory.
    Relax,
    /// Propagate one pulse at `peak_field`.
    Pulse,
    /// Propagate one pulse per entry of `scan_fields`.
    Scan,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Config {
            key: THREADS_ENV.into(),
            reason: format!("expected a thread count, got `{v}`"),
        })?;
        cpstab::exec::configure_threads(n);
    }

    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?,
        None => String::new(),
    };
    let mode = match cli.command {
        Command::Check => "check",
        Command::Relax => "relax",
        Command::Pulse => "pulse",
        Command::Scan => "scan",
    };
    let mut overrides = vec![("mode", mode.to_string())];
    if let Some(out) = &cli.out {
        overrides.push(("out_dir", out.display().to_string()));
    }
    if cli.force {
        overrides.push(("force", "true".into()));
    }
    let config = parse_config_with(&text, &overrides)?;

    match run(&config, |line| eprintln!("{line}"))? {
        RunOutcome::Check(lines) => {
            for l in lines {
                println!("{l}");
            }
        }
        RunOutcome::Relax(m) => {
            if let Some(g) = m.ground_state {
                println!("ground energy {:.10}", g.energy);
            }
        }
        RunOutcome::Pulse(m, _) => {
            for r in &m.runs {
                let purity = r.overlap.map_or(f64::NAN, |o| o.ratio);
                println!(
                    "F={:.3} interior={:.6} total={:.6} ground_fraction={:.6}",
                    r.peak_field, r.end_interior_norm, r.end_total_norm, purity
                );
            }
            println!(
                "manifest: {}",
                config.out_dir.join("manifest.json").display()
            );
        }
    }
    Ok(())
}
