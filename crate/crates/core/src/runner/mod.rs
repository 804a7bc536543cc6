//! Experiment orchestration: resolution check, ground-state relaxation and
//! pulse runs, with their output files.

mod config;
pub mod output;

pub use config::{parse_config, parse_config_with, Cadence, Mode, RunConfig};

use std::path::Path;

use serde::Serialize;

use crate::diagnostics::DiagnosticsLog;
use crate::grid::WaveField;
use crate::physics::{ponderomotive_energy, quiver_radius};
use crate::propagator::{propagate_pulse_with, relax_ground_state, RelaxationResult};
use crate::Result;
use output::*;

/// One line of the `check` report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub peak_field: f64,
    pub ponderomotive: f64,
    pub k_max: f64,
    pub margin: f64,
    pub quiver_radius: f64,
    pub passed: bool,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "F={:.4} U_p={:.6} k_max={:.6} margin={:.6} quiver_radius={:.6} {}",
            self.peak_field,
            self.ponderomotive,
            self.k_max,
            self.margin,
            self.quiver_radius,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

pub fn check_report(config: &RunConfig) -> Vec<CheckLine> {
    config
        .resolution_report()
        .into_iter()
        .map(|(f, r)| CheckLine {
            peak_field: f,
            ponderomotive: ponderomotive_energy(f, config.pulse.omega),
            k_max: r.k_max,
            margin: r.margin,
            quiver_radius: quiver_radius(f, config.pulse.omega),
            passed: r.passed,
        })
        .collect()
}

#[derive(Debug)]
pub enum RunOutcome {
    Check(Vec<CheckLine>),
    Relax(Manifest),
    Pulse(Manifest, Vec<DiagnosticsLog>),
}

/// Runs `config`, reporting progress lines through `log`.
pub fn run(config: &RunConfig, mut log: impl FnMut(&str)) -> Result<RunOutcome> {
    config.validate()?;
    match config.mode {
        Mode::Check => Ok(RunOutcome::Check(check_report(config))),
        Mode::Relax => {
            let mut out = OutDir::create(&config.out_dir)?;
            let (ground, entry) = ground_state(config, &mut out, true, &mut log)?;
            drop(ground);
            let manifest = manifest(config, Some(entry), Vec::new(), out);
            write_json(&config.out_dir.join(MANIFEST_NAME), &manifest)?;
            Ok(RunOutcome::Relax(manifest))
        }
        Mode::Pulse | Mode::Scan => {
            let mut out = OutDir::create(&config.out_dir)?;
            let (ground, entry) = ground_state(config, &mut out, false, &mut log)?;
            let mut runs = Vec::new();
            let mut logs = Vec::new();
            for f in config.fields() {
                log(&format!("pulse F={f}"));
                let mut next_report = 0.0;
                let diag = propagate_pulse_with(config, f, Some(&ground), |p| {
                    let frac = p.step as f64 / p.n_steps as f64;
                    if frac >= next_report {
                        log(&format!(
                            "  step {}/{} t={:.3} norm={:.6}",
                            p.step, p.n_steps, p.t, p.total_norm
                        ));
                        next_report += 0.1;
                    }
                })?;
                runs.push(write_run(config, &diag, &mut out)?);
                logs.push(diag);
            }
            let manifest = manifest(config, Some(entry), runs, out);
            write_json(&config.out_dir.join(MANIFEST_NAME), &manifest)?;
            Ok(RunOutcome::Pulse(manifest, logs))
        }
    }
}

fn manifest(
    config: &RunConfig,
    ground: Option<GroundStateEntry>,
    runs: Vec<RunEntry>,
    out: OutDir,
) -> Manifest {
    Manifest {
        mode: config.mode.to_string(),
        grid: config.grid,
        omega: config.pulse.omega,
        n_cycles: config.pulse.n_cycles,
        dt: config.dt,
        sigma: config.sigma,
        absorber: config.absorber,
        ground_state: ground,
        runs,
        files: out.files,
    }
}

/// Loads the cached ground state for this lattice, or relaxes and caches it.
fn ground_state(
    config: &RunConfig,
    out: &mut OutDir,
    force_relax: bool,
    log: &mut impl FnMut(&str),
) -> Result<(WaveField, GroundStateEntry)> {
    let sidecar_path = out.path(GROUND_STATE_SIDECAR);
    let data_path = out.path(GROUND_STATE_DATA);
    let entry = |energy| GroundStateEntry {
        data: GROUND_STATE_DATA.into(),
        sidecar: GROUND_STATE_SIDECAR.into(),
        energy,
    };
    if !force_relax && sidecar_path.exists() {
        let side: GroundStateSidecar = read_json(&sidecar_path)?;
        if side.grid == config.grid && side.relax == config.relax {
            log(&format!("ground state loaded from {}", data_path.display()));
            let psi = read_state(&data_path, &config.grid)?;
            out.record(GROUND_STATE_DATA, 2 * config.grid.len());
            out.record(GROUND_STATE_SIDECAR, 1);
            return Ok((psi, entry(side.energy)));
        }
    }
    log("relaxing ground state");
    let r = relax_ground_state(&config.grid, &config.relax)?;
    log(&format!(
        "ground energy {:.10} after {} steps",
        r.energy, r.steps
    ));
    write_ground_state(config, &r, out)?;
    Ok((r.state, entry(r.energy)))
}

fn write_ground_state(config: &RunConfig, r: &RelaxationResult, out: &mut OutDir) -> Result<()> {
    write_state(&out.path(GROUND_STATE_DATA), &r.state)?;
    out.record(GROUND_STATE_DATA, 2 * config.grid.len());
    let side = GroundStateSidecar {
        data: GROUND_STATE_DATA.into(),
        dtype: "f64-le complex interleaved (re, im)".into(),
        grid: config.grid,
        relax: config.relax,
        energy: r.energy,
        residual: r.residual,
        steps: r.steps,
    };
    write_json(&out.path(GROUND_STATE_SIDECAR), &side)?;
    out.record(GROUND_STATE_SIDECAR, 1);

    let g = &config.grid;
    let report = format!(
        "energy = {:.16e}\nresidual = {:.6e}\nsteps = {}\ngrid = {}x{}x{}\nspacing = {}\n",
        r.energy, r.residual, r.steps, g.n_x, g.n_y, g.n_z, g.spacing
    );
    let path = out.path(RELAX_REPORT);
    std::fs::write(&path, report).map_err(|e| crate::Error::io(&path, e))?;
    out.record(RELAX_REPORT, 5);
    Ok(())
}

fn write_run(config: &RunConfig, diag: &DiagnosticsLog, out: &mut OutDir) -> Result<RunEntry> {
    let tag = field_tag(diag.peak_field);
    let g = &config.grid;

    let survival = format!("survival_{tag}.csv");
    let n = write_survival_csv(&out.path(&survival), &diag.survival)?;
    out.record(&survival, n);

    let x0 = g.coordinate(crate::grid::SpatialAxis::X, 0);
    let y0 = g.coordinate(crate::grid::SpatialAxis::Y, 0);
    let mut slices = Vec::new();
    for frame in &diag.slices {
        let stem = format!("slice_{tag}_s{:06}", frame.step);
        let data: Vec<f64> = frame.density.iter().copied().collect();
        let entry = write_frame(
            out,
            &stem,
            &data,
            FrameSidecar {
                kind: "slice".into(),
                data: format!("{stem}.bin"),
                dtype: "f64-le".into(),
                order: "row-major (x outer, y inner)".into(),
                shape: vec![g.n_x, g.n_y],
                origin: vec![x0, y0],
                spacing: g.spacing,
                t: frame.t,
                step: frame.step,
                peak_field: diag.peak_field,
                maxima: Vec::new(),
            },
        )?;
        slices.push(entry);
    }
    let mut profiles = Vec::new();
    for frame in &diag.profiles {
        let stem = format!("profile_{tag}_s{:06}", frame.step);
        let entry = write_frame(
            out,
            &stem,
            &frame.profile.density,
            FrameSidecar {
                kind: "profile".into(),
                data: format!("{stem}.bin"),
                dtype: "f64-le".into(),
                order: "x".into(),
                shape: vec![g.n_x],
                origin: vec![x0],
                spacing: g.spacing,
                t: frame.t,
                step: frame.step,
                peak_field: diag.peak_field,
                maxima: frame.maxima.clone(),
            },
        )?;
        profiles.push(entry);
    }

    let end = diag
        .final_survival()
        .copied()
        .unwrap_or(crate::diagnostics::SurvivalSample {
            t: 0.0,
            interior_norm: 0.0,
            total_norm: 0.0,
        });
    Ok(RunEntry {
        peak_field: diag.peak_field,
        survival,
        end_interior_norm: end.interior_norm,
        end_total_norm: end.total_norm,
        overlap: diag.final_overlap,
        slices,
        profiles,
    })
}

fn write_frame(
    out: &mut OutDir,
    stem: &str,
    data: &[f64],
    sidecar: FrameSidecar,
) -> Result<FrameEntry> {
    let bin = format!("{stem}.bin");
    let json = format!("{stem}.json");
    write_f64_le(&out.path(&bin), data)?;
    out.record(&bin, data.len());
    write_json(&out.path(&json), &sidecar)?;
    out.record(&json, 1);
    Ok(FrameEntry {
        t: sidecar.t,
        step: sidecar.step,
        data: bin,
        sidecar: json,
        maxima: sidecar.maxima,
    })
}

/// Reads a manifest written by [`run`].
pub fn load_manifest(out_dir: &Path) -> Result<Manifest> {
    read_json(&out_dir.join(MANIFEST_NAME))
}
