use std::collections::BTreeSet;

use super::{Absorber, Propagator, StepParams};
use crate::diagnostics::{
    axis_profile, find_profile_maxima, norm, overlap, slice_z0, DiagnosticsLog, FinalOverlap,
    ProfileFrame, Region, SliceFrame, SurvivalSample,
};
use crate::grid::{gaussian_packet, WaveField};
use crate::runner::RunConfig;
use crate::{Error, Result};

/// Step counter handed to progress observers.
#[derive(Clone, Copy, Debug)]
pub struct Progress {
    pub step: usize,
    pub n_steps: usize,
    pub t: f64,
    pub total_norm: f64,
}

/// Runs the full pulse for `peak_field` with the lattice, time step,
/// absorber and cadences of `config`.
///
/// `ground`, when given, is projected on the final state.
pub fn propagate_pulse(
    config: &RunConfig,
    peak_field: f64,
    ground: Option<&WaveField>,
) -> Result<DiagnosticsLog> {
    propagate_pulse_with(config, peak_field, ground, |_| {})
}

pub fn propagate_pulse_with(
    config: &RunConfig,
    peak_field: f64,
    ground: Option<&WaveField>,
    mut progress: impl FnMut(Progress),
) -> Result<DiagnosticsLog> {
    let pulse = config.pulse_for(peak_field);
    pulse.validate()?;
    let grid = config.grid;
    if let Some(g) = ground {
        if *g.grid() != grid {
            return Err(Error::GridMismatch);
        }
    }
    let prop = Propagator::new(&grid)?;
    let absorber = config
        .absorber
        .as_ref()
        .map(|a| Absorber::new(a, &grid))
        .transpose()?;
    let interior = absorber.as_ref().map_or(Region::All, Absorber::interior);

    let duration = pulse.duration();
    let n_steps = (duration / config.dt).ceil().max(1.0) as usize;
    let dt = duration / n_steps as f64;
    let params = StepParams {
        dt,
        pulse: Some(pulse),
    };

    let mut frames = BTreeSet::new();
    let every = config.cadence.frame_every_cycles * pulse.period();
    if every > 0.0 {
        let mut k = 0usize;
        loop {
            let t = k as f64 * every;
            if t > duration * (1.0 + 1e-12) {
                break;
            }
            frames.insert(((t / dt).round() as usize).min(n_steps));
            k += 1;
        }
    }
    for &t in &config.cadence.snapshot_times {
        if t <= duration {
            frames.insert(((t / dt).round() as usize).min(n_steps));
        }
    }

    let mut psi = gaussian_packet(&grid, config.sigma)?;
    let mut log = DiagnosticsLog::new(peak_field);
    let mut record = |step: usize, psi: &WaveField, log: &mut DiagnosticsLog| {
        let t = step as f64 * dt;
        if step.is_multiple_of(config.cadence.survival_every) || step == n_steps {
            let total = norm(psi, &Region::All);
            log.survival.push(SurvivalSample {
                t,
                interior_norm: norm(psi, &interior),
                total_norm: total,
            });
            progress(Progress {
                step,
                n_steps,
                t,
                total_norm: total,
            });
        }
        if frames.contains(&step) {
            log.slices.push(SliceFrame {
                t,
                step,
                density: slice_z0(psi),
            });
            let profile = axis_profile(psi);
            let maxima = find_profile_maxima(&profile.x, &profile.density, config.min_prominence);
            log.profiles.push(ProfileFrame {
                t,
                step,
                profile,
                maxima,
            });
        }
    };

    record(0, &psi, &mut log);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        prop.real_time_step(&mut psi, &params, t)?;
        if let Some(a) = &absorber {
            a.apply(&mut psi);
        }
        record(step + 1, &psi, &mut log);
        let last = log.survival.last().map_or(0.0, |s| s.total_norm);
        if !last.is_finite() {
            return Err(Error::Numerical(format!(
                "norm became {last} at step {}",
                step + 1
            )));
        }
    }

    if let Some(g) = ground {
        let overlap_sq = overlap(g, &psi)?.norm_sqr();
        let total = psi.norm();
        log.final_overlap = Some(FinalOverlap {
            overlap_sq,
            ratio: if total > 0.0 { overlap_sq / total } else { 0.0 },
        });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::propagator::AbsorberSpec;
    use crate::runner::{Cadence, Mode};

    fn tiny_config(peak: f64) -> RunConfig {
        RunConfig {
            grid: GridSpec::cubic(32, 0.3).unwrap(),
            sigma: 1.0,
            dt: 0.05,
            absorber: Some(AbsorberSpec {
                width: 1.5,
                exponent: 0.125,
            }),
            cadence: Cadence {
                survival_every: 4,
                frame_every_cycles: 0.5,
                snapshot_times: vec![3.3],
            },
            mode: Mode::Pulse,
            ..RunConfig::default()
        }
        .with_pulse_cycles(1, peak)
    }

    impl RunConfig {
        fn with_pulse_cycles(mut self, n: u32, peak: f64) -> Self {
            self.pulse.n_cycles = n;
            self.pulse.peak_field = peak;
            self
        }
    }

    #[test]
    fn log_structure_and_monotone_norms() {
        let cfg = tiny_config(1.0);
        let log = propagate_pulse(&cfg, 1.0, None).unwrap();
        let s = &log.survival;
        assert_eq!(s[0].t, 0.0);
        assert!((s.last().unwrap().t - cfg.pulse.duration()).abs() < 1e-12);
        for w in s.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].total_norm <= w[0].total_norm + 1e-15);
        }
        for x in s {
            assert!(x.interior_norm <= x.total_norm);
            assert!(x.total_norm <= 1.0 + 1e-9);
        }
        // frames at 0, τ/2, τ plus the snapshot
        assert_eq!(log.slices.len(), 4);
        assert_eq!(log.profiles.len(), 4);
        assert!(log
            .slice_at(3.3)
            .map(|f| (f.t - 3.3).abs() < cfg.dt)
            .unwrap());
        assert!(log.final_overlap.is_none());
    }

    #[test]
    fn field_free_run_keeps_probability() {
        // without an absorber nothing can leave the lattice
        let mut cfg = tiny_config(0.0);
        cfg.absorber = None;
        let log = propagate_pulse(&cfg, 0.0, None).unwrap();
        for s in &log.survival {
            assert!((s.total_norm - 1.0).abs() < 1e-10, "{s:?}");
            assert_eq!(s.interior_norm, s.total_norm);
        }
    }

    #[test]
    fn ground_state_grid_must_match() {
        let cfg = tiny_config(1.0);
        let other = WaveField::zeros(GridSpec::cubic(8, 0.3).unwrap());
        assert!(matches!(
            propagate_pulse(&cfg, 1.0, Some(&other)),
            Err(Error::GridMismatch)
        ));
    }
}
