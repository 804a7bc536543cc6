//! Plain-text `key = value` run configuration.
//!
//! Blank lines are ignored and `#` starts a comment. Every key is optional;
//! missing keys take the stabilization-scan defaults listed on
//! [`RunConfig::default`]. Unknown or repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::grid::GridSpec;
use crate::physics::{
    check_resolution, max_momentum, PulseSpec, ResolutionCheck, HYDROGEN_GROUND_ENERGY,
};
use crate::propagator::{AbsorberSpec, RelaxSettings};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Check,
    Relax,
    Pulse,
    Scan,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "check" => Ok(Mode::Check),
            "relax" => Ok(Mode::Relax),
            "pulse" => Ok(Mode::Pulse),
            "scan" => Ok(Mode::Scan),
            other => Err(format!(
                "expected check, relax, pulse or scan, got `{other}`"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Check => "check",
            Mode::Relax => "relax",
            Mode::Pulse => "pulse",
            Mode::Scan => "scan",
        })
    }
}

/// Output cadences.
#[derive(Clone, Debug, PartialEq)]
pub struct Cadence {
    /// Steps between survival samples.
    pub survival_every: usize,
    /// Optical cycles between slice/profile frames; 0 disables periodic frames.
    pub frame_every_cycles: f64,
    /// Extra frame times (a.u.), snapped to the nearest step.
    pub snapshot_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    /// Pulse for `pulse` mode; `scan` mode replaces the peak field per run.
    pub pulse: PulseSpec,
    pub sigma: f64,
    pub dt: f64,
    /// `None` disables the absorber.
    pub absorber: Option<AbsorberSpec>,
    pub cadence: Cadence,
    pub mode: Mode,
    pub scan_fields: Vec<f64>,
    pub out_dir: PathBuf,
    /// Run even if the resolution check fails.
    pub force: bool,
    pub relax: RelaxSettings,
    pub min_prominence: f64,
    /// Ground-state energy used in the cutoff estimate.
    pub ground_energy: f64,
}

impl Default for RunConfig {
    /// 240³ points at 0.1667 bohr, ω = 1.2, six-cycle pulse, σ = 1.5,
    /// dt = 0.01, 5 bohr absorber, scan over F ∈ {2.5, 3.0, 3.5, 4.0}.
    fn default() -> Self {
        RunConfig {
            grid: GridSpec {
                n_x: 240,
                n_y: 240,
                n_z: 240,
                spacing: 0.1667,
            },
            pulse: PulseSpec {
                peak_field: 3.5,
                omega: 1.2,
                n_cycles: 6,
            },
            sigma: 1.5,
            dt: 0.01,
            absorber: Some(AbsorberSpec::default()),
            cadence: Cadence {
                survival_every: 10,
                frame_every_cycles: 0.125,
                snapshot_times: vec![15.544],
            },
            mode: Mode::Scan,
            scan_fields: vec![2.5, 3.0, 3.5, 4.0],
            out_dir: PathBuf::from("out"),
            force: false,
            relax: RelaxSettings::default(),
            min_prominence: 0.02,
            ground_energy: HYDROGEN_GROUND_ENERGY,
        }
    }
}

impl RunConfig {
    /// Peak fields that this configuration will propagate (or report on).
    pub fn fields(&self) -> Vec<f64> {
        match self.mode {
            Mode::Pulse => vec![self.pulse.peak_field],
            Mode::Scan | Mode::Check => self.scan_fields.clone(),
            Mode::Relax => Vec::new(),
        }
    }

    pub fn pulse_for(&self, peak_field: f64) -> PulseSpec {
        PulseSpec {
            peak_field,
            ..self.pulse
        }
    }

    /// Resolution check for every field in [`fields`](Self::fields).
    pub fn resolution_report(&self) -> Vec<(f64, ResolutionCheck)> {
        self.fields()
            .into_iter()
            .map(|f| {
                let k = max_momentum(f, self.pulse.omega, self.ground_energy);
                (f, check_resolution(self.grid.spacing, k))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.pulse.validate()?;
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::config(
                "sigma",
                format!("must be positive, got {}", self.sigma),
            ));
        }
        if self.grid.spacing > self.sigma / 3.0 {
            return Err(Error::config(
                "sigma",
                format!(
                    "width {} is under-resolved by spacing {} (need spacing <= sigma/3)",
                    self.sigma, self.grid.spacing
                ),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if let Some(a) = &self.absorber {
            a.validate(&self.grid)?;
        }
        if self.cadence.survival_every == 0 {
            return Err(Error::config("survival_every", "must be at least 1"));
        }
        if !(self.cadence.frame_every_cycles.is_finite() && self.cadence.frame_every_cycles >= 0.0)
        {
            return Err(Error::config("frame_every_cycles", "must be non-negative"));
        }
        if self
            .cadence
            .snapshot_times
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(Error::config(
                "snapshot_times",
                "times must be non-negative",
            ));
        }
        if self.mode == Mode::Scan && self.scan_fields.is_empty() {
            return Err(Error::config(
                "scan_fields",
                "scan mode needs at least one field",
            ));
        }
        if let Some(f) = self
            .scan_fields
            .iter()
            .find(|f| !(f.is_finite() && **f >= 0.0))
        {
            return Err(Error::config(
                "scan_fields",
                format!("fields must be non-negative, got {f}"),
            ));
        }
        if !(self.min_prominence.is_finite() && self.min_prominence >= 0.0) {
            return Err(Error::config("min_prominence", "must be non-negative"));
        }
        if !self.ground_energy.is_finite() {
            return Err(Error::config("ground_energy", "must be finite"));
        }
        self.relax.validate()?;
        if matches!(self.mode, Mode::Pulse | Mode::Scan) && !self.force {
            if let Some((f, r)) = self
                .resolution_report()
                .into_iter()
                .find(|(_, r)| !r.passed)
            {
                return Err(Error::config(
                    "spacing",
                    format!(
                        "resolution check failed for F = {f}: spacing {} exceeds pi/k_max = {:.6} \
                         (margin {:.4}); set force = true to run anyway",
                        r.spacing,
                        std::f64::consts::PI / r.k_max,
                        r.margin
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// Like [`parse_config`], with `overrides` replacing (or adding) keys before
/// validation.
pub fn parse_config_with(text: &str, overrides: &[(&str, String)]) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        let key = key.trim().to_string();
        if entries
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::config(key, "given more than once"));
        }
    }
    for (k, v) in overrides {
        entries.insert(k.to_string(), v.clone());
    }

    let mut cfg = RunConfig::default();
    for (key, value) in &entries {
        apply(&mut cfg, key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "mode" => cfg.mode = value.parse().map_err(|e: String| Error::config(key, e))?,
        "n" => {
            let n = parse(key, value)?;
            cfg.grid.n_x = n;
            cfg.grid.n_y = n;
            cfg.grid.n_z = n;
        }
        "n_x" => cfg.grid.n_x = parse(key, value)?,
        "n_y" => cfg.grid.n_y = parse(key, value)?,
        "n_z" => cfg.grid.n_z = parse(key, value)?,
        "spacing" => cfg.grid.spacing = parse(key, value)?,
        "peak_field" => cfg.pulse.peak_field = parse(key, value)?,
        "omega" => cfg.pulse.omega = parse(key, value)?,
        "n_cycles" => cfg.pulse.n_cycles = parse(key, value)?,
        "sigma" => cfg.sigma = parse(key, value)?,
        "dt" => cfg.dt = parse(key, value)?,
        "absorber_width" => {
            let w: f64 = parse(key, value)?;
            if w == 0.0 {
                cfg.absorber = None;
            } else {
                let exponent = cfg
                    .absorber
                    .map_or(AbsorberSpec::default().exponent, |a| a.exponent);
                cfg.absorber = Some(AbsorberSpec { width: w, exponent });
            }
        }
        "absorber_exponent" => {
            let e = parse(key, value)?;
            if let Some(a) = cfg.absorber.as_mut() {
                a.exponent = e;
            }
        }
        "survival_every" => cfg.cadence.survival_every = parse(key, value)?,
        "frame_every_cycles" => cfg.cadence.frame_every_cycles = parse(key, value)?,
        "snapshot_times" => cfg.cadence.snapshot_times = parse_list(key, value)?,
        "scan_fields" => cfg.scan_fields = parse_list(key, value)?,
        "out_dir" => cfg.out_dir = PathBuf::from(value),
        "force" => cfg.force = parse(key, value)?,
        "relax_dt" => cfg.relax.dt_im = parse(key, value)?,
        "relax_tol" => cfg.relax.tol = parse(key, value)?,
        "relax_max_steps" => cfg.relax.max_steps = parse(key, value)?,
        "relax_sigma" => cfg.relax.trial_sigma = parse(key, value)?,
        "min_prominence" => cfg.min_prominence = parse(key, value)?,
        "ground_energy" => cfg.ground_energy = parse(key, value)?,
        _ => return Err(Error::config(key, "unknown key")),
    }
    Ok(())
}
