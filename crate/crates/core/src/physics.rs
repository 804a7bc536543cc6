//! Static and driven parts of the Hamiltonian
//! `H = -∇²/2 - 1/r + F(t)(x cos ωt + y sin ωt)` in atomic units,
//! plus the harmonic-cutoff estimates used to size the lattice.

use std::f64::consts::PI;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::grid::{make_grid, GridSpec};
use crate::{Error, Result};

/// Exact hydrogen ground-state energy in hartree.
pub const HYDROGEN_GROUND_ENERGY: f64 = -0.5;

/// Circularly polarized pulse with a `sin²` envelope spanning the whole pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub peak_field: f64,
    pub omega: f64,
    pub n_cycles: u32,
}

impl PulseSpec {
    pub fn new(peak_field: f64, omega: f64, n_cycles: u32) -> Result<Self> {
        let p = PulseSpec {
            peak_field,
            omega,
            n_cycles,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_field.is_finite() && self.peak_field >= 0.0) {
            return Err(Error::config(
                "peak_field",
                format!("must be non-negative, got {}", self.peak_field),
            ));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::config(
                "omega",
                format!("must be positive, got {}", self.omega),
            ));
        }
        if self.n_cycles < 1 {
            return Err(Error::config("n_cycles", "must be at least 1"));
        }
        Ok(())
    }

    /// Optical cycle `2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn duration(&self) -> f64 {
        self.n_cycles as f64 * self.period()
    }

    /// `F sin²(πt/T)` inside the pulse window, zero outside.
    pub fn envelope(&self, t: f64) -> f64 {
        let total = self.duration();
        if !(0.0..=total).contains(&t) {
            return 0.0;
        }
        let s = (PI * t / total).sin();
        self.peak_field * s * s
    }
}

/// Instantaneous electric field in the polarization plane (`e_z` is zero).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldSample {
    pub e_x: f64,
    pub e_y: f64,
}

impl FieldSample {
    pub const ZERO: FieldSample = FieldSample { e_x: 0.0, e_y: 0.0 };

    pub fn magnitude(&self) -> f64 {
        self.e_x.hypot(self.e_y)
    }

    /// Dipole interaction energy `e_x x + e_y y` at a point.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        self.e_x * x + self.e_y * y
    }
}

/// Field vector of the rotating pulse at time `t`; zero outside the pulse.
pub fn pulse_field(pulse: &PulseSpec, t: f64) -> FieldSample {
    let env = pulse.envelope(t);
    if env == 0.0 {
        return FieldSample::ZERO;
    }
    let (s, c) = (pulse.omega * t).sin_cos();
    FieldSample {
        e_x: env * c,
        e_y: env * s,
    }
}

/// `-1/r` on every lattice point.
pub fn coulomb_potential(grid: &GridSpec) -> Result<Array3<f64>> {
    let c = make_grid(grid)?;
    Ok(Array3::from_shape_fn(grid.shape(), |(i, j, k)| {
        -1.0 / c.radius(i, j, k)
    }))
}

/// Cycle-averaged quiver energy `F²/(4ω²)`.
pub fn ponderomotive_energy(peak_field: f64, omega: f64) -> f64 {
    peak_field * peak_field / (4.0 * omega * omega)
}

/// Wavenumber of an electron carrying the harmonic cutoff energy
/// `|e0| + 3 U_p`.
pub fn max_momentum(peak_field: f64, omega: f64, ground_energy: f64) -> f64 {
    let cutoff = ground_energy.abs() + 3.0 * ponderomotive_energy(peak_field, omega);
    (2.0 * cutoff).sqrt()
}

/// Classical excursion radius `F/ω²` of a free electron in a circular field.
pub fn quiver_radius(peak_field: f64, omega: f64) -> f64 {
    peak_field / (omega * omega)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolutionCheck {
    pub spacing: f64,
    pub k_max: f64,
    /// `(π/k_max) / spacing`; the lattice resolves `k_max` when this is ≥ 1.
    pub margin: f64,
    pub passed: bool,
}

/// Nyquist test of the lattice spacing against the largest expected wavenumber.
pub fn check_resolution(spacing: f64, k_max: f64) -> ResolutionCheck {
    let nyquist = PI / k_max;
    ResolutionCheck {
        spacing,
        k_max,
        margin: nyquist / spacing,
        passed: spacing <= nyquist,
    }
}
