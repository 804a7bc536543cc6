use serde::{Deserialize, Serialize};

use super::Propagator;
use crate::grid::{GridSpec, WaveField};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxSettings {
    pub dt_im: f64,
    /// Stop once `|E_n - E_{n-1}| < tol·|E_n|`.
    pub tol: f64,
    pub max_steps: usize,
    /// Width of the trial Gaussian.
    pub trial_sigma: f64,
}

impl Default for RelaxSettings {
    fn default() -> Self {
        RelaxSettings {
            dt_im: 0.05,
            tol: 1e-10,
            max_steps: 5000,
            trial_sigma: 1.0,
        }
    }
}

impl RelaxSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_im.is_finite() && self.dt_im > 0.0) {
            return Err(Error::config(
                "relax_dt",
                format!("must be positive, got {}", self.dt_im),
            ));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config(
                "relax_tol",
                format!("must be positive, got {}", self.tol),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::config("relax_max_steps", "must be at least 1"));
        }
        if !(self.trial_sigma.is_finite() && self.trial_sigma > 0.0) {
            return Err(Error::config(
                "relax_sigma",
                format!("must be positive, got {}", self.trial_sigma),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RelaxationResult {
    pub energy: f64,
    pub state: WaveField,
    /// Relative energy change over the final step.
    pub residual: f64,
    pub steps: usize,
    /// Energy after every renormalised step.
    pub history: Vec<f64>,
}

/// Discrete hydrogen ground state by imaginary-time propagation of a Gaussian.
pub fn relax_ground_state(grid: &GridSpec, settings: &RelaxSettings) -> Result<RelaxationResult> {
    let prop = Propagator::new(grid)?;
    relax_with(&prop, settings)
}

pub(crate) fn relax_with(prop: &Propagator, settings: &RelaxSettings) -> Result<RelaxationResult> {
    settings.validate()?;
    let inv = 1.0 / (2.0 * settings.trial_sigma * settings.trial_sigma);
    let mut psi = WaveField::from_fn(*prop.grid(), |[x, y, z]| {
        C64::new((-(x * x + y * y + z * z) * inv).exp(), 0.0)
    })?;
    psi.normalize()?;

    let mut history = Vec::new();
    let mut last = prop.energy(&psi)?;
    for step in 1..=settings.max_steps {
        prop.imaginary_time_step(&mut psi, settings.dt_im)?;
        psi.normalize()?;
        let e = prop.energy(&psi)?;
        history.push(e);
        let residual = ((e - last) / e).abs();
        last = e;
        if residual < settings.tol {
            if e >= 0.0 {
                return Err(Error::Numerical(format!(
                    "relaxed state is unbound (energy {e}); enlarge the box"
                )));
            }
            return Ok(RelaxationResult {
                energy: e,
                state: psi,
                residual,
                steps: step,
                history,
            });
        }
    }
    Err(Error::NotConverged {
        steps: settings.max_steps,
        energy: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small() -> (GridSpec, RelaxSettings) {
        let g = GridSpec::cubic(24, 0.4).unwrap();
        let s = RelaxSettings {
            dt_im: 0.1,
            tol: 1e-10,
            max_steps: 4000,
            trial_sigma: 1.0,
        };
        (g, s)
    }

    #[test]
    fn relaxes_to_a_bound_even_real_state() {
        let (g, s) = small();
        let r = relax_ground_state(&g, &s).unwrap();
        assert!(r.energy < 0.0);
        // coarse grid: the offset lattice overbinds but stays near -0.5
        assert!((r.energy + 0.5).abs() < 0.1, "energy {}", r.energy);
        assert_relative_eq!(r.state.norm(), 1.0, epsilon = 1e-10);
        let a = r.state.amplitudes();
        let n = 24;
        for ((i, j, k), v) in a.indexed_iter() {
            assert_eq!(v.im, 0.0);
            assert!((v - a[[n - 1 - i, n - 1 - j, n - 1 - k]]).norm() < 1e-12);
        }
        assert!(r.residual < s.tol);
    }

    #[test]
    fn energy_decreases_monotonically() {
        let (g, s) = small();
        let r = relax_ground_state(&g, &s).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-14, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let (g, mut s) = small();
        s.max_steps = 3;
        match relax_ground_state(&g, &s) {
            Err(Error::NotConverged { steps, energy }) => {
                assert_eq!(steps, 3);
                assert!(energy.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_settings() {
        let (g, mut s) = small();
        s.dt_im = 0.0;
        assert!(relax_ground_state(&g, &s).is_err());
    }
}
