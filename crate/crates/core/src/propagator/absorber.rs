use std::f64::consts::PI;
use std::ops::Range;

use ndarray::Axis;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Region;
use crate::exec::Execution;
use crate::grid::{GridSpec, SpatialAxis, WaveField};
use crate::{Error, Result};

/// Multiplicative `cos^p` mask occupying a band of `width` bohr on every face.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorberSpec {
    pub width: f64,
    pub exponent: f64,
}

impl Default for AbsorberSpec {
    fn default() -> Self {
        AbsorberSpec {
            width: 5.0,
            exponent: 0.125,
        }
    }
}

impl AbsorberSpec {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::config(
                "absorber_width",
                format!("must be positive, got {}", self.width),
            ));
        }
        let half = grid.min_half_extent();
        if self.width >= half {
            return Err(Error::config(
                "absorber_width",
                format!(
                    "band {} does not fit inside the half box {half}",
                    self.width
                ),
            ));
        }
        if !(self.exponent.is_finite() && self.exponent > 0.0) {
            return Err(Error::config(
                "absorber_exponent",
                format!("must be positive, got {}", self.exponent),
            ));
        }
        Ok(())
    }

    /// Mask value at depth `d` into the band (0 at the band start).
    pub fn mask_at_depth(&self, depth: f64) -> f64 {
        if depth <= 0.0 {
            return 1.0;
        }
        let d = depth.min(self.width);
        (PI * d / (2.0 * self.width))
            .cos()
            .max(0.0)
            .powf(self.exponent)
    }
}

/// Absorber tabulated on a particular lattice.
#[derive(Clone, Debug)]
pub struct Absorber {
    masks: [Vec<f64>; 3],
    interior: [Range<usize>; 3],
    exec: Execution,
}

impl Absorber {
    pub fn new(spec: &AbsorberSpec, grid: &GridSpec) -> Result<Self> {
        spec.validate(grid)?;
        let active = spec.width >= grid.spacing;
        let table = |axis: SpatialAxis| -> (Vec<f64>, Range<usize>) {
            let n = grid.points(axis);
            let start = grid.half_extent(axis) - spec.width;
            let mask: Vec<f64> = grid
                .axis_coordinates(axis)
                .iter()
                .map(|c| {
                    if active {
                        spec.mask_at_depth(c.abs() - start)
                    } else {
                        1.0
                    }
                })
                .collect();
            let lo = if active {
                grid.axis_coordinates(axis)
                    .iter()
                    .position(|c| c.abs() - start <= 0.0)
                    .unwrap_or(n / 2)
            } else {
                0
            };
            (mask, lo..n - lo)
        };
        let (mx, rx) = table(SpatialAxis::X);
        let (my, ry) = table(SpatialAxis::Y);
        let (mz, rz) = table(SpatialAxis::Z);
        Ok(Absorber {
            masks: [mx, my, mz],
            interior: [rx, ry, rz],
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn mask(&self, axis: SpatialAxis) -> &[f64] {
        &self.masks[axis.index()]
    }

    /// False when the band is narrower than one lattice spacing.
    pub fn is_active(&self) -> bool {
        self.masks.iter().any(|m| m.iter().any(|&v| v < 1.0))
    }

    /// Lattice points outside every band.
    pub fn interior(&self) -> Region {
        Region::Box(self.interior.clone())
    }

    /// Multiplies `psi` by the product of the three axis masks.
    pub fn apply(&self, psi: &mut WaveField) {
        if !self.is_active() {
            return;
        }
        let [mx, my, mz] = &self.masks;
        let kz = &self.interior[2];
        let plane = |(i, mut plane): (usize, ndarray::ArrayViewMut2<crate::C64>)| {
            for (j, mut row) in plane.outer_iter_mut().enumerate() {
                let mxy = mx[i] * my[j];
                let row = row.as_slice_mut().expect("wave field is standard layout");
                if mxy == 1.0 {
                    for k in (0..kz.start).chain(kz.end..row.len()) {
                        row[k] *= mz[k];
                    }
                } else {
                    for (a, &m) in row.iter_mut().zip(mz) {
                        *a *= mxy * m;
                    }
                }
            }
        };
        let amps = psi.amplitudes_mut();
        #[cfg(feature = "parallel")]
        if self.exec.is_parallel() {
            amps.axis_iter_mut(Axis(0))
                .into_par_iter()
                .enumerate()
                .for_each(plane);
            return;
        }
        amps.axis_iter_mut(Axis(0)).enumerate().for_each(plane);
    }
}

/// One-shot mask application.
pub fn apply_absorber(psi: &mut WaveField, spec: &AbsorberSpec) -> Result<()> {
    Absorber::new(spec, psi.grid())?.apply(psi);
    Ok(())
}
