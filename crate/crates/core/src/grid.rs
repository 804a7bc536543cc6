//! Half-offset Cartesian lattice and the complex wave field that lives on it.
//!
//! Along an axis with `n` points and spacing `h` the coordinate of index `i`
//! is `(i - n/2 + 1/2) * h`. With `n` even the points sit symmetrically about
//! the origin and none of them coincides with it, so the Coulomb term is
//! finite everywhere on the lattice.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::exec::{chunked_sum, Execution};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpatialAxis {
    X,
    Y,
    Z,
}

impl SpatialAxis {
    pub const ALL: [SpatialAxis; 3] = [SpatialAxis::X, SpatialAxis::Y, SpatialAxis::Z];

    pub fn index(self) -> usize {
        match self {
            SpatialAxis::X => 0,
            SpatialAxis::Y => 1,
            SpatialAxis::Z => 2,
        }
    }
}

/// Point counts per axis and the (isotropic) lattice spacing in bohr.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(n_x: usize, n_y: usize, n_z: usize, spacing: f64) -> Result<Self> {
        let spec = GridSpec {
            n_x,
            n_y,
            n_z,
            spacing,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cubic(n: usize, spacing: f64) -> Result<Self> {
        Self::new(n, n, n, spacing)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, n) in [("n_x", self.n_x), ("n_y", self.n_y), ("n_z", self.n_z)] {
            if n < 2 || n % 2 != 0 {
                return Err(Error::config(
                    key,
                    format!("point count must be even and at least 2, got {n}"),
                ));
            }
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::config(
                "spacing",
                format!("must be positive and finite, got {}", self.spacing),
            ));
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_x, self.n_y, self.n_z)
    }

    pub fn points(&self, axis: SpatialAxis) -> usize {
        match axis {
            SpatialAxis::X => self.n_x,
            SpatialAxis::Y => self.n_y,
            SpatialAxis::Z => self.n_z,
        }
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Distance from the origin to the box face along `axis` (`n * h / 2`).
    pub fn half_extent(&self, axis: SpatialAxis) -> f64 {
        0.5 * self.points(axis) as f64 * self.spacing
    }

    /// Smallest of the three half extents.
    pub fn min_half_extent(&self) -> f64 {
        SpatialAxis::ALL
            .iter()
            .map(|&a| self.half_extent(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn coordinate(&self, axis: SpatialAxis, index: usize) -> f64 {
        offset_coordinate(self.points(axis), index, self.spacing)
    }

    pub fn axis_coordinates(&self, axis: SpatialAxis) -> Vec<f64> {
        (0..self.points(axis))
            .map(|i| self.coordinate(axis, i))
            .collect()
    }
}

/// Position of lattice index `i` on an axis with `n` points.
pub fn offset_coordinate(n: usize, i: usize, spacing: f64) -> f64 {
    (i as f64 - 0.5 * n as f64 + 0.5) * spacing
}

/// Tabulated coordinates for all three axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Coordinates {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl Coordinates {
    pub fn axis(&self, axis: SpatialAxis) -> &[f64] {
        match axis {
            SpatialAxis::X => &self.x,
            SpatialAxis::Y => &self.y,
            SpatialAxis::Z => &self.z,
        }
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.x[i], self.y[j], self.z[k]]
    }

    pub fn radius(&self, i: usize, j: usize, k: usize) -> f64 {
        let [x, y, z] = self.position(i, j, k);
        (x * x + y * y + z * z).sqrt()
    }

    /// Distance from the origin to the nearest lattice point.
    pub fn min_radius(&self) -> f64 {
        let nearest = |c: &[f64]| c.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let (x, y, z) = (nearest(&self.x), nearest(&self.y), nearest(&self.z));
        (x * x + y * y + z * z).sqrt()
    }
}

/// Validates `spec` and tabulates its coordinates.
pub fn make_grid(spec: &GridSpec) -> Result<Coordinates> {
    spec.validate()?;
    Ok(Coordinates {
        x: spec.axis_coordinates(SpatialAxis::X),
        y: spec.axis_coordinates(SpatialAxis::Y),
        z: spec.axis_coordinates(SpatialAxis::Z),
    })
}

/// Complex amplitudes on a lattice, stored row-major with `z` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    grid: GridSpec,
    amplitudes: Array3<C64>,
}

impl WaveField {
    pub fn zeros(grid: GridSpec) -> Self {
        WaveField {
            grid,
            amplitudes: Array3::zeros(grid.shape()),
        }
    }

    pub fn from_amplitudes(grid: GridSpec, amplitudes: Array3<C64>) -> Result<Self> {
        if amplitudes.dim() != grid.shape() {
            return Err(Error::GridMismatch);
        }
        let amplitudes = if amplitudes.is_standard_layout() {
            amplitudes
        } else {
            amplitudes.as_standard_layout().into_owned()
        };
        Ok(WaveField { grid, amplitudes })
    }

    /// Fills the field from a function of position.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> C64) -> Result<Self> {
        let coords = make_grid(&grid)?;
        let amplitudes =
            Array3::from_shape_fn(grid.shape(), |(i, j, k)| f(coords.position(i, j, k)));
        Ok(WaveField { grid, amplitudes })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &Array3<C64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut Array3<C64> {
        &mut self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes
            .as_slice()
            .expect("wave field storage is always standard layout")
    }

    pub fn as_slice_mut(&mut self) -> &mut [C64] {
        self.amplitudes
            .as_slice_mut()
            .expect("wave field storage is always standard layout")
    }

    /// Discrete norm `Σ|ψ|² h³` over the whole lattice.
    pub fn norm(&self) -> f64 {
        self.norm_with(Execution::default())
    }

    pub fn norm_with(&self, exec: Execution) -> f64 {
        chunked_sum(exec, self.as_slice(), |a| a.norm_sqr()) * self.grid.cell_volume()
    }

    pub fn scale(&mut self, factor: C64) {
        self.amplitudes.mapv_inplace(|a| a * factor);
    }

    /// Rescales to unit discrete norm. Fails on a vanishing or non-finite norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical(format!(
                "cannot normalise a field with norm {n}"
            )));
        }
        self.scale(C64::new(1.0 / n.sqrt(), 0.0));
        Ok(n)
    }

    /// Euclidean distance `sqrt(Σ|a-b|² h³)` between two fields.
    pub fn distance(&self, other: &WaveField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let d: f64 = self
            .as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((d * self.grid.cell_volume()).sqrt())
    }
}

/// Stationary Gaussian `exp(-r²/(2σ²))` centred at the origin, unit norm.
pub fn gaussian_packet(grid: &GridSpec, sigma: f64) -> Result<WaveField> {
    grid.validate()?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::config(
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    if grid.spacing > sigma / 3.0 {
        return Err(Error::config(
            "sigma",
            format!(
                "width {sigma} is under-resolved by spacing {} (need spacing <= sigma/3)",
                grid.spacing
            ),
        ));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut psi = WaveField::from_fn(*grid, |[x, y, z]| {
        C64::new((-(x * x + y * y + z * z) * inv).exp(), 0.0)
    })?;
    psi.normalize()?;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_axis_is_symmetric() {
        let g = GridSpec::cubic(2, 1.0).unwrap();
        assert_eq!(g.axis_coordinates(SpatialAxis::X), vec![-0.5, 0.5]);
    }

    #[test]
    fn rejects_odd_counts_and_bad_spacing() {
        assert!(matches!(
            GridSpec::new(3, 4, 4, 0.1),
            Err(Error::Config { ref key, .. }) if key == "n_x"
        ));
        assert!(GridSpec::new(4, 4, 0, 0.1).is_err());
        assert!(GridSpec::cubic(4, 0.0).is_err());
        assert!(GridSpec::cubic(4, -1.0).is_err());
        assert!(GridSpec::cubic(4, f64::NAN).is_err());
    }

    #[test]
    fn nearest_point_radius_at_default_spacing() {
        let coords = make_grid(&GridSpec::cubic(16, 0.1667).unwrap()).unwrap();
        // (√3/2)·0.1667
        assert_relative_eq!(
            coords.min_radius(),
            0.1443664348108659,
            max_relative = 1e-12
        );
    }

    #[test]
    fn default_axis_span() {
        let g = GridSpec::cubic(240, 0.1667).unwrap();
        let x = g.axis_coordinates(SpatialAxis::X);
        assert_relative_eq!(x[239], 19.92065, max_relative = 1e-12);
        assert_relative_eq!(x[0], -19.92065, max_relative = 1e-12);
    }

    #[test]
    fn coordinates_are_antisymmetric() {
        let g = GridSpec::new(6, 10, 4, 0.3).unwrap();
        for axis in SpatialAxis::ALL {
            let c = g.axis_coordinates(axis);
            let n = c.len();
            for i in 0..n {
                assert_eq!(c[i], -c[n - 1 - i]);
                assert!(c[i] != 0.0);
            }
        }
    }

    #[test]
    fn gaussian_is_normalised_and_even() {
        let g = GridSpec::cubic(32, 0.25).unwrap();
        let psi = gaussian_packet(&g, 1.5).unwrap();
        assert_relative_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        let a = psi.amplitudes();
        assert_eq!(a[[3, 7, 11]], a[[28, 24, 20]]);
        assert_eq!(a[[0, 31, 5]], a[[31, 0, 26]]);
    }

    #[test]
    fn gaussian_density_ratio_matches_closed_form() {
        let g = GridSpec::cubic(48, 0.1667).unwrap();
        let coords = make_grid(&g).unwrap();
        let psi = gaussian_packet(&g, 1.5).unwrap();
        let a = psi.amplitudes();
        let (i0, i1) = (24, 33);
        let r0 = coords.radius(i0, i0, i0);
        let r1 = coords.radius(i1, i0, i0);
        let ratio = a[[i1, i0, i0]].norm_sqr() / a[[i0, i0, i0]].norm_sqr();
        let expected = (-(r1 * r1 - r0 * r0) / (1.5 * 1.5)).exp();
        assert_relative_eq!(ratio, expected, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_rejects_under_resolved_width() {
        let g = GridSpec::cubic(8, 1.0).unwrap();
        assert!(matches!(
            gaussian_packet(&g, 1.5),
            Err(Error::Config { .. })
        ));
        assert!(gaussian_packet(&g, -1.0).is_err());
    }

    #[test]
    fn norm_ignores_global_phase() {
        let g = GridSpec::cubic(16, 0.3).unwrap();
        let mut psi = gaussian_packet(&g, 1.5).unwrap();
        let before = psi.norm();
        psi.scale(C64::from_polar(1.0, 0.7));
        assert_relative_eq!(psi.norm(), before, epsilon = 1e-14);
    }

    #[test]
    fn from_amplitudes_checks_shape() {
        let g = GridSpec::cubic(4, 0.5).unwrap();
        assert!(WaveField::from_amplitudes(g, Array3::zeros((4, 4, 2))).is_err());
        assert!(WaveField::from_amplitudes(g, Array3::zeros((4, 4, 4))).is_ok());
    }
}
