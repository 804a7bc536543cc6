//! Alternating-direction Crank–Nicolson time stepping.
//!
//! One step of length `dt` is the symmetric composition of one-dimensional
//! Cayley factors
//!
//! ```text
//! S(dt) = C_x(dt/2) C_y(dt/2) C_z(dt) C_y(dt/2) C_x(dt/2)
//! ```
//!
//! where `C_a(τ) = (1 + iτH_a/2)⁻¹(1 - iτH_a/2)` and
//! `H_a = -½∂²_a + (V + F(t)·r)/3`. Each factor is exactly unitary, the
//! palindromic ordering makes the step time-symmetric and hence second order,
//! and the dipole term is frozen at the step midpoint `t + dt/2`.
//!
//! Each factor is a batch of independent tridiagonal solves, one per grid
//! line; these run on rayon under [`Execution::Parallel`].

mod absorber;
mod pulse;
mod relax;

pub use absorber::{apply_absorber, Absorber, AbsorberSpec};
pub use pulse::{propagate_pulse, propagate_pulse_with, Progress};
pub use relax::{relax_ground_state, RelaxSettings, RelaxationResult};

use ndarray::{Array3, Axis};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::exec::{indexed_sum, Execution};
use crate::grid::{make_grid, Coordinates, GridSpec, SpatialAxis, WaveField};
use crate::physics::{coulomb_potential, pulse_field, FieldSample, PulseSpec};
use crate::tridiag::{
    solve_line, solve_plane, Cayley, GeneralCayley, LineScratch, PlaneScratch, UnitaryCayley,
};
use crate::{Error, Result, C64};

/// Which axis sits on the outside of the palindromic sweep sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SweepOrder {
    /// `x y z y x`
    #[default]
    XOuter,
    /// `z y x y z`
    ZOuter,
}

impl SweepOrder {
    /// Axis and fraction of the step handled by each factor.
    fn sequence(self) -> [(SpatialAxis, f64); 5] {
        use SpatialAxis::*;
        let (outer, inner) = match self {
            SweepOrder::XOuter => (X, Z),
            SweepOrder::ZOuter => (Z, X),
        };
        [(outer, 0.5), (Y, 0.5), (inner, 1.0), (Y, 0.5), (outer, 0.5)]
    }
}

/// Parameters of one real-time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    /// Laser pulse; `None` switches the dipole coupling off.
    pub pulse: Option<PulseSpec>,
}

impl StepParams {
    pub fn field_free(dt: f64) -> Self {
        StepParams { dt, pulse: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if let Some(p) = &self.pulse {
            p.validate()?;
        }
        Ok(())
    }

    /// Field sampled at the midpoint of the step starting at `t`.
    pub fn midpoint_field(&self, t: f64) -> FieldSample {
        self.pulse
            .as_ref()
            .map_or(FieldSample::ZERO, |p| pulse_field(p, t + 0.5 * self.dt))
    }
}

/// Static Hamiltonian on one lattice plus the sweep machinery.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: GridSpec,
    coords: Coordinates,
    potential: Array3<f64>,
    /// `1/(2h²)`
    beta: f64,
    order: SweepOrder,
    exec: Execution,
}

impl Propagator {
    /// Hydrogen: `V = -1/r`.
    pub fn new(grid: &GridSpec) -> Result<Self> {
        Self::with_potential(grid, coulomb_potential(grid)?)
    }

    /// Free particle: `V = 0`.
    pub fn free(grid: &GridSpec) -> Result<Self> {
        Self::with_potential(grid, Array3::zeros(grid.shape()))
    }

    pub fn with_potential(grid: &GridSpec, potential: Array3<f64>) -> Result<Self> {
        let coords = make_grid(grid)?;
        if potential.dim() != grid.shape() {
            return Err(Error::GridMismatch);
        }
        let potential = potential.as_standard_layout().into_owned();
        Ok(Propagator {
            grid: *grid,
            coords,
            potential,
            beta: 0.5 / (grid.spacing * grid.spacing),
            order: SweepOrder::default(),
            exec: Execution::default(),
        })
    }

    pub fn with_order(mut self, order: SweepOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coordinates(&self) -> &Coordinates {
        &self.coords
    }

    pub fn potential(&self) -> &Array3<f64> {
        &self.potential
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    fn check_grid(&self, psi: &WaveField) -> Result<()> {
        if *psi.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Advances `psi` from `t` to `t + dt` under the full Hamiltonian.
    pub fn real_time_step(&self, psi: &mut WaveField, params: &StepParams, t: f64) -> Result<()> {
        self.check_grid(psi)?;
        params.validate()?;
        let field = params.midpoint_field(t);
        for (axis, frac) in self.order.sequence() {
            let tau = frac * params.dt;
            self.sweep(
                psi.amplitudes_mut(),
                axis,
                UnitaryCayley::new(0.5 * tau, self.beta),
                field,
            )?;
        }
        Ok(())
    }

    /// One field-free imaginary-time step of length `dt_im`, without
    /// renormalisation.
    pub fn imaginary_time_step(&self, psi: &mut WaveField, dt_im: f64) -> Result<()> {
        self.check_grid(psi)?;
        if !(dt_im.is_finite() && dt_im > 0.0) {
            return Err(Error::config(
                "relax_dt",
                format!("must be positive, got {dt_im}"),
            ));
        }
        for (axis, frac) in self.order.sequence() {
            let tau = frac * dt_im;
            let kernel = GeneralCayley::new(C64::new(0.5 * tau, 0.0), self.beta);
            self.sweep(psi.amplitudes_mut(), axis, kernel, FieldSample::ZERO)?;
        }
        Ok(())
    }

    /// A single one-dimensional Cayley factor `C_axis(tau)` in real time.
    pub fn real_time_sweep(
        &self,
        psi: &mut WaveField,
        axis: SpatialAxis,
        tau: f64,
        field: FieldSample,
    ) -> Result<()> {
        self.check_grid(psi)?;
        self.sweep(
            psi.amplitudes_mut(),
            axis,
            UnitaryCayley::new(0.5 * tau, self.beta),
            field,
        )
    }

    fn sweep<K: Cayley>(
        &self,
        psi: &mut Array3<C64>,
        axis: SpatialAxis,
        kernel: K,
        field: FieldSample,
    ) -> Result<()> {
        let two_beta = 2.0 * self.beta;
        let third = 1.0 / 3.0;
        let (xs, ys) = (&self.coords.x, &self.coords.y);
        let pot = &self.potential;
        match axis {
            SpatialAxis::X => {
                // planes of fixed y, lines along x, batched over z
                let job =
                    |scratch: &mut PlaneScratch,
                     (j, mut plane): (usize, ndarray::ArrayViewMut2<C64>)| {
                        let pot = pot.index_axis(Axis(1), j);
                        let y = ys[j];
                        solve_plane(
                            kernel,
                            &mut plane,
                            |m, out| {
                                let shift = field.potential(xs[m], y);
                                let v = pot.row(m);
                                for (o, &v) in out.iter_mut().zip(v.iter()) {
                                    *o = two_beta + (v + shift) * third;
                                }
                            },
                            scratch,
                        )
                    };
                for_each_plane(self.exec, psi, Axis(1), PlaneScratch::default, job)
            }
            SpatialAxis::Y => {
                // planes of fixed x, lines along y, batched over z
                let job =
                    |scratch: &mut PlaneScratch,
                     (i, mut plane): (usize, ndarray::ArrayViewMut2<C64>)| {
                        let pot = pot.index_axis(Axis(0), i);
                        let x = xs[i];
                        solve_plane(
                            kernel,
                            &mut plane,
                            |m, out| {
                                let shift = field.potential(x, ys[m]);
                                let v = pot.row(m);
                                for (o, &v) in out.iter_mut().zip(v.iter()) {
                                    *o = two_beta + (v + shift) * third;
                                }
                            },
                            scratch,
                        )
                    };
                for_each_plane(self.exec, psi, Axis(0), PlaneScratch::default, job)
            }
            SpatialAxis::Z => {
                // contiguous lines along z, one plane of fixed x per job
                let job =
                    |scratch: &mut LineScratch,
                     (i, mut plane): (usize, ndarray::ArrayViewMut2<C64>)| {
                        let pot = pot.index_axis(Axis(0), i);
                        let x = xs[i];
                        for (j, mut line) in plane.outer_iter_mut().enumerate() {
                            let shift = field.potential(x, ys[j]);
                            let v = pot.row(j);
                            let v = v.as_slice().expect("potential is standard layout");
                            let line = line.as_slice_mut().expect("wave field is standard layout");
                            solve_line(
                                kernel,
                                line,
                                |m| two_beta + (v[m] + shift) * third,
                                scratch,
                            )?;
                        }
                        Ok(())
                    };
                for_each_plane(self.exec, psi, Axis(0), LineScratch::default, job)
            }
        }
    }

    /// Expectation value `⟨ψ|H₀|ψ⟩ / ⟨ψ|ψ⟩` of the field-free Hamiltonian with
    /// the same three-point Laplacian used by the sweeps.
    pub fn energy(&self, psi: &WaveField) -> Result<f64> {
        self.check_grid(psi)?;
        let a = psi.amplitudes();
        let (nx, ny, nz) = self.grid.shape();
        let beta = self.beta;
        let pot = &self.potential;
        let zero = C64::new(0.0, 0.0);
        let plane_energy = |i: usize| {
            let mut e = 0.0;
            for j in 0..ny {
                for k in 0..nz {
                    let p = a[[i, j, k]];
                    let nxt = [
                        if i + 1 < nx { a[[i + 1, j, k]] } else { zero },
                        if j + 1 < ny { a[[i, j + 1, k]] } else { zero },
                        if k + 1 < nz { a[[i, j, k + 1]] } else { zero },
                    ];
                    // links to the zero padding below the first point
                    let lower = (i == 0) as u8 + (j == 0) as u8 + (k == 0) as u8;
                    let mut kin = lower as f64 * p.norm_sqr();
                    for q in nxt {
                        kin += (q - p).norm_sqr();
                    }
                    e += beta * kin + pot[[i, j, k]] * p.norm_sqr();
                }
            }
            e
        };
        let total = indexed_sum(self.exec, nx, plane_energy);
        let norm: f64 = a.iter().map(|p| p.norm_sqr()).sum();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::Numerical("energy of a vanishing field".into()));
        }
        Ok(total / norm)
    }
}

fn for_each_plane<S, I, F>(
    exec: Execution,
    psi: &mut Array3<C64>,
    axis: Axis,
    init: I,
    job: F,
) -> Result<()>
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, (usize, ndarray::ArrayViewMut2<C64>)) -> Result<()> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return psi
            .axis_iter_mut(axis)
            .into_par_iter()
            .enumerate()
            .try_for_each_init(init, |s, item| job(s, item));
    }
    let _ = exec;
    let mut scratch = init();
    for item in psi.axis_iter_mut(axis).enumerate() {
        job(&mut scratch, item)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::gaussian_packet;
    use approx::assert_relative_eq;

    fn pulse() -> StepParams {
        StepParams {
            dt: 0.02,
            pulse: Some(PulseSpec::new(3.5, 1.2, 6).unwrap()),
        }
    }

    #[test]
    fn real_step_conserves_norm_without_absorber() {
        let g = GridSpec::new(12, 10, 8, 0.3).unwrap();
        let prop = Propagator::new(&g).unwrap();
        let mut psi = gaussian_packet(&g, 1.0).unwrap();
        let params = pulse();
        for s in 0..20 {
            prop.real_time_step(&mut psi, &params, 7.0 + s as f64 * params.dt)
                .unwrap();
        }
        assert_relative_eq!(psi.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sequential_and_parallel_steps_are_bit_identical() {
        let g = GridSpec::new(10, 8, 12, 0.25).unwrap();
        let a = Propagator::new(&g)
            .unwrap()
            .with_execution(Execution::Sequential);
        let b = Propagator::new(&g)
            .unwrap()
            .with_execution(Execution::Parallel);
        let mut p = gaussian_packet(&g, 0.9).unwrap();
        let mut q = p.clone();
        for s in 0..3 {
            a.real_time_step(&mut p, &pulse(), 5.0 + s as f64 * 0.02)
                .unwrap();
            b.real_time_step(&mut q, &pulse(), 5.0 + s as f64 * 0.02)
                .unwrap();
        }
        assert_eq!(p, q);
        assert_eq!(
            a.energy(&p).unwrap().to_bits(),
            b.energy(&p).unwrap().to_bits()
        );
    }

    #[test]
    fn two_point_axes_still_step() {
        let g = GridSpec::new(2, 2, 2, 0.2).unwrap();
        let prop = Propagator::new(&g).unwrap();
        let mut psi = WaveField::from_fn(g, |_| C64::new(1.0, 0.0)).unwrap();
        psi.normalize().unwrap();
        prop.real_time_step(&mut psi, &pulse(), 10.0).unwrap();
        assert_relative_eq!(psi.norm(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn energy_of_lattice_eigenmode() {
        // sin(πm/(n+1)) is an exact eigenvector of the Dirichlet second
        // difference with eigenvalue 2β(1 - cos(π/(n+1))) per axis.
        let n = 8;
        let h = 0.5;
        let g = GridSpec::cubic(n, h).unwrap();
        let prop = Propagator::free(&g).unwrap();
        let mode = |m: usize| (std::f64::consts::PI * (m + 1) as f64 / (n + 1) as f64).sin();
        let psi = WaveField::from_amplitudes(
            g,
            Array3::from_shape_fn(g.shape(), |(i, j, k)| {
                C64::new(mode(i) * mode(j) * mode(k), 0.0)
            }),
        )
        .unwrap();
        let beta = 0.5 / (h * h);
        let per_axis = 2.0 * beta * (1.0 - (std::f64::consts::PI / (n + 1) as f64).cos());
        assert_relative_eq!(
            prop.energy(&psi).unwrap(),
            3.0 * per_axis,
            max_relative = 1e-12
        );
    }

    #[test]
    fn eigenmode_only_acquires_phase() {
        let n = 10;
        let h = 0.4;
        let g = GridSpec::cubic(n, h).unwrap();
        let prop = Propagator::free(&g).unwrap();
        let mode = |m: usize| (std::f64::consts::PI * (m + 1) as f64 / (n + 1) as f64).sin();
        let start = WaveField::from_amplitudes(
            g,
            Array3::from_shape_fn(g.shape(), |(i, j, k)| {
                C64::new(mode(i) * mode(j) * mode(k), 0.0)
            }),
        )
        .unwrap();
        let mut psi = start.clone();
        let dt = 0.05;
        prop.real_time_step(&mut psi, &StepParams::field_free(dt), 0.0)
            .unwrap();
        // Cayley phase per axis factor: (1 - iτλ/2)/(1 + iτλ/2)
        let lam = 2.0 * (0.5 / (h * h)) * (1.0 - (std::f64::consts::PI / (n + 1) as f64).cos());
        let cayley = |tau: f64| C64::new(1.0, -0.5 * tau * lam) / C64::new(1.0, 0.5 * tau * lam);
        let factor = cayley(dt / 2.0).powi(4) * cayley(dt);
        let mut expected = start;
        expected.scale(factor);
        assert!(psi.distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_grid_and_bad_dt() {
        let g = GridSpec::cubic(4, 0.5).unwrap();
        let other = GridSpec::cubic(6, 0.5).unwrap();
        let prop = Propagator::new(&g).unwrap();
        let mut psi = WaveField::zeros(other);
        assert!(matches!(
            prop.real_time_step(&mut psi, &StepParams::field_free(0.01), 0.0),
            Err(Error::GridMismatch)
        ));
        let mut psi = WaveField::zeros(g);
        assert!(prop
            .real_time_step(&mut psi, &StepParams::field_free(-0.01), 0.0)
            .is_err());
        assert!(prop.imaginary_time_step(&mut psi, 0.0).is_err());
    }
}
