//! Three-dimensional time-dependent Schrödinger solver for a hydrogen atom
//! driven by an intense circularly polarized laser pulse.
//!
//! The crate is organised around the stages of a stabilization experiment:
//!
//! * [`grid`]: the half-offset Cartesian lattice and the wave field on it.
//! * [`physics`]: Coulomb potential, the rotating dipole field and the
//!   resolution estimates used to size the lattice.
//! * [`propagator`]: alternating-direction Crank–Nicolson stepping, the mask
//!   absorber and imaginary-time relaxation.
//! * [`diagnostics`]: norms, overlaps, plane slices and axis profiles.
//! * [`runner`]: key=value configuration, orchestration and output files.
//!
//! Line solves inside a sweep run on rayon when the `parallel` feature is on
//! (the default); without it every sweep runs on the calling thread.

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod physics;
pub mod propagator;
pub mod runner;
mod tridiag;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{GridSpec, WaveField};
pub use physics::{FieldSample, PulseSpec};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
