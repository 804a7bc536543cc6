//! Observables: norms, overlaps, plane slices and axis profiles.
//!
//! Neither the `z = 0` plane nor the `x` axis passes through lattice points,
//! so slices average the two nearest planes and profiles the four nearest
//! lines.

use std::ops::Range;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::exec::{indexed_sum, Execution};
use crate::grid::{SpatialAxis, WaveField};
use crate::{Error, Result, C64};

/// Subset of the lattice to integrate over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    All,
    /// Index box `[x, y, z]`.
    Box([Range<usize>; 3]),
}

/// `Σ|ψ|² h³` over `region`.
pub fn norm(psi: &WaveField, region: &Region) -> f64 {
    match region {
        Region::All => psi.norm(),
        Region::Box([rx, ry, rz]) => {
            let a = psi.amplitudes();
            let sum = indexed_sum(Execution::default(), rx.len(), |di| {
                let plane = a.slice(s![rx.start + di, ry.clone(), rz.clone()]);
                plane.iter().map(|v| v.norm_sqr()).sum::<f64>()
            });
            sum * psi.grid().cell_volume()
        }
    }
}

/// `Σ conj(a)·b h³`.
pub fn overlap(a: &WaveField, b: &WaveField) -> Result<C64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let (xa, xb) = (a.as_slice(), b.as_slice());
    let n = xa.len();
    let chunk = 1 << 14;
    let parts = n.div_ceil(chunk);
    let component = |im: bool| {
        indexed_sum(Execution::default(), parts, |c| {
            let r = c * chunk..((c + 1) * chunk).min(n);
            xa[r.clone()]
                .iter()
                .zip(&xb[r])
                .map(|(p, q)| {
                    let z = p.conj() * q;
                    if im {
                        z.im
                    } else {
                        z.re
                    }
                })
                .sum()
        })
    };
    let dv = a.grid().cell_volume();
    Ok(C64::new(component(false) * dv, component(true) * dv))
}

/// `|ψ|²` on the `z = 0` plane, `n_x × n_y`, averaged over the planes at
/// `z = ±h/2`.
pub fn slice_z0(psi: &WaveField) -> Array2<f64> {
    let a = psi.amplitudes();
    let c = psi.grid().n_z / 2;
    let lo = a.slice(s![.., .., c - 1]);
    let hi = a.slice(s![.., .., c]);
    let mut out = Array2::zeros(lo.dim());
    ndarray::Zip::from(&mut out)
        .and(&lo)
        .and(&hi)
        .for_each(|o, p, q| *o = 0.5 * (p.norm_sqr() + q.norm_sqr()));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisProfile {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

/// `|ψ|²` along the `x` axis, averaged over the four lines at
/// `y, z = ±h/2`.
pub fn axis_profile(psi: &WaveField) -> AxisProfile {
    let g = psi.grid();
    let a = psi.amplitudes();
    let (cy, cz) = (g.n_y / 2, g.n_z / 2);
    let density = (0..g.n_x)
        .map(|i| {
            let mut s = 0.0;
            for j in [cy - 1, cy] {
                for k in [cz - 1, cz] {
                    s += a[[i, j, k]].norm_sqr();
                }
            }
            0.25 * s
        })
        .collect();
    AxisProfile {
        x: g.axis_coordinates(SpatialAxis::X),
        density,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileMaximum {
    pub x: f64,
    pub value: f64,
}

/// Strict interior local maxima whose prominence exceeds
/// `min_prominence × max(values)`, ordered by position.
///
/// Prominence is the height above the higher of the two flanking minima,
/// each flank extending to the nearest strictly higher sample (or the end of
/// the profile).
pub fn find_profile_maxima(x: &[f64], values: &[f64], min_prominence: f64) -> Vec<ProfileMaximum> {
    let n = values.len();
    if n < 3 || x.len() != n {
        return Vec::new();
    }
    let global = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if global.is_nan() || global <= 0.0 {
        return Vec::new();
    }
    let threshold = min_prominence * global;
    let mut found = Vec::new();
    for p in 1..n - 1 {
        let v = values[p];
        if !(values[p - 1] < v && v > values[p + 1]) {
            continue;
        }
        let mut left_min = v;
        for &w in values[..p].iter().rev() {
            if w > v {
                break;
            }
            left_min = left_min.min(w);
        }
        let mut right_min = v;
        for &w in &values[p + 1..] {
            if w > v {
                break;
            }
            right_min = right_min.min(w);
        }
        let prominence = v - left_min.max(right_min);
        if prominence > threshold {
            found.push(ProfileMaximum { x: x[p], value: v });
        }
    }
    found
}

/// One survival sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSample {
    pub t: f64,
    pub interior_norm: f64,
    pub total_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceFrame {
    pub t: f64,
    pub step: usize,
    pub density: Array2<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileFrame {
    pub t: f64,
    pub step: usize,
    pub profile: AxisProfile,
    pub maxima: Vec<ProfileMaximum>,
}

/// Projection of the end-of-pulse state on the relaxed ground state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalOverlap {
    /// `|⟨ground|ψ(end)⟩|²`
    pub overlap_sq: f64,
    /// `overlap_sq / total_norm(end)`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsLog {
    pub peak_field: f64,
    pub survival: Vec<SurvivalSample>,
    pub slices: Vec<SliceFrame>,
    pub profiles: Vec<ProfileFrame>,
    pub final_overlap: Option<FinalOverlap>,
}

impl DiagnosticsLog {
    pub fn new(peak_field: f64) -> Self {
        DiagnosticsLog {
            peak_field,
            survival: Vec::new(),
            slices: Vec::new(),
            profiles: Vec::new(),
            final_overlap: None,
        }
    }

    pub fn final_survival(&self) -> Option<&SurvivalSample> {
        self.survival.last()
    }

    /// Survival sample recorded nearest to `t`.
    pub fn survival_at(&self, t: f64) -> Option<&SurvivalSample> {
        self.survival
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn slice_at(&self, t: f64) -> Option<&SliceFrame> {
        self.slices
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn profile_at(&self, t: f64) -> Option<&ProfileFrame> {
        self.profiles
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}
