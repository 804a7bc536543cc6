//! On-disk formats.
//!
//! * survival: CSV, header `t,interior_norm,total_norm`, 17 significant digits
//! * slices/profiles: raw little-endian `f64`, row-major, plus a JSON sidecar
//! * ground state: interleaved little-endian `f64` pairs (re, im), row-major
//!   with `z` fastest, plus a JSON sidecar
//! * manifest: JSON listing every emitted file with its record count

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{FinalOverlap, ProfileMaximum, SurvivalSample};
use crate::grid::{GridSpec, WaveField};
use crate::propagator::{AbsorberSpec, RelaxSettings};
use crate::{Error, Result, C64};

pub const SURVIVAL_HEADER: &str = "t,interior_norm,total_norm";
pub const MANIFEST_NAME: &str = "manifest.json";
pub const GROUND_STATE_DATA: &str = "ground_state.bin";
pub const GROUND_STATE_SIDECAR: &str = "ground_state.json";
pub const RELAX_REPORT: &str = "relax_report.txt";

/// File-name tag for a peak field, e.g. `F3.500`.
pub fn field_tag(peak_field: f64) -> String {
    format!("F{peak_field:.3}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_survival_csv(path: &Path, samples: &[SurvivalSample]) -> Result<usize> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{SURVIVAL_HEADER}").map_err(io)?;
    for s in samples {
        writeln!(
            w,
            "{},{},{}",
            sci(s.t),
            sci(s.interior_norm),
            sci(s.total_norm)
        )
        .map_err(io)?;
    }
    finish(path, w)?;
    Ok(samples.len())
}

pub fn read_survival_csv(path: &Path) -> Result<Vec<SurvivalSample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |what: String| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, what),
        )
    };
    let mut lines = text.lines();
    if lines.next() != Some(SURVIVAL_HEADER) {
        return Err(bad("missing survival header".into()));
    }
    lines
        .map(|line| {
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("{line}: {e}"))))
                .collect::<Result<_>>()?;
            match v[..] {
                [t, interior_norm, total_norm] => Ok(SurvivalSample {
                    t,
                    interior_norm,
                    total_norm,
                }),
                _ => Err(bad(format!("expected three columns: {line}"))),
            }
        })
        .collect()
}

pub fn write_f64_le(path: &Path, data: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    for v in data {
        w.write_all(&v.to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

pub fn read_f64_le(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "length is not a multiple of 8",
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        )
    })
}

pub fn write_state(path: &Path, psi: &WaveField) -> Result<()> {
    let data: Vec<f64> = psi.as_slice().iter().flat_map(|c| [c.re, c.im]).collect();
    write_f64_le(path, &data)
}

pub fn read_state(path: &Path, grid: &GridSpec) -> Result<WaveField> {
    let data = read_f64_le(path)?;
    if data.len() != 2 * grid.len() {
        return Err(Error::GridMismatch);
    }
    let amps: Vec<C64> = data.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    let arr =
        ndarray::Array3::from_shape_vec(grid.shape(), amps).map_err(|_| Error::GridMismatch)?;
    WaveField::from_amplitudes(*grid, arr)
}

/// Sidecar describing a slice or profile binary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSidecar {
    /// `"slice"` (z = 0 plane, n_x × n_y) or `"profile"` (x axis, n_x).
    pub kind: String,
    pub data: String,
    pub dtype: String,
    pub order: String,
    pub shape: Vec<usize>,
    /// Coordinate of element 0 along each dimension.
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub t: f64,
    pub step: usize,
    pub peak_field: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maxima: Vec<ProfileMaximum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSidecar {
    pub data: String,
    pub dtype: String,
    pub grid: GridSpec,
    pub relax: RelaxSettings,
    pub energy: f64,
    pub residual: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub records: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub t: f64,
    pub step: usize,
    pub data: String,
    pub sidecar: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maxima: Vec<ProfileMaximum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub peak_field: f64,
    pub survival: String,
    pub end_interior_norm: f64,
    pub end_total_norm: f64,
    pub overlap: Option<FinalOverlap>,
    pub slices: Vec<FrameEntry>,
    pub profiles: Vec<FrameEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateEntry {
    pub data: String,
    pub sidecar: String,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub mode: String,
    pub grid: GridSpec,
    pub omega: f64,
    pub n_cycles: u32,
    pub dt: f64,
    pub sigma: f64,
    pub absorber: Option<AbsorberSpec>,
    pub ground_state: Option<GroundStateEntry>,
    pub runs: Vec<RunEntry>,
    pub files: Vec<FileEntry>,
}

/// Tracks files written under one output directory.
pub(crate) struct OutDir {
    root: PathBuf,
    pub(crate) files: Vec<FileEntry>,
}

impl OutDir {
    pub(crate) fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub(crate) fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub(crate) fn record(&mut self, name: &str, records: usize) {
        self.files.push(FileEntry {
            path: name.to_string(),
            records,
        });
    }
}
