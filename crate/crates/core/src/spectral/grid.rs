//! Periodic sampling grids on the torus [−L, L)^N and complex fields on them.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::TestFunction;

const MAGIC: &[u8; 4] = b"LPGF";
const FORMAT_VERSION: u32 = 1;
/// Magic, version, N, M (u32 each) and L (f64).
pub const HEADER_BYTES: usize = 24;

/// Uniform grid x_k = −L + k·2L/M per axis, frequencies ξ_m = m/(2L) with
/// m the signed index in [−M/2, M/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub dimension: usize,
    pub halfwidth: f64,
    pub points_per_axis: usize,
}

impl SpectralGrid {
    pub fn new(dimension: usize, halfwidth: f64, points_per_axis: usize) -> Result<Self> {
        let g = Self { dimension, halfwidth, points_per_axis };
        g.validate()?;
        Ok(g)
    }

    /// M = 1024, L = 16 in one dimension; M = 256, L = 8 in two; M = 64,
    /// L = 4 in three.
    pub fn default_for(dimension: usize) -> Result<Self> {
        match dimension {
            1 => Self::new(1, 16.0, 1024),
            2 => Self::new(2, 8.0, 256),
            3 => Self::new(3, 4.0, 64),
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        if !(self.halfwidth > 0.0 && self.halfwidth.is_finite()) {
            return Err(invalid(format!("grid halfwidth {} must be positive", self.halfwidth)));
        }
        let m = self.points_per_axis;
        if m < 4 || !m.is_power_of_two() {
            return Err(invalid(format!("points_per_axis {m} must be a power of two >= 4")));
        }
        if (m as f64).powi(self.dimension as i32) > 2f64.powi(28) {
            return Err(invalid("grid has more than 2^28 points"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.halfwidth / self.points_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency resolution 1/(2L).
    pub fn frequency_step(&self) -> f64 {
        0.5 / self.halfwidth
    }

    /// M/(4L).
    pub fn nyquist(&self) -> f64 {
        self.points_per_axis as f64 * 0.25 / self.halfwidth
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// Bands j whose annulus {2^{j−1} < |ξ| < 2^{j+1}} meets a nonzero grid
    /// frequency.
    pub fn band_range(&self) -> (i32, i32) {
        let lo = (self.frequency_step().log2() - 1.0).floor() as i32 + 1;
        let top = self.nyquist() * (self.dimension as f64).sqrt();
        let hi = (top.log2() + 1.0).ceil() as i32 - 1;
        (lo, hi)
    }

    /// Per-axis multi-index of a flat index; the last axis varies fastest.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let m = self.points_per_axis;
        let mut idx = [0; 3];
        for a in (0..self.dimension).rev() {
            idx[a] = flat % m;
            flat /= m;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dimension {
            x[a] = -self.halfwidth + idx[a] as f64 * h;
        }
        x
    }

    pub fn signed_index(&self, k: usize) -> i64 {
        let m = self.points_per_axis;
        if k < m / 2 {
            k as i64
        } else {
            k as i64 - m as i64
        }
    }

    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let step = self.frequency_step();
        let mut xi = [0.0; 3];
        for a in 0..self.dimension {
            xi[a] = self.signed_index(idx[a]) as f64 * step;
        }
        xi
    }

    /// |ξ| at every flat index.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let xi = self.frequency(i);
                xi[..self.dimension].iter().map(|c| c * c).sum::<f64>().sqrt()
            })
            .collect()
    }

    /// Whether the axis index is the unpaired Nyquist mode −M/2.
    pub fn is_nyquist(&self, k: usize) -> bool {
        k == self.points_per_axis / 2
    }
}

/// Complex samples of a field on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: SpectralGrid,
    pub data: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(grid: SpectralGrid) -> Self {
        Self { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: SpectralGrid, f: F) -> Self {
        let n = grid.dimension;
        let data = (0..grid.len()).map(|i| Complex64::new(f(&grid.point(i)[..n]), 0.0)).collect();
        Self { grid, data }
    }

    pub fn sample(grid: SpectralGrid, u: &TestFunction) -> Result<Self> {
        if u.dimension() != grid.dimension {
            return Err(Error::DimensionMismatch { expected: grid.dimension, got: u.dimension() });
        }
        Ok(Self::from_fn(grid, |x| u.evaluate(x)))
    }

    /// Unnormalized DFT along every axis.
    pub fn dft(&self) -> Vec<Complex64> {
        let mut d = self.data.clone();
        fft_nd(&mut d, &self.grid, false);
        d
    }

    /// Inverse of [`GridField::dft`].
    pub fn from_dft(grid: SpectralGrid, mut spectrum: Vec<Complex64>) -> Self {
        fft_nd(&mut spectrum, &grid, true);
        let scale = 1.0 / grid.len() as f64;
        spectrum.iter_mut().for_each(|c| *c *= scale);
        Self { grid, data: spectrum }
    }

    /// Riemann approximation h^N Σ_k u(x_k) e^{−2πi ξ_m·x_k} of the Fourier
    /// transform at the grid frequencies.
    pub fn continuous_spectrum(&self) -> Vec<Complex64> {
        let mut d = self.dft();
        let vol = self.grid.cell_volume();
        for (i, c) in d.iter_mut().enumerate() {
            *c *= vol * offset_phase(&self.grid, i);
        }
        d
    }

    /// Samples of Σ_m F(ξ_m) e^{2πi ξ_m·x}/(2L)^N, the Riemann approximation
    /// of the inverse transform of F.
    pub fn from_continuous_spectrum<F: Fn(&[f64]) -> Complex64>(grid: SpectralGrid, f: F) -> Self {
        let n = grid.dimension;
        let vol = grid.cell_volume();
        let spec = (0..grid.len()).map(|i| f(&grid.frequency(i)[..n]) * offset_phase(&grid, i) / vol).collect();
        Self::from_dft(grid, spec)
    }

    /// Applies the Fourier multiplier m(ξ).
    pub fn apply_multiplier<F: Fn(&[f64]) -> Complex64>(&self, m: F) -> Self {
        let n = self.grid.dimension;
        let mut spec = self.dft();
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= m(&self.grid.frequency(i)[..n]);
        }
        Self::from_dft(self.grid, spec)
    }

    /// Riemann sum (h^N Σ|u|^p)^{1/p}.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let sum: f64 = self.data.iter().map(|c| c.norm().powf(p)).sum();
        (sum * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.check_same_grid(other)?;
        Ok(Self { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() })
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.check_same_grid(other)?;
        Ok(Self { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn scale(&self, c: f64) -> GridField {
        Self { grid: self.grid, data: self.data.iter().map(|v| v * c).collect() }
    }

    fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid("fields live on different grids"));
        }
        Ok(())
    }

    /// Writes the binary field and a JSON sidecar next to it (same stem,
    /// extension `json`). Returns the sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.dimension as u32).to_le_bytes())?;
        w.write_all(&(self.grid.points_per_axis as u32).to_le_bytes())?;
        w.write_all(&self.grid.halfwidth.to_le_bytes())?;
        for c in &self.data {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        w.flush()?;
        let sidecar = path.with_extension("json");
        let meta = FieldMetadata {
            format: "LPGF".into(),
            version: FORMAT_VERSION,
            dimension: self.grid.dimension,
            points_per_axis: self.grid.points_per_axis,
            halfwidth: self.grid.halfwidth,
            spacing: self.grid.spacing(),
            header_bytes: HEADER_BYTES,
            layout: "row-major, last axis fastest; x_k = -L + k*2L/M; little-endian f64 (re, im) pairs".into(),
        };
        let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(&sidecar, json + "\n")?;
        Ok(sidecar)
    }

    pub fn read(path: &Path) -> Result<GridField> {
        let mut r = BufReader::new(File::open(path)?);
        let mut head = [0u8; HEADER_BYTES];
        r.read_exact(&mut head).map_err(|_| Error::Format("truncated header".into()))?;
        if &head[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let word = |k: usize| u32::from_le_bytes(head[k..k + 4].try_into().unwrap());
        if word(4) != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", word(4))));
        }
        let halfwidth = f64::from_le_bytes(head[16..24].try_into().unwrap());
        let grid = SpectralGrid::new(word(8) as usize, halfwidth, word(12) as usize)
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * grid.len() {
            return Err(Error::Format(format!("expected {} data bytes, found {}", 16 * grid.len(), bytes.len())));
        }
        let data = bytes
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(f64::from_le_bytes(b[..8].try_into().unwrap()), f64::from_le_bytes(b[8..].try_into().unwrap()))
            })
            .collect();
        Ok(GridField { grid, data })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FieldMetadata {
    format: String,
    version: u32,
    dimension: usize,
    points_per_axis: usize,
    halfwidth: f64,
    spacing: f64,
    header_bytes: usize,
    layout: String,
}

/// e^{2πi ξ_m L} per axis: the grid starts at −L rather than 0.
fn offset_phase(grid: &SpectralGrid, flat: usize) -> Complex64 {
    let idx = grid.multi_index(flat);
    let mut phase = 0.0;
    for &k in &idx[..grid.dimension] {
        phase += PI * grid.signed_index(k) as f64;
    }
    Complex64::from_polar(1.0, phase)
}

fn fft_nd(data: &mut [Complex64], grid: &SpectralGrid, inverse: bool) {
    let m = grid.points_per_axis;
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    let n = grid.dimension;
    let mut lane = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let outer = data.len() / (m * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * m * stride + inner;
                for k in 0..m {
                    lane[k] = data[base + k * stride];
                }
                fft.process(&mut lane);
                for k in 0..m {
                    data[base + k * stride] = lane[k];
                }
            }
        }
    }
}
