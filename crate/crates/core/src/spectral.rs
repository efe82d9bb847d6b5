//! Frequency grids, sampled spectral densities and detection scenarios.
//!
//! Every spectral quantity in the crate lives on a [`FrequencyGrid`]: the
//! Rayleigh-spaced bins `f_m = m / T` for `m = -M/2 ..= M/2`, where
//! `M = ceil(W T)` rounded up to the next even number so the bin set is
//! symmetric about DC. Integrals over the band are left-point Riemann sums
//! with `df = 1 / T`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform baseband frequency sampling of the operational band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    band_width: f64,
    duration: f64,
    half_order: usize,
}

impl FrequencyGrid {
    /// Builds the grid for band `W` (Hz) and duration `T` (s).
    pub fn new(band_width: f64, duration: f64) -> Result<Self> {
        if !(band_width.is_finite() && band_width > 0.0) {
            return Err(Error::invalid(format!(
                "band width must be positive, got {band_width}"
            )));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::invalid(format!(
                "duration must be positive, got {duration}"
            )));
        }
        let wt = band_width * duration;
        // Guard against 20.000000000000004 style products pushing M up by one.
        let wt_rounded = wt.round();
        let mut m = if (wt - wt_rounded).abs() <= 1e-9 * wt.max(1.0) {
            wt_rounded as usize
        } else {
            wt.ceil() as usize
        };
        if m % 2 == 1 {
            m += 1;
        }
        let m = m.max(2);
        Ok(FrequencyGrid {
            band_width,
            duration,
            half_order: m / 2,
        })
    }

    pub fn band_width(&self) -> f64 {
        self.band_width
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `M / 2`: the largest harmonic index on the grid.
    pub fn half_order(&self) -> usize {
        self.half_order
    }

    pub fn num_bins(&self) -> usize {
        2 * self.half_order + 1
    }

    /// Bin spacing `1 / T`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.duration
    }

    /// Harmonic index of bin `i` (bin 0 is `-M/2`).
    pub fn index_of(&self, bin: usize) -> i64 {
        bin as i64 - self.half_order as i64
    }

    /// Bin position of harmonic index `m`, if it lies on the grid.
    pub fn bin_of(&self, m: i64) -> Option<usize> {
        let b = m + self.half_order as i64;
        (b >= 0 && (b as usize) < self.num_bins()).then_some(b as usize)
    }

    pub fn freq(&self, bin: usize) -> f64 {
        self.index_of(bin) as f64 / self.duration
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.num_bins()).map(|i| self.freq(i)).collect()
    }

    /// Harmonic indices `-M/2 ..= M/2`.
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.num_bins()).map(|i| self.index_of(i))
    }

    /// Same grid with each bin split into `factor` sub-bins (duration scaled).
    pub fn refined(&self, factor: usize) -> FrequencyGrid {
        FrequencyGrid {
            band_width: self.band_width,
            duration: self.duration * factor as f64,
            half_order: self.half_order * factor,
        }
    }

    fn same_as(&self, other: &FrequencyGrid) -> bool {
        self.half_order == other.half_order
            && (self.duration - other.duration).abs() <= 1e-12 * self.duration
    }
}

/// Nonnegative real function sampled on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    grid: FrequencyGrid,
    values: Vec<f64>,
}

impl SpectralDensity {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_bins() {
            return Err(Error::invalid(format!(
                "density has {} samples but grid has {} bins",
                values.len(),
                grid.num_bins()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::invalid(format!(
                "density sample {i} is {v}; samples must be finite and nonnegative"
            )));
        }
        Ok(SpectralDensity { grid, values })
    }

    pub fn constant(grid: FrequencyGrid, level: f64) -> Result<Self> {
        Self::new(grid, vec![level; grid.num_bins()])
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        SpectralDensity {
            grid,
            values: vec![0.0; grid.num_bins()],
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at harmonic index `m`, zero off the grid.
    pub fn at_index(&self, m: i64) -> f64 {
        self.grid.bin_of(m).map_or(0.0, |b| self.values[b])
    }

    /// Left-point Riemann sum `sum(values) * df`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Errors unless `other` lives on the same grid.
    pub fn check_same_grid(&self, other: &FrequencyGrid) -> Result<()> {
        if self.grid.same_as(other) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "grid mismatch: {} bins at T = {} vs {} bins at T = {}",
                self.grid.num_bins(),
                self.grid.duration,
                other.num_bins(),
                other.duration
            )))
        }
    }
}

/// Convenience wrapper for [`SpectralDensity::integrate`].
pub fn integrate(sd: &SpectralDensity) -> f64 {
    sd.integrate()
}

/// Parametric PSD families used to build scenarios.
///
/// `noise_valley`: `n_min + (n_max - n_min) (1 - cos(2 pi f / W)) / 2`.
/// `clutter_peak`: `floor + A_p exp(-f^2 / 2 s_p^2) + A_o cos^2(2 pi f q / W)`.
/// `clutter_notch`: `level (1 - depth exp(-f^2 / 2 s_n^2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsdKind {
    Flat {
        level: f64,
    },
    NoiseValley {
        min_level: f64,
        max_level: f64,
    },
    ClutterPeak {
        floor: f64,
        peak_amplitude: f64,
        peak_width: f64,
        ripple_amplitude: f64,
        ripple_cycles: f64,
    },
    ClutterNotch {
        level: f64,
        depth: f64,
        notch_width: f64,
    },
    /// Piecewise-linear table of `(frequency Hz, density)` points.
    CustomTable {
        freqs: Vec<f64>,
        values: Vec<f64>,
    },
    /// Two-column text file loaded as a [`PsdKind::CustomTable`].
    TableFile {
        path: PathBuf,
    },
}

impl PsdKind {
    /// Noise valley whose band-edge to DC ratio is `depth_db`.
    pub fn noise_valley_db(min_level: f64, depth_db: f64) -> Self {
        PsdKind::NoiseValley {
            min_level,
            max_level: min_level * 10f64.powf(depth_db / 10.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite, got {v}")))
            }
        };
        match self {
            PsdKind::Flat { level } => finite("level", *level),
            PsdKind::NoiseValley {
                min_level,
                max_level,
            } => {
                finite("min_level", *min_level)?;
                finite("max_level", *max_level)?;
                if *min_level < 0.0 || *max_level < 0.0 {
                    return Err(Error::invalid("noise valley levels must be nonnegative"));
                }
                Ok(())
            }
            PsdKind::ClutterPeak {
                floor,
                peak_amplitude,
                peak_width,
                ripple_amplitude,
                ripple_cycles,
            } => {
                for (n, v) in [
                    ("floor", floor),
                    ("peak_amplitude", peak_amplitude),
                    ("peak_width", peak_width),
                    ("ripple_amplitude", ripple_amplitude),
                    ("ripple_cycles", ripple_cycles),
                ] {
                    finite(n, *v)?;
                }
                if *floor < 0.0 || *peak_amplitude < 0.0 || *ripple_amplitude < 0.0 {
                    return Err(Error::invalid("clutter peak amplitudes must be nonnegative"));
                }
                if *peak_width <= 0.0 {
                    return Err(Error::invalid("peak_width must be positive"));
                }
                Ok(())
            }
            PsdKind::ClutterNotch {
                level,
                depth,
                notch_width,
            } => {
                finite("level", *level)?;
                finite("depth", *depth)?;
                finite("notch_width", *notch_width)?;
                if *level < 0.0 || !(0.0..=1.0).contains(depth) || *notch_width <= 0.0 {
                    return Err(Error::invalid(
                        "clutter notch needs level >= 0, depth in [0, 1], notch_width > 0",
                    ));
                }
                Ok(())
            }
            PsdKind::CustomTable { freqs, values } => {
                if freqs.is_empty() || freqs.len() != values.len() {
                    return Err(Error::invalid(
                        "custom table needs matching, nonempty frequency and value columns",
                    ));
                }
                if freqs.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid(
                        "custom table frequencies must be strictly increasing",
                    ));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::invalid("custom table values must be finite and >= 0"));
                }
                Ok(())
            }
            PsdKind::TableFile { .. } => Ok(()),
        }
    }

    /// Evaluates the family at frequency `f` for operational band `band_width`.
    pub fn eval(&self, f: f64, band_width: f64) -> f64 {
        match self {
            PsdKind::Flat { level } => *level,
            PsdKind::NoiseValley {
                min_level,
                max_level,
            } => min_level + (max_level - min_level) * 0.5 * (1.0 - (2.0 * PI * f / band_width).cos()),
            PsdKind::ClutterPeak {
                floor,
                peak_amplitude,
                peak_width,
                ripple_amplitude,
                ripple_cycles,
            } => {
                let ripple = (2.0 * PI * f * ripple_cycles / band_width).cos();
                floor
                    + peak_amplitude * (-f * f / (2.0 * peak_width * peak_width)).exp()
                    + ripple_amplitude * ripple * ripple
            }
            PsdKind::ClutterNotch {
                level,
                depth,
                notch_width,
            } => level * (1.0 - depth * (-f * f / (2.0 * notch_width * notch_width)).exp()),
            PsdKind::CustomTable { freqs, values } => interp_linear(freqs, values, f),
            // Resolved by `build_psd` before evaluation.
            PsdKind::TableFile { .. } => f64::NAN,
        }
    }
}

/// Linear interpolation, clamped to the end values outside the table.
fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&v| v <= x);
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + t * (ys[hi] - ys[lo])
}

/// Reads a two-column `frequency density` table. Columns may be separated by
/// whitespace or commas; `#` starts a comment.
pub fn load_psd_table(path: &Path) -> Result<PsdKind> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_psd_table(&text).map_err(|e| e.with_context(path.display().to_string()))
}

pub fn parse_psd_table(text: &str) -> Result<PsdKind> {
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err(Error::invalid(format!(
                "line {}: expected 2 columns, found {}",
                lineno + 1,
                cols.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::invalid(format!("line {}: {e}", lineno + 1)))
        };
        freqs.push(parse(cols[0])?);
        values.push(parse(cols[1])?);
    }
    let kind = PsdKind::CustomTable { freqs, values };
    kind.validate()?;
    Ok(kind)
}

/// Samples a PSD family on `grid`.
pub fn build_psd(kind: &PsdKind, grid: &FrequencyGrid) -> Result<SpectralDensity> {
    if let PsdKind::TableFile { path } = kind {
        return build_psd(&load_psd_table(path)?, grid);
    }
    kind.validate()?;
    let values = grid
        .freqs()
        .into_iter()
        .map(|f| kind.eval(f, grid.band_width()))
        .collect();
    SpectralDensity::new(*grid, values)
}

/// Noise PSD, channel (clutter) PSD, target variance and transmit energy on a
/// shared grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub noise_psd: SpectralDensity,
    pub channel_psd: SpectralDensity,
    pub target_variance: f64,
    pub energy: f64,
}

impl Scenario {
    pub fn new(
        noise_psd: SpectralDensity,
        channel_psd: SpectralDensity,
        target_variance: f64,
        energy: f64,
    ) -> Result<Self> {
        channel_psd.check_same_grid(noise_psd.grid())?;
        if let Some(i) = noise_psd.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::invalid(format!(
                "noise PSD must be strictly positive; bin {i} (f = {} Hz) is {}",
                noise_psd.grid().freq(i),
                noise_psd.values()[i]
            )));
        }
        if !(target_variance.is_finite() && target_variance > 0.0) {
            return Err(Error::invalid(format!(
                "target variance must be positive, got {target_variance}"
            )));
        }
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::invalid(format!(
                "energy must be positive, got {energy}"
            )));
        }
        Ok(Scenario {
            noise_psd,
            channel_psd,
            target_variance,
            energy,
        })
    }

    /// Builds a scenario from PSD families.
    pub fn from_kinds(
        grid: &FrequencyGrid,
        noise: &PsdKind,
        channel: &PsdKind,
        target_variance: f64,
        energy: f64,
    ) -> Result<Self> {
        Self::new(
            build_psd(noise, grid)?,
            build_psd(channel, grid)?,
            target_variance,
            energy,
        )
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.noise_psd.grid()
    }

    pub fn with_energy(&self, energy: f64) -> Result<Self> {
        Self::new(
            self.noise_psd.clone(),
            self.channel_psd.clone(),
            self.target_variance,
            energy,
        )
    }

    pub fn with_target_variance(&self, target_variance: f64) -> Result<Self> {
        Self::new(
            self.noise_psd.clone(),
            self.channel_psd.clone(),
            target_variance,
            self.energy,
        )
    }

    /// Bins where the channel PSD is exactly zero.
    pub fn zero_channel_bins(&self) -> Vec<usize> {
        self.channel_psd
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}
