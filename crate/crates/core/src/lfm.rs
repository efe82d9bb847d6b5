//! Linear FM comparator waveforms matched in RMS bandwidth.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mtsfm::{check_rayleigh_grid, check_sample_rate, rms_bandwidth, sample_constant_modulus, SampledWaveform, SamplingOptions};
use crate::spectral::{FrequencyGrid, SpectralDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LfmWaveform {
    pub duration: f64,
    pub energy: f64,
    /// Swept bandwidth `B` in Hz; the sweep runs over `[-B/2, B/2]`.
    pub sweep_bandwidth: f64,
}

/// How the chirp ESD is evaluated on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LfmEsdMode {
    /// Squared magnitude of the sampled chirp's spectrum (with Fresnel ripple).
    #[default]
    Sampled,
    /// Flat over the swept band.
    IdealFlat,
}

impl LfmWaveform {
    pub fn new(duration: f64, energy: f64, sweep_bandwidth: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::invalid(format!("duration must be positive, got {duration}")));
        }
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::invalid(format!("energy must be positive, got {energy}")));
        }
        if !(sweep_bandwidth.is_finite() && sweep_bandwidth >= 0.0) {
            return Err(Error::invalid(format!(
                "sweep bandwidth must be nonnegative, got {sweep_bandwidth}"
            )));
        }
        Ok(LfmWaveform {
            duration,
            energy,
            sweep_bandwidth,
        })
    }

    /// `phi(t) = pi B t^2 / T`.
    pub fn phase(&self, t: f64) -> f64 {
        PI * self.sweep_bandwidth * t * t / self.duration
    }

    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.sweep_bandwidth * t / self.duration
    }

    pub fn default_sample_rate(&self) -> f64 {
        16.0 * (self.sweep_bandwidth / 2.0 + 1.0 / self.duration)
    }
}

pub fn lfm_time_series(w: &LfmWaveform, sample_rate: f64) -> Result<SampledWaveform> {
    lfm_time_series_with(w, sample_rate, SamplingOptions::default())
}

pub fn lfm_time_series_with(
    w: &LfmWaveform,
    sample_rate: f64,
    opts: SamplingOptions,
) -> Result<SampledWaveform> {
    check_sample_rate(sample_rate, w.sweep_bandwidth / 2.0, "LFM", opts)?;
    Ok(sample_constant_modulus(w.duration, w.energy, sample_rate, |t| w.phase(t)))
}

/// Fourier coefficients `|c_m|^2` of `exp(j phi)` over one period, for the
/// grid harmonics.
fn chirp_harmonic_power(w: &LfmWaveform, grid: &FrequencyGrid) -> Vec<f64> {
    let bt = w.sweep_bandwidth * w.duration;
    let n = (64 * grid.num_bins())
        .max((32.0 * bt).ceil() as usize)
        .max(4096)
        .next_power_of_two();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let t = w.duration * (j as f64 / n as f64 - 0.5);
            Complex64::from_polar(1.0, w.phase(t))
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    grid.indices()
        .map(|m| buf[m.rem_euclid(n as i64) as usize].norm_sqr() / (n * n) as f64)
        .collect()
}

/// Chirp ESD on the grid, normalized to integrate to `E`.
pub fn lfm_esd(w: &LfmWaveform, grid: &FrequencyGrid) -> Result<SpectralDensity> {
    lfm_esd_with(w, grid, LfmEsdMode::Sampled)
}

pub fn lfm_esd_with(w: &LfmWaveform, grid: &FrequencyGrid, mode: LfmEsdMode) -> Result<SpectralDensity> {
    check_rayleigh_grid(grid, w.duration)?;
    let raw = match mode {
        LfmEsdMode::Sampled => chirp_harmonic_power(w, grid),
        LfmEsdMode::IdealFlat => {
            let half = w.sweep_bandwidth / 2.0;
            let mut v: Vec<f64> = grid
                .freqs()
                .iter()
                .map(|f| if f.abs() <= half + 1e-12 { 1.0 } else { 0.0 })
                .collect();
            if v.iter().all(|&x| x == 0.0) {
                v[grid.bin_of(0).unwrap()] = 1.0;
            }
            v
        }
    };
    let total = raw.iter().sum::<f64>() * grid.spacing();
    if !(total > 0.0) {
        return Err(Error::Numerical("chirp has no energy on the grid".into()));
    }
    let scale = w.energy / total;
    SpectralDensity::new(*grid, raw.into_iter().map(|v| v * scale).collect())
}

/// Relative tolerance on the matched RMS bandwidth.
pub const MATCH_TOL: f64 = 1e-6;

/// Sweep bandwidth whose chirp ESD has RMS bandwidth `target_beta_rms`.
pub fn match_rms_bandwidth(
    target_beta_rms: f64,
    duration: f64,
    energy: f64,
    grid: &FrequencyGrid,
) -> Result<LfmWaveform> {
    match_rms_bandwidth_with(target_beta_rms, duration, energy, grid, LfmEsdMode::Sampled)
}

pub fn match_rms_bandwidth_with(
    target_beta_rms: f64,
    duration: f64,
    energy: f64,
    grid: &FrequencyGrid,
    mode: LfmEsdMode,
) -> Result<LfmWaveform> {
    if !(target_beta_rms.is_finite() && target_beta_rms >= 0.0) {
        return Err(Error::invalid(format!(
            "target RMS bandwidth must be nonnegative, got {target_beta_rms}"
        )));
    }
    if target_beta_rms == 0.0 {
        return LfmWaveform::new(duration, energy, 0.0);
    }
    let rms_at = |b: f64| -> Result<f64> {
        let w = LfmWaveform::new(duration, energy, b)?;
        rms_bandwidth(&lfm_esd_with(&w, grid, mode)?, energy)
    };
    let band = grid.band_width();
    let h = |b: f64| -> Result<f64> { Ok(rms_at(b)? - target_beta_rms) };

    let h_hi = h(band)?;
    if h_hi < -MATCH_TOL * target_beta_rms {
        return Err(Error::Infeasible(format!(
            "RMS bandwidth {target_beta_rms} rad/s exceeds the {} rad/s reachable with B = W = {band} Hz",
            h_hi + target_beta_rms
        )));
    }
    if h_hi.abs() <= MATCH_TOL * target_beta_rms {
        return LfmWaveform::new(duration, energy, band);
    }

    // Bracket [a, b] with h(a) < 0 < h(b), seeded by the flat-spectrum guess.
    let (mut a, mut fa) = (0.0, -target_beta_rms);
    let (mut b, mut fb) = (band, h_hi);
    let guess = (12f64.sqrt() * target_beta_rms / (2.0 * PI)).clamp(0.0, band);
    if guess > 0.0 && guess < band {
        let fg = h(guess)?;
        if fg.abs() <= MATCH_TOL * target_beta_rms {
            return LfmWaveform::new(duration, energy, guess);
        }
        if fg < 0.0 {
            a = guess;
            fa = fg;
        } else {
            b = guess;
            fb = fg;
        }
    }

    // Illinois-modified regula falsi.
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = h(c)?;
        if fc.abs() <= MATCH_TOL * target_beta_rms || (b - a) <= 1e-12 * band {
            return LfmWaveform::new(duration, energy, c);
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Convergence {
        iterations: 200,
        detail: format!("RMS bandwidth match for {target_beta_rms} rad/s did not converge"),
    })
}
