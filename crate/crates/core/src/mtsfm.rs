//! Multi-tone sinusoidal FM waveforms.
//!
//! The phase is a finite cosine series `phi(t) = -sum_k beta_k cos(2 pi k t / T)`
//! on `[-T/2, T/2)`, so the waveform `sqrt(E/T) exp(j phi(t))` is constant
//! modulus by construction. Its Fourier-series coefficients (the modified
//! generalized Bessel functions of the modulation indices) are computed by a
//! dense DFT of `exp(j phi)`; the spectrum is the sinc superposition of those
//! coefficients at harmonic spacing `1 / T`.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FrequencyGrid, SpectralDensity};

/// Guard bins added to `ceil(sum_k k |beta_k|)` for the default order bound.
pub const ORDER_GUARD: usize = 16;
/// Tail widths added on top of `ORDER_GUARD` in the default order bound.
pub const TAIL_WIDTHS: f64 = 3.0;
/// Default samples per cycle of the fastest instantaneous frequency.
pub const DEFAULT_OVERSAMPLE: f64 = 16.0;

/// `sin(pi x) / (pi x)`, exactly `0` at nonzero integers and `1` at zero.
pub fn sinc_pi(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let r = x - x.round();
    if r == 0.0 {
        return 0.0;
    }
    // sin(pi x) = (-1)^round(x) sin(pi r)
    let sign = if (x.round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
    sign * (PI * r).sin() / (PI * x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtsfmWaveform {
    duration: f64,
    energy: f64,
    mod_indices: Vec<f64>,
}

/// Uniform samples `s(t_n)` at `t_n = start + n dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub start: f64,
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl SampledWaveform {
    pub fn time(&self, n: usize) -> f64 {
        self.start + n as f64 * self.dt
    }

    /// Riemann energy `sum |s_n|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt
    }

    /// CSV rows `t, real, imag`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "real", "imag"])?;
        for (n, s) in self.samples.iter().enumerate() {
            w.write_record([self.time(n).to_string(), s.re.to_string(), s.im.to_string()])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<waveform csv>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Sampling behaviour shared by the MTSFM and LFM generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    /// Undersampling below the Nyquist guard is an error instead of a warning.
    pub strict: bool,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions { strict: true }
    }
}

pub(crate) fn check_sample_rate(
    sample_rate: f64,
    max_freq: f64,
    what: &str,
    opts: SamplingOptions,
) -> Result<()> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    let nyquist = 2.0 * max_freq;
    if sample_rate < nyquist {
        let msg = format!(
            "{what}: sample rate {sample_rate} Hz is below the Nyquist guard {nyquist} Hz"
        );
        if opts.strict {
            return Err(Error::invalid(msg));
        }
        warn!("{msg}");
    }
    Ok(())
}

/// Samples `amplitude * exp(j phase(t))` on `[-T/2, T/2)`, with the sample
/// count rounded up so that `N dt = T` exactly.
pub(crate) fn sample_constant_modulus(
    duration: f64,
    energy: f64,
    sample_rate: f64,
    phase: impl Fn(f64) -> f64,
) -> SampledWaveform {
    let n = ((sample_rate * duration).ceil() as usize).max(1);
    let dt = duration / n as f64;
    let start = -duration / 2.0;
    let amplitude = (energy / duration).sqrt();
    let samples = (0..n)
        .map(|i| Complex64::from_polar(amplitude, phase(start + i as f64 * dt)))
        .collect();
    SampledWaveform { start, dt, samples }
}

impl MtsfmWaveform {
    pub fn new(duration: f64, energy: f64, mod_indices: Vec<f64>) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::invalid(format!("duration must be positive, got {duration}")));
        }
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::invalid(format!("energy must be positive, got {energy}")));
        }
        if mod_indices.is_empty() {
            return Err(Error::invalid("at least one modulation index is required"));
        }
        if mod_indices.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("modulation indices must be finite"));
        }
        Ok(MtsfmWaveform {
            duration,
            energy,
            mod_indices,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn mod_indices(&self) -> &[f64] {
        &self.mod_indices
    }

    /// Frequency-modulation amplitudes `b_k = beta_k k / T`.
    pub fn fm_amplitudes(&self) -> Vec<f64> {
        self.mod_indices
            .iter()
            .enumerate()
            .map(|(i, b)| b * (i + 1) as f64 / self.duration)
            .collect()
    }

    fn check_support(&self, t: f64) -> Result<()> {
        let half = self.duration / 2.0;
        if !(t >= -half && t <= half) {
            return Err(Error::invalid(format!(
                "t = {t} lies outside [-{half}, {half}]"
            )));
        }
        Ok(())
    }

    fn phase_unchecked(&self, t: f64) -> f64 {
        let w = 2.0 * PI * t / self.duration;
        -self
            .mod_indices
            .iter()
            .enumerate()
            .map(|(i, b)| b * (w * (i + 1) as f64).cos())
            .sum::<f64>()
    }

    /// Phase `phi(t)` in radians.
    pub fn phase(&self, t: f64) -> Result<f64> {
        self.check_support(t)?;
        Ok(self.phase_unchecked(t))
    }

    /// Instantaneous frequency `m(t) = sum_k b_k sin(2 pi k t / T)` in Hz.
    pub fn modulation(&self, t: f64) -> Result<f64> {
        self.check_support(t)?;
        let w = 2.0 * PI * t / self.duration;
        Ok(self
            .fm_amplitudes()
            .iter()
            .enumerate()
            .map(|(i, b)| b * (w * (i + 1) as f64).sin())
            .sum())
    }

    /// `sum_k k |beta_k|`, a bound on `T max |m(t)|`.
    pub fn support_estimate(&self) -> f64 {
        self.mod_indices
            .iter()
            .enumerate()
            .map(|(i, b)| (i + 1) as f64 * b.abs())
            .sum()
    }

    /// Upper bound on the instantaneous frequency magnitude (Hz).
    pub fn max_frequency(&self) -> f64 {
        self.support_estimate() / self.duration
    }

    pub fn default_sample_rate(&self) -> f64 {
        DEFAULT_OVERSAMPLE * (self.max_frequency() + 1.0 / self.duration)
    }

    /// `ceil(sum_k k |beta_k|)` plus a guard. Where the instantaneous
    /// frequency peaks the spectrum decays over a width growing like
    /// `(sum_k k^3 |beta_k|)^(1/3)`, so the guard scales with it.
    pub fn default_order_bound(&self) -> usize {
        let curvature: f64 = self
            .mod_indices
            .iter()
            .enumerate()
            .map(|(i, b)| ((i + 1) as f64).powi(3) * b.abs())
            .sum();
        self.support_estimate().ceil() as usize
            + ORDER_GUARD
            + (TAIL_WIDTHS * curvature.cbrt()).ceil() as usize
    }

    pub fn time_series(&self, sample_rate: f64) -> Result<SampledWaveform> {
        self.time_series_with(sample_rate, SamplingOptions::default())
    }

    pub fn time_series_with(&self, sample_rate: f64, opts: SamplingOptions) -> Result<SampledWaveform> {
        check_sample_rate(sample_rate, self.max_frequency(), "MTSFM", opts)?;
        Ok(sample_constant_modulus(
            self.duration,
            self.energy,
            sample_rate,
            |t| self.phase_unchecked(t),
        ))
    }

    /// Fourier-series coefficients `c_m`, `|m| <= order_bound`.
    pub fn coefficients(&self, order_bound: usize) -> Result<CoefficientSet> {
        if order_bound < 1 {
            return Err(Error::invalid("order bound must be at least 1"));
        }
        let engine = CoefficientEngine::new(self.mod_indices.len(), order_bound, self.support_estimate());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * order_bound + 1];
        engine.compute(&self.mod_indices, &mut coeffs);
        Ok(CoefficientSet {
            coeffs,
            order_bound,
            energy: self.energy,
        })
    }

    /// `S(f) = sqrt(E T) sum_m c_m sinc(pi T (f - m / T))`.
    pub fn spectrum(&self, coeffs: &CoefficientSet, f: f64) -> Complex64 {
        let x = f * self.duration;
        let sum: Complex64 = coeffs
            .iter()
            .map(|(m, c)| c * sinc_pi(x - m as f64))
            .sum();
        sum * (self.energy * self.duration).sqrt()
    }

    /// On-grid ESD `E T |c_m|^2`; integrates to at most `E`, the deficit being
    /// the energy outside the grid.
    pub fn esd_on_grid(&self, grid: &FrequencyGrid) -> Result<SpectralDensity> {
        check_rayleigh_grid(grid, self.duration)?;
        let bound = self.default_order_bound().max(grid.half_order());
        let coeffs = self.coefficients(bound)?;
        esd_from_coefficients(&coeffs, grid)
    }
}

pub(crate) fn check_rayleigh_grid(grid: &FrequencyGrid, duration: f64) -> Result<()> {
    if (grid.duration() - duration).abs() > 1e-12 * duration {
        return Err(Error::invalid(format!(
            "grid spacing 1/{} does not match waveform duration {duration}",
            grid.duration()
        )));
    }
    Ok(())
}

pub(crate) fn esd_from_coefficients(
    coeffs: &CoefficientSet,
    grid: &FrequencyGrid,
) -> Result<SpectralDensity> {
    let scale = coeffs.energy * grid.duration();
    let values = grid
        .indices()
        .map(|m| scale * coeffs.get(m).norm_sqr())
        .collect();
    SpectralDensity::new(*grid, values)
}

/// Coefficients `c_m` for `m = -order_bound ..= order_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub coeffs: Vec<Complex64>,
    pub order_bound: usize,
    pub energy: f64,
}

impl CoefficientSet {
    /// `c_m`, zero beyond the order bound.
    pub fn get(&self, m: i64) -> Complex64 {
        let idx = m + self.order_bound as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let b = self.order_bound as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - b, *c))
    }

    pub fn power(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `1 - sum |c_m|^2`: energy fraction beyond the order bound.
    pub fn tail_energy(&self) -> f64 {
        (1.0 - self.power()).max(0.0)
    }

    /// CSV rows `m, real, imag`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "real", "imag"])?;
        for (m, c) in self.iter() {
            w.write_record([m.to_string(), c.re.to_string(), c.im.to_string()])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<coefficient csv>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Planned DFT evaluation of the coefficients for a fixed harmonic count and
/// order bound. The coefficients depend on the indices only, not on `T`.
#[derive(Clone)]
pub struct CoefficientEngine {
    n: usize,
    harmonics: usize,
    order_bound: usize,
    fft: Arc<dyn Fft<f64>>,
    // cos(2 pi j / n) for j in 0..n
    cos_table: Vec<f64>,
}

impl std::fmt::Debug for CoefficientEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientEngine")
            .field("n", &self.n)
            .field("harmonics", &self.harmonics)
            .field("order_bound", &self.order_bound)
            .finish()
    }
}

impl CoefficientEngine {
    /// `support` is the largest `sum_k k |beta_k|` the engine must resolve.
    pub fn new(harmonics: usize, order_bound: usize, support: f64) -> Self {
        let min_n = (8 * (2 * order_bound + 1))
            .max(8 * (support.ceil() as usize + ORDER_GUARD))
            .max(4 * harmonics + 8);
        let n = min_n.next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let cos_table = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
        CoefficientEngine {
            n,
            harmonics,
            order_bound,
            fft,
            cos_table,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn order_bound(&self) -> usize {
        self.order_bound
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    /// Full periodic coefficient vector: entry `j` holds `c_j` for
    /// `j < n/2` and `c_{j-n}` above.
    pub fn compute_periodic(&self, beta: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        // t_j = T (j / n - 1/2): cos(2 pi k t_j / T) = (-1)^k cos(2 pi k j / n)
        let mut buf: Vec<Complex64> = (0..n)
            .map(|j| {
                let mut phi = 0.0;
                for (i, b) in beta.iter().enumerate() {
                    let k = i + 1;
                    let c = self.cos_table[(k * j) % n];
                    phi -= if k % 2 == 0 { b * c } else { -b * c };
                }
                Complex64::from_polar(1.0, phi)
            })
            .collect();
        self.fft.process(&mut buf);
        let inv_n = 1.0 / n as f64;
        for (j, v) in buf.iter_mut().enumerate() {
            // exp(-j 2 pi m t_j / T) = (-1)^m exp(-j 2 pi m j / n); m = j or j - n (n even)
            let sign = if j % 2 == 0 { inv_n } else { -inv_n };
            *v *= sign;
        }
        buf
    }

    /// Writes `c_m` for `|m| <= order_bound` into `out` (length `2 M_c + 1`).
    pub fn compute(&self, beta: &[f64], out: &mut [Complex64]) {
        let full = self.compute_periodic(beta);
        self.extract(&full, out);
    }

    pub fn extract(&self, full: &[Complex64], out: &mut [Complex64]) {
        let b = self.order_bound as i64;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.periodic_get(full, i as i64 - b);
        }
    }

    pub fn periodic_get(&self, full: &[Complex64], m: i64) -> Complex64 {
        full[m.rem_euclid(self.n as i64) as usize]
    }
}

/// RMS bandwidth `2 pi sqrt(integral f^2 E_s(f) df / E)` in rad/s.
pub fn rms_bandwidth(esd: &SpectralDensity, energy: f64) -> Result<f64> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::invalid(format!("energy must be positive, got {energy}")));
    }
    let grid = esd.grid();
    let second_moment: f64 = esd
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| grid.freq(i).powi(2) * v)
        .sum::<f64>()
        * grid.spacing();
    Ok(2.0 * PI * (second_moment / energy).sqrt())
}
