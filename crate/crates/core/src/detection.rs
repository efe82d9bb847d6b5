//! Detection metric, analytic ROC and a Monte Carlo Neyman-Pearson receiver.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Scenario, SpectralDensity};

/// `sigma_A^2 * integral |S|^2 / (P_h |S|^2 + P_n) df` on the scenario grid.
pub fn detection_metric(esd: &SpectralDensity, scenario: &Scenario) -> Result<f64> {
    esd.check_same_grid(scenario.grid())?;
    let sum: f64 = esd
        .values()
        .iter()
        .zip(scenario.channel_psd.values())
        .zip(scenario.noise_psd.values())
        .map(|((&e, &ph), &pn)| e / (ph * e + pn))
        .sum();
    Ok(scenario.target_variance * sum * scenario.grid().spacing())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub p_fa: f64,
    pub p_d: f64,
}

/// `P_D = P_FA^(1 / (1 + d^2))` for each false-alarm probability.
pub fn analytic_roc(d_squared: f64, p_fa: &[f64]) -> Result<Vec<RocPoint>> {
    if !(d_squared.is_finite() && d_squared >= 0.0) {
        return Err(Error::invalid(format!(
            "detection metric must be finite and nonnegative, got {d_squared}"
        )));
    }
    let exponent = 1.0 / (1.0 + d_squared);
    p_fa.iter()
        .map(|&p| {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::invalid(format!(
                    "false-alarm probability must lie in (0, 1], got {p}"
                )));
            }
            Ok(RocPoint {
                p_fa: p,
                p_d: p.powf(exponent),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub d_squared: f64,
    pub roc: Vec<RocPoint>,
    pub esd_used: SpectralDensity,
}

pub fn detection_report(
    esd: &SpectralDensity,
    scenario: &Scenario,
    p_fa: &[f64],
) -> Result<DetectionReport> {
    let d_squared = detection_metric(esd, scenario)?;
    let mut sorted = p_fa.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DetectionReport {
        d_squared,
        roc: analytic_roc(d_squared, &sorted)?,
        esd_used: esd.clone(),
    })
}

fn check_bins(name: &str, v: &[Complex64], scenario: &Scenario) -> Result<()> {
    if v.len() != scenario.grid().num_bins() {
        return Err(Error::invalid(format!(
            "{name} has {} bins, scenario grid has {}",
            v.len(),
            scenario.grid().num_bins()
        )));
    }
    Ok(())
}

/// Whitening weights `S* / (P_h |S|^2 + P_n)` of the optimal receiver.
fn receiver_weights(s_bins: &[Complex64], scenario: &Scenario) -> Vec<Complex64> {
    s_bins
        .iter()
        .zip(scenario.channel_psd.values())
        .zip(scenario.noise_psd.values())
        .map(|((s, &ph), &pn)| s.conj() / (ph * s.norm_sqr() + pn))
        .collect()
}

/// Test statistic `|sum_m X(f_m) S*(f_m) / (P_h |S|^2 + P_n)|^2`.
pub fn np_statistic(x_bins: &[Complex64], s_bins: &[Complex64], scenario: &Scenario) -> Result<f64> {
    check_bins("received spectrum", x_bins, scenario)?;
    check_bins("waveform spectrum", s_bins, scenario)?;
    let w = receiver_weights(s_bins, scenario);
    Ok(x_bins
        .iter()
        .zip(&w)
        .map(|(x, w)| x * w)
        .sum::<Complex64>()
        .norm_sqr())
}

/// Waveform spectrum samples `sqrt(E_s(f_m))` with zero phase.
pub fn spectrum_from_esd(esd: &SpectralDensity) -> Vec<Complex64> {
    esd.values()
        .iter()
        .map(|&v| Complex64::new(v.sqrt(), 0.0))
        .collect()
}

#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    /// H1 trials.
    pub trials: usize,
    /// H0 trials used to set thresholds; `None` means ten times `trials`.
    pub h0_trials: Option<usize>,
    pub seed: u64,
    pub p_fa: Vec<f64>,
    /// Independent RNG streams; the output is a function of
    /// `(seed, streams)` and not of the thread count.
    pub streams: usize,
    /// PSD-to-bin-variance factor; `None` means the duration `T`.
    pub bin_variance: Option<f64>,
    /// Overrides the scenario target variance (zero is allowed here).
    pub target_variance: Option<f64>,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            trials: 100_000,
            h0_trials: None,
            seed: 0,
            p_fa: vec![0.001, 0.01, 0.05, 0.1, 0.2, 0.5],
            streams: 64,
            bin_variance: None,
            target_variance: None,
        }
    }
}

pub const MIN_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPoint {
    pub p_fa_target: f64,
    pub threshold: f64,
    pub p_fa_hat: f64,
    pub p_fa_stderr: f64,
    pub p_d_hat: f64,
    pub p_d_stderr: f64,
    pub p_d_analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloRoc {
    pub trials: usize,
    pub h0_trials: usize,
    pub rng_seed: u64,
    pub streams: usize,
    pub d_squared: f64,
    pub points: Vec<EmpiricalPoint>,
}

impl MonteCarloRoc {
    pub fn thresholds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.threshold).collect()
    }
}

fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn complex_normal(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

struct TrialModel<'a> {
    s: &'a [Complex64],
    w: Vec<Complex64>,
    clutter_var: Vec<f64>,
    noise_var: Vec<f64>,
    target_variance: f64,
}

impl TrialModel<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng, target_present: bool) -> f64 {
        let a = if target_present {
            complex_normal(rng, self.target_variance)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..self.s.len() {
            let h = complex_normal(rng, self.clutter_var[m]);
            let n = complex_normal(rng, self.noise_var[m]);
            let x = (a + h) * self.s[m] + n;
            acc += x * self.w[m];
        }
        acc.norm_sqr()
    }

    fn run(&self, seed: u64, stream_base: u64, streams: usize, trials: usize, h1: bool) -> Vec<f64> {
        let per = trials / streams;
        let extra = trials % streams;
        (0..streams)
            .into_par_iter()
            .map(|k| {
                let count = per + usize::from(k < extra);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream_base + k as u64);
                (0..count).map(|_| self.draw(&mut rng, h1)).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .concat()
    }
}

/// Simulates the frequency-domain return under H0 (clutter plus noise) and H1
/// (plus a `CN(0, sigma_A^2)` point target redrawn every trial), sets
/// thresholds from H0 quantiles and reports the empirical ROC.
pub fn monte_carlo_roc(
    s_bins: &[Complex64],
    scenario: &Scenario,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloRoc> {
    check_bins("waveform spectrum", s_bins, scenario)?;
    if cfg.trials < MIN_TRIALS {
        return Err(Error::invalid(format!(
            "Monte Carlo needs at least {MIN_TRIALS} trials, got {}",
            cfg.trials
        )));
    }
    let h0_trials = cfg.h0_trials.unwrap_or(10 * cfg.trials);
    if h0_trials < MIN_TRIALS {
        return Err(Error::invalid(format!(
            "Monte Carlo needs at least {MIN_TRIALS} H0 trials, got {h0_trials}"
        )));
    }
    if cfg.streams == 0 {
        return Err(Error::invalid("at least one RNG stream is required"));
    }
    let target_variance = cfg.target_variance.unwrap_or(scenario.target_variance);
    if !(target_variance.is_finite() && target_variance >= 0.0) {
        return Err(Error::invalid("target variance must be nonnegative"));
    }
    let bin_variance = cfg.bin_variance.unwrap_or(scenario.grid().duration());

    let model = TrialModel {
        s: s_bins,
        w: receiver_weights(s_bins, scenario),
        clutter_var: scenario
            .channel_psd
            .values()
            .iter()
            .map(|v| v * bin_variance)
            .collect(),
        noise_var: scenario
            .noise_psd
            .values()
            .iter()
            .map(|v| v * bin_variance)
            .collect(),
        target_variance,
    };

    let d_squared = {
        let sum: f64 = s_bins
            .iter()
            .zip(scenario.channel_psd.values())
            .zip(scenario.noise_psd.values())
            .map(|((s, &ph), &pn)| s.norm_sqr() / (ph * s.norm_sqr() + pn))
            .sum();
        target_variance * sum * scenario.grid().spacing()
    };

    let mut h0 = model.run(cfg.seed, 0, cfg.streams, h0_trials, false);
    let h1 = model.run(cfg.seed, 1 << 32, cfg.streams, cfg.trials, true);
    h0.sort_by(f64::total_cmp);

    let mut p_fa = cfg.p_fa.clone();
    p_fa.sort_by(f64::total_cmp);
    let analytic = analytic_roc(d_squared, &p_fa)?;

    let points = p_fa
        .iter()
        .zip(analytic)
        .map(|(&p, an)| {
            let n = h0.len();
            let exceed = ((p * n as f64).round() as usize).min(n);
            let threshold = if exceed == n { f64::NEG_INFINITY } else { h0[n - exceed - 1] };
            let p_fa_hat = h0.iter().filter(|&&v| v > threshold).count() as f64 / n as f64;
            let p_d_hat = h1.iter().filter(|&&v| v > threshold).count() as f64 / cfg.trials as f64;
            EmpiricalPoint {
                p_fa_target: p,
                threshold,
                p_fa_hat,
                p_fa_stderr: binomial_stderr(p_fa_hat, n),
                p_d_hat,
                p_d_stderr: binomial_stderr(p_d_hat, cfg.trials),
                p_d_analytic: an.p_d,
            }
        })
        .collect();

    Ok(MonteCarloRoc {
        trials: cfg.trials,
        h0_trials,
        rng_seed: cfg.seed,
        streams: cfg.streams,
        d_squared,
        points,
    })
}

/// CSV with columns `p_fa, p_d_analytic, p_d_empirical, stderr`.
pub fn write_roc_csv<W: Write>(roc: &MonteCarloRoc, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p_fa", "p_d_analytic", "p_d_empirical", "stderr"])?;
    for p in &roc.points {
        w.write_record([
            p.p_fa_target.to_string(),
            p.p_d_analytic.to_string(),
            p.p_d_hat.to_string(),
            p.p_d_stderr.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<roc csv>".into(),
        source,
    })?;
    Ok(())
}
