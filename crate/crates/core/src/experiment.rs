//! Config-driven energy sweeps: MI design, OFDM target, multistart MTSFM fit,
//! matched LFM and detection statistics per energy, written as CSV and JSON.
//!
//! Every output byte is a function of the config (including its seeds); the
//! output directory is not part of the config hash.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::{design_mi, MiDesign};
use crate::detection::{
    analytic_roc, detection_metric, monte_carlo_roc, spectrum_from_esd, write_roc_csv,
    EmpiricalPoint, MonteCarloConfig, MonteCarloRoc, MIN_TRIALS,
};
use crate::error::{Error, Result};
use crate::fitting::{
    fit, solve_ofdm_coeffs_with, write_fit_csv, FitConfig, FitResult, GradientMode,
    OfdmTarget, DEFAULT_SUPPORT_TOL,
};
use crate::lfm::{lfm_esd_with, match_rms_bandwidth_with, LfmEsdMode, LfmWaveform};
use crate::mtsfm::{rms_bandwidth, MtsfmWaveform};
use crate::spectral::{FrequencyGrid, PsdKind, Scenario, SpectralDensity};
pub use crate::stats::{summarize_boxplot, BoxSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitParams {
    pub harmonics: usize,
    pub delta: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient: GradientMode,
    pub support_tol: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            harmonics: 8,
            delta: 0.2,
            n_starts: 100,
            seed: 0,
            max_iterations: 500,
            gradient: GradientMode::default(),
            support_tol: DEFAULT_SUPPORT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloParams {
    /// H1 trials per energy; H0 uses ten times as many.
    pub trials: usize,
    pub seed: u64,
    pub p_fa: Vec<f64>,
}

impl Default for MonteCarloParams {
    fn default() -> Self {
        MonteCarloParams {
            trials: 10_000,
            seed: 1,
            p_fa: vec![0.01, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Operational band `W` in Hz.
    pub band_width: f64,
    /// Pulse length `T` in s.
    pub duration: f64,
    pub target_variance: f64,
    pub energies: Vec<f64>,
    pub noise: PsdKind,
    pub channel: PsdKind,
    #[serde(default)]
    pub lfm_esd: LfmEsdMode,
    #[serde(default)]
    pub fit: FitParams,
    #[serde(default)]
    pub monte_carlo: MonteCarloParams,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Noise valley shared by both reconstructed clutter scenarios: 20 dB
    /// deeper at DC than at the band edges.
    fn reconstructed(name: &str, channel: PsdKind) -> Self {
        ExperimentConfig {
            name: name.into(),
            band_width: 20.0,
            duration: 1.0,
            target_variance: 1.0,
            energies: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            noise: PsdKind::noise_valley_db(1.0, 20.0),
            channel,
            lfm_esd: LfmEsdMode::default(),
            fit: FitParams::default(),
            monte_carlo: MonteCarloParams::default(),
            output_dir: PathBuf::from("out").join(name),
        }
    }

    /// Flat clutter with a deep notch at DC.
    pub fn clutter_notch() -> Self {
        Self::reconstructed(
            "clutter_notch",
            PsdKind::ClutterNotch {
                level: 1000.0,
                depth: 0.99,
                notch_width: 2.0,
            },
        )
    }

    /// Oscillatory clutter with a peak at DC.
    pub fn clutter_peak() -> Self {
        Self::reconstructed(
            "clutter_peak",
            PsdKind::ClutterPeak {
                floor: 0.1,
                peak_amplitude: 10.0,
                peak_width: 2.0,
                ripple_amplitude: 2.0,
                ripple_cycles: 3.0,
            },
        )
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Reads a TOML config; relative table paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| e.with_context(format!("config {}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for kind in [&mut cfg.noise, &mut cfg.channel] {
            if let PsdKind::TableFile { path: p } = kind {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive, got {v}")))
            }
        };
        positive("band_width", self.band_width)?;
        positive("duration", self.duration)?;
        positive("target_variance", self.target_variance)?;
        if self.energies.is_empty() {
            return Err(config_err("energies must not be empty"));
        }
        for &e in &self.energies {
            positive("energy", e)?;
        }
        if self.fit.n_starts == 0 {
            return Err(config_err("fit.n_starts must be at least 1"));
        }
        if self.fit.harmonics == 0 {
            return Err(config_err("fit.harmonics must be at least 1"));
        }
        if !(self.fit.delta > 0.0 && self.fit.delta < 1.0) {
            return Err(config_err(format!("fit.delta must lie in (0, 1), got {}", self.fit.delta)));
        }
        if !(self.fit.support_tol > 0.0 && self.fit.support_tol <= 0.1) {
            return Err(config_err(format!(
                "fit.support_tol must lie in (0, 0.1], got {}",
                self.fit.support_tol
            )));
        }
        if self.monte_carlo.trials < MIN_TRIALS {
            return Err(config_err(format!(
                "monte_carlo.trials must be at least {MIN_TRIALS}, got {}",
                self.monte_carlo.trials
            )));
        }
        if self.monte_carlo.p_fa.is_empty()
            || self.monte_carlo.p_fa.iter().any(|p| !(*p > 0.0 && *p <= 1.0))
        {
            return Err(config_err("monte_carlo.p_fa must be a nonempty list in (0, 1]"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring `output_dir`.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes to JSON");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.band_width, self.duration)
    }

    /// Scenario at energy `energy`.
    pub fn scenario(&self, energy: f64) -> Result<Scenario> {
        let grid = self.grid()?;
        Scenario::from_kinds(&grid, &self.noise, &self.channel, self.target_variance, energy)
    }

    fn fit_config(&self) -> FitConfig {
        FitConfig {
            harmonics: self.fit.harmonics,
            delta: self.fit.delta,
            n_starts: self.fit.n_starts,
            seed: self.fit.seed,
            max_iterations: self.fit.max_iterations,
            gradient: self.fit.gradient,
            ..FitConfig::default()
        }
    }

    fn monte_carlo_config(&self, energy_index: usize) -> MonteCarloConfig {
        MonteCarloConfig {
            trials: self.monte_carlo.trials,
            // Distinct seed per energy so sweeps do not share noise draws.
            seed: self.monte_carlo.seed.wrapping_add(energy_index as u64),
            p_fa: self.monte_carlo.p_fa.clone(),
            ..MonteCarloConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub fit_seed: u64,
    pub monte_carlo_seed: u64,
    pub tool_version: String,
}

impl Provenance {
    fn of(cfg: &ExperimentConfig) -> Self {
        Provenance {
            config_hash: cfg.hash(),
            fit_seed: cfg.fit.seed,
            monte_carlo_seed: cfg.monte_carlo.seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRecord {
    pub p_fa: f64,
    pub p_d_mi: f64,
    pub p_d_mtsfm_best: f64,
    pub p_d_lfm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub energy: f64,
    pub lambda: f64,
    pub kappa: usize,
    pub active_bins: usize,
    pub rms_bandwidth: f64,
    pub mi_d_squared: f64,
    pub lfm_d_squared: f64,
    pub lfm_sweep_bandwidth: f64,
    pub mtsfm_d_squared: BoxSummary,
    pub mtsfm_best_beta: Vec<f64>,
    pub mtsfm_converged: usize,
    /// Fits with `d^2` strictly above the LFM's.
    pub mtsfm_beating_lfm: usize,
    /// Median MTSFM `d^2` over LFM `d^2`, minus one.
    pub mtsfm_advantage: f64,
    pub analytic_roc: Vec<RocRecord>,
    /// Monte Carlo check of the MI design's ROC.
    pub monte_carlo: Option<Vec<EmpiricalPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub provenance: Provenance,
    pub records: Vec<EnergyRecord>,
}

/// Everything computed for one energy.
#[derive(Debug, Clone)]
pub struct EnergyOutcome {
    pub scenario: Scenario,
    pub design: MiDesign,
    pub target: OfdmTarget,
    pub fits: Vec<FitResult>,
    pub lfm: LfmWaveform,
    pub lfm_esd: SpectralDensity,
    /// ESD of the fit with the largest `d^2`.
    pub best_mtsfm_esd: SpectralDensity,
    pub roc: MonteCarloRoc,
    pub record: EnergyRecord,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub outcomes: Vec<EnergyOutcome>,
    pub report: ExperimentReport,
}

fn energy_label(e: f64) -> String {
    format!("E={e}")
}

/// MI design for every configured energy.
pub fn run_design(cfg: &ExperimentConfig) -> Result<Vec<(Scenario, MiDesign)>> {
    cfg.validate()?;
    cfg.energies
        .iter()
        .map(|&e| {
            let sc = cfg.scenario(e)?;
            let d = design_mi(&sc)?;
            Ok((sc, d))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.with_context(format!("scenario {}", cfg.name)))
}

fn run_energy(cfg: &ExperimentConfig, index: usize, energy: f64) -> Result<EnergyOutcome> {
    let scenario = cfg.scenario(energy)?;
    let grid = *scenario.grid();
    let design = design_mi(&scenario)?;
    let mi_d2 = detection_metric(&design.esd, &scenario)?;

    let target = solve_ofdm_coeffs_with(&design.esd, &grid, energy, cfg.fit.support_tol)?;
    let fits = fit(&target, &cfg.fit_config(), Some(&scenario))?;
    let d2: Vec<f64> = fits.iter().filter_map(|r| r.d_squared_achieved).collect();
    let best = &fits[0];
    let best_d2 = d2[0];
    if best_d2 > mi_d2 + 1e-9 * mi_d2.max(1.0) {
        return Err(Error::Numerical(format!(
            "MTSFM d^2 {best_d2} exceeds the MI bound {mi_d2}"
        )));
    }
    let best_mtsfm_esd =
        MtsfmWaveform::new(grid.duration(), energy, best.beta.clone())?.esd_on_grid(&grid)?;

    let beta_rms = rms_bandwidth(&design.esd, energy)?;
    let lfm = match_rms_bandwidth_with(beta_rms, grid.duration(), energy, &grid, cfg.lfm_esd)?;
    let lfm_esd = lfm_esd_with(&lfm, &grid, cfg.lfm_esd)?;
    let lfm_d2 = detection_metric(&lfm_esd, &scenario)?;

    let summary = summarize_boxplot(&d2)?;
    let p_fa = &cfg.monte_carlo.p_fa;
    let analytic = [mi_d2, best_d2, lfm_d2]
        .iter()
        .map(|&d| analytic_roc(d, p_fa))
        .collect::<Result<Vec<_>>>()?;
    let analytic_roc = (0..p_fa.len())
        .map(|i| RocRecord {
            p_fa: p_fa[i],
            p_d_mi: analytic[0][i].p_d,
            p_d_mtsfm_best: analytic[1][i].p_d,
            p_d_lfm: analytic[2][i].p_d,
        })
        .collect();
    let roc = monte_carlo_roc(
        &spectrum_from_esd(&design.esd),
        &scenario,
        &cfg.monte_carlo_config(index),
    )?;

    let record = EnergyRecord {
        energy,
        lambda: design.lagrange_lambda,
        kappa: target.support_halfwidth,
        active_bins: design.active_set.len(),
        rms_bandwidth: beta_rms,
        mi_d_squared: mi_d2,
        lfm_d_squared: lfm_d2,
        lfm_sweep_bandwidth: lfm.sweep_bandwidth,
        mtsfm_best_beta: best.beta.clone(),
        mtsfm_converged: fits.iter().filter(|r| r.converged).count(),
        mtsfm_beating_lfm: d2.iter().filter(|&&d| d > lfm_d2).count(),
        mtsfm_advantage: summary.median / lfm_d2 - 1.0,
        mtsfm_d_squared: summary,
        analytic_roc,
        monte_carlo: Some(roc.points.clone()),
    };
    Ok(EnergyOutcome {
        scenario,
        design,
        target,
        fits,
        lfm,
        lfm_esd,
        best_mtsfm_esd,
        roc,
        record,
    })
}

/// Runs the full pipeline for every energy in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let mut outcomes = Vec::with_capacity(cfg.energies.len());
    for (i, &e) in cfg.energies.iter().enumerate() {
        log::info!("{}: energy {e}", cfg.name);
        let out = run_energy(cfg, i, e)
            .map_err(|err| err.with_context(format!("scenario {}, energy {e}", cfg.name)))?;
        outcomes.push(out);
    }
    let report = ExperimentReport {
        name: cfg.name.clone(),
        provenance: Provenance::of(cfg),
        records: outcomes.iter().map(|o| o.record.clone()).collect(),
    };
    Ok(ExperimentRun {
        config: cfg.clone(),
        outcomes,
        report,
    })
}

/// One ESD column of the table.
pub struct EsdColumn<'a> {
    pub name: String,
    pub esd: &'a SpectralDensity,
}

/// CSV with columns `f, P_n, P_h` followed by one column per ESD.
pub fn write_esd_table<W: Write>(
    noise: &SpectralDensity,
    channel: &SpectralDensity,
    columns: &[EsdColumn<'_>],
    out: W,
) -> Result<()> {
    let grid = noise.grid();
    channel.check_same_grid(grid)?;
    for c in columns {
        c.esd.check_same_grid(grid)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["f".to_string(), "P_n".into(), "P_h".into()];
    header.extend(columns.iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    for i in 0..grid.num_bins() {
        let mut row = vec![
            grid.freq(i).to_string(),
            noise.values()[i].to_string(),
            channel.values()[i].to_string(),
        ];
        row.extend(columns.iter().map(|c| c.esd.values()[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<esd table>".into(),
        source,
    })?;
    Ok(())
}

/// Writes the MI ESD and, when given, the best MTSFM ESD for every energy.
pub fn emit_esd_table(
    designs: &[(Scenario, MiDesign)],
    mtsfm: Option<&[SpectralDensity]>,
    path: &Path,
) -> Result<()> {
    let (first, _) = designs
        .first()
        .ok_or_else(|| Error::invalid("no designs to tabulate"))?;
    let mut columns: Vec<EsdColumn<'_>> = designs
        .iter()
        .map(|(sc, d)| EsdColumn {
            name: format!("E_s@{}", energy_label(sc.energy)),
            esd: &d.esd,
        })
        .collect();
    if let Some(m) = mtsfm {
        columns.extend(designs.iter().zip(m).map(|((sc, _), esd)| EsdColumn {
            name: format!("mtsfm@{}", energy_label(sc.energy)),
            esd,
        }));
    }
    write_file(path, |w| {
        write_esd_table(&first.noise_psd, &first.channel_psd, &columns, w)
    })
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w).map_err(|e| e.with_context(path.display().to_string()))?;
    w.flush().map_err(io_err)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

fn write_summary_csv<W: Write>(records: &[EnergyRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "energy",
        "lambda",
        "kappa",
        "mi_d2",
        "lfm_d2",
        "lfm_bandwidth",
        "mtsfm_min",
        "mtsfm_q1",
        "mtsfm_median",
        "mtsfm_q3",
        "mtsfm_max",
        "mtsfm_outliers",
        "mtsfm_beating_lfm",
        "mtsfm_advantage",
    ])?;
    for r in records {
        let b = &r.mtsfm_d_squared;
        w.write_record([
            r.energy.to_string(),
            r.lambda.to_string(),
            r.kappa.to_string(),
            r.mi_d_squared.to_string(),
            r.lfm_d_squared.to_string(),
            r.lfm_sweep_bandwidth.to_string(),
            b.min.to_string(),
            b.q1.to_string(),
            b.median.to_string(),
            b.q3.to_string(),
            b.max.to_string(),
            b.outliers.len().to_string(),
            r.mtsfm_beating_lfm.to_string(),
            r.mtsfm_advantage.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<summary csv>".into(),
        source,
    })?;
    Ok(())
}

/// Writes `summary.csv`, `report.json`, `esd_table.csv` and per-energy
/// `fits_E=<e>.csv` and `roc_E=<e>.csv` into `dir`.
pub fn write_outputs(run: &ExperimentRun, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    write_file(&dir.join("summary.csv"), |w| write_summary_csv(&run.report.records, w))?;
    write_json(&dir.join("report.json"), &run.report)?;
    let designs: Vec<(Scenario, MiDesign)> = run
        .outcomes
        .iter()
        .map(|o| (o.scenario.clone(), o.design.clone()))
        .collect();
    let mtsfm: Vec<SpectralDensity> = run.outcomes.iter().map(|o| o.best_mtsfm_esd.clone()).collect();
    emit_esd_table(&designs, Some(&mtsfm), &dir.join("esd_table.csv"))?;
    for o in &run.outcomes {
        let label = energy_label(o.scenario.energy);
        write_file(&dir.join(format!("fits_{label}.csv")), |w| write_fit_csv(&o.fits, w))?;
        write_file(&dir.join(format!("roc_{label}.csv")), |w| write_roc_csv(&o.roc, w))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub energy: f64,
    pub lambda: f64,
    pub achieved_energy: f64,
    pub active_bins: usize,
    pub d_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub name: String,
    pub provenance: Provenance,
    pub records: Vec<DesignRecord>,
}

/// MI designs only: `design.json` and `esd_table.csv` in `dir`.
pub fn write_design_outputs(cfg: &ExperimentConfig, dir: &Path) -> Result<DesignReport> {
    let designs = run_design(cfg)?;
    let records = designs
        .iter()
        .map(|(sc, d)| {
            Ok(DesignRecord {
                energy: sc.energy,
                lambda: d.lagrange_lambda,
                achieved_energy: d.achieved_energy,
                active_bins: d.active_set.len(),
                d_squared: detection_metric(&d.esd, sc)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = DesignReport {
        name: cfg.name.clone(),
        provenance: Provenance::of(cfg),
        records,
    };
    create_dir(dir)?;
    write_json(&dir.join("design.json"), &report)?;
    emit_esd_table(&designs, None, &dir.join("esd_table.csv"))?;
    Ok(report)
}

/// Monte Carlo ROC of each MI design: `roc_E=<e>.csv` plus `roc.json`.
pub fn write_roc_outputs(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<MonteCarloRoc>> {
    let designs = run_design(cfg)?;
    create_dir(dir)?;
    let mut rocs = Vec::with_capacity(designs.len());
    for (i, (sc, d)) in designs.iter().enumerate() {
        let roc = monte_carlo_roc(&spectrum_from_esd(&d.esd), sc, &cfg.monte_carlo_config(i))
            .map_err(|e| e.with_context(format!("scenario {}, energy {}", cfg.name, sc.energy)))?;
        let label = energy_label(sc.energy);
        write_file(&dir.join(format!("roc_{label}.csv")), |w| write_roc_csv(&roc, w))?;
        rocs.push(roc);
    }
    write_json(&dir.join("roc.json"), &rocs)?;
    Ok(rocs)
}

/// Loads a `report.json` written by [`write_outputs`].
pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Plain-text table of a report.
pub fn format_report(report: &ExperimentReport) -> String {
    let mut s = format!(
        "{} (config {}, tool {})\n",
        report.name,
        &report.provenance.config_hash[..12.min(report.provenance.config_hash.len())],
        report.provenance.tool_version
    );
    s += &format!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8}\n",
        "E", "MI d2", "LFM d2", "MTS min", "MTS med", "MTS max", "beat LFM", "adv"
    );
    for r in &report.records {
        let b = &r.mtsfm_d_squared;
        s += &format!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>6}/{:<3} {:>8.3}\n",
            r.energy,
            r.mi_d_squared,
            r.lfm_d_squared,
            b.min,
            b.median,
            b.max,
            r.mtsfm_beating_lfm,
            b.count,
            r.mtsfm_advantage
        );
    }
    s
}
