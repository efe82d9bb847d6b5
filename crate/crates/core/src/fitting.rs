//! Structured phase retrieval: fit MTSFM modulation indices to the
//! matched-illumination spectrum.
//!
//! The ideal ESD is sampled on the Rayleigh grid and mapped to real OFDM
//! coefficients through the sinc system `s_o = X c`. The indices are then
//! chosen to minimize the quartic distance
//!
//! ```text
//! F(beta) = sum_m (c_m^2 - E |I_m(beta)|^2)^2
//! ```
//!
//! subject to `(1 - delta) kappa <= sum_k k beta_k <= (1 + delta) kappa`,
//! where `I_m` are the MTSFM Fourier coefficients and `kappa` the support
//! half-width of the target. The problem is nonconvex, so every fit is a
//! multistart of local BFGS runs from random feasible points.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::detection_metric;
use crate::error::{Error, Result};
use crate::mtsfm::{sinc_pi, CoefficientEngine, MtsfmWaveform, ORDER_GUARD};
use crate::optimize::{bfgs, BfgsOptions};
use crate::spectral::{FrequencyGrid, Scenario, SpectralDensity};
use crate::stats::{summarize_boxplot, BoxSummary};

/// `X[i][j] = sinc(pi T (f_i - m_j / T))` for `m_j = -order_bound ..= order_bound`.
pub fn sinc_matrix(
    grid: &FrequencyGrid,
    sample_freqs: &[f64],
    order_bound: usize,
) -> Result<DMatrix<f64>> {
    let cols = 2 * order_bound + 1;
    if sample_freqs.len() != cols {
        return Err(Error::invalid(format!(
            "sinc system must be square: {} frequency samples for {cols} coefficient orders",
            sample_freqs.len()
        )));
    }
    let t = grid.duration();
    Ok(DMatrix::from_fn(cols, cols, |i, j| {
        let m = j as f64 - order_bound as f64;
        sinc_pi(t * sample_freqs[i] - m)
    }))
}

/// Real OFDM coefficients on the grid harmonics with their support.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmTarget {
    pub grid: FrequencyGrid,
    /// `c_m` for `m = -M/2 ..= M/2`.
    pub c: Vec<f64>,
    pub support_halfwidth: usize,
    pub energy: f64,
}

/// Default fraction of coefficient energy allowed outside the support.
pub const DEFAULT_SUPPORT_TOL: f64 = 0.01;

impl OfdmTarget {
    /// Builds a target from coefficients on `grid`.
    pub fn new(grid: FrequencyGrid, c: Vec<f64>, energy: f64, support_tol: f64) -> Result<Self> {
        if c.len() != grid.num_bins() {
            return Err(Error::invalid(format!(
                "{} coefficients for {} grid bins",
                c.len(),
                grid.num_bins()
            )));
        }
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::invalid(format!("energy must be positive, got {energy}")));
        }
        let kappa = support_halfwidth_of(&grid, &c, support_tol)?;
        Ok(OfdmTarget {
            grid,
            c,
            support_halfwidth: kappa,
            energy,
        })
    }

    pub fn c_at(&self, m: i64) -> f64 {
        self.grid.bin_of(m).map_or(0.0, |b| self.c[b])
    }

    pub fn power(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum()
    }
}

/// Solves `s_o = X c` with `s_o = sqrt(E_s(f_m) df)` sampled on the grid
/// harmonics, so that `sum c_m^2` equals the discretized ESD energy.
pub fn solve_ofdm_coeffs(
    mi_esd: &SpectralDensity,
    grid: &FrequencyGrid,
    energy: f64,
) -> Result<OfdmTarget> {
    solve_ofdm_coeffs_with(mi_esd, grid, energy, DEFAULT_SUPPORT_TOL)
}

pub fn solve_ofdm_coeffs_with(
    mi_esd: &SpectralDensity,
    grid: &FrequencyGrid,
    energy: f64,
    support_tol: f64,
) -> Result<OfdmTarget> {
    mi_esd.check_same_grid(grid)?;
    let df = grid.spacing();
    let s_o = DVector::from_iterator(
        grid.num_bins(),
        mi_esd.values().iter().map(|v| (v * df).sqrt()),
    );
    let x = sinc_matrix(grid, &grid.freqs(), grid.half_order())?;
    let c = x
        .lu()
        .solve(&s_o)
        .ok_or_else(|| Error::Numerical("sinc matrix is singular".into()))?;
    OfdmTarget::new(*grid, c.iter().copied().collect(), energy, support_tol)
}

fn support_halfwidth_of(grid: &FrequencyGrid, c: &[f64], support_tol: f64) -> Result<usize> {
    if !(support_tol > 0.0 && support_tol <= 0.1) {
        return Err(Error::invalid(format!(
            "support tolerance must lie in (0, 0.1], got {support_tol}"
        )));
    }
    let total: f64 = c.iter().map(|v| v * v).sum();
    let need = (1.0 - support_tol) * total;
    let mut acc = 0.0;
    for kappa in 0..=grid.half_order() {
        let k = kappa as i64;
        acc += if kappa == 0 {
            c[grid.bin_of(0).unwrap()].powi(2)
        } else {
            c[grid.bin_of(k).unwrap()].powi(2) + c[grid.bin_of(-k).unwrap()].powi(2)
        };
        if acc >= need {
            return Ok(kappa);
        }
    }
    Ok(grid.half_order())
}

/// Smallest `kappa` with `sum_{|m| <= kappa} c_m^2 >= (1 - tol) sum c_m^2`.
pub fn support_halfwidth(target: &OfdmTarget, support_tol: f64) -> Result<usize> {
    support_halfwidth_of(&target.grid, &target.c, support_tol)
}

/// Gradient evaluation for the local minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Exact gradient through `dc_m/dbeta_k = -(j/2)(c_{m-k} + c_{m+k})`.
    Analytic,
    /// Central finite differences.
    #[default]
    FiniteDifference,
}

/// Quartic objective with a fixed DFT plan and order bound.
#[derive(Debug, Clone)]
pub struct Objective {
    engine: CoefficientEngine,
    target_sq: Vec<f64>,
    energy: f64,
}

impl Objective {
    pub fn new(target: &OfdmTarget, harmonics: usize, order_bound: usize, support: f64) -> Self {
        let engine = CoefficientEngine::new(harmonics, order_bound, support);
        let b = order_bound as i64;
        let target_sq = (-b..=b).map(|m| target.c_at(m).powi(2)).collect();
        Objective {
            engine,
            target_sq,
            energy: target.energy,
        }
    }

    pub fn order_bound(&self) -> usize {
        self.engine.order_bound()
    }

    pub fn value(&self, beta: &[f64]) -> f64 {
        let full = self.engine.compute_periodic(beta);
        self.value_from(&full)
    }

    fn value_from(&self, full: &[Complex64]) -> f64 {
        let b = self.engine.order_bound() as i64;
        self.target_sq
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let r = t - self.energy * self.engine.periodic_get(full, i as i64 - b).norm_sqr();
                r * r
            })
            .sum()
    }

    /// Value with the analytic gradient written into `grad`.
    pub fn value_and_gradient(&self, beta: &[f64], grad: &mut [f64]) -> f64 {
        let full = self.engine.compute_periodic(beta);
        let b = self.engine.order_bound() as i64;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        for (i, t) in self.target_sq.iter().enumerate() {
            let m = i as i64 - b;
            let c = self.engine.periodic_get(&full, m);
            let r = t - self.energy * c.norm_sqr();
            value += r * r;
            if r == 0.0 {
                continue;
            }
            for (k, g) in grad.iter_mut().enumerate() {
                let k = k as i64 + 1;
                let dc = (self.engine.periodic_get(&full, m - k)
                    + self.engine.periodic_get(&full, m + k))
                    * Complex64::new(0.0, -0.5);
                let d_mag = 2.0 * (c.conj() * dc).re;
                *g += -2.0 * r * self.energy * d_mag;
            }
        }
        value
    }

    /// Central finite-difference gradient with step `h`.
    pub fn finite_difference_gradient(&self, beta: &[f64], h: f64, grad: &mut [f64]) -> f64 {
        let mut probe = beta.to_vec();
        for k in 0..beta.len() {
            probe[k] = beta[k] + h;
            let up = self.value(&probe);
            probe[k] = beta[k] - h;
            let down = self.value(&probe);
            probe[k] = beta[k];
            grad[k] = (up - down) / (2.0 * h);
        }
        self.value(beta)
    }
}

/// `F(beta)` over `|m| <= order_bound`.
pub fn objective(beta: &[f64], target: &OfdmTarget, order_bound: usize) -> Result<f64> {
    if beta.is_empty() || beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::invalid("modulation indices must be finite and nonempty"));
    }
    let support = weighted_sum_abs(beta);
    Ok(Objective::new(target, beta.len(), order_bound.max(1), support).value(beta))
}

/// `sum_k k beta_k`.
pub fn constraint_value(beta: &[f64]) -> f64 {
    beta.iter().enumerate().map(|(i, b)| (i + 1) as f64 * b).sum()
}

fn weighted_sum_abs(beta: &[f64]) -> f64 {
    beta.iter().enumerate().map(|(i, b)| (i + 1) as f64 * b.abs()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Number of sine harmonics `K`.
    pub harmonics: usize,
    pub delta: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub rel_tol: f64,
    /// Penalty escalation rounds (weight x10 each) before giving up.
    pub penalty_rounds: usize,
    pub gradient: GradientMode,
    /// Defaults to `max(M/2, ceil((1 + delta) kappa)) + 16`.
    pub order_bound: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            harmonics: 8,
            delta: 0.2,
            n_starts: 1000,
            seed: 0,
            max_iterations: 500,
            rel_tol: 1e-10,
            penalty_rounds: 6,
            gradient: GradientMode::FiniteDifference,
            order_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub start_index: usize,
    pub beta: Vec<f64>,
    pub objective: f64,
    pub constraint_value: f64,
    pub d_squared_achieved: Option<f64>,
    pub init_beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Random start with `sum_k k beta_k = s kappa`, `s ~ U[1 - delta, 1 + delta]`.
pub fn feasible_start(rng: &mut impl Rng, harmonics: usize, kappa: f64, delta: f64) -> Vec<f64> {
    let u: Vec<f64> = (0..harmonics).map(|_| rng.random::<f64>()).collect();
    let s = 1.0 - delta + 2.0 * delta * rng.random::<f64>();
    let total: f64 = u.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    u.iter()
        .enumerate()
        .map(|(i, uk)| uk * kappa * s / ((i + 1) as f64 * total))
        .collect()
}

const PENALTY_RESIDUAL_TOL: f64 = 1e-6;

struct Slab {
    lo: f64,
    hi: f64,
}

impl Slab {
    fn violation(&self, g: f64) -> f64 {
        if g < self.lo {
            self.lo - g
        } else if g > self.hi {
            g - self.hi
        } else {
            0.0
        }
    }

    fn contains(&self, g: f64) -> bool {
        let slack = 1e-9 * self.hi.abs().max(1.0);
        g >= self.lo - slack && g <= self.hi + slack
    }

    /// Euclidean projection onto `lo <= sum_k k beta_k <= hi`.
    fn project(&self, beta: &mut [f64]) {
        let g = constraint_value(beta);
        let target = g.clamp(self.lo, self.hi);
        let norm: f64 = (1..=beta.len()).map(|k| (k * k) as f64).sum();
        let shift = (target - g) / norm;
        for (i, b) in beta.iter_mut().enumerate() {
            *b += shift * (i + 1) as f64;
        }
    }
}

fn fit_one(
    problem: &Objective,
    slab: &Slab,
    init: Vec<f64>,
    start_index: usize,
    cfg: &FitConfig,
    penalty_scale: f64,
) -> FitResult {
    let opts = BfgsOptions {
        max_iterations: cfg.max_iterations,
        rel_tol: cfg.rel_tol,
        ..Default::default()
    };
    let mut beta = init.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut weight = penalty_scale;
    for _ in 0..cfg.penalty_rounds.max(1) {
        let run = bfgs(
            |x, grad| {
                let base = match cfg.gradient {
                    GradientMode::Analytic => problem.value_and_gradient(x, grad),
                    GradientMode::FiniteDifference => {
                        problem.finite_difference_gradient(x, 1e-6, grad)
                    }
                };
                let g = constraint_value(x);
                let v = slab.violation(g);
                if v > 0.0 {
                    let sign = if g < slab.lo { -1.0 } else { 1.0 };
                    for (i, gr) in grad.iter_mut().enumerate() {
                        *gr += 2.0 * weight * v * sign * (i + 1) as f64;
                    }
                }
                base + weight * v * v
            },
            &beta,
            &opts,
        );
        iterations += run.iterations;
        beta = run.x;
        converged = run.converged;
        if slab.contains(constraint_value(&beta)) {
            break;
        }
        weight *= 10.0;
    }
    let violation = slab.violation(constraint_value(&beta));
    if violation > 0.0 {
        // An active bound leaves an O(1/weight) residual; only a large one
        // means the penalty failed.
        slab.project(&mut beta);
        converged &= violation <= PENALTY_RESIDUAL_TOL * slab.hi.max(1.0);
    }
    FitResult {
        start_index,
        objective: problem.value(&beta),
        constraint_value: constraint_value(&beta),
        beta,
        d_squared_achieved: None,
        init_beta: init,
        iterations,
        converged,
    }
}

/// d^2 of the MTSFM with indices `beta` on the scenario grid.
pub fn mtsfm_d_squared(beta: &[f64], scenario: &Scenario) -> Result<f64> {
    let grid = scenario.grid();
    let w = MtsfmWaveform::new(grid.duration(), scenario.energy, beta.to_vec())?;
    detection_metric(&w.esd_on_grid(grid)?, scenario)
}

/// Multistart fit. With a scenario every result carries its achieved `d^2`
/// and the list is sorted by it (best first); otherwise by objective.
pub fn fit(
    target: &OfdmTarget,
    cfg: &FitConfig,
    scenario: Option<&Scenario>,
) -> Result<Vec<FitResult>> {
    if cfg.harmonics == 0 {
        return Err(Error::invalid("at least one harmonic is required"));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", cfg.delta)));
    }
    if cfg.n_starts == 0 {
        return Err(Error::invalid("at least one start is required"));
    }
    if let Some(s) = scenario {
        target.c.len().eq(&s.grid().num_bins()).then_some(()).ok_or_else(|| {
            Error::invalid("fit target and scenario live on different grids")
        })?;
        if (s.energy - target.energy).abs() > 1e-12 * s.energy {
            return Err(Error::invalid(format!(
                "scenario energy {} differs from target energy {}",
                s.energy, target.energy
            )));
        }
    }

    let kappa = target.support_halfwidth as f64;
    let slab = Slab {
        lo: (1.0 - cfg.delta) * kappa,
        hi: (1.0 + cfg.delta) * kappa,
    };
    let order_bound = cfg.order_bound.unwrap_or_else(|| {
        target.grid.half_order().max(slab.hi.ceil() as usize) + ORDER_GUARD
    });
    let problem = Objective::new(target, cfg.harmonics, order_bound, slab.hi);
    let penalty_scale = target.energy.powi(2) / kappa.max(1.0).powi(2);

    let mut results = (0..cfg.n_starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(start as u64);
            let init = feasible_start(&mut rng, cfg.harmonics, kappa, cfg.delta);
            if !slab.contains(constraint_value(&init)) {
                return Err(Error::Infeasible(format!(
                    "start {start} violates the support constraint"
                )));
            }
            let mut r = fit_one(&problem, &slab, init, start, cfg, penalty_scale);
            if let Some(s) = scenario {
                r.d_squared_achieved = Some(mtsfm_d_squared(&r.beta, s)?);
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;

    if scenario.is_some() {
        results.sort_by(|a, b| {
            b.d_squared_achieved
                .unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&a.d_squared_achieved.unwrap_or(f64::NEG_INFINITY))
                .then(a.start_index.cmp(&b.start_index))
        });
    } else {
        results.sort_by(|a, b| {
            a.objective
                .total_cmp(&b.objective)
                .then(a.start_index.cmp(&b.start_index))
        });
    }
    Ok(results)
}

/// Result with the lowest objective.
pub fn best_by_objective(results: &[FitResult]) -> Option<&FitResult> {
    results
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective).then(a.start_index.cmp(&b.start_index)))
}

/// CSV rows `start_index, objective, constraint_value, d_squared, converged`
/// ordered by start index.
pub fn write_fit_csv<W: Write>(results: &[FitResult], out: W) -> Result<()> {
    let mut rows: Vec<&FitResult> = results.iter().collect();
    rows.sort_by_key(|r| r.start_index);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["start_index", "objective", "constraint_value", "d_squared", "converged"])?;
    for r in rows {
        w.write_record([
            r.start_index.to_string(),
            r.objective.to_string(),
            r.constraint_value.to_string(),
            r.d_squared_achieved.map_or_else(String::new, |d| d.to_string()),
            r.converged.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<fit csv>".into(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub n_starts: usize,
    pub converged: usize,
    pub best_beta: Vec<f64>,
    pub best_objective: f64,
    pub best_d_squared: Option<f64>,
    pub d_squared: Option<BoxSummary>,
}

pub fn summarize_fits(results: &[FitResult]) -> Result<FitSummary> {
    let best = results
        .first()
        .ok_or_else(|| Error::invalid("no fit results to summarize"))?;
    let d2: Vec<f64> = results.iter().filter_map(|r| r.d_squared_achieved).collect();
    let d_squared = if d2.len() >= 5 {
        Some(summarize_boxplot(&d2)?)
    } else {
        None
    };
    Ok(FitSummary {
        n_starts: results.len(),
        converged: results.iter().filter(|r| r.converged).count(),
        best_beta: best.beta.clone(),
        best_objective: best.objective,
        best_d_squared: best.d_squared_achieved,
        d_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(half: usize) -> FrequencyGrid {
        FrequencyGrid::new(2.0 * half as f64, 1.0).unwrap()
    }

    #[test]
    fn on_grid_sinc_matrix_is_identity() {
        let g = grid(5);
        let x = sinc_matrix(&g, &g.freqs(), 5).unwrap();
        assert_eq!(x, DMatrix::identity(11, 11));
        assert!(sinc_matrix(&g, &g.freqs()[1..], 5).is_err());
    }

    #[test]
    fn offset_sinc_matrix_closed_form_and_inverse() {
        let g = grid(1);
        let freqs = [-0.5, 0.0, 0.5];
        let x = sinc_matrix(&g, &freqs, 1).unwrap();
        let two_over_pi = 2.0 / std::f64::consts::PI;
        // Row 0 samples f = -1/2: neighbours m = -1 and m = 0 at distance 1/2.
        assert!((x[(0, 0)] - two_over_pi).abs() < 1e-15);
        assert!((x[(0, 1)] - two_over_pi).abs() < 1e-15);
        assert!((x[(2, 1)] - two_over_pi).abs() < 1e-15);
        assert!((x[(2, 2)] - two_over_pi).abs() < 1e-15);
        assert_eq!(x[(1, 1)], 1.0);

        let g = grid(6);
        let freqs: Vec<f64> = g.freqs().iter().map(|f| f + 0.5).collect();
        let x = sinc_matrix(&g, &freqs, 6).unwrap();
        let inv = x.clone().try_inverse().unwrap();
        let resid = (&x * &inv - DMatrix::<f64>::identity(13, 13)).abs().max();
        assert!(resid < 1e-10, "{resid}");
    }

    #[test]
    fn flat_target_and_single_bin() {
        let g = grid(10);
        let energy = 2.0;
        let level = energy / (g.num_bins() as f64 * g.spacing());
        let esd = SpectralDensity::constant(g, level).unwrap();
        let t = solve_ofdm_coeffs(&esd, &g, energy).unwrap();
        assert!(t.c.iter().all(|&c| (c - t.c[0]).abs() < 1e-14));
        assert!((t.power() - energy).abs() < 1e-12);

        let mut v = vec![0.0; g.num_bins()];
        v[g.bin_of(3).unwrap()] = 4.0;
        let t = solve_ofdm_coeffs(&SpectralDensity::new(g, v).unwrap(), &g, 4.0).unwrap();
        assert_eq!(t.c.iter().filter(|&&c| c != 0.0).count(), 1);
        assert!((t.c_at(3) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn support_examples() {
        let g = grid(8);
        let mut c = vec![0.0; g.num_bins()];
        c[g.bin_of(0).unwrap()] = 1.0;
        let t = OfdmTarget::new(g, c, 1.0, 0.01).unwrap();
        assert_eq!(t.support_halfwidth, 0);

        let c: Vec<f64> = g.indices().map(|m| if m.abs() <= 5 { 1.0 } else { 0.0 }).collect();
        let t = OfdmTarget::new(g, c, 11.0, 0.01).unwrap();
        assert_eq!(t.support_halfwidth, 5);
        assert_eq!(support_halfwidth(&t, 0.1).unwrap(), 5);
        assert!(support_halfwidth(&t, 0.5).is_err());
    }

    #[test]
    fn objective_examples() {
        let g = grid(6);
        let energy: f64 = 3.0;
        let c: Vec<f64> = g.indices().map(|m| if m == 0 { energy.sqrt() } else { 0.0 }).collect();
        let t = OfdmTarget::new(g, c, energy, 0.01).unwrap();
        assert!(objective(&[0.0, 0.0], &t, 10).unwrap() < 1e-28);

        let l = 3;
        let n = (2 * l + 1) as f64;
        let c: Vec<f64> = g
            .indices()
            .map(|m| if m.abs() <= l { (energy / n).sqrt() } else { 0.0 })
            .collect();
        let t = OfdmTarget::new(g, c, energy, 0.01).unwrap();
        let expected = energy.powi(2) * (1.0 - 1.0 / n).powi(2) + 2.0 * l as f64 * energy.powi(2) / n.powi(2);
        let got = objective(&[0.0], &t, 10).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let g = grid(10);
        let c: Vec<f64> = g.indices().map(|m| (-(m as f64).powi(2) / 8.0).exp()).collect();
        let t = OfdmTarget::new(g, c, 2.0, 0.01).unwrap();
        let beta = [1.1, -0.4, 0.3, 0.2];
        let obj = Objective::new(&t, 4, 26, 6.0);
        let mut ga = [0.0; 4];
        let mut gf = [0.0; 4];
        obj.value_and_gradient(&beta, &mut ga);
        obj.finite_difference_gradient(&beta, 1e-5, &mut gf);
        for k in 0..4 {
            assert!(
                (ga[k] - gf[k]).abs() <= 1e-4 * ga[k].abs().max(1e-8),
                "k={k}: {} vs {}",
                ga[k],
                gf[k]
            );
        }
    }

    #[test]
    fn starts_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let b = feasible_start(&mut rng, 8, 7.0, 0.2);
            let g = constraint_value(&b);
            assert!((5.6 - 1e-12..=8.4 + 1e-12).contains(&g));
            assert!(b.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn slab_projection() {
        let slab = Slab { lo: 4.0, hi: 6.0 };
        let mut b = vec![5.0, 5.0];
        slab.project(&mut b);
        assert!((constraint_value(&b) - 6.0).abs() < 1e-12);
        let mut b = vec![1.0, 1.0];
        slab.project(&mut b);
        assert!((constraint_value(&b) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fit_validates_arguments() {
        let g = grid(4);
        let c: Vec<f64> = g.indices().map(|m| if m == 0 { 1.0 } else { 0.1 }).collect();
        let t = OfdmTarget::new(g, c, 1.0, 0.01).unwrap();
        let bad = FitConfig {
            delta: 1.0,
            n_starts: 1,
            ..Default::default()
        };
        assert!(fit(&t, &bad, None).is_err());
        let bad = FitConfig {
            harmonics: 0,
            n_starts: 1,
            ..Default::default()
        };
        assert!(fit(&t, &bad, None).is_err());
    }

    #[test]
    fn planted_single_tone_is_recovered() {
        let g = grid(12);
        let energy = 1.5;
        let planted = MtsfmWaveform::new(1.0, energy, vec![2.0]).unwrap();
        let esd = planted.esd_on_grid(&g).unwrap();
        let c: Vec<f64> = esd.values().iter().map(|v| (v * g.spacing()).sqrt()).collect();
        let t = OfdmTarget::new(g, c, energy, 0.01).unwrap();
        let cfg = FitConfig {
            harmonics: 1,
            delta: 0.5,
            n_starts: 4,
            seed: 5,
            ..Default::default()
        };
        let res = fit(&t, &cfg, None).unwrap();
        assert!(res[0].objective < 1e-6 * energy * energy, "{:?}", res[0]);
        assert!((res[0].beta[0].abs() - 2.0).abs() < 1e-3);
    }
}
