//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use miwave::design::{design_mi, solve_lambda};
use miwave::detection::{
    analytic_roc, detection_metric, monte_carlo_roc, spectrum_from_esd, MonteCarloConfig,
};
use miwave::experiment::{run_experiment, ExperimentConfig, ExperimentRun};
use miwave::fitting::{constraint_value, fit, FitConfig, GradientMode, OfdmTarget};
use miwave::lfm::{lfm_time_series, LfmWaveform};
use miwave::mtsfm::MtsfmWaveform;
use miwave::{FrequencyGrid, PsdKind, Scenario, SpectralDensity};

// Tolerances and sizes, one per criterion.
const C1_ENERGY_TOL: f64 = 1e-6;
const C1_ORACLE_TOL: f64 = 1e-4;
const C1_RANDOM_FEASIBLE: usize = 1000;
const C1_MAX_ORACLE_BINS: usize = 64;
const C1_BUDGET: Duration = Duration::from_secs(60);
const C2_LAMBDA: f64 = 0.25;
const C2_TOL: f64 = 1e-8;
const C3_BESSEL_TOL: f64 = 1e-10;
const C3_MAX_ORDER: i64 = 20;
const C3_PARSEVAL_DRAWS: usize = 1000;
const C3_PARSEVAL_TOL: f64 = 1e-8;
const C4_MODULUS_TOL: f64 = 1e-12;
const C4_DRAWS: usize = 1000;
const C5_OVERSAMPLE: usize = 16;
const C5_L2_TOL: f64 = 0.01;
const C6_D2: [f64; 3] = [0.5, 2.0, 10.0];
const C6_PFA: [f64; 2] = [0.01, 0.1];
const C6_TRIALS: usize = 100_000;
const C6_SIGMAS: f64 = 3.0;
const C6_BUDGET: Duration = Duration::from_secs(300);
const C7_CASES: usize = 50;
const C7_STARTS: usize = 20;
const C7_F_TOL: f64 = 1e-6;
const C7_RATE: f64 = 0.9;
const C8_STARTS: usize = 100;
const C8_DELTA: f64 = 0.2;
const C8_BEAT_RATE: f64 = 0.95;
const C8_BUDGET: Duration = Duration::from_secs(600);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- criterion 1

fn suite_scenarios() -> Vec<(&'static str, FrequencyGrid, PsdKind, PsdKind)> {
    let g20 = FrequencyGrid::new(20.0, 1.0).unwrap();
    let valley20 = PsdKind::noise_valley_db(1.0, 20.0);
    let valley10 = PsdKind::noise_valley_db(0.1, 10.0);
    let notch = PsdKind::ClutterNotch { level: 1000.0, depth: 0.99, notch_width: 2.0 };
    let peak = PsdKind::ClutterPeak {
        floor: 0.1,
        peak_amplitude: 10.0,
        peak_width: 2.0,
        ripple_amplitude: 2.0,
        ripple_cycles: 3.0,
    };
    vec![
        ("flat/flat", g20, PsdKind::Flat { level: 1.0 }, PsdKind::Flat { level: 1.0 }),
        ("valley/flat", g20, valley20.clone(), PsdKind::Flat { level: 0.5 }),
        (
            "valley10/notch",
            g20,
            valley10.clone(),
            PsdKind::ClutterNotch { level: 5.0, depth: 0.9, notch_width: 3.0 },
        ),
        ("valley/peak", g20, valley20.clone(), peak.clone()),
        ("valley/notch", g20, valley20.clone(), notch.clone()),
        ("flat/peak", g20, PsdKind::Flat { level: 0.2 }, peak),
        (
            "table/table",
            FrequencyGrid::new(10.0, 2.0).unwrap(),
            PsdKind::CustomTable { freqs: vec![-5.0, 0.0, 5.0], values: vec![2.0, 0.3, 1.0] },
            PsdKind::CustomTable {
                freqs: vec![-5.0, -1.0, 2.0, 5.0],
                values: vec![0.1, 3.0, 0.5, 0.2],
            },
        ),
        ("valley/notch fine", FrequencyGrid::new(30.0, 2.0).unwrap(), valley10, notch),
        (
            "tiny grid",
            FrequencyGrid::new(4.0, 1.0).unwrap(),
            PsdKind::NoiseValley { min_level: 0.5, max_level: 2.0 },
            PsdKind::Flat { level: 0.3 },
        ),
        ("noise limited", g20, valley20, PsdKind::Flat { level: 1e-3 }),
    ]
}

/// Euclidean projection onto `{x >= 0, sum x = total}`.
fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - total) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Maximizes `sum_i x_i / (a_i x_i + n_i)` over per-bin energies `x` on the
/// simplex by accelerated projected gradient with adaptive steps.
fn projected_gradient_oracle(a: &[f64], n: &[f64], total: f64) -> f64 {
    let f = |x: &[f64]| -> f64 { x.iter().zip(a).zip(n).map(|((x, a), n)| x / (a * x + n)).sum() };
    let grad = |x: &[f64]| -> Vec<f64> {
        x.iter().zip(a).zip(n).map(|((x, a), n)| n / (a * x + n).powi(2)).collect()
    };
    let dim = a.len();
    let mut x = vec![total / dim as f64; dim];
    let mut y = x.clone();
    let mut fx = f(&x);
    let mut momentum: f64 = 1.0;
    let mut step = 1.0;
    for _ in 0..200_000 {
        let gy = grad(&y);
        let fy = f(&y);
        step *= 2.0;
        let x_new = loop {
            let cand: Vec<f64> =
                project_simplex(&y.iter().zip(&gy).map(|(y, g)| y + step * g).collect::<Vec<_>>(), total);
            let d: Vec<f64> = cand.iter().zip(&y).map(|(c, y)| c - y).collect();
            let lin: f64 = gy.iter().zip(&d).map(|(g, d)| g * d).sum();
            let quad: f64 = d.iter().map(|d| d * d).sum::<f64>() / (2.0 * step);
            if f(&cand) >= fy + lin - quad || step < 1e-300 {
                break cand;
            }
            step *= 0.5;
        };
        let f_new = f(&x_new);
        if f_new < fx {
            // Restart the momentum when the objective drops.
            momentum = 1.0;
            y = x.clone();
            continue;
        }
        let next = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next;
        y = x_new.iter().zip(&x).map(|(xn, xo)| xn + beta * (xn - xo)).collect();
        momentum = next;
        let done = (f_new - fx).abs() <= 1e-15 * f_new.abs();
        x = x_new;
        fx = f_new;
        if done {
            break;
        }
    }
    fx
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_energy: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut random_wins = 0usize;
    let mut cases = 0usize;
    for (name, grid, noise, channel) in suite_scenarios() {
        assert!(grid.num_bins() <= C1_MAX_ORACLE_BINS, "{name}: grid too large for the oracle");
        for energy in [0.5, 1.0, 2.0, 10.0] {
            cases += 1;
            let sc = Scenario::from_kinds(&grid, &noise, &channel, 1.0, energy).unwrap();
            let d = design_mi(&sc).unwrap();
            worst_energy = worst_energy.max(rel(d.esd.integrate(), energy));
            let d2 = detection_metric(&d.esd, &sc).unwrap();

            for _ in 0..C1_RANDOM_FEASIBLE {
                let raw: Vec<f64> = (0..grid.num_bins()).map(|_| rng.random::<f64>().powi(3)).collect();
                let q = SpectralDensity::new(grid, raw).unwrap();
                let q = q.scaled(energy / q.integrate()).unwrap();
                if detection_metric(&q, &sc).unwrap() > d2 * (1.0 + 1e-12) {
                    random_wins += 1;
                }
            }

            let df = grid.spacing();
            let a: Vec<f64> = sc.channel_psd.values().iter().map(|h| h / df).collect();
            let oracle = sc.target_variance * projected_gradient_oracle(&a, sc.noise_psd.values(), energy);
            worst_oracle = worst_oracle.max(rel(oracle, d2));
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_energy <= C1_ENERGY_TOL
        && random_wins == 0
        && worst_oracle <= C1_ORACLE_TOL
        && elapsed < C1_BUDGET;
    outcome(
        pass,
        format!(
            "{cases} scenario/energy pairs: max energy error {worst_energy:.1e} (tol {C1_ENERGY_TOL:.0e}), \
             {random_wins} random feasible ESDs beat the design, max oracle gap {worst_oracle:.1e} \
             (tol {C1_ORACLE_TOL:.0e}), {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- criterion 2

fn criterion_2() -> Outcome {
    // Three bins of width 1/3: unit integrated band.
    let grid = FrequencyGrid::new(2.0 / 3.0, 3.0).unwrap();
    let band = grid.num_bins() as f64 * grid.spacing();
    let sc = Scenario::from_kinds(&grid, &PsdKind::Flat { level: 1.0 }, &PsdKind::Flat { level: 1.0 }, 1.0, 1.0)
        .unwrap();
    let lambda = solve_lambda(&sc).unwrap();
    let err = (lambda - C2_LAMBDA).abs();
    outcome(
        (band - 1.0).abs() < 1e-12 && err <= C2_TOL,
        format!("band {band}, lambda {lambda:.12} (expected {C2_LAMBDA}, error {err:.1e}, tol {C2_TOL:.0e})"),
    )
}

// ---------------------------------------------------------------- criterion 3

/// `J_m(x)` by its power series.
fn bessel_j(m: i64, x: f64) -> f64 {
    let order = m.unsigned_abs();
    let half = x / 2.0;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let mut sum = term;
    for k in 0..200u64 {
        term *= -half * half / ((k + 1) as f64 * (k + 1 + order) as f64);
        sum += term;
        if term.abs() < 1e-300 {
            break;
        }
    }
    if m < 0 && order % 2 == 1 {
        -sum
    } else {
        sum
    }
}

fn criterion_3() -> Outcome {
    let mut worst_bessel: f64 = 0.0;
    for beta in [0.5, 2.0, 5.0] {
        let w = MtsfmWaveform::new(1.0, 1.0, vec![beta]).unwrap();
        let c = w.coefficients(w.default_order_bound().max(C3_MAX_ORDER as usize)).unwrap();
        for m in -C3_MAX_ORDER..=C3_MAX_ORDER {
            let j = bessel_j(m, beta);
            worst_bessel = worst_bessel.max((c.get(m).norm() - j.abs()).abs());
            // Jacobi-Anger also fixes the phase: c_m = (-j)^m J_m(beta).
            let expected = Complex64::new(0.0, -1.0).powi(m as i32) * j;
            worst_bessel = worst_bessel.max((c.get(m) - expected).norm());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..C3_PARSEVAL_DRAWS {
        let k = rng.random_range(1..=12usize);
        let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
        let w = MtsfmWaveform::new(1.0, 1.0, beta).unwrap();
        let p = w.coefficients(w.default_order_bound()).unwrap().power();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    // Rounding in the DFT can push the sum a few ulps above one.
    let upper = 1.0 + 8.0 * f64::EPSILON;
    outcome(
        worst_bessel <= C3_BESSEL_TOL && lo >= 1.0 - C3_PARSEVAL_TOL && hi <= upper,
        format!(
            "max Bessel error {worst_bessel:.1e} (tol {C3_BESSEL_TOL:.0e}); \
             sum |c_m|^2 over {C3_PARSEVAL_DRAWS} draws in [1 - {:.1e}, 1 + {:.1e}]",
            1.0 - lo,
            (hi - 1.0).max(0.0)
        ),
    )
}

// ---------------------------------------------------------------- criterion 4

fn max_modulus_error(samples: &[Complex64], amplitude: f64) -> f64 {
    samples.iter().map(|s| (s.norm() - amplitude).abs() / amplitude).fold(0.0, f64::max)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..C4_DRAWS {
        let duration: f64 = rng.random_range(0.5..2.0);
        let energy: f64 = rng.random_range(0.1..10.0);
        let amplitude = (energy / duration).sqrt();
        let k = rng.random_range(1..=12usize);
        let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
        let w = MtsfmWaveform::new(duration, energy, beta).unwrap();
        let s = w.time_series(w.default_sample_rate()).unwrap();
        worst = worst.max(max_modulus_error(&s.samples, amplitude));

        let l = LfmWaveform::new(duration, energy, rng.random_range(0.0..50.0)).unwrap();
        let s = lfm_time_series(&l, l.default_sample_rate()).unwrap();
        worst = worst.max(max_modulus_error(&s.samples, amplitude));
    }
    outcome(
        worst <= C4_MODULUS_TOL,
        format!("{C4_DRAWS} MTSFM and {C4_DRAWS} LFM draws: max relative modulus error {worst:.1e} (tol {C4_MODULUS_TOL:.0e})"),
    )
}

// ---------------------------------------------------------------- criterion 5

/// Relative L2 distance between `|S(f)|^2` from the truncated sinc series and
/// the zero-padded DFT of the sampled waveform on a grid `OVERSAMPLE` times
/// finer than `1/T`. The phase is periodic, so the sample at `T/2` equals the
/// first one; splitting it between both ends gives the trapezoid rule, whose
/// error is second order in `dt` off the `1/T` grid.
fn spectrum_l2_error(w: &MtsfmWaveform) -> f64 {
    let s = w.time_series(w.default_sample_rate()).unwrap();
    let n = s.samples.len();
    let len = C5_OVERSAMPLE * n;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    buf[..n].copy_from_slice(&s.samples);
    buf[0] *= 0.5;
    buf[n] = 0.5 * s.samples[0];
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let coeffs = w.coefficients(w.default_order_bound()).unwrap();
    let df = 1.0 / (len as f64 * s.dt);
    let band = (w.default_order_bound() as f64) / w.duration();
    let (mut num, mut den) = (0.0, 0.0);
    for (q, x) in buf.iter().enumerate() {
        let q = if q < len / 2 { q as i64 } else { q as i64 - len as i64 };
        let f = q as f64 * df;
        if f.abs() > band {
            continue;
        }
        let dft = (x * s.dt).norm_sqr();
        let series = w.spectrum(&coeffs, f).norm_sqr();
        num += (series - dft).powi(2);
        den += dft * dft;
    }
    (num / den).sqrt()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases: Vec<Vec<f64>> = vec![vec![0.0], vec![2.0], vec![1.0, 0.5], vec![3.0, -1.0, 0.7]];
    for _ in 0..16 {
        let k = rng.random_range(1..=8usize);
        cases.push((0..k).map(|_| rng.random_range(-2.0..2.0)).collect());
    }
    let worst = cases
        .into_iter()
        .map(|b| spectrum_l2_error(&MtsfmWaveform::new(1.0, 2.0, b).unwrap()))
        .fold(0.0, f64::max);
    outcome(
        worst <= C5_L2_TOL,
        format!("20 waveforms at {C5_OVERSAMPLE}x zero padding: max relative L2 error {worst:.2e} (tol {C5_L2_TOL})"),
    )
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let base = ExperimentConfig::clutter_notch().scenario(2.0).unwrap();
    let design = design_mi(&base).unwrap();
    let unit_d2 = detection_metric(&design.esd, &base).unwrap();
    let s_bins = spectrum_from_esd(&design.esd);
    let mut worst_z: f64 = 0.0;
    let mut lines = Vec::new();
    for (i, &d2) in C6_D2.iter().enumerate() {
        // d^2 is linear in the target variance.
        let sc = base.with_target_variance(d2 / unit_d2).unwrap();
        let cfg = MonteCarloConfig {
            trials: C6_TRIALS,
            seed: 600 + i as u64,
            p_fa: C6_PFA.to_vec(),
            ..MonteCarloConfig::default()
        };
        let roc = monte_carlo_roc(&s_bins, &sc, &cfg).unwrap();
        let analytic = analytic_roc(d2, &C6_PFA).unwrap();
        for (p, a) in roc.points.iter().zip(&analytic) {
            let se = (a.p_d * (1.0 - a.p_d) / C6_TRIALS as f64).sqrt();
            let z = (p.p_d_hat - a.p_d).abs() / se;
            worst_z = worst_z.max(z);
            lines.push(format!("d2={d2} pfa={}: {:.4} vs {:.4}", a.p_fa, p.p_d_hat, a.p_d));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_z <= C6_SIGMAS && elapsed < C6_BUDGET,
        format!(
            "max deviation {worst_z:.2} binomial SE (limit {C6_SIGMAS}) with {C6_TRIALS} trials, {:.1}s [{}]",
            elapsed.as_secs_f64(),
            lines.join("; ")
        ),
    )
}

// ---------------------------------------------------------------- criterion 7

/// Recovery rate over planted MTSFM targets. Targets whose indices violate
/// the support slab (in all four index forms sharing the same `|c_m|`) are
/// redrawn; the number of redraws is returned too.
fn planted_recovery(lo: f64, delta: f64, seed: u64) -> (usize, usize) {
    let energy = 1.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut recovered, mut done, mut redrawn) = (0, 0, 0);
    while done < C7_CASES {
        let k = rng.random_range(1..=6usize);
        let beta: Vec<f64> = (0..k).map(|_| rng.random_range(lo..2.0)).collect();
        let w = MtsfmWaveform::new(1.0, energy, beta.clone()).unwrap();
        let half = w.support_estimate().ceil() + 12.0;
        let grid = FrequencyGrid::new(2.0 * half, 1.0).unwrap();
        let esd = w.esd_on_grid(&grid).unwrap();
        let c: Vec<f64> = esd.values().iter().map(|v| (v * grid.spacing()).sqrt()).collect();
        let target = OfdmTarget::new(grid, c, energy, 0.01).unwrap();
        let kappa = target.support_halfwidth as f64;
        let alternating: Vec<f64> =
            beta.iter().enumerate().map(|(i, b)| if i % 2 == 1 { -b } else { *b }).collect();
        let feasible = [1.0, -1.0].iter().any(|s| {
            [&beta, &alternating].iter().any(|b| {
                let g = s * constraint_value(b);
                g >= (1.0 - delta) * kappa && g <= (1.0 + delta) * kappa
            })
        });
        if !feasible {
            redrawn += 1;
            continue;
        }
        let cfg = FitConfig {
            harmonics: k,
            delta,
            n_starts: C7_STARTS,
            seed: done as u64,
            gradient: GradientMode::Analytic,
            ..FitConfig::default()
        };
        let best = fit(&target, &cfg, None).unwrap()[0].objective;
        if best <= C7_F_TOL * energy * energy {
            recovered += 1;
        }
        done += 1;
    }
    (recovered, redrawn)
}

fn criterion_7() -> Outcome {
    let delta = 0.5;
    let (ok, redrawn) = planted_recovery(-2.0, delta, 7);
    let rate = ok as f64 / C7_CASES as f64;
    // Nonnegative indices match the sign of every start; reported, not graded.
    let (pos, pos_redrawn) = planted_recovery(0.0, delta, 7);
    outcome(
        rate >= C7_RATE,
        format!(
            "{ok}/{C7_CASES} planted targets (beta_k in [-2, 2], K <= 6, delta {delta}) reach F <= {C7_F_TOL:.0e} E^2 \
             with {C7_STARTS} starts (need {:.0}%), {redrawn} draws outside the support slab replaced; \
             informational: beta_k in [0, 2] gives {pos}/{C7_CASES} ({pos_redrawn} replaced)",
            100.0 * C7_RATE
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

fn desk_run(mut cfg: ExperimentConfig) -> (ExperimentRun, Duration) {
    cfg.fit.n_starts = C8_STARTS;
    cfg.fit.delta = C8_DELTA;
    let start = Instant::now();
    let run = run_experiment(&cfg).unwrap();
    (run, start.elapsed())
}

fn criterion_8() -> Outcome {
    let (notch, t_notch) = desk_run(ExperimentConfig::clutter_notch());
    let mut notch_ok = true;
    let mut notch_lines = Vec::new();
    for r in notch.report.records.iter().filter(|r| r.energy > 1.0) {
        let rate = r.mtsfm_beating_lfm as f64 / r.mtsfm_d_squared.count as f64;
        notch_ok &= rate >= C8_BEAT_RATE;
        notch_lines.push(format!("E={} {}/{}", r.energy, r.mtsfm_beating_lfm, r.mtsfm_d_squared.count));
    }

    let (peak, t_peak) = desk_run(ExperimentConfig::clutter_peak());
    let by_energy = |run: &ExperimentRun, pick_max: bool| {
        let recs = &run.report.records;
        let r = if pick_max {
            recs.iter().max_by(|a, b| a.energy.total_cmp(&b.energy))
        } else {
            recs.iter().min_by(|a, b| a.energy.total_cmp(&b.energy))
        };
        r.unwrap().clone()
    };
    let (low, high) = (by_energy(&peak, false), by_energy(&peak, true));
    let peak_ok = high.mtsfm_advantage < low.mtsfm_advantage;
    let runtime_ok = t_notch < C8_BUDGET && t_peak < C8_BUDGET;
    outcome(
        notch_ok && peak_ok && runtime_ok,
        format!(
            "clutter-notch fits beating LFM for E > 1: {} (need {:.0}%); clutter-peak median advantage \
             {:.3} at E={} vs {:.3} at E={}; runtimes {:.0}s and {:.0}s at {C8_STARTS} starts",
            notch_lines.join(", "),
            100.0 * C8_BEAT_RATE,
            high.mtsfm_advantage,
            high.energy,
            low.mtsfm_advantage,
            low.energy,
            t_notch.as_secs_f64(),
            t_peak.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- criterion 9

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

fn criterion_9() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/clutter_peak.toml");
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_miwave"))
            .args(["fit", "--seed", "42", "--starts", "12", "--trials", "2000", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    let names = |v: &[PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    let mut identical = !fa.is_empty() && names(&fa) == names(&fb);
    for (x, y) in fa.iter().zip(&fb) {
        identical &= std::fs::read(x).unwrap() == std::fs::read(y).unwrap();
    }
    outcome(identical, format!("{} CSV files compared byte for byte across two `fit` runs", fa.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("water-filling correctness", criterion_1),
        ("flat-case lambda", criterion_2),
        ("coefficient fidelity", criterion_3),
        ("constant modulus", criterion_4),
        ("spectrum consistency", criterion_5),
        ("ROC validation", criterion_6),
        ("planted phase retrieval", criterion_7),
        ("desk-scale reproduction", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} ({name}): {} | {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
