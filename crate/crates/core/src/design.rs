//! Matched-illumination ESD by water-filling against the noise and clutter
//! PSDs.
//!
//! For a level `lambda > 0` every bin receives
//! `max((sqrt(P_n / lambda) - P_n) / P_h, 0)`, and `lambda` is tuned so the
//! allocation integrates to the transmit energy. The allocated energy is
//! strictly decreasing in `lambda` until it reaches zero at
//! `lambda = max_f 1 / P_n`, so the level is bracketed and bisected in
//! `log lambda`, then polished with the closed form that holds once the
//! active set is fixed.

use std::borrow::Cow;

use log::warn;

use crate::error::{Error, Result};
use crate::spectral::{Scenario, SpectralDensity};

/// What to do with bins whose channel PSD is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroChannelPolicy {
    /// Fail if such a bin would receive energy.
    #[default]
    Error,
    /// Replace zero by `1e-12 * max(P_h)` and log a warning.
    Substitute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub zero_channel: ZeroChannelPolicy,
    /// Relative energy tolerance.
    pub tol_energy: f64,
    pub max_iterations: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            zero_channel: ZeroChannelPolicy::Error,
            tol_energy: 1e-6,
            max_iterations: 200,
        }
    }
}

/// Result of the water-filling design.
#[derive(Debug, Clone)]
pub struct MiDesign {
    pub esd: SpectralDensity,
    pub lagrange_lambda: f64,
    pub achieved_energy: f64,
    /// Bins with strictly positive ESD.
    pub active_set: Vec<usize>,
}

const SUBSTITUTE_SCALE: f64 = 1e-12;

fn effective_channel(scenario: &Scenario, policy: ZeroChannelPolicy) -> Cow<'_, [f64]> {
    let ph = scenario.channel_psd.values();
    if policy == ZeroChannelPolicy::Error || !ph.contains(&0.0) {
        return Cow::Borrowed(ph);
    }
    let floor = SUBSTITUTE_SCALE * scenario.channel_psd.max();
    let floor = if floor > 0.0 { floor } else { SUBSTITUTE_SCALE };
    warn!(
        "channel PSD is zero on {} bins; substituting {floor:e}",
        ph.iter().filter(|v| **v == 0.0).count()
    );
    Cow::Owned(ph.iter().map(|&v| if v == 0.0 { floor } else { v }).collect())
}

fn allocate(
    scenario: &Scenario,
    channel: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    let grid = scenario.grid();
    scenario
        .noise_psd
        .values()
        .iter()
        .zip(channel)
        .enumerate()
        .map(|(i, (&pn, &ph))| {
            let numerator = (pn / lambda).sqrt() - pn;
            if numerator <= 0.0 {
                Ok(0.0)
            } else if ph == 0.0 {
                Err(Error::UnboundedAllocation {
                    bin: i,
                    freq: grid.freq(i),
                })
            } else {
                Ok(numerator / ph)
            }
        })
        .collect()
}

/// Water-filling ESD for a given level `lambda`.
pub fn esd_for_lambda(scenario: &Scenario, lambda: f64) -> Result<SpectralDensity> {
    esd_for_lambda_with(scenario, lambda, ZeroChannelPolicy::Error)
}

pub fn esd_for_lambda_with(
    scenario: &Scenario,
    lambda: f64,
    policy: ZeroChannelPolicy,
) -> Result<SpectralDensity> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let channel = effective_channel(scenario, policy);
    SpectralDensity::new(*scenario.grid(), allocate(scenario, &channel, lambda)?)
}

/// Zero-channel bins that receive energy at `lambda`.
fn substituted_active(scenario: &Scenario, lambda: f64) -> impl Iterator<Item = usize> + '_ {
    scenario
        .noise_psd
        .values()
        .iter()
        .zip(scenario.channel_psd.values())
        .enumerate()
        .filter(move |(_, (&pn, &ph))| ph == 0.0 && pn * lambda < 1.0)
        .map(|(i, _)| i)
}

fn allocated_energy(scenario: &Scenario, channel: &[f64], lambda: f64) -> Result<f64> {
    Ok(allocate(scenario, channel, lambda)?.iter().sum::<f64>() * scenario.grid().spacing())
}

/// Level at which the allocation integrates to `scenario.energy`.
pub fn solve_lambda(scenario: &Scenario) -> Result<f64> {
    solve_lambda_with(scenario, &DesignOptions::default())
}

pub fn solve_lambda_with(scenario: &Scenario, opts: &DesignOptions) -> Result<f64> {
    let channel = effective_channel(scenario, opts.zero_channel);
    let target = scenario.energy;
    let pn = scenario.noise_psd.values();
    let df = scenario.grid().spacing();

    // Zero allocation at and above this level.
    let mut hi = pn.iter().map(|v| 1.0 / v).fold(0.0, f64::max);
    let mut lo = hi;
    let mut iterations = 0;
    loop {
        lo /= 4.0;
        iterations += 1;
        if allocated_energy(scenario, &channel, lo)? >= target {
            break;
        }
        if iterations >= opts.max_iterations || lo < f64::MIN_POSITIVE * 1e10 {
            return Err(Error::Convergence {
                iterations,
                detail: format!(
                    "could not bracket lambda for E = {target}: allocation at lambda = {lo:e} is {}",
                    allocated_energy(scenario, &channel, lo)?
                ),
            });
        }
        hi = lo * 4.0;
    }

    for _ in 0..opts.max_iterations {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if allocated_energy(scenario, &channel, mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let bisected = (lo * hi).sqrt();

    // With the active set fixed the allocation is S1 / sqrt(lambda) - S2.
    let (mut s1, mut s2) = (0.0, 0.0);
    for (&n, &h) in pn.iter().zip(channel.iter()) {
        if n * bisected < 1.0 && h > 0.0 {
            s1 += n.sqrt() / h * df;
            s2 += n / h * df;
        }
    }
    let mut lambda = bisected;
    if s1 > 0.0 {
        let closed = (s1 / (target + s2)).powi(2);
        let consistent = pn.iter().zip(channel.iter()).all(|(&n, &h)| {
            let active_before = n * bisected < 1.0 && h > 0.0;
            let active_after = n * closed < 1.0 && h > 0.0;
            active_before == active_after
        });
        if consistent {
            lambda = closed;
        }
    }

    let achieved = allocated_energy(scenario, &channel, lambda)?;
    // Substituted bins are too steep in lambda for the tolerance to be met in
    // floating point; `design_mi_with` hands them the residual instead.
    let absorbs = opts.zero_channel == ZeroChannelPolicy::Substitute
        && substituted_active(scenario, lambda).next().is_some();
    if !absorbs && (achieved - target).abs() > opts.tol_energy * target {
        return Err(Error::Convergence {
            iterations,
            detail: format!(
                "allocated energy {achieved} misses target {target} at lambda = {lambda:e}"
            ),
        });
    }
    Ok(lambda)
}

/// Full water-filling design for `scenario`.
pub fn design_mi(scenario: &Scenario) -> Result<MiDesign> {
    design_mi_with(scenario, &DesignOptions::default())
}

pub fn design_mi_with(scenario: &Scenario, opts: &DesignOptions) -> Result<MiDesign> {
    let lambda = solve_lambda_with(scenario, opts)?;
    let mut esd = esd_for_lambda_with(scenario, lambda, opts.zero_channel)?;
    if opts.zero_channel == ZeroChannelPolicy::Substitute {
        let bins: Vec<usize> = substituted_active(scenario, lambda).collect();
        if !bins.is_empty() {
            let residual = (scenario.energy - esd.integrate()) / scenario.grid().spacing();
            let mut values = esd.into_values();
            for &b in &bins {
                values[b] = (values[b] + residual / bins.len() as f64).max(0.0);
            }
            esd = SpectralDensity::new(*scenario.grid(), values)?;
        }
    }
    let achieved_energy = esd.integrate();
    if (achieved_energy - scenario.energy).abs() > opts.tol_energy * scenario.energy {
        return Err(Error::Convergence {
            iterations: opts.max_iterations,
            detail: format!(
                "designed ESD carries {achieved_energy} instead of {}",
                scenario.energy
            ),
        });
    }
    let active_set = esd
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(MiDesign {
        esd,
        lagrange_lambda: lambda,
        achieved_energy,
        active_set,
    })
}
