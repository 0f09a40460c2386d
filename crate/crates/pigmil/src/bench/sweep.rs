//! Sensitivity sweeps: noise level, working-set size, and the weight of the
//! discrimination term relative to the similarity-plus-consistency mass.

use serde::Serialize;

use crate::bench::metrics::tpi_accuracy;
use crate::bench::synth::{inject_noise, NoiseLevel};
use crate::config::PigmilConfig;
use crate::data::Dataset;
use crate::error::Result;
use crate::pipeline::detect_tpis;
use crate::util::derive_seed;

#[derive(Debug, Clone, Serialize)]
pub struct NoiseRow {
    pub level: u8,
    pub tpi_accuracy: f64,
}

/// Detection accuracy per noise level; the accuracy is scored against the
/// flipped truth.
pub fn sweep_noise(
    d: &Dataset,
    levels: &[u8],
    cfg: &PigmilConfig,
    seed: u64,
) -> Result<Vec<NoiseRow>> {
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let noisy = inject_noise(d, NoiseLevel::new(level)?, derive_seed(seed, level as u64))?;
        let detection = detect_tpis(&noisy, cfg, seed)?;
        rows.push(NoiseRow {
            level,
            tpi_accuracy: tpi_accuracy(&detection.pcp, &noisy)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct WsSizeRow {
    pub fraction: f64,
    pub tpi_accuracy: f64,
}

/// Detection accuracy per working-set fraction.
pub fn sweep_ws_size(
    d: &Dataset,
    fractions: &[f64],
    cfg: &PigmilConfig,
    seed: u64,
) -> Result<Vec<WsSizeRow>> {
    let mut rows = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let mut run_cfg = cfg.clone();
        run_cfg.ws_fraction = fraction;
        let detection = detect_tpis(d, &run_cfg, seed)?;
        rows.push(WsSizeRow {
            fraction,
            tpi_accuracy: tpi_accuracy(&detection.pcp, d)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct DRatioRow {
    pub ratio: f64,
    pub beta: f64,
    pub tpi_accuracy: f64,
}

/// Detection accuracy while rescaling the discrimination balance factor.
/// Ratio `r` sets beta so the mean |D| term sits `r` orders of magnitude
/// relative to the mean similarity-plus-consistency mass of the initial
/// graph: `beta = 10^r * mean(S + alpha * C) / mean|D|`.
pub fn sweep_d_ratio(
    d: &Dataset,
    ratios: &[f64],
    cfg: &PigmilConfig,
    seed: u64,
) -> Result<Vec<DRatioRow>> {
    // One dry run pins the initial-graph means; they depend only on the
    // seed and the pre-updating configuration, so they are identical for
    // every ratio.
    let base = detect_tpis(d, cfg, seed)?;
    let diag = &base.diagnostics;
    let sc_mass = diag.s_mean + diag.alpha * diag.c_mean;

    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let beta = if diag.d_abs_mean > 0.0 && sc_mass > 0.0 {
            10f64.powf(ratio) * sc_mass / diag.d_abs_mean
        } else {
            diag.beta
        };
        let mut run_cfg = cfg.clone();
        run_cfg.beta_override = Some(beta);
        let detection = detect_tpis(d, &run_cfg, seed)?;
        rows.push(DRatioRow {
            ratio,
            beta,
            tpi_accuracy: tpi_accuracy(&detection.pcp, d)?,
        });
    }
    Ok(rows)
}
