//! Synthetic benchmarks: dataset generators, label-noise injection,
//! detection metrics, repeated cross-validation and sensitivity sweeps.

mod cv;
mod metrics;
mod sweep;
mod synth;

pub use cv::{cross_validate, cross_validate_with, ExperimentReport, FoldOutput, FoldRecord};
pub use metrics::{bag_accuracy, tpi_accuracy};
pub use sweep::{sweep_d_ratio, sweep_noise, sweep_ws_size, DRatioRow, NoiseRow, WsSizeRow};
pub use synth::{
    generate, inject_noise, BasicParams, NoiseLevel, RhombusParams, RingParams, SynthKind,
    SynthSpec,
};

use crate::config::PigmilConfig;
use crate::data::{apply_scaler, fit_scaler, Dataset};
use crate::density::{kde_tpi_baseline, KdeVariant};
use crate::error::Result;
use crate::pipeline::detect_tpis;
use crate::selection::Pcp;

/// Which detector a benchmark evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpiMethod {
    Pigmil,
    KdeMin,
    Kde,
    KdeMax,
}

impl TpiMethod {
    pub fn name(self) -> &'static str {
        match self {
            TpiMethod::Pigmil => "pigmil",
            TpiMethod::KdeMin => "kde-min",
            TpiMethod::Kde => "kde",
            TpiMethod::KdeMax => "kde-max",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pigmil" => Some(TpiMethod::Pigmil),
            "kde-min" => Some(TpiMethod::KdeMin),
            "kde" => Some(TpiMethod::Kde),
            "kde-max" => Some(TpiMethod::KdeMax),
            _ => None,
        }
    }
}

/// Runs the chosen detector on a dataset. The density baselines see the same
/// standardized features as the full pipeline.
pub fn detect_with_method(
    d: &Dataset,
    method: TpiMethod,
    cfg: &PigmilConfig,
    seed: u64,
) -> Result<Pcp> {
    match method {
        TpiMethod::Pigmil => Ok(detect_tpis(d, cfg, seed)?.pcp),
        TpiMethod::KdeMin | TpiMethod::Kde | TpiMethod::KdeMax => {
            let scaler = fit_scaler(d)?;
            let scaled = apply_scaler(&scaler, d)?;
            let variant = match method {
                TpiMethod::KdeMin => KdeVariant::Min,
                TpiMethod::Kde => KdeVariant::Plain,
                TpiMethod::KdeMax => KdeVariant::Max,
                TpiMethod::Pigmil => unreachable!(),
            };
            kde_tpi_baseline(variant, &scaled, &cfg.kde)
        }
    }
}
