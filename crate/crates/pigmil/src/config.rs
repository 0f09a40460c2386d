//! The full parameter bundle for one pipeline run.

use crate::affinity::DiscParams;
use crate::csdg::{RankParams, UpdateParams};
use crate::density::KdeParams;
use crate::error::{Error, Result};
use crate::svm::SvmConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PigmilConfig {
    /// Fraction of each positive bag kept in its working set.
    pub ws_fraction: f64,
    /// Rejection threshold for the working-bag t-test.
    pub t_threshold: f64,
    pub kde: KdeParams,
    pub disc: DiscParams,
    /// Edge-density bound for quasi-cliques.
    pub quasi_clique_gamma: f64,
    pub rank: RankParams,
    pub update: UpdateParams,
    pub svm: SvmConfig,
    /// Kernel width of the bag embedding.
    pub gamma_d: f64,
    /// When set, replaces the discrimination balance factor computed from
    /// the initial graph (used by the sensitivity sweep).
    pub beta_override: Option<f64>,
}

impl Default for PigmilConfig {
    fn default() -> Self {
        PigmilConfig {
            ws_fraction: 0.4,
            t_threshold: 1.5,
            kde: KdeParams::default(),
            disc: DiscParams::default(),
            quasi_clique_gamma: 0.9,
            rank: RankParams::default(),
            update: UpdateParams::default(),
            svm: SvmConfig::default(),
            gamma_d: 1.0,
            beta_override: None,
        }
    }
}

impl PigmilConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ws_fraction > 0.0 && self.ws_fraction <= 1.0) {
            return Err(Error::invalid("ws_fraction must be in (0, 1]"));
        }
        if !self.t_threshold.is_finite() {
            return Err(Error::invalid("t_threshold must be finite"));
        }
        if !(self.quasi_clique_gamma > 0.0 && self.quasi_clique_gamma <= 1.0) {
            return Err(Error::invalid("quasi_clique_gamma must be in (0, 1]"));
        }
        if !(self.rank.damping >= 0.0 && self.rank.damping < 1.0) {
            return Err(Error::invalid("rank damping must be in [0, 1)"));
        }
        if self.rank.max_iter == 0 {
            return Err(Error::invalid("rank max_iter must be positive"));
        }
        if self.gamma_d <= 0.0 {
            return Err(Error::invalid("gamma_d must be positive"));
        }
        Ok(())
    }
}
