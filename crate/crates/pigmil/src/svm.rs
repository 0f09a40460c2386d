//! Linear soft-margin classifier trained by dual coordinate descent on the
//! L2-regularized hinge-loss objective
//!
//! ```text
//!     min_w  0.5 ||w||^2 + C * sum_i max(0, 1 - y_i w . x_i)
//! ```
//!
//! The bias is handled by augmenting every sample with a constant feature,
//! so it is regularized together with the weights. Coordinate order is
//! shuffled with a seeded generator; the same seed gives a bitwise-identical
//! model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    /// Regularization trade-off C.
    pub c: f64,
    /// Stopping tolerance on the projected-gradient range.
    pub tol: f64,
    /// Cap on outer passes over the data.
    pub max_iter: usize,
    /// Value of the augmented bias feature.
    pub bias: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tol: 1e-6,
            max_iter: 100_000,
            bias: 1.0,
        }
    }
}

/// A trained linear model: decision value is `weights . x + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

/// Trains on rows `x` with labels `y` in {+1, -1}. Errors if the tolerance
/// is not reached within the iteration cap; the error carries the residual
/// projected-gradient range.
pub fn train_linear(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &SvmConfig,
    seed: u64,
) -> Result<LinearModel> {
    train_linear_costs(x, y, &vec![cfg.c; x.len()], cfg, seed)
}

/// [`train_linear`] with a per-sample hinge cost (the upper bound of the
/// corresponding dual variable). A sample with cost `k * C` is exactly
/// equivalent to `k` replicated rows at cost `C`, with a much better-
/// conditioned dual.
pub fn train_linear_costs(
    x: &[Vec<f64>],
    y: &[f64],
    costs: &[f64],
    cfg: &SvmConfig,
    seed: u64,
) -> Result<LinearModel> {
    if x.is_empty() || x.len() != y.len() || x.len() != costs.len() {
        return Err(Error::invalid(format!(
            "solver needs matching non-empty inputs, got {} rows, {} labels, {} costs",
            x.len(),
            y.len(),
            costs.len()
        )));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("solver rows have inconsistent dimension"));
    }
    if y.iter().any(|&l| l != 1.0 && l != -1.0) {
        return Err(Error::invalid("solver labels must be +1 or -1"));
    }
    if costs.iter().any(|&c| c <= 0.0 || !c.is_finite()) {
        return Err(Error::invalid("sample costs must be positive"));
    }

    let n = x.len();
    // Augmented weight vector: dim features plus the bias slot.
    let mut w = vec![0.0; dim + 1];
    let mut alpha = vec![0.0; n];
    // Diagonal of the Gram matrix for the augmented representation.
    let q_diag: Vec<f64> = x
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>() + cfg.bias * cfg.bias)
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let xi = &x[i];
            let yi = y[i];
            let decision: f64 =
                xi.iter().zip(&w).map(|(v, wj)| v * wj).sum::<f64>() + cfg.bias * w[dim];
            let g = yi * decision - 1.0;

            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == costs[i] {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);

            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, costs[i]);
                let delta = (alpha[i] - old) * yi;
                for (wj, v) in w.iter_mut().zip(xi) {
                    *wj += delta * v;
                }
                w[dim] += delta * cfg.bias;
            }
        }
        residual = pg_max - pg_min;
        if residual <= cfg.tol {
            let bias = w[dim] * cfg.bias;
            w.truncate(dim);
            return Ok(LinearModel { weights: w, bias });
        }
    }
    Err(Error::Solver {
        residual,
        iterations: cfg.max_iter,
    })
}
