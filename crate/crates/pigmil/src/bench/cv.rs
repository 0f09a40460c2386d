//! Repeated stratified cross-validation over bags.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bench::metrics::{bag_accuracy, tpi_accuracy};
use crate::config::PigmilConfig;
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::pipeline::run_pigmil;
use crate::util::{derive_seed, mean, sample_std};

/// What one fold's method run produced.
pub struct FoldOutput {
    pub predicted: Vec<(String, Label)>,
    /// Detection quality on the training fold, when ground truth exists.
    pub tpi_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldRecord {
    pub repeat: usize,
    pub fold: usize,
    pub n_test_bags: usize,
    pub bag_accuracy: f64,
    pub tpi_accuracy: Option<f64>,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub records: Vec<FoldRecord>,
    pub bag_accuracy_mean: f64,
    pub bag_accuracy_std: f64,
    pub tpi_accuracy_mean: Option<f64>,
    pub tpi_accuracy_std: Option<f64>,
    pub total_duration_ms: f64,
}

impl ExperimentReport {
    fn from_records(folds: usize, repeats: usize, seed: u64, records: Vec<FoldRecord>) -> Self {
        let bag: Vec<f64> = records.iter().map(|r| r.bag_accuracy).collect();
        let tpi: Vec<f64> = records.iter().filter_map(|r| r.tpi_accuracy).collect();
        let total = records.iter().map(|r| r.duration_ms).sum();
        ExperimentReport {
            folds,
            repeats,
            seed,
            bag_accuracy_mean: mean(&bag),
            bag_accuracy_std: sample_std(&bag),
            tpi_accuracy_mean: if tpi.is_empty() { None } else { Some(mean(&tpi)) },
            tpi_accuracy_std: if tpi.is_empty() {
                None
            } else {
                Some(sample_std(&tpi))
            },
            total_duration_ms: total,
            records,
        }
    }
}

/// Stratified fold assignment: bag indices per fold, every fold non-empty in
/// both classes.
fn stratified_folds(d: &Dataset, folds: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let mut pos: Vec<usize> = d.positive_bags().map(|(i, _)| i).collect();
    let mut neg: Vec<usize> = d.negative_bags().map(|(i, _)| i).collect();
    if pos.len() < folds || neg.len() < folds {
        return Err(Error::invalid(format!(
            "need at least {folds} bags per class, got {} positive / {} negative",
            pos.len(),
            neg.len()
        )));
    }
    pos.shuffle(rng);
    neg.shuffle(rng);
    let mut assignment = vec![Vec::new(); folds];
    for (k, &bag) in pos.iter().enumerate() {
        assignment[k % folds].push(bag);
    }
    for (k, &bag) in neg.iter().enumerate() {
        assignment[k % folds].push(bag);
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

fn split(d: &Dataset, test_indices: &[usize]) -> (Dataset, Dataset) {
    let test_set: std::collections::HashSet<usize> = test_indices.iter().copied().collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, bag) in d.bags.iter().enumerate() {
        if test_set.contains(&i) {
            test.push(bag.clone());
        } else {
            train.push(bag.clone());
        }
    }
    (
        Dataset {
            bags: train,
            dim: d.dim,
        },
        Dataset {
            bags: test,
            dim: d.dim,
        },
    )
}

/// Generic driver: the method sees each training fold (scaling and all other
/// fitting happens inside it) and predicts the held-out bags.
pub fn cross_validate_with<F>(
    d: &Dataset,
    folds: usize,
    repeats: usize,
    seed: u64,
    method: F,
) -> Result<ExperimentReport>
where
    F: Fn(&Dataset, &Dataset, u64) -> Result<FoldOutput> + Sync,
{
    if repeats == 0 {
        return Err(Error::invalid("repeats must be positive"));
    }
    d.validate_for_training()?;

    // Fold layouts and per-fold seeds are fixed up front so fold runs can
    // proceed in parallel without affecting determinism.
    let mut jobs: Vec<(usize, usize, Vec<usize>, u64)> = Vec::new();
    for repeat in 0..repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, repeat as u64));
        let assignment = stratified_folds(d, folds, &mut rng)?;
        for (fold, test_indices) in assignment.into_iter().enumerate() {
            let fold_seed = derive_seed(seed, (repeat * folds + fold) as u64 ^ 0x5EED);
            jobs.push((repeat, fold, test_indices, fold_seed));
        }
    }

    let records: Vec<FoldRecord> = jobs
        .par_iter()
        .map(|(repeat, fold, test_indices, fold_seed)| {
            let started = std::time::Instant::now();
            let (train, test) = split(d, test_indices);
            let output = method(&train, &test, *fold_seed)?;
            let acc = bag_accuracy(&output.predicted, &test)?;
            Ok(FoldRecord {
                repeat: *repeat,
                fold: *fold,
                n_test_bags: test.bags.len(),
                bag_accuracy: acc,
                tpi_accuracy: output.tpi_accuracy,
                duration_ms: started.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentReport::from_records(folds, repeats, seed, records))
}

/// Repeated stratified cross-validation of the full pipeline.
pub fn cross_validate(
    d: &Dataset,
    folds: usize,
    repeats: usize,
    cfg: &PigmilConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    let has_truth = d.bags.iter().all(|b| b.truth.is_some());
    cross_validate_with(d, folds, repeats, seed, |train, test, fold_seed| {
        let outcome = run_pigmil(train, test, cfg, fold_seed)?;
        let tpi = if has_truth {
            Some(tpi_accuracy(&outcome.detection.pcp, train)?)
        } else {
            None
        };
        Ok(FoldOutput {
            predicted: outcome.labels,
            tpi_accuracy: tpi,
        })
    })
}
