//! End-to-end orchestration: initialization, candidate updating, and bag
//! classification, with diagnostics for every stage.

use serde::Serialize;

use crate::affinity::{discrimination, ConfidenceTable};
use crate::classify::{embed, predict, train_bag_classifier, BagModel, Prototypes};
use crate::config::PigmilConfig;
use crate::csdg::{self, CandidateContext, UpdateParams};
use crate::data::{apply_scaler, fit_scaler, Dataset, Instance, Label, Scaler};
use crate::density::NegativeIndex;
use crate::error::{Error, Result};
use crate::selection::{initialize, Pcp, PcpEntry};
use crate::util::derive_seed;

const SEED_EXEMPLARS: u64 = 1;
const SEED_WALK: u64 = 2;
const SEED_BAG_MODEL: u64 = 3;

/// One working set, as reported in diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct WorkingSetReport {
    pub bag_id: String,
    pub member_indices: Vec<usize>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PcpEntryReport {
    pub bag_id: String,
    pub instance_index: usize,
}

/// Everything the pipeline observed on the way to its answer.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub working_sets: Vec<WorkingSetReport>,
    /// Per positive bag: id and its t statistic from the working-bag gate.
    pub t_values: Vec<(String, f64)>,
    pub retained_bags: Vec<String>,
    pub initial_pcp: Vec<PcpEntryReport>,
    pub final_pcp: Vec<PcpEntryReport>,
    pub s_mean: f64,
    pub c_mean: f64,
    pub d_abs_mean: f64,
    pub alpha: f64,
    pub beta: f64,
    pub initial_rank: Vec<f64>,
    /// Rank vector after each committed replacement.
    pub rank_history: Vec<Vec<f64>>,
    /// Objective after each commit, starting with the initial graph.
    pub objective_trajectory: Vec<f64>,
    pub n_updates: usize,
}

/// Result of the detection stages (initialization + updating).
#[derive(Debug, Clone)]
pub struct Detection {
    pub pcp: Pcp,
    pub prototypes: Prototypes,
    pub scaler: Scaler,
    pub diagnostics: Diagnostics,
}

/// Full pipeline output.
#[derive(Debug, Clone)]
pub struct PigmilOutcome {
    /// Predicted label per test bag, in test-bag order.
    pub labels: Vec<(String, Label)>,
    pub model: BagModel,
    pub detection: Detection,
}

/// Runs initialization and candidate updating on `train`, returning the
/// detected candidate pool and the prototypes for embedding. Ground-truth
/// instance labels are never read.
pub fn detect_tpis(train: &Dataset, cfg: &PigmilConfig, seed: u64) -> Result<Detection> {
    cfg.validate()?;
    train.validate_for_training()?;

    let scaler = fit_scaler(train)?;
    let scaled = apply_scaler(&scaler, train)?;
    let neg = NegativeIndex::from_dataset(&scaled)?;

    let (working_sets, wb, init_pcp) = initialize(
        &scaled,
        &neg,
        cfg.ws_fraction,
        cfg.t_threshold,
        &cfg.kde,
    )?;

    // Candidate universe: every working-set member of every retained bag,
    // in retained-bag order then ascending-score order.
    let mut universe_instances: Vec<Instance> = Vec::new();
    let mut universe_ids: Vec<(usize, usize)> = Vec::new();
    let mut per_vertex_candidates: Vec<Vec<usize>> = Vec::new();
    for &ws_idx in &wb.retained {
        let set = &working_sets[ws_idx];
        let mut members = Vec::with_capacity(set.member_indices.len());
        for &inst_idx in &set.member_indices {
            members.push(universe_instances.len());
            universe_instances.push(scaled.bags[set.bag_index].instances[inst_idx].clone());
            universe_ids.push((set.bag_index, inst_idx));
        }
        per_vertex_candidates.push(members);
    }

    let table = ConfidenceTable::build(
        &universe_instances,
        &universe_ids,
        &neg,
        &cfg.svm,
        derive_seed(seed, SEED_EXEMPLARS),
    )?;
    let d_values: Vec<f64> = universe_instances
        .iter()
        .map(|x| discrimination(x, &neg, &cfg.disc))
        .collect::<Result<Vec<_>>>()?;

    // Initial vertices: each retained bag's seeded pool entry.
    let mut vertices = Vec::with_capacity(wb.retained.len());
    for (slot, &ws_idx) in wb.retained.iter().enumerate() {
        let entry = &init_pcp.entries[slot];
        debug_assert_eq!(entry.bag_index, working_sets[ws_idx].bag_index);
        let u = per_vertex_candidates[slot]
            .iter()
            .copied()
            .find(|&u| universe_ids[u] == (entry.bag_index, entry.instance_index))
            .ok_or_else(|| Error::invalid("seeded pool entry missing from its working set"))?;
        vertices.push(u);
    }

    let ctx = CandidateContext {
        table: &table,
        d_values: &d_values,
        working_sets: &per_vertex_candidates,
        quasi_clique_gamma: cfg.quasi_clique_gamma,
    };

    let (s_mean, c_mean, d_abs_mean) =
        csdg::edge_means(&vertices, &table, &d_values, cfg.quasi_clique_gamma);
    let (alpha, mut beta) = csdg::balance_factors(s_mean, c_mean, d_abs_mean);
    if let Some(b) = cfg.beta_override {
        beta = b;
    }

    let graph = csdg::build(&vertices, &ctx, alpha, beta)?;
    let update = UpdateParams {
        max_updates: cfg.update.max_updates,
        seed: derive_seed(seed ^ cfg.update.seed, SEED_WALK),
    };
    let (updated, trace) = csdg::update_instances(graph, &ctx, &update, &cfg.rank)?;

    let final_entries: Vec<PcpEntry> = updated
        .vertices()
        .iter()
        .map(|&u| {
            let (bag_index, instance_index) = universe_ids[u];
            PcpEntry {
                bag_id: scaled.bags[bag_index].id.clone(),
                bag_index,
                instance_index,
            }
        })
        .collect();
    let prototypes = Prototypes::new(
        updated
            .vertices()
            .iter()
            .map(|&u| universe_instances[u].clone())
            .collect(),
        cfg.gamma_d,
    )?;

    let diagnostics = Diagnostics {
        working_sets: working_sets
            .iter()
            .map(|w| WorkingSetReport {
                bag_id: w.bag_id.clone(),
                member_indices: w.member_indices.clone(),
                scores: w.scores.clone(),
            })
            .collect(),
        t_values: working_sets
            .iter()
            .zip(&wb.t_values)
            .map(|(w, &t)| (w.bag_id.clone(), t))
            .collect(),
        retained_bags: wb
            .retained
            .iter()
            .map(|&j| working_sets[j].bag_id.clone())
            .collect(),
        initial_pcp: init_pcp
            .entries
            .iter()
            .map(|e| PcpEntryReport {
                bag_id: e.bag_id.clone(),
                instance_index: e.instance_index,
            })
            .collect(),
        final_pcp: final_entries
            .iter()
            .map(|e| PcpEntryReport {
                bag_id: e.bag_id.clone(),
                instance_index: e.instance_index,
            })
            .collect(),
        s_mean,
        c_mean,
        d_abs_mean,
        alpha,
        beta,
        initial_rank: trace.initial_rank.clone(),
        rank_history: trace.rank_history.clone(),
        objective_trajectory: trace.objectives.clone(),
        n_updates: trace.n_updates,
    };

    Ok(Detection {
        pcp: Pcp {
            entries: final_entries,
        },
        prototypes,
        scaler,
        diagnostics,
    })
}

/// The whole pipeline: detection on `train`, then a linear classifier on the
/// embedded training bags, then predicted labels for `test`.
pub fn run_pigmil(
    train: &Dataset,
    test: &Dataset,
    cfg: &PigmilConfig,
    seed: u64,
) -> Result<PigmilOutcome> {
    let detection = detect_tpis(train, cfg, seed)?;
    let scaled_train = apply_scaler(&detection.scaler, train)?;
    let scaled_test = apply_scaler(&detection.scaler, test)?;

    let embedded: Vec<_> = scaled_train
        .bags
        .iter()
        .map(|bag| embed(bag, &detection.prototypes).map(|e| (e, bag.label)))
        .collect::<Result<Vec<_>>>()?;
    let model = train_bag_classifier(&embedded, &cfg.svm, derive_seed(seed, SEED_BAG_MODEL))?;

    let labels = scaled_test
        .bags
        .iter()
        .map(|bag| {
            let e = embed(bag, &detection.prototypes)?;
            Ok((bag.id.clone(), predict(&model, &e)?))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PigmilOutcome {
        labels,
        model,
        detection,
    })
}
