//! Initialization stage: working sets per positive bag, the t-test gate that
//! keeps only working bags, and the initial positive candidate pool.

use crate::data::{Bag, Dataset};
use crate::density::{kde_min, KdeParams, NegativeIndex};
use crate::error::{Error, Result};

/// The lowest-scoring fraction of a positive bag's instances, the candidates
/// for being true positives.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingSet {
    pub bag_id: String,
    pub bag_index: usize,
    /// Instance indices within the bag, ordered by ascending score.
    pub member_indices: Vec<usize>,
    /// Score of each member, aligned with `member_indices`.
    pub scores: Vec<f64>,
}

/// Positive bags retained by the t-test gate.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingBagSet {
    /// Indices into the working-set list passed to `select_working_bags`.
    pub retained: Vec<usize>,
    /// One t statistic per input working set, aligned with that list.
    pub t_values: Vec<f64>,
}

/// One hypothesized true positive per working bag.
#[derive(Debug, Clone, PartialEq)]
pub struct Pcp {
    pub entries: Vec<PcpEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcpEntry {
    pub bag_id: String,
    pub bag_index: usize,
    pub instance_index: usize,
}

impl Pcp {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Scores every instance of a positive bag with `kde_min` and keeps the
/// `ceil(fraction * n)` lowest, ties broken by lowest instance index.
pub fn build_working_set(
    bag: &Bag,
    bag_index: usize,
    neg: &NegativeIndex,
    fraction: f64,
    p: &KdeParams,
) -> Result<WorkingSet> {
    if !bag.label.is_positive() {
        return Err(Error::invalid(format!(
            "working set requested for negative bag {}",
            bag.id
        )));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "working-set fraction must be in (0, 1], got {fraction}"
        )));
    }
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(bag.len());
    for (i, inst) in bag.instances.iter().enumerate() {
        scored.push((kde_min(inst, neg, p)?, i));
    }
    scored.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let quota = ((fraction * bag.len() as f64).ceil() as usize).clamp(1, bag.len());
    scored.truncate(quota);
    Ok(WorkingSet {
        bag_id: bag.id.clone(),
        bag_index,
        member_indices: scored.iter().map(|&(_, i)| i).collect(),
        scores: scored.iter().map(|&(s, _)| s).collect(),
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64], m: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// One-sided Welch two-sample t statistic of `a` against `b`; positive when
/// `a`'s mean exceeds `b`'s. A zero denominator yields 0 for equal means and
/// a signed infinity otherwise.
pub(crate) fn welch_t(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let denom =
        (sample_var(a, ma) / a.len() as f64 + sample_var(b, mb) / b.len() as f64).sqrt();
    let diff = ma - mb;
    if denom < 1e-300 {
        if diff.abs() < 1e-12 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / denom
    }
}

/// Keeps the positive bags whose working-set scores are not significantly
/// worse (higher) than the pooled scores of the other working sets. A bag is
/// rejected iff its t value strictly exceeds `t_threshold`; if that would
/// reject everything, the bag with the smallest t is retained.
pub fn select_working_bags(ws: &[WorkingSet], t_threshold: f64) -> Result<WorkingBagSet> {
    if ws.len() < 2 {
        return Err(Error::invalid(format!(
            "working-bag selection needs at least 2 working sets, got {}",
            ws.len()
        )));
    }
    let mut t_values = Vec::with_capacity(ws.len());
    for (j, set) in ws.iter().enumerate() {
        let rest: Vec<f64> = ws
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .flat_map(|(_, w)| w.scores.iter().copied())
            .collect();
        t_values.push(welch_t(&set.scores, &rest));
    }
    let mut retained: Vec<usize> = (0..ws.len())
        .filter(|&j| t_values[j] <= t_threshold)
        .collect();
    if retained.is_empty() {
        let best = t_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("comparable t values"))
            .map(|(j, _)| j)
            .expect("non-empty working sets");
        retained.push(best);
    }
    Ok(WorkingBagSet { retained, t_values })
}

/// Seeds the candidate pool with each working bag's lowest-scoring working-
/// set member (ties by lowest instance index, which the working-set ordering
/// already guarantees).
pub fn init_pcp(wb: &WorkingBagSet, ws: &[WorkingSet]) -> Result<Pcp> {
    if wb.retained.is_empty() {
        return Err(Error::invalid("no working bags retained"));
    }
    let mut entries = Vec::with_capacity(wb.retained.len());
    for &j in &wb.retained {
        let set = ws
            .get(j)
            .ok_or_else(|| Error::invalid(format!("working-bag index {j} out of range")))?;
        let mut best = 0usize;
        for k in 1..set.scores.len() {
            let better = set.scores[k] < set.scores[best]
                || (set.scores[k] == set.scores[best]
                    && set.member_indices[k] < set.member_indices[best]);
            if better {
                best = k;
            }
        }
        entries.push(PcpEntry {
            bag_id: set.bag_id.clone(),
            bag_index: set.bag_index,
            instance_index: set.member_indices[best],
        });
    }
    Ok(Pcp { entries })
}

/// Convenience wrapper running the full initialization for a dataset.
pub fn initialize(
    d: &Dataset,
    neg: &NegativeIndex,
    fraction: f64,
    t_threshold: f64,
    p: &KdeParams,
) -> Result<(Vec<WorkingSet>, WorkingBagSet, Pcp)> {
    let mut sets = Vec::new();
    for (bag_index, bag) in d.positive_bags() {
        sets.push(build_working_set(bag, bag_index, neg, fraction, p)?);
    }
    if sets.is_empty() {
        return Err(Error::invalid("dataset has no positive bags"));
    }
    let wb = if sets.len() == 1 {
        WorkingBagSet {
            retained: vec![0],
            t_values: vec![0.0],
        }
    } else {
        select_working_bags(&sets, t_threshold)?
    };
    let pcp = init_pcp(&wb, &sets)?;
    Ok((sets, wb, pcp))
}
