//! Kernel-density scores of an instance against the negative bags of a
//! dataset, plus the per-bag TPI-selection baselines built on them.
//!
//! All three scores average `exp(-gamma * distance)` terms over negative
//! bags; they differ in which distance each bag contributes:
//!
//! - `kde_min`: the nearest instance of the bag (min distance),
//! - `kde_max`: the farthest instance of the bag (max distance),
//! - `kde`: every instance of the bag, summed without per-bag normalization.
//!
//! A low `kde_min` therefore means "far even from the closest negatives",
//! which is the signal the selection stage uses to hunt for true positives.

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::selection::{Pcp, PcpEntry};

/// Kernel width and normalizer for the density scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeParams {
    pub gamma: f64,
    pub z: f64,
}

impl Default for KdeParams {
    fn default() -> Self {
        KdeParams { gamma: 1.0, z: 1.0 }
    }
}

impl KdeParams {
    fn validate(&self) -> Result<()> {
        if self.gamma <= 0.0 || !self.gamma.is_finite() {
            return Err(Error::invalid("kde gamma must be positive"));
        }
        if self.z <= 0.0 || !self.z.is_finite() {
            return Err(Error::invalid("kde z must be positive"));
        }
        Ok(())
    }
}

/// Instances of every negative bag, grouped per bag.
#[derive(Debug, Clone)]
pub struct NegativeIndex {
    bags: Vec<Vec<Vec<f64>>>,
    dim: usize,
}

impl NegativeIndex {
    pub fn from_dataset(d: &Dataset) -> Result<Self> {
        let bags: Vec<Vec<Vec<f64>>> = d
            .negative_bags()
            .map(|(_, bag)| {
                bag.instances
                    .iter()
                    .map(|i| i.features().to_vec())
                    .collect()
            })
            .collect();
        if bags.is_empty() {
            return Err(Error::invalid("dataset has no negative bags"));
        }
        Ok(NegativeIndex { bags, dim: d.dim })
    }

    pub fn n_bags(&self) -> usize {
        self.bags.len()
    }

    pub fn n_instances(&self) -> usize {
        self.bags.iter().map(Vec::len).sum()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn bags(&self) -> &[Vec<Vec<f64>>] {
        &self.bags
    }

    pub(crate) fn instances(&self) -> impl Iterator<Item = &[f64]> {
        self.bags.iter().flatten().map(Vec::as_slice)
    }

    fn check_dim(&self, x: &Instance) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::invalid(format!(
                "instance dim {} does not match negative index dim {}",
                x.dim(),
                self.dim
            )));
        }
        Ok(())
    }
}

fn per_bag_distance_score(
    x: &[f64],
    neg: &NegativeIndex,
    p: &KdeParams,
    pick: impl Fn(f64, f64) -> f64,
) -> f64 {
    let mut total = 0.0;
    for bag in neg.bags() {
        let mut chosen = f64::NAN;
        for inst in bag {
            let d = crate::data::euclidean(x, inst);
            chosen = if chosen.is_nan() { d } else { pick(chosen, d) };
        }
        total += (-p.gamma * chosen).exp();
    }
    total / (p.z * neg.n_bags() as f64)
}

/// Average over negative bags of the kernel at each bag's nearest instance.
pub fn kde_min(x: &Instance, neg: &NegativeIndex, p: &KdeParams) -> Result<f64> {
    p.validate()?;
    neg.check_dim(x)?;
    Ok(per_bag_distance_score(x.features(), neg, p, f64::min))
}

/// Average over negative bags of the kernel at each bag's farthest instance.
pub fn kde_max(x: &Instance, neg: &NegativeIndex, p: &KdeParams) -> Result<f64> {
    p.validate()?;
    neg.check_dim(x)?;
    Ok(per_bag_distance_score(x.features(), neg, p, f64::max))
}

/// Sum of kernels over every negative instance, divided by `z * n_bags`
/// only; bags with more instances contribute more mass.
pub fn kde(x: &Instance, neg: &NegativeIndex, p: &KdeParams) -> Result<f64> {
    p.validate()?;
    neg.check_dim(x)?;
    let mut total = 0.0;
    for bag in neg.bags() {
        for inst in bag {
            total += (-p.gamma * crate::data::euclidean(x.features(), inst)).exp();
        }
    }
    Ok(total / (p.z * neg.n_bags() as f64))
}

/// Which density score a baseline selection uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdeVariant {
    Min,
    Plain,
    Max,
}

impl KdeVariant {
    pub fn score(self, x: &Instance, neg: &NegativeIndex, p: &KdeParams) -> Result<f64> {
        match self {
            KdeVariant::Min => kde_min(x, neg, p),
            KdeVariant::Plain => kde(x, neg, p),
            KdeVariant::Max => kde_max(x, neg, p),
        }
    }
}

/// Baseline TPI selection: for every positive bag, the instance with the
/// lowest chosen density score, ties broken by lowest instance index.
pub fn kde_tpi_baseline(variant: KdeVariant, d: &Dataset, p: &KdeParams) -> Result<Pcp> {
    let neg = NegativeIndex::from_dataset(d)?;
    let mut entries = Vec::new();
    for (bag_index, bag) in d.positive_bags() {
        let mut best: Option<(f64, usize)> = None;
        for (i, inst) in bag.instances.iter().enumerate() {
            let score = variant.score(inst, &neg, p)?;
            let better = match best {
                None => true,
                Some((s, _)) => score < s,
            };
            if better {
                best = Some((score, i));
            }
        }
        let (_, instance_index) = best.expect("positive bag is non-empty");
        entries.push(PcpEntry {
            bag_id: bag.id.clone(),
            bag_index,
            instance_index,
        });
    }
    if entries.is_empty() {
        return Err(Error::invalid("dataset has no positive bags"));
    }
    Ok(Pcp { entries })
}
