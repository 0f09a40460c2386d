//! Detection and classification metrics.

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::selection::Pcp;

/// Percentage of pool entries whose ground-truth instance label is positive.
pub fn tpi_accuracy(pcp: &Pcp, d: &Dataset) -> Result<f64> {
    if pcp.is_empty() {
        return Err(Error::invalid("cannot score an empty candidate pool"));
    }
    let mut hits = 0usize;
    for entry in &pcp.entries {
        let bag = d
            .bags
            .get(entry.bag_index)
            .filter(|b| b.id == entry.bag_id)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "pool entry references unknown bag {} at index {}",
                    entry.bag_id, entry.bag_index
                ))
            })?;
        let truth = bag
            .truth
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("bag {} has no ground truth", bag.id)))?;
        let t = truth.get(entry.instance_index).ok_or_else(|| {
            Error::invalid(format!(
                "pool entry instance {} out of range for bag {}",
                entry.instance_index, bag.id
            ))
        })?;
        if t.is_positive() {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / pcp.len() as f64)
}

/// Fraction (in percent) of predictions matching the bags' labels.
/// Predictions are matched to bags by id.
pub fn bag_accuracy(predicted: &[(String, Label)], d: &Dataset) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::invalid("no predictions to score"));
    }
    let index = d.bag_index_by_id();
    let mut hits = 0usize;
    for (id, label) in predicted {
        let &bag_idx = index
            .get(id.as_str())
            .ok_or_else(|| Error::invalid(format!("prediction for unknown bag {id}")))?;
        if d.bags[bag_idx].label == *label {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / predicted.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Bag, Instance};
    use crate::selection::PcpEntry;

    fn dataset() -> Dataset {
        let mk = |id: &str, label, truth: Vec<Label>| {
            let instances = truth
                .iter()
                .enumerate()
                .map(|(i, _)| Instance::new(vec![i as f64]))
                .collect();
            Bag::new(id, instances, label, Some(truth)).unwrap()
        };
        Dataset::new(
            vec![
                mk(
                    "p0",
                    Label::Positive,
                    vec![Label::Positive, Label::Negative],
                ),
                mk(
                    "p1",
                    Label::Positive,
                    vec![Label::Negative, Label::Positive],
                ),
                mk("n0", Label::Negative, vec![Label::Negative]),
            ],
            1,
        )
        .unwrap()
    }

    fn entry(bag_id: &str, bag_index: usize, instance_index: usize) -> PcpEntry {
        PcpEntry {
            bag_id: bag_id.into(),
            bag_index,
            instance_index,
        }
    }

    #[test]
    fn all_positive_entries_score_100() {
        let d = dataset();
        let pcp = Pcp {
            entries: vec![entry("p0", 0, 0), entry("p1", 1, 1)],
        };
        assert_eq!(tpi_accuracy(&pcp, &d).unwrap(), 100.0);
    }

    #[test]
    fn half_positive_scores_50() {
        let d = dataset();
        let pcp = Pcp {
            entries: vec![entry("p0", 0, 0), entry("p1", 1, 0)],
        };
        assert_eq!(tpi_accuracy(&pcp, &d).unwrap(), 50.0);
    }

    #[test]
    fn empty_pool_is_error() {
        let d = dataset();
        let pcp = Pcp { entries: vec![] };
        assert!(tpi_accuracy(&pcp, &d).is_err());
    }

    #[test]
    fn missing_truth_is_error() {
        let mut d = dataset();
        d.bags[0].truth = None;
        let pcp = Pcp {
            entries: vec![entry("p0", 0, 0)],
        };
        assert!(tpi_accuracy(&pcp, &d).is_err());
    }

    #[test]
    fn bag_accuracy_counts_matches() {
        let d = dataset();
        let preds = vec![
            ("p0".to_string(), Label::Positive),
            ("p1".to_string(), Label::Negative),
            ("n0".to_string(), Label::Negative),
        ];
        let acc = bag_accuracy(&preds, &d).unwrap();
        assert!((acc - 200.0 / 3.0).abs() < 1e-9);
    }
}
