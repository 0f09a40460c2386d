//! Core data model: instances, bags, datasets, feature standardization and
//! the distance primitive shared by every other module.
//!
//! Bags carry an optional per-instance ground-truth label. It exists only for
//! synthetic data and is read exclusively by evaluation code; the learning
//! pipeline never looks at it.

use std::collections::HashMap;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Instance or bag label, `+1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(Error::data(format!("label must be 1 or -1, got {other}"))),
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }
}

/// A single feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    features: Vec<f64>,
}

impl Instance {
    pub fn new(features: Vec<f64>) -> Self {
        Instance { features }
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

impl From<Vec<f64>> for Instance {
    fn from(features: Vec<f64>) -> Self {
        Instance::new(features)
    }
}

/// A labelled set of instances. `truth`, when present, holds one ground-truth
/// label per instance and is only ever consumed by evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct Bag {
    pub id: String,
    pub instances: Vec<Instance>,
    pub label: Label,
    pub truth: Option<Vec<Label>>,
}

impl Bag {
    pub fn new(
        id: impl Into<String>,
        instances: Vec<Instance>,
        label: Label,
        truth: Option<Vec<Label>>,
    ) -> Result<Self> {
        let bag = Bag {
            id: id.into(),
            instances,
            label,
            truth,
        };
        bag.validate()?;
        Ok(bag)
    }

    fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::invalid(format!("bag {} has no instances", self.id)));
        }
        if let Some(truth) = &self.truth {
            if truth.len() != self.instances.len() {
                return Err(Error::invalid(format!(
                    "bag {}: truth has {} entries for {} instances",
                    self.id,
                    truth.len(),
                    self.instances.len()
                )));
            }
            if self.label == Label::Negative && truth.iter().any(|t| t.is_positive()) {
                return Err(Error::invalid(format!(
                    "bag {} is negative but carries a positive truth entry",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// A collection of bags with a fixed feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub bags: Vec<Bag>,
    pub dim: usize,
}

impl Dataset {
    pub fn new(bags: Vec<Bag>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        let ds = Dataset { bags, dim };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        for bag in &self.bags {
            bag.validate()?;
            for inst in &bag.instances {
                if inst.dim() != self.dim {
                    return Err(Error::invalid(format!(
                        "bag {}: instance has dim {} but dataset dim is {}",
                        bag.id,
                        inst.dim(),
                        self.dim
                    )));
                }
                if inst.features().iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid(format!(
                        "bag {}: non-finite feature value",
                        bag.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Training additionally requires at least one bag of each class.
    pub fn validate_for_training(&self) -> Result<()> {
        self.validate()?;
        let pos = self.bags.iter().filter(|b| b.label.is_positive()).count();
        let neg = self.bags.len() - pos;
        if pos == 0 || neg == 0 {
            return Err(Error::invalid(format!(
                "training set needs both classes: {pos} positive, {neg} negative bags"
            )));
        }
        Ok(())
    }

    pub fn n_instances(&self) -> usize {
        self.bags.iter().map(Bag::len).sum()
    }

    pub fn positive_bags(&self) -> impl Iterator<Item = (usize, &Bag)> {
        self.bags
            .iter()
            .enumerate()
            .filter(|(_, b)| b.label.is_positive())
    }

    pub fn negative_bags(&self) -> impl Iterator<Item = (usize, &Bag)> {
        self.bags
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.label.is_positive())
    }

    pub fn bag_index_by_id(&self) -> HashMap<&str, usize> {
        self.bags
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect()
    }

    /// Recomputes every bag label from the ground-truth instance labels:
    /// positive iff at least one instance is truth-positive.
    pub fn relabel_from_truth(&mut self) -> Result<()> {
        for bag in &mut self.bags {
            let truth = bag
                .truth
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("bag {} has no ground truth", bag.id)))?;
            bag.label = if truth.iter().any(|t| t.is_positive()) {
                Label::Positive
            } else {
                Label::Negative
            };
        }
        Ok(())
    }
}

/// Per-dimension standardizer (zero mean, unit variance on the fit data).
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

const STD_FLOOR: f64 = 1e-12;

/// Fits per-dimension mean and population standard deviation over every
/// instance of `train`. A dimension with std below 1e-12 is treated as
/// constant and its std is set to 1.
pub fn fit_scaler(train: &Dataset) -> Result<Scaler> {
    let n = train.n_instances();
    if n < 2 {
        return Err(Error::invalid(format!(
            "scaler needs at least 2 instances, got {n}"
        )));
    }
    let dim = train.dim;
    let mut mean = vec![0.0; dim];
    for bag in &train.bags {
        for inst in &bag.instances {
            for (m, v) in mean.iter_mut().zip(inst.features()) {
                *m += v;
            }
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0; dim];
    for bag in &train.bags {
        for inst in &bag.instances {
            for (s, (v, m)) in var.iter_mut().zip(inst.features().iter().zip(&mean)) {
                let d = v - m;
                *s += d * d;
            }
        }
    }
    let std = var
        .into_iter()
        .map(|s| {
            let sd = (s / n as f64).sqrt();
            if sd < STD_FLOOR {
                1.0
            } else {
                sd
            }
        })
        .collect();
    Ok(Scaler { mean, std })
}

/// Applies `(x - mean) / std` to every feature. Bag structure, labels and
/// ground truth are untouched.
pub fn apply_scaler(scaler: &Scaler, d: &Dataset) -> Result<Dataset> {
    if scaler.mean.len() != d.dim {
        return Err(Error::invalid(format!(
            "scaler dim {} does not match dataset dim {}",
            scaler.mean.len(),
            d.dim
        )));
    }
    let bags = d
        .bags
        .iter()
        .map(|bag| Bag {
            id: bag.id.clone(),
            label: bag.label,
            truth: bag.truth.clone(),
            instances: bag
                .instances
                .iter()
                .map(|inst| {
                    Instance::new(
                        inst.features()
                            .iter()
                            .zip(scaler.mean.iter().zip(&scaler.std))
                            .map(|(v, (m, s))| (v - m) / s)
                            .collect(),
                    )
                })
                .collect(),
        })
        .collect();
    Ok(Dataset { bags, dim: d.dim })
}

/// Euclidean distance with a dimension check.
pub fn distance(a: &Instance, b: &Instance) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "distance between vectors of dim {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(euclidean(a.features(), b.features()))
}

/// Euclidean distance on raw slices; callers guarantee equal lengths.
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

const CSV_TRUTH_NA: &str = "NA";

/// Writes the bag-CSV format: header `bag_id,bag_label,truth,f0,...`, one row
/// per instance, LF line endings, `.` decimal separator. Float formatting is
/// shortest-round-trip, so writing then reading recovers values exactly.
pub fn write_csv<W: Write>(d: &Dataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["bag_id".to_string(), "bag_label".into(), "truth".into()];
    header.extend((0..d.dim).map(|i| format!("f{i}")));
    w.write_record(&header)
        .map_err(|e| Error::data(e.to_string()))?;
    for bag in &d.bags {
        for (i, inst) in bag.instances.iter().enumerate() {
            let truth = match &bag.truth {
                Some(t) => t[i].as_i8().to_string(),
                None => CSV_TRUTH_NA.to_string(),
            };
            let mut rec = vec![bag.id.clone(), bag.label.as_i8().to_string(), truth];
            rec.extend(inst.features().iter().map(|v| format!("{v}")));
            w.write_record(&rec).map_err(|e| Error::data(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(d, file)
}

/// Reads the bag-CSV format. Rows with the same `bag_id` form one bag, in
/// first-appearance order; a bag's rows must agree on the label and either
/// all carry truth values or all carry `NA`.
pub fn read_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(input));
    let headers = reader
        .headers()
        .map_err(|e| Error::data(e.to_string()))?
        .clone();
    if headers.len() < 4
        || &headers[0] != "bag_id"
        || &headers[1] != "bag_label"
        || &headers[2] != "truth"
    {
        return Err(Error::data(
            "expected header bag_id,bag_label,truth,f0,...".to_string(),
        ));
    }
    let dim = headers.len() - 3;
    for (i, h) in headers.iter().skip(3).enumerate() {
        if h != format!("f{i}") {
            return Err(Error::data(format!(
                "feature column {} named {h:?}, expected f{i}",
                i + 3
            )));
        }
    }

    struct Partial {
        label: Label,
        instances: Vec<Instance>,
        truth: Vec<Option<Label>>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut bags: HashMap<String, Partial> = HashMap::new();

    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::data(e.to_string()))?;
        let line = row_idx + 2;
        if record.len() != headers.len() {
            return Err(Error::data(format!(
                "line {line}: {} fields, expected {}",
                record.len(),
                headers.len()
            )));
        }
        let id = record[0].to_string();
        let label = Label::from_i8(
            record[1]
                .parse::<i8>()
                .map_err(|_| Error::data(format!("line {line}: bad bag_label {:?}", &record[1])))?,
        )?;
        let truth = match &record[2] {
            CSV_TRUTH_NA => None,
            other => Some(Label::from_i8(other.parse::<i8>().map_err(|_| {
                Error::data(format!("line {line}: bad truth {other:?}"))
            })?)?),
        };
        let features = record
            .iter()
            .skip(3)
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::data(format!("line {line}: bad feature value {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;

        let entry = bags.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Partial {
                label,
                instances: Vec::new(),
                truth: Vec::new(),
            }
        });
        if entry.label != label {
            return Err(Error::data(format!(
                "line {line}: bag {id} changes label mid-file"
            )));
        }
        entry.instances.push(Instance::new(features));
        entry.truth.push(truth);
    }

    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let partial = bags.remove(&id).expect("bag recorded in order");
        let truth = if partial.truth.iter().all(Option::is_some) {
            Some(partial.truth.into_iter().map(Option::unwrap).collect())
        } else if partial.truth.iter().all(Option::is_none) {
            None
        } else {
            return Err(Error::data(format!(
                "bag {id}: truth must be all NA or all labelled"
            )));
        };
        out.push(Bag::new(id, partial.instances, partial.label, truth)?);
    }
    if out.is_empty() {
        return Err(Error::data("CSV contains no instance rows".to_string()));
    }
    Dataset::new(out, dim)
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = std::fs::File::open(&path).map_err(|e| {
        Error::data(format!(
            "cannot open {}: {e}",
            path.as_ref().display()
        ))
    })?;
    read_csv(file)
}
