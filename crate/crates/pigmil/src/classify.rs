//! Bag classification: embed each bag as its max-kernel proximities to the
//! detected prototypes, train a linear soft-margin classifier on the
//! embeddings, and predict labels by the sign of the decision value.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::data::{Bag, Instance, Label};
use crate::error::{Error, Result};
use crate::svm::{train_linear, LinearModel, SvmConfig};

/// The detected candidate instances used as embedding anchors, with the
/// kernel width of the proximity function.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototypes {
    pub instances: Vec<Instance>,
    pub gamma_d: f64,
}

impl Prototypes {
    pub fn new(instances: Vec<Instance>, gamma_d: f64) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::invalid("prototype set must be non-empty"));
        }
        if gamma_d <= 0.0 || !gamma_d.is_finite() {
            return Err(Error::invalid("gamma_d must be positive"));
        }
        Ok(Prototypes {
            instances,
            gamma_d,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// A bag's feature vector: one entry per prototype, each in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedBag {
    pub z: Vec<f64>,
}

/// Embeds a bag as, per prototype, the maximum over the bag's instances of
/// `exp(-gamma_d * squared distance)`. The squared norm makes the proximity
/// fall off faster than the density scores' unsquared one.
pub fn embed(bag: &Bag, proto: &Prototypes) -> Result<EmbeddedBag> {
    let dim = proto.instances[0].dim();
    if bag.instances.iter().any(|i| i.dim() != dim) {
        return Err(Error::invalid(format!(
            "bag {} dim does not match prototype dim {dim}",
            bag.id
        )));
    }
    let z = proto
        .instances
        .iter()
        .map(|p| {
            bag.instances
                .iter()
                .map(|inst| {
                    let d2: f64 = inst
                        .features()
                        .iter()
                        .zip(p.features())
                        .map(|(a, b)| {
                            let d = a - b;
                            d * d
                        })
                        .sum();
                    (-proto.gamma_d * d2).exp()
                })
                .fold(f64::MIN, f64::max)
        })
        .collect();
    Ok(EmbeddedBag { z })
}

/// Linear decision model over embedded bags.
#[derive(Debug, Clone, PartialEq)]
pub struct BagModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Trains the linear soft-margin classifier on embedded bags. Both classes
/// must be present.
pub fn train_bag_classifier(
    embedded: &[(EmbeddedBag, Label)],
    cfg: &SvmConfig,
    seed: u64,
) -> Result<BagModel> {
    if embedded.is_empty() {
        return Err(Error::invalid("no embedded bags to train on"));
    }
    let pos = embedded.iter().filter(|(_, l)| l.is_positive()).count();
    if pos == 0 || pos == embedded.len() {
        return Err(Error::invalid(
            "bag classifier needs both classes in the training set",
        ));
    }
    let rows: Vec<Vec<f64>> = embedded.iter().map(|(e, _)| e.z.clone()).collect();
    let labels: Vec<f64> = embedded.iter().map(|(_, l)| l.sign()).collect();
    let model = train_linear(&rows, &labels, cfg, seed)?;
    Ok(BagModel {
        weights: model.weights,
        bias: model.bias,
    })
}

/// Sign of the decision value; zero maps to positive.
pub fn predict(model: &BagModel, z: &EmbeddedBag) -> Result<Label> {
    if z.z.len() != model.weights.len() {
        return Err(Error::invalid(format!(
            "embedding length {} does not match model length {}",
            z.z.len(),
            model.weights.len()
        )));
    }
    let value = LinearModel {
        weights: model.weights.clone(),
        bias: model.bias,
    }
    .decision(&z.z);
    Ok(if value >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    })
}

const MODEL_HEADER: &str = "pigmil-bag-model v1";

/// Writes the model and its prototypes as a plain text format:
/// a header line, `gamma_d`, one `prototype` line per anchor, then
/// `weights` and `bias`. Floats use shortest-round-trip formatting.
pub fn write_model<W: Write>(model: &BagModel, proto: &Prototypes, mut out: W) -> Result<()> {
    writeln!(out, "{MODEL_HEADER}")?;
    writeln!(out, "gamma_d {}", proto.gamma_d)?;
    for p in &proto.instances {
        let row: Vec<String> = p.features().iter().map(|v| format!("{v}")).collect();
        writeln!(out, "prototype {}", row.join(" "))?;
    }
    let ws: Vec<String> = model.weights.iter().map(|v| format!("{v}")).collect();
    writeln!(out, "weights {}", ws.join(" "))?;
    writeln!(out, "bias {}", model.bias)?;
    Ok(())
}

pub fn write_model_file(
    model: &BagModel,
    proto: &Prototypes,
    path: impl AsRef<Path>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_model(model, proto, file)
}

/// Reads the format produced by [`write_model`].
pub fn read_model<R: Read>(input: R) -> Result<(BagModel, Prototypes)> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::data("empty model file"))?;
    if header.trim() != MODEL_HEADER {
        return Err(Error::data(format!("unexpected model header {header:?}")));
    }
    let mut gamma_d = None;
    let mut prototypes = Vec::new();
    let mut weights = None;
    let mut bias = None;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let parse_vec = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::data(format!("bad number {t:?} in model file")))
                })
                .collect()
        };
        match key {
            "gamma_d" => {
                gamma_d = Some(
                    rest.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::data("bad gamma_d in model file"))?,
                )
            }
            "prototype" => prototypes.push(Instance::new(parse_vec(rest)?)),
            "weights" => weights = Some(parse_vec(rest)?),
            "bias" => {
                bias = Some(
                    rest.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::data("bad bias in model file"))?,
                )
            }
            other => return Err(Error::data(format!("unknown model field {other:?}"))),
        }
    }
    let gamma_d = gamma_d.ok_or_else(|| Error::data("model file missing gamma_d"))?;
    let weights = weights.ok_or_else(|| Error::data("model file missing weights"))?;
    let bias = bias.ok_or_else(|| Error::data("model file missing bias"))?;
    let proto = Prototypes::new(prototypes, gamma_d)?;
    if weights.len() != proto.len() {
        return Err(Error::data(format!(
            "model has {} weights for {} prototypes",
            weights.len(),
            proto.len()
        )));
    }
    Ok((BagModel { weights, bias }, proto))
}

pub fn read_model_file(path: impl AsRef<Path>) -> Result<(BagModel, Prototypes)> {
    let file = std::fs::File::open(path)?;
    read_model(file)
}
