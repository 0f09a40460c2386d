//! Synthetic two-dimensional MIL datasets and label-noise injection.
//!
//! Three layouts:
//!
//! - **BASIC**: true positives from one normal cluster, negative-bag
//!   instances uniform on a box, decoys in positive bags uniform on a second
//!   box whose far corner brushes the positive cluster.
//! - **RHOMBUS**: true positives from two normal clusters left and right of
//!   the origin, negatives uniform on rectangles above and below; decoys are
//!   copies sampled from the negative-bag instances.
//! - **RING**: true positives from a normal cluster at the origin, negative-
//!   bag instances uniform on an annulus band, decoys on the band just
//!   outside it.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Bag, Dataset, Instance, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Basic,
    Rhombus,
    Ring,
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Basic => "basic",
            SynthKind::Rhombus => "rhombus",
            SynthKind::Ring => "ring",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "basic" => Some(SynthKind::Basic),
            "rhombus" => Some(SynthKind::Rhombus),
            "ring" => Some(SynthKind::Ring),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicParams {
    pub pos_center: [f64; 2],
    pub pos_std: f64,
    /// Negative-bag instances: uniform on [lo, hi]^2.
    pub neg_box: [f64; 2],
    /// Decoys in positive bags: uniform on this x range ...
    pub fpi_box_x: [f64; 2],
    /// ... and this y range. The default box points away from both the
    /// negative box and the positive cluster, so its far corner out-scores
    /// true positives on raw negative distance while staying graph-
    /// dissimilar to them.
    pub fpi_box_y: [f64; 2],
}

impl Default for BasicParams {
    fn default() -> Self {
        BasicParams {
            pos_center: [2.5, 2.5],
            pos_std: 0.4,
            neg_box: [-1.0, 1.0],
            fpi_box_x: [0.0, 3.2],
            fpi_box_y: [-3.2, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhombusParams {
    pub pos_centers: [[f64; 2]; 2],
    pub pos_std: f64,
    /// Rectangles span this x range ...
    pub rect_x: [f64; 2],
    /// ... and |y| in [inner, outer], mirrored above and below the clusters.
    pub rect_y: [f64; 2],
}

impl Default for RhombusParams {
    fn default() -> Self {
        RhombusParams {
            pos_centers: [[-2.0, 0.0], [2.0, 0.0]],
            pos_std: 0.4,
            rect_x: [-3.0, 3.0],
            rect_y: [1.0, 2.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingParams {
    pub pos_std: f64,
    /// Positives are redrawn until strictly inside this radius.
    pub pos_max_radius: f64,
    /// Negative-bag instances: uniform on the annulus [r0, r1].
    pub neg_radii: [f64; 2],
    /// Decoys in positive bags: uniform on the annulus [r0, r1].
    pub fpi_radii: [f64; 2],
}

impl Default for RingParams {
    fn default() -> Self {
        RingParams {
            pos_std: 0.5,
            pos_max_radius: 1.8,
            neg_radii: [2.0, 2.5],
            fpi_radii: [2.5, 3.0],
        }
    }
}

/// Layout, bag counts and seed for one synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n_pos_bags: usize,
    pub n_neg_bags: usize,
    /// True positives per positive bag.
    pub pos_per_bag: usize,
    /// Decoy negatives per positive bag.
    pub fpi_per_bag: usize,
    /// Instances per negative bag.
    pub neg_per_bag: usize,
    pub seed: u64,
    pub basic: BasicParams,
    pub rhombus: RhombusParams,
    pub ring: RingParams,
}

impl SynthSpec {
    pub fn new(kind: SynthKind, seed: u64) -> Self {
        SynthSpec {
            kind,
            n_pos_bags: 20,
            n_neg_bags: 20,
            pos_per_bag: 4,
            fpi_per_bag: 4,
            neg_per_bag: 8,
            seed,
            basic: BasicParams::default(),
            rhombus: RhombusParams::default(),
            ring: RingParams::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_pos_bags == 0 || self.n_neg_bags == 0 {
            return Err(Error::invalid("need at least one bag of each class"));
        }
        if self.pos_per_bag == 0 || self.neg_per_bag == 0 {
            return Err(Error::invalid("bags must be non-empty"));
        }
        Ok(())
    }
}

fn uniform_box(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    vec![rng.random_range(lo..hi), rng.random_range(lo..hi)]
}

/// Uniform over the annulus area between the two radii.
fn uniform_annulus(rng: &mut ChaCha8Rng, radii: [f64; 2]) -> Vec<f64> {
    let [r0, r1] = radii;
    let u: f64 = rng.random();
    let r = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    vec![r * theta.cos(), r * theta.sin()]
}

fn normal_point(rng: &mut ChaCha8Rng, center: [f64; 2], std: f64) -> Vec<f64> {
    let n = Normal::new(0.0, std).expect("positive std");
    vec![center[0] + n.sample(rng), center[1] + n.sample(rng)]
}

/// Generates a dataset with ground-truth instance labels; bag labels follow
/// the MIL rule by construction. Instances inside each positive bag are
/// shuffled so truth never correlates with instance index.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Negative bags come first so RHOMBUS decoys can be drawn from them.
    let mut neg_bags_rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(spec.n_neg_bags);
    for _ in 0..spec.n_neg_bags {
        let rows = (0..spec.neg_per_bag)
            .map(|_| match spec.kind {
                SynthKind::Basic => {
                    uniform_box(&mut rng, spec.basic.neg_box[0], spec.basic.neg_box[1])
                }
                SynthKind::Rhombus => {
                    let p = &spec.rhombus;
                    let x = rng.random_range(p.rect_x[0]..p.rect_x[1]);
                    let y = rng.random_range(p.rect_y[0]..p.rect_y[1]);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    vec![x, sign * y]
                }
                SynthKind::Ring => uniform_annulus(&mut rng, spec.ring.neg_radii),
            })
            .collect();
        neg_bags_rows.push(rows);
    }

    // Decoy pool for RHOMBUS: indices into the flattened negative rows,
    // sampled without replacement while the pool lasts.
    let rhombus_pool: Vec<Vec<f64>> = if spec.kind == SynthKind::Rhombus {
        let flat: Vec<Vec<f64>> = neg_bags_rows.iter().flatten().cloned().collect();
        let needed = spec.n_pos_bags * spec.fpi_per_bag;
        let mut order: Vec<usize> = (0..flat.len()).collect();
        order.shuffle(&mut rng);
        (0..needed)
            .map(|k| flat[order[k % order.len()]].clone())
            .collect()
    } else {
        Vec::new()
    };

    let mut bags = Vec::with_capacity(spec.n_pos_bags + spec.n_neg_bags);
    for b in 0..spec.n_pos_bags {
        let mut rows: Vec<(Vec<f64>, Label)> = Vec::new();
        for _ in 0..spec.pos_per_bag {
            let point = match spec.kind {
                SynthKind::Basic => {
                    normal_point(&mut rng, spec.basic.pos_center, spec.basic.pos_std)
                }
                SynthKind::Rhombus => {
                    let p = &spec.rhombus;
                    let which = usize::from(rng.random::<bool>());
                    normal_point(&mut rng, p.pos_centers[which], p.pos_std)
                }
                SynthKind::Ring => loop {
                    let p = normal_point(&mut rng, [0.0, 0.0], spec.ring.pos_std);
                    if (p[0] * p[0] + p[1] * p[1]).sqrt() < spec.ring.pos_max_radius {
                        break p;
                    }
                },
            };
            rows.push((point, Label::Positive));
        }
        for k in 0..spec.fpi_per_bag {
            let point = match spec.kind {
                SynthKind::Basic => {
                    let p = &spec.basic;
                    vec![
                        rng.random_range(p.fpi_box_x[0]..p.fpi_box_x[1]),
                        rng.random_range(p.fpi_box_y[0]..p.fpi_box_y[1]),
                    ]
                }
                SynthKind::Rhombus => rhombus_pool[b * spec.fpi_per_bag + k].clone(),
                SynthKind::Ring => uniform_annulus(&mut rng, spec.ring.fpi_radii),
            };
            rows.push((point, Label::Negative));
        }
        rows.shuffle(&mut rng);
        let (instances, truth): (Vec<Instance>, Vec<Label>) = rows
            .into_iter()
            .map(|(p, t)| (Instance::new(p), t))
            .unzip();
        bags.push(Bag::new(
            format!("p{b:02}"),
            instances,
            Label::Positive,
            Some(truth),
        )?);
    }
    for (b, rows) in neg_bags_rows.into_iter().enumerate() {
        let truth = vec![Label::Negative; rows.len()];
        bags.push(Bag::new(
            format!("n{b:02}"),
            rows.into_iter().map(Instance::new).collect(),
            Label::Negative,
            Some(truth),
        )?);
    }
    Dataset::new(bags, 2)
}

/// Noise level 0..=5. Level `k` flips the ground truth of `(k-1) * 10%` of
/// the true positives to negative and `k * 10%` of the decoy negatives
/// inside positive bags to positive; bag labels are then recomputed from the
/// flipped truth. Negative bags are never touched, so the dataset keeps both
/// classes at every level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseLevel(u8);

impl NoiseLevel {
    pub fn new(level: u8) -> Result<Self> {
        if level > 5 {
            return Err(Error::invalid(format!(
                "noise level must be 0..=5, got {level}"
            )));
        }
        Ok(NoiseLevel(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }

    /// Fractions flipped: (positive -> negative, decoy -> positive).
    pub fn fractions(self) -> (f64, f64) {
        if self.0 == 0 {
            (0.0, 0.0)
        } else {
            ((self.0 - 1) as f64 / 10.0, self.0 as f64 / 10.0)
        }
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Flips ground-truth labels per the noise level, then recomputes bag
/// labels. Victims are chosen uniformly without replacement from the
/// original truth assignment; the same seed flips the same instances.
pub fn inject_noise(d: &Dataset, level: NoiseLevel, seed: u64) -> Result<Dataset> {
    if d.bags.iter().any(|b| b.truth.is_none()) {
        return Err(Error::invalid("noise injection needs ground truth"));
    }
    if level.level() == 0 {
        return Ok(d.clone());
    }
    let mut positives: Vec<(usize, usize)> = Vec::new();
    let mut decoys: Vec<(usize, usize)> = Vec::new();
    for (bi, bag) in d.bags.iter().enumerate() {
        if !bag.label.is_positive() {
            continue;
        }
        let truth = bag.truth.as_ref().expect("checked above");
        for (ii, t) in truth.iter().enumerate() {
            if t.is_positive() {
                positives.push((bi, ii));
            } else {
                decoys.push((bi, ii));
            }
        }
    }
    let (frac_pos, frac_neg) = level.fractions();
    let n_pos_flips = round_half_up(frac_pos * positives.len() as f64);
    let n_neg_flips = round_half_up(frac_neg * decoys.len() as f64);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    positives.shuffle(&mut rng);
    decoys.shuffle(&mut rng);

    let mut out = d.clone();
    for &(bi, ii) in positives.iter().take(n_pos_flips) {
        out.bags[bi].truth.as_mut().expect("truth present")[ii] = Label::Negative;
    }
    for &(bi, ii) in decoys.iter().take(n_neg_flips) {
        out.bags[bi].truth.as_mut().expect("truth present")[ii] = Label::Positive;
    }
    out.relabel_from_truth()?;
    Ok(out)
}
