//! The three edge-score ingredients for the candidate graph: pairwise
//! similarity from exemplar linear classifiers, consistency from maximal
//! quasi-cliques, and robust discrimination from negative instances.

use rayon::prelude::*;

use crate::data::Instance;
use crate::density::NegativeIndex;
use crate::error::{Error, Result};
use crate::svm::{train_linear_costs, LinearModel, SvmConfig};
use crate::util::derive_seed;

/// Linear classifier trained with one instance (replicated) against all
/// negative instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl ExemplarModel {
    /// Confidence of `x` under this exemplar's decision function.
    pub fn confidence(&self, x: &[f64]) -> f64 {
        LinearModel {
            weights: self.weights.clone(),
            bias: self.bias,
        }
        .decision(x)
    }
}

/// Trains the exemplar for `x`: the instance is replicated once per negative
/// instance to balance the classes (realized as a single row whose hinge
/// cost is the negative count times C, which has the identical optimum),
/// negatives keep their own rows.
pub fn train_exemplar(
    x: &Instance,
    neg: &NegativeIndex,
    cfg: &SvmConfig,
    seed: u64,
) -> Result<ExemplarModel> {
    if x.dim() != neg.dim() {
        return Err(Error::invalid(format!(
            "exemplar dim {} does not match negatives dim {}",
            x.dim(),
            neg.dim()
        )));
    }
    let n_neg = neg.n_instances();
    let mut rows = Vec::with_capacity(n_neg + 1);
    let mut labels = Vec::with_capacity(n_neg + 1);
    let mut costs = Vec::with_capacity(n_neg + 1);
    rows.push(x.features().to_vec());
    labels.push(1.0);
    costs.push(cfg.c * n_neg as f64);
    for inst in neg.instances() {
        rows.push(inst.to_vec());
        labels.push(-1.0);
        costs.push(cfg.c);
    }
    let model = train_linear_costs(&rows, &labels, &costs, cfg, seed)?;
    Ok(ExemplarModel {
        weights: model.weights,
        bias: model.bias,
    })
}

/// Pairwise confidences over a fixed candidate universe: `conf[i][j]` is the
/// confidence of instance `j` under instance `i`'s exemplar. The diagonal
/// holds each instance's self-confidence.
#[derive(Debug, Clone)]
pub struct ConfidenceTable {
    pub universe: Vec<(usize, usize)>,
    conf: Vec<Vec<f64>>,
    /// 1-based rank of `conf[i][j]` among the positive entries of row `i`
    /// (rank 1 = largest); 0 where the confidence is not positive.
    rank_in_row: Vec<Vec<u32>>,
}

impl ConfidenceTable {
    /// Trains one exemplar per universe instance (in parallel, seeded per
    /// instance) and tabulates all pairwise confidences.
    pub fn build(
        instances: &[Instance],
        ids: &[(usize, usize)],
        neg: &NegativeIndex,
        cfg: &SvmConfig,
        seed: u64,
    ) -> Result<Self> {
        if instances.is_empty() || instances.len() != ids.len() {
            return Err(Error::invalid(
                "confidence table needs matching non-empty instances and ids",
            ));
        }
        let models: Vec<ExemplarModel> = instances
            .par_iter()
            .enumerate()
            .map(|(i, x)| train_exemplar(x, neg, cfg, derive_seed(seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let conf: Vec<Vec<f64>> = models
            .iter()
            .map(|m| instances.iter().map(|x| m.confidence(x.features())).collect())
            .collect();
        Ok(Self::from_confidences(ids.to_vec(), conf))
    }

    /// Builds the table from precomputed confidences (used by tests).
    pub fn from_confidences(universe: Vec<(usize, usize)>, conf: Vec<Vec<f64>>) -> Self {
        let rank_in_row = conf
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| {
                        if v <= 0.0 {
                            0
                        } else {
                            1 + row.iter().filter(|&&o| o > v).count() as u32
                        }
                    })
                    .collect()
            })
            .collect();
        ConfidenceTable {
            universe,
            conf,
            rank_in_row,
        }
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn confidence(&self, i: usize, j: usize) -> f64 {
        self.conf[i][j]
    }

    pub fn self_confidence(&self, i: usize) -> f64 {
        self.conf[i][i]
    }
}

/// Mutual-rank similarity: `1 / (rank of j under i's exemplar * rank of i
/// under j's exemplar)` when both confidences are positive, 0 otherwise.
pub fn similarity(i: usize, j: usize, table: &ConfidenceTable) -> Result<f64> {
    if i == j {
        return Err(Error::invalid("similarity of an instance with itself"));
    }
    if i >= table.len() || j >= table.len() {
        return Err(Error::invalid(format!(
            "similarity indices ({i}, {j}) out of range for universe of {}",
            table.len()
        )));
    }
    Ok(similarity_unchecked(i, j, table))
}

pub(crate) fn similarity_unchecked(i: usize, j: usize, table: &ConfidenceTable) -> f64 {
    let r_ij = table.rank_in_row[i][j];
    let r_ji = table.rank_in_row[j][i];
    if r_ij == 0 || r_ji == 0 {
        0.0
    } else {
        1.0 / (r_ij as f64 * r_ji as f64)
    }
}

/// Undirected unweighted graph over candidate vertices; edges mark pairs
/// with positive similarity.
#[derive(Debug, Clone)]
pub struct SimGraph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl SimGraph {
    pub fn new(n: usize) -> Self {
        SimGraph {
            n,
            adj: vec![vec![false; n]; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = SimGraph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a][b] = true;
            self.adj[b][a] = true;
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for u in 0..self.n {
                    if self.adj[v][u] && !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Components up to this size get the exact subset search; larger ones fall
/// back to greedy expansion.
const EXACT_COMPONENT_LIMIT: usize = 20;

fn quasi_clique_threshold(size: usize, gamma: f64) -> usize {
    (gamma * (size * (size - 1) / 2) as f64).floor() as usize
}

/// Local bitmask helpers over one component (size <= 64).
struct LocalGraph {
    m: usize,
    adj_mask: Vec<u64>,
}

impl LocalGraph {
    fn build(g: &SimGraph, comp: &[usize]) -> Self {
        let m = comp.len();
        let mut adj_mask = vec![0u64; m];
        for (a, &va) in comp.iter().enumerate() {
            for (b, &vb) in comp.iter().enumerate() {
                if g.adj[va][vb] {
                    adj_mask[a] |= 1 << b;
                }
            }
        }
        LocalGraph { m, adj_mask }
    }

    fn edges_in(&self, mask: u64) -> usize {
        let mut total = 0usize;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += (self.adj_mask[v] & rest).count_ones() as usize;
        }
        total
    }

    fn connected(&self, mask: u64) -> bool {
        if mask == 0 {
            return false;
        }
        let start = 1u64 << mask.trailing_zeros();
        let mut reach = start;
        let mut frontier = start;
        while frontier != 0 {
            let mut next = 0u64;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adj_mask[v];
            }
            next &= mask & !reach;
            reach |= next;
            frontier = next;
        }
        reach == mask
    }
}

/// Iterates masks of a given popcount in increasing numeric order
/// (Gosper's hack).
fn for_each_mask_of_size(m: usize, size: usize, mut f: impl FnMut(u64) -> bool) {
    if size == 0 || size > m || m >= 64 {
        return;
    }
    let limit = (1u64 << m) - 1;
    let mut mask = (1u64 << size) - 1;
    while mask <= limit {
        if !f(mask) {
            return;
        }
        // Gosper's hack: next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask.wrapping_add(c);
        if r == 0 {
            return;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
}

/// Size of the largest vertex set containing both `i` and `j` whose induced
/// subgraph is connected and meets the quasi-clique density bound; 0 when no
/// such set exists (including `i == j`).
pub fn consistency(g: &SimGraph, i: usize, j: usize, gamma_q: f64) -> usize {
    if i == j || i >= g.n || j >= g.n {
        return 0;
    }
    let comp = match g.components().into_iter().find(|c| c.contains(&i)) {
        Some(c) => c,
        None => return 0,
    };
    if !comp.contains(&j) {
        return 0;
    }
    if comp.len() <= EXACT_COMPONENT_LIMIT {
        let local = LocalGraph::build(g, &comp);
        let li = comp.iter().position(|&v| v == i).unwrap();
        let lj = comp.iter().position(|&v| v == j).unwrap();
        let pair = (1u64 << li) | (1u64 << lj);
        for size in (2..=local.m).rev() {
            let thresh = quasi_clique_threshold(size, gamma_q);
            let mut found = 0usize;
            for_each_mask_of_size(local.m, size, |mask| {
                if mask & pair == pair
                    && local.edges_in(mask) >= thresh
                    && local.connected(mask)
                {
                    found = size;
                    return false;
                }
                true
            });
            if found > 0 {
                return found;
            }
        }
        0
    } else {
        greedy_consistency(g, i, j, gamma_q)
    }
}

/// Consistency values for every adjacent pair of `g` at once, exact per
/// connected component (greedy on oversized components). Non-adjacent pairs
/// are left at 0.
pub fn consistency_matrix(g: &SimGraph, gamma_q: f64) -> Vec<Vec<u32>> {
    let mut c = vec![vec![0u32; g.n]; g.n];
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        if comp.len() > EXACT_COMPONENT_LIMIT {
            for (a_pos, &a) in comp.iter().enumerate() {
                for &b in comp.iter().skip(a_pos + 1) {
                    if g.adj[a][b] {
                        let v = greedy_consistency(g, a, b, gamma_q) as u32;
                        c[a][b] = v;
                        c[b][a] = v;
                    }
                }
            }
            continue;
        }
        let local = LocalGraph::build(g, &comp);
        let mut uncovered: Vec<(usize, usize)> = Vec::new();
        for a in 0..local.m {
            for b in (a + 1)..local.m {
                if local.adj_mask[a] & (1 << b) != 0 {
                    uncovered.push((a, b));
                }
            }
        }
        for size in (2..=local.m).rev() {
            if uncovered.is_empty() {
                break;
            }
            let thresh = quasi_clique_threshold(size, gamma_q);
            for_each_mask_of_size(local.m, size, |mask| {
                if local.edges_in(mask) >= thresh && local.connected(mask) {
                    uncovered.retain(|&(a, b)| {
                        let covered = mask & (1 << a) != 0 && mask & (1 << b) != 0;
                        if covered {
                            let (ga, gb) = (comp[a], comp[b]);
                            c[ga][gb] = size as u32;
                            c[gb][ga] = size as u32;
                        }
                        !covered
                    });
                }
                !uncovered.is_empty()
            });
        }
    }
    c
}

/// Greedy fallback for oversized components: grow from the pair, always
/// adding the neighbor that maximizes induced edges, while the density bound
/// holds.
fn greedy_consistency(g: &SimGraph, i: usize, j: usize, gamma_q: f64) -> usize {
    if !g.adj[i][j] {
        return 0;
    }
    let mut members = vec![false; g.n];
    members[i] = true;
    members[j] = true;
    let mut size = 2usize;
    let mut edges = 1usize;
    loop {
        let mut best: Option<(usize, usize)> = None;
        for v in 0..g.n {
            if members[v] {
                continue;
            }
            let gain = (0..g.n).filter(|&u| members[u] && g.adj[v][u]).count();
            if gain == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bg, bv)) => gain > bg || (gain == bg && v < bv),
            };
            if better {
                best = Some((gain, v));
            }
        }
        let Some((gain, v)) = best else { break };
        if edges + gain < quasi_clique_threshold(size + 1, gamma_q) {
            break;
        }
        members[v] = true;
        size += 1;
        edges += gain;
    }
    size
}

/// Parameters of the robust discrimination score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscParams {
    pub z: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Finite stand-in for the singularity at distance zero.
    pub floor: f64,
}

impl Default for DiscParams {
    fn default() -> Self {
        DiscParams {
            z: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            floor: -1e6,
        }
    }
}

/// Influence of one negative instance at distance `delta`: exponential decay
/// beyond distance 1, sharply increasing logarithmic penalty inside it.
pub fn influence(delta: f64, p: &DiscParams) -> f64 {
    if delta == 0.0 {
        p.floor
    } else if delta < 1.0 {
        p.gamma2 * delta.ln() - 1.0
    } else {
        -(-p.gamma1 * (delta - 1.0)).exp()
    }
}

/// Mean influence over every negative instance, scaled by `1/z`; always
/// non-positive, higher (closer to 0) when `x` sits far from negatives.
pub fn discrimination(x: &Instance, neg: &NegativeIndex, p: &DiscParams) -> Result<f64> {
    if x.dim() != neg.dim() {
        return Err(Error::invalid(format!(
            "discrimination dim {} does not match negatives dim {}",
            x.dim(),
            neg.dim()
        )));
    }
    let total_neg = neg.n_instances();
    if total_neg == 0 {
        return Err(Error::invalid("no negative instances"));
    }
    let mut total = 0.0;
    for inst in neg.instances() {
        total += influence(crate::data::euclidean(x.features(), inst), p);
    }
    Ok(total / (p.z * total_neg as f64))
}
