//! The consistent similarity and discrimination graph: one vertex per
//! working bag, edge weights combining similarity, consistency and
//! discrimination; vertex ranking by a personalized random walk; and the
//! greedy instance-updating strategy that swaps weak candidates for better
//! working-set members.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::affinity::{consistency_matrix, similarity_unchecked, ConfidenceTable, SimGraph};
use crate::error::{Error, Result};

/// Random-walk parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankParams {
    /// Damping factor in [0, 1).
    pub damping: f64,
    /// The walk runs exactly this many iterations.
    pub max_iter: usize,
}

impl Default for RankParams {
    fn default() -> Self {
        RankParams {
            damping: 0.8,
            max_iter: 10,
        }
    }
}

/// Instance-updating parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateParams {
    /// Cap on committed replacements.
    pub max_updates: usize,
    /// Seed for the random-walk start vector.
    pub seed: u64,
}

impl Default for UpdateParams {
    fn default() -> Self {
        UpdateParams {
            max_updates: 20,
            seed: 0,
        }
    }
}

/// Per-vertex random-walk scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub scores: Vec<f64>,
}

/// The candidate graph. Vertices are indices into a fixed candidate
/// universe, one per working bag; the weight matrix is symmetric with a
/// zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Csdg {
    vertices: Vec<usize>,
    weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl Csdg {
    pub fn m(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.m() + j]
    }

    /// Edge-list dump: vertex table then `i j weight` lines for the upper
    /// triangle of present edges.
    pub fn dump(&self, label: impl Fn(usize) -> String) -> String {
        let m = self.m();
        let mut out = String::from("# vertices\n");
        for (i, &u) in self.vertices.iter().enumerate() {
            out.push_str(&format!("{i} {}\n", label(u)));
        }
        out.push_str("# edges\n");
        for i in 0..m {
            for j in (i + 1)..m {
                let w = self.weight(i, j);
                if w > 0.0 {
                    out.push_str(&format!("{i} {j} {w}\n"));
                }
            }
        }
        out
    }
}

/// Everything the graph needs to score candidates: pairwise confidences over
/// the candidate universe, per-candidate discrimination, and for each vertex
/// the universe ids of its bag's working-set members.
#[derive(Debug)]
pub struct CandidateContext<'a> {
    pub table: &'a ConfidenceTable,
    pub d_values: &'a [f64],
    /// Aligned with graph vertices: candidate pool of each vertex's bag.
    pub working_sets: &'a [Vec<usize>],
    pub quasi_clique_gamma: f64,
}

impl CandidateContext<'_> {
    fn validate(&self, m: usize) -> Result<()> {
        if self.working_sets.len() != m {
            return Err(Error::invalid(format!(
                "context has {} working sets for {} vertices",
                self.working_sets.len(),
                m
            )));
        }
        if let Some(v) = self.working_sets.iter().position(Vec::is_empty) {
            return Err(Error::invalid(format!("vertex {v} has an empty working set")));
        }
        if self.d_values.len() != self.table.len() {
            return Err(Error::invalid(
                "discrimination values do not cover the candidate universe",
            ));
        }
        Ok(())
    }
}

/// Balance factors from the mean similarity, consistency and absolute
/// discrimination over the initial graph's edges. Undefined or non-positive
/// log arguments collapse to the floor value 10.
pub fn balance_factors(s_mean: f64, c_mean: f64, d_abs_mean: f64) -> (f64, f64) {
    let floor = 10.0;
    let safe = |ratio: f64| {
        if ratio.is_finite() && ratio > 0.0 {
            ratio.ln().max(floor)
        } else {
            floor
        }
    };
    let alpha = safe(c_mean / s_mean);
    let beta = safe((alpha * s_mean + c_mean) / d_abs_mean);
    (alpha, beta)
}

/// Mean similarity, consistency and |discrimination| over pairs with
/// positive similarity among the given vertices. Returns zeros when no such
/// pair exists.
pub fn edge_means(
    vertex_ids: &[usize],
    table: &ConfidenceTable,
    d_values: &[f64],
    quasi_clique_gamma: f64,
) -> (f64, f64, f64) {
    let m = vertex_ids.len();
    let mut sim = vec![0.0; m * m];
    let mut graph = SimGraph::new(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let s = similarity_unchecked(vertex_ids[i], vertex_ids[j], table);
            sim[i * m + j] = s;
            if s > 0.0 {
                graph.add_edge(i, j);
            }
        }
    }
    let cons = consistency_matrix(&graph, quasi_clique_gamma);
    let (mut s_sum, mut c_sum, mut d_sum, mut count) = (0.0, 0.0, 0.0, 0usize);
    for i in 0..m {
        for j in (i + 1)..m {
            let s = sim[i * m + j];
            if s > 0.0 {
                s_sum += s;
                c_sum += cons[i][j] as f64;
                d_sum += d_values[vertex_ids[i]].min(d_values[vertex_ids[j]]).abs();
                count += 1;
            }
        }
    }
    if count == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let n = count as f64;
        (s_sum / n, c_sum / n, d_sum / n)
    }
}

/// Builds the graph over the given candidate vertices. An edge exists only
/// where similarity is positive; its weight is
/// `max(0, S + alpha * C + beta * min(D_i, D_j))`.
pub fn build(
    vertex_ids: &[usize],
    ctx: &CandidateContext,
    alpha: f64,
    beta: f64,
) -> Result<Csdg> {
    let m = vertex_ids.len();
    if m == 0 {
        return Err(Error::invalid("graph needs at least one vertex"));
    }
    if vertex_ids.iter().any(|&u| u >= ctx.table.len()) {
        return Err(Error::invalid("vertex id outside the candidate universe"));
    }
    let mut sim = vec![0.0; m * m];
    let mut graph = SimGraph::new(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let s = similarity_unchecked(vertex_ids[i], vertex_ids[j], ctx.table);
            sim[i * m + j] = s;
            sim[j * m + i] = s;
            if s > 0.0 {
                graph.add_edge(i, j);
            }
        }
    }
    let cons = consistency_matrix(&graph, ctx.quasi_clique_gamma);
    let mut weights = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let s = sim[i * m + j];
            if s > 0.0 {
                let d = ctx.d_values[vertex_ids[i]].min(ctx.d_values[vertex_ids[j]]);
                let w = (s + alpha * cons[i][j] as f64 + beta * d).max(0.0);
                weights[i * m + j] = w;
                weights[j * m + i] = w;
            }
        }
    }
    Ok(Csdg {
        vertices: vertex_ids.to_vec(),
        weights,
        alpha,
        beta,
    })
}

fn draw_start_vector(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r0: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let sum: f64 = r0.iter().sum();
    if sum > 0.0 {
        for v in &mut r0 {
            *v /= sum;
        }
    } else {
        r0.fill(1.0 / m as f64);
    }
    r0
}

fn personalization(conf_diag: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = conf_diag.iter().map(|&c| c.max(0.0)).collect();
    let sum: f64 = p.iter().sum();
    if sum > 0.0 {
        for v in &mut p {
            *v /= sum;
        }
    } else {
        let uniform = 1.0 / p.len() as f64;
        p.fill(uniform);
    }
    p
}

fn iterate_walk(
    e: &[f64],
    m: usize,
    p: &[f64],
    r0: &[f64],
    params: &RankParams,
    mut observe: impl FnMut(&[f64]),
) -> Vec<f64> {
    let mut r = r0.to_vec();
    let mut next = vec![0.0; m];
    for _ in 0..params.max_iter {
        for i in 0..m {
            let mut acc = 0.0;
            for j in 0..m {
                acc += e[i * m + j] * r[j];
            }
            next[i] = (1.0 - params.damping) * p[i] + params.damping * acc;
        }
        std::mem::swap(&mut r, &mut next);
        observe(&r);
    }
    r
}

/// Column-stochastic transition matrix: each column is divided by its sum;
/// all-zero columns become uniform so no column loses mass.
fn column_stochastic(g: &Csdg) -> Vec<f64> {
    let m = g.m();
    let mut e = vec![0.0; m * m];
    for j in 0..m {
        let colsum: f64 = (0..m).map(|i| g.weight(i, j)).sum();
        if colsum > 0.0 {
            for i in 0..m {
                e[i * m + j] = g.weight(i, j) / colsum;
            }
        } else {
            for i in 0..m {
                e[i * m + j] = 1.0 / m as f64;
            }
        }
    }
    e
}

/// Symmetric scaling by the largest column sum. Unlike the stochastic form
/// this keeps the matrix symmetric and lets the total walk mass reflect how
/// uniformly strong the graph is, so sums are comparable across candidate
/// swaps; an edgeless graph maps to the zero matrix.
fn symmetric_scaled(g: &Csdg) -> Vec<f64> {
    let m = g.m();
    let max_colsum = (0..m)
        .map(|j| (0..m).map(|i| g.weight(i, j)).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut e = vec![0.0; m * m];
    if max_colsum > 0.0 {
        for i in 0..m * m {
            e[i] = g.weights[i] / max_colsum;
        }
    }
    e
}

fn check_rank_inputs(g: &Csdg, conf_diag: &[f64]) -> Result<()> {
    if g.m() == 0 {
        return Err(Error::invalid("cannot rank an empty graph"));
    }
    if conf_diag.len() != g.m() {
        return Err(Error::invalid(format!(
            "self-confidence vector has {} entries for {} vertices",
            conf_diag.len(),
            g.m()
        )));
    }
    Ok(())
}

/// Personalized random-walk scores: the start vector is seeded uniform
/// (normalized to sum 1), the transition matrix is column-stochastic, and
/// the walk runs exactly `max_iter` iterations.
pub fn rank(g: &Csdg, conf_diag: &[f64], params: &RankParams, seed: u64) -> Result<RankVector> {
    check_rank_inputs(g, conf_diag)?;
    rank_with_initial(g, conf_diag, params, &draw_start_vector(g.m(), seed))
}

/// Like [`rank`] but with an explicit start vector.
pub fn rank_with_initial(
    g: &Csdg,
    conf_diag: &[f64],
    params: &RankParams,
    r0: &[f64],
) -> Result<RankVector> {
    check_rank_inputs(g, conf_diag)?;
    if r0.len() != g.m() {
        return Err(Error::invalid("start vector length mismatch"));
    }
    let e = column_stochastic(g);
    let p = personalization(conf_diag);
    let scores = iterate_walk(&e, g.m(), &p, r0, params, |_| {});
    Ok(RankVector { scores })
}

/// As [`rank`], also returning every iterate for inspection.
pub fn rank_with_history(
    g: &Csdg,
    conf_diag: &[f64],
    params: &RankParams,
    seed: u64,
) -> Result<(RankVector, Vec<Vec<f64>>)> {
    check_rank_inputs(g, conf_diag)?;
    let e = column_stochastic(g);
    let p = personalization(conf_diag);
    let r0 = draw_start_vector(g.m(), seed);
    let mut history = Vec::with_capacity(params.max_iter);
    let scores = iterate_walk(&e, g.m(), &p, &r0, params, |r| history.push(r.to_vec()));
    Ok((RankVector { scores }, history))
}

/// The surrogate objective the updating strategy maximizes: the summed walk
/// mass under the symmetric scaling. The column-stochastic walk used for
/// ordering preserves total mass by construction, so its sum carries no
/// information about edge weights; this variant's sum grows as the graph
/// becomes uniformly heavier.
pub fn total_score(g: &Csdg, conf_diag: &[f64], params: &RankParams, seed: u64) -> Result<f64> {
    check_rank_inputs(g, conf_diag)?;
    total_score_with_initial(g, conf_diag, params, &draw_start_vector(g.m(), seed))
}

/// Like [`total_score`] but with an explicit start vector.
pub fn total_score_with_initial(
    g: &Csdg,
    conf_diag: &[f64],
    params: &RankParams,
    r0: &[f64],
) -> Result<f64> {
    check_rank_inputs(g, conf_diag)?;
    if r0.len() != g.m() {
        return Err(Error::invalid("start vector length mismatch"));
    }
    let e = symmetric_scaled(g);
    let p = personalization(conf_diag);
    let scores = iterate_walk(&e, g.m(), &p, r0, params, |_| {});
    Ok(scores.iter().sum())
}

/// One committed replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitRecord {
    pub vertex: usize,
    pub old_candidate: usize,
    pub new_candidate: usize,
    pub objective: f64,
}

/// What happened during one updating run.
#[derive(Debug, Clone, Default)]
pub struct UpdateTrace {
    /// Objective after each commit, starting with the initial graph's value.
    pub objectives: Vec<f64>,
    pub commits: Vec<CommitRecord>,
    pub initial_rank: Vec<f64>,
    /// Rank vector after each commit.
    pub rank_history: Vec<Vec<f64>>,
    pub n_updates: usize,
}

fn conf_diag(g: &Csdg, ctx: &CandidateContext) -> Vec<f64> {
    g.vertices
        .iter()
        .map(|&u| ctx.table.self_confidence(u))
        .collect()
}

fn rank_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .expect("finite rank scores")
            .then(a.cmp(&b))
    });
    order
}

/// The instance-updating strategy. Starting from the lowest-ranked vertex,
/// tries every working-set candidate of that vertex's bag that is not
/// already in the graph; if the best one strictly raises the objective it is
/// committed (one actual update), the graph is re-ranked and the cursor
/// moves to the lowest-ranked vertex (second lowest when the lowest is the
/// vertex just updated). If nothing improves, the cursor advances through
/// the current rank order and the run ends once the last vertex fails.
/// Stops after `max_updates` commits.
pub fn update_instances(
    g: Csdg,
    ctx: &CandidateContext,
    up: &UpdateParams,
    rp: &RankParams,
) -> Result<(Csdg, UpdateTrace)> {
    ctx.validate(g.m())?;
    let m = g.m();
    let r0 = draw_start_vector(m, up.seed);

    let mut graph = g;
    let mut trace = UpdateTrace::default();
    let diag = conf_diag(&graph, ctx);
    let mut current_total = total_score_with_initial(&graph, &diag, rp, &r0)?;
    trace.objectives.push(current_total);
    let ranks = rank_with_initial(&graph, &diag, rp, &r0)?.scores;
    trace.initial_rank = ranks.clone();

    if up.max_updates == 0 {
        return Ok((graph, trace));
    }

    let mut order = rank_order(&ranks);
    let mut cursor = 0usize;

    loop {
        let vt = order[cursor];
        let in_graph: HashSet<usize> = graph.vertices.iter().copied().collect();
        let mut best: Option<(f64, usize)> = None;
        for &cand in &ctx.working_sets[vt] {
            if in_graph.contains(&cand) {
                continue;
            }
            let mut trial_vertices = graph.vertices.clone();
            trial_vertices[vt] = cand;
            let trial = build(&trial_vertices, ctx, graph.alpha, graph.beta)?;
            let trial_diag = conf_diag(&trial, ctx);
            let score = total_score_with_initial(&trial, &trial_diag, rp, &r0)?;
            if score > current_total && best.map_or(true, |(b, _)| score > b) {
                best = Some((score, cand));
            }
        }
        match best {
            None => {
                if cursor + 1 >= m {
                    break;
                }
                cursor += 1;
            }
            Some((score, cand)) => {
                let old = graph.vertices[vt];
                let mut vertices = graph.vertices.clone();
                vertices[vt] = cand;
                graph = build(&vertices, ctx, graph.alpha, graph.beta)?;
                current_total = score;
                trace.objectives.push(score);
                trace.commits.push(CommitRecord {
                    vertex: vt,
                    old_candidate: old,
                    new_candidate: cand,
                    objective: score,
                });
                trace.n_updates += 1;
                if trace.n_updates >= up.max_updates {
                    break;
                }
                let diag = conf_diag(&graph, ctx);
                let ranks = rank_with_initial(&graph, &diag, rp, &r0)?.scores;
                trace.rank_history.push(ranks.clone());
                order = rank_order(&ranks);
                cursor = if order[0] == vt { 1 } else { 0 };
                if cursor >= m {
                    break;
                }
            }
        }
    }
    Ok((graph, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_from(conf: Vec<Vec<f64>>) -> ConfidenceTable {
        let ids = (0..conf.len()).map(|i| (i, 0)).collect();
        ConfidenceTable::from_confidences(ids, conf)
    }

    #[test]
    fn balance_factor_examples() {
        // Equal means: ln 1 = 0, the floor 10 dominates.
        let (alpha, _) = balance_factors(1.0, 1.0, 1.0);
        assert_eq!(alpha, 10.0);
        // Ratio e^12 exceeds the floor.
        let (alpha, _) = balance_factors(1.0, 12f64.exp(), 1.0);
        assert!((alpha - 12.0).abs() < 1e-9);
        // No positive-similarity edges: everything collapses to the floor.
        let (alpha, beta) = balance_factors(0.0, 0.0, 0.0);
        assert_eq!((alpha, beta), (10.0, 10.0));
    }

    fn two_vertex_ctx_weights(d0: f64, d1: f64) -> f64 {
        // Mutual top rank gives S = 1; a lone edge gives C = 2.
        let table = table_from(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        let d_values = vec![d0, d1];
        let ws = vec![vec![0], vec![1]];
        let ctx = CandidateContext {
            table: &table,
            d_values: &d_values,
            working_sets: &ws,
            quasi_clique_gamma: 0.9,
        };
        let g = build(&[0, 1], &ctx, 10.0, 10.0).unwrap();
        g.weight(0, 1)
    }

    #[test]
    fn build_weight_arithmetic() {
        // S = 1, C = 2, min(D) = -0.2: 1 + 20 - 2 = 19.
        assert!((two_vertex_ctx_weights(-0.1, -0.2) - 19.0).abs() < 1e-12);
        // min(D) = -3 drives the weight to the clamp at 0.
        assert_eq!(two_vertex_ctx_weights(-0.1, -3.0), 0.0);
    }

    #[test]
    fn build_edgeless_when_similarity_zero() {
        let table = table_from(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let d_values = vec![-0.1, -0.1];
        let ws = vec![vec![0], vec![1]];
        let ctx = CandidateContext {
            table: &table,
            d_values: &d_values,
            working_sets: &ws,
            quasi_clique_gamma: 0.9,
        };
        let g = build(&[0, 1], &ctx, 10.0, 10.0).unwrap();
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.weight(1, 0), 0.0);
    }

    fn plain_graph(weights: &[(usize, usize, f64)], m: usize) -> Csdg {
        let mut w = vec![0.0; m * m];
        for &(a, b, v) in weights {
            w[a * m + b] = v;
            w[b * m + a] = v;
        }
        Csdg {
            vertices: (0..m).collect(),
            weights: w,
            alpha: 10.0,
            beta: 10.0,
        }
    }

    #[test]
    fn rank_with_zero_damping_returns_personalization() {
        let g = plain_graph(&[(0, 1, 5.0)], 3);
        let params = RankParams {
            damping: 0.0,
            max_iter: 10,
        };
        let r = rank(&g, &[3.0, 1.0, 0.0], &params, 42).unwrap();
        assert_eq!(r.scores, vec![0.75, 0.25, 0.0]);
    }

    #[test]
    fn rank_symmetric_pair_equal_scores() {
        let g = plain_graph(&[(0, 1, 2.0)], 2);
        let r = rank_with_initial(
            &g,
            &[1.0, 1.0],
            &RankParams::default(),
            &[0.5, 0.5],
        )
        .unwrap();
        assert_eq!(r.scores[0].to_bits(), r.scores[1].to_bits());
    }

    #[test]
    fn rank_line_graph_center_dominates() {
        // Hand-iterated oracle for the 3-vertex line graph a-b-c with unit
        // weights and equal personalization, symmetric start.
        let g = plain_graph(&[(0, 1, 1.0), (1, 2, 1.0)], 3);
        let params = RankParams::default();
        let r = rank_with_initial(&g, &[1.0, 1.0, 1.0], &params, &[1.0 / 3.0; 3]).unwrap();

        // Independent miniature iteration of the same system: columns of the
        // stochastic matrix are a -> b, b -> {a, c} half each, c -> b.
        let p = [1.0 / 3.0; 3];
        let mut rr = [1.0 / 3.0; 3];
        for _ in 0..params.max_iter {
            let next = [
                0.2 * p[0] + 0.8 * (0.5 * rr[1]),
                0.2 * p[1] + 0.8 * (rr[0] + rr[2]),
                0.2 * p[2] + 0.8 * (0.5 * rr[1]),
            ];
            rr = next;
        }
        for (got, want) in r.scores.iter().zip(rr) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(r.scores[1] > r.scores[0]);
        assert_eq!(r.scores[0].to_bits(), r.scores[2].to_bits());
    }

    #[test]
    fn rank_rejects_empty_graph() {
        let g = Csdg {
            vertices: vec![],
            weights: vec![],
            alpha: 10.0,
            beta: 10.0,
        };
        assert!(rank(&g, &[], &RankParams::default(), 0).is_err());
    }

    #[test]
    fn rank_iterates_sum_to_one() {
        // Mixed graph with an isolated vertex: the uniform remap of its zero
        // column keeps every iterate stochastic.
        let g = plain_graph(&[(0, 1, 3.0), (1, 2, 0.5)], 4);
        let (_, history) =
            rank_with_history(&g, &[0.5, 2.0, 0.0, 1.0], &RankParams::default(), 7).unwrap();
        assert_eq!(history.len(), 10);
        for iterate in history {
            let sum: f64 = iterate.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        }
    }

    #[test]
    fn total_score_zero_damping_is_one() {
        let g = plain_graph(&[(0, 1, 5.0)], 2);
        let params = RankParams {
            damping: 0.0,
            max_iter: 10,
        };
        let t = total_score(&g, &[1.0, 3.0], &params, 9).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_score_permutation_invariant() {
        let g = plain_graph(&[(0, 1, 5.0), (1, 2, 2.0), (0, 2, 1.0)], 3);
        let diag = [2.0, 1.0, 0.5];
        let r0 = [0.2, 0.3, 0.5];
        let t1 = total_score_with_initial(&g, &diag, &RankParams::default(), &r0).unwrap();

        // Permute vertices 0 <-> 2 everywhere.
        let gp = plain_graph(&[(2, 1, 5.0), (1, 0, 2.0), (2, 0, 1.0)], 3);
        let diag_p = [0.5, 1.0, 2.0];
        let r0_p = [0.5, 0.3, 0.2];
        let t2 = total_score_with_initial(&gp, &diag_p, &RankParams::default(), &r0_p).unwrap();
        assert!((t1 - t2).abs() < 1e-12);
    }

    #[test]
    fn total_score_single_vertex_hand_value() {
        // One vertex, no edges: the scaled matrix is zero, so from the first
        // iteration on the mass is (1 - d) * 1 = 0.2.
        let g = plain_graph(&[], 1);
        let t = total_score_with_initial(&g, &[1.0], &RankParams::default(), &[1.0]).unwrap();
        assert!((t - 0.2).abs() < 1e-12);
    }

    /// Six-candidate fixture: candidates 0-2 are a mutually confident core,
    /// 3 is a planted dud (negative confidence everywhere), 4 is a planted
    /// strong replacement, 5 a weak one. Vertex 3's bag offers {3, 4, 5}.
    fn planted_fixture() -> (ConfidenceTable, Vec<f64>, Vec<Vec<usize>>) {
        let core = [0usize, 1, 2, 4];
        let n = 6;
        let mut conf = vec![vec![-1.0; n]; n];
        for &i in &core {
            for &j in &core {
                conf[i][j] = if i == j { 1.0 } else { 0.8 };
            }
        }
        conf[3][3] = -0.5;
        conf[5][5] = 0.4;
        conf[5][0] = 0.3;
        conf[0][5] = 0.3;
        let table = table_from(conf);
        let d_values = vec![-0.1, -0.1, -0.1, -2.0, -0.1, -0.8];
        let working_sets = vec![vec![0], vec![1], vec![2], vec![3, 4, 5]];
        (table, d_values, working_sets)
    }

    #[test]
    fn update_commits_planted_replacement() {
        let (table, d_values, working_sets) = planted_fixture();
        let ctx = CandidateContext {
            table: &table,
            d_values: &d_values,
            working_sets: &working_sets,
            quasi_clique_gamma: 0.9,
        };
        let g = build(&[0, 1, 2, 3], &ctx, 10.0, 10.0).unwrap();
        let up = UpdateParams {
            max_updates: 20,
            seed: 5,
        };
        let rp = RankParams::default();

        // Exhaustive oracle over every single replacement: swapping the dud
        // for candidate 4 must maximize the objective.
        let r0 = draw_start_vector(4, up.seed);
        let base = total_score_with_initial(&g, &conf_diag(&g, &ctx), &rp, &r0).unwrap();
        let mut best = (base, None);
        for vertex in 0..4 {
            for &cand in &working_sets[vertex] {
                if g.vertices().contains(&cand) {
                    continue;
                }
                let mut vs = g.vertices().to_vec();
                vs[vertex] = cand;
                let trial = build(&vs, &ctx, 10.0, 10.0).unwrap();
                let t =
                    total_score_with_initial(&trial, &conf_diag(&trial, &ctx), &rp, &r0).unwrap();
                if t > best.0 {
                    best = (t, Some((vertex, cand)));
                }
            }
        }
        assert_eq!(best.1, Some((3, 4)), "oracle: planted swap is the best single move");

        let (updated, trace) = update_instances(g, &ctx, &up, &rp).unwrap();
        assert_eq!(updated.vertices(), &[0, 1, 2, 4]);
        assert_eq!(trace.commits.len(), 1);
        assert_eq!(trace.commits[0].vertex, 3);
        assert_eq!(trace.commits[0].new_candidate, 4);
        // Committed objectives strictly increase.
        for pair in trace.objectives.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        assert!(trace.n_updates <= up.max_updates);
        // Symmetry and non-negativity survive updating.
        for i in 0..4 {
            for j in 0..4 {
                assert!(updated.weight(i, j) >= 0.0);
                assert_eq!(updated.weight(i, j), updated.weight(j, i));
            }
        }
    }

    #[test]
    fn update_without_improvement_returns_input() {
        let (table, d_values, working_sets) = planted_fixture();
        let ctx = CandidateContext {
            table: &table,
            d_values: &d_values,
            working_sets: &working_sets,
            quasi_clique_gamma: 0.9,
        };
        let g = build(&[0, 1, 2, 4], &ctx, 10.0, 10.0).unwrap();
        let up = UpdateParams {
            max_updates: 20,
            seed: 5,
        };
        let (updated, trace) = update_instances(g.clone(), &ctx, &up, &RankParams::default())
            .unwrap();
        assert_eq!(updated, g);
        assert!(trace.commits.is_empty());
    }

    #[test]
    fn update_with_zero_budget_is_identity() {
        let (table, d_values, working_sets) = planted_fixture();
        let ctx = CandidateContext {
            table: &table,
            d_values: &d_values,
            working_sets: &working_sets,
            quasi_clique_gamma: 0.9,
        };
        let g = build(&[0, 1, 2, 3], &ctx, 10.0, 10.0).unwrap();
        let up = UpdateParams {
            max_updates: 0,
            seed: 5,
        };
        let (updated, trace) = update_instances(g.clone(), &ctx, &up, &RankParams::default())
            .unwrap();
        assert_eq!(updated, g);
        assert_eq!(trace.n_updates, 0);
    }

    #[test]
    fn update_rejects_empty_working_set() {
        let (table, d_values, _) = planted_fixture();
        let working_sets = vec![vec![0], vec![], vec![2], vec![3]];
        let ctx = CandidateContext {
            table: &table,
            d_values: &d_values,
            working_sets: &working_sets,
            quasi_clique_gamma: 0.9,
        };
        let g = build(&[0, 1, 2, 3], &ctx, 10.0, 10.0).unwrap();
        assert!(update_instances(g, &ctx, &UpdateParams::default(), &RankParams::default())
            .is_err());
    }

    #[test]
    fn dump_lists_vertices_and_edges() {
        let g = plain_graph(&[(0, 1, 2.5)], 3);
        let text = g.dump(|u| format!("cand{u}"));
        assert!(text.contains("# vertices"));
        assert!(text.contains("0 cand0"));
        assert!(text.contains("# edges"));
        assert!(text.contains("0 1 2.5"));
        assert!(!text.contains("0 2 "));
    }
}
