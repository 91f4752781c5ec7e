//! Samplers for stochastic block models, random dot product graphs and
//! ρ-correlated pairs of them.
//!
//! A correlated pair shares a core of vertices. Each core vertex pair gets
//! an edge indicator in both graphs with the same Bernoulli marginal and
//! Pearson correlation ρ. Vertices outside the core ("unshared") exist in
//! one graph only and their edges are drawn independently.
//!
//! Generated labels are `v{i}` in the first graph (core first, then `u{j}`
//! for unshared vertices) and `w{k}` in the second, where the second
//! graph's vertex order is a uniform shuffle. Only the truth map connects
//! the two label spaces.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, Rng};

const DOT_TOLERANCE: f64 = 1e-12;

/// Stochastic block model with contiguous blocks in label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub lambda: Vec<Vec<f64>>,
}

impl SbmSpec {
    /// `k` equal blocks of `size` vertices.
    pub fn equal_blocks(k: usize, size: usize, lambda: Vec<Vec<f64>>) -> SbmSpec {
        SbmSpec { block_sizes: vec![size; k], lambda }
    }

    pub fn k(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::InvalidParameter("SBM needs at least one block".into()));
        }
        if self.block_sizes.iter().any(|&b| b == 0) {
            return Err(Error::InvalidParameter("SBM block sizes must be positive".into()));
        }
        validate_lambda(&self.lambda, k)
    }

    /// Block index of every vertex, contiguous in label order.
    pub fn block_assignment(&self) -> Vec<usize> {
        self.block_sizes.iter().enumerate().flat_map(|(b, &size)| std::iter::repeat(b).take(size)).collect()
    }
}

fn validate_lambda(lambda: &[Vec<f64>], k: usize) -> Result<()> {
    if lambda.len() != k || lambda.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidParameter(format!("lambda must be {k}x{k}")));
    }
    for i in 0..k {
        for j in 0..k {
            let x = lambda[i][j];
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidParameter(format!("lambda[{i}][{j}] = {x} is not a probability")));
            }
            if x != lambda[j][i] {
                return Err(Error::InvalidParameter("lambda must be symmetric".into()));
            }
        }
    }
    Ok(())
}

/// Random dot product graph: one latent position per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdpgSpec {
    pub positions: Vec<Vec<f64>>,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl RdpgSpec {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        validate_positions(&self.positions, &self.positions)
    }
}

/// Every dot product between rows of `xs` and `ys` (and within `xs`) must be
/// a probability.
fn validate_positions(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
    let d = xs.first().or(ys.first()).map_or(0, |r| r.len());
    if xs.iter().chain(ys).any(|r| r.len() != d) {
        return Err(Error::InvalidParameter("latent positions must share one dimension".into()));
    }
    for (i, x) in xs.iter().enumerate() {
        for y in ys.iter().chain(xs) {
            let p = dot(x, y);
            if !(-DOT_TOLERANCE..=1.0 + DOT_TOLERANCE).contains(&p) {
                return Err(Error::InvalidParameter(format!("dot product {p} for vertex {i} is outside [0, 1]")));
            }
        }
    }
    Ok(())
}

/// Model for the shared core of a correlated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CoreModel {
    Sbm(SbmSpec),
    Rdpg(RdpgSpec),
}

impl CoreModel {
    pub fn n(&self) -> usize {
        match self {
            CoreModel::Sbm(s) => s.n(),
            CoreModel::Rdpg(r) => r.n(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoreModel::Sbm(s) => s.validate(),
            CoreModel::Rdpg(r) => r.validate(),
        }
    }
}

/// Vertices present in only one graph of the pair.
///
/// By default they follow the core model: uniformly random blocks of the
/// core SBM, or latent positions copied from uniformly random core vertices
/// of the core RDPG. `lambda`/`blocks` (SBM) and `positions` (RDPG) override
/// that.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnsharedSpec {
    pub count: usize,
    /// Extended block matrix whose upper-left `k × k` block equals the core's.
    pub lambda: Option<Vec<Vec<f64>>>,
    /// Block of each unshared vertex, indexing the (extended) block matrix.
    pub blocks: Option<Vec<usize>>,
    pub positions: Option<Vec<Vec<f64>>>,
}

impl UnsharedSpec {
    pub fn none() -> Self {
        UnsharedSpec::default()
    }

    pub fn count(count: usize) -> Self {
        UnsharedSpec { count, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedPairSpec {
    pub core: CoreModel,
    pub rho: f64,
    #[serde(default)]
    pub unshared_g: UnsharedSpec,
    #[serde(default)]
    pub unshared_g2: UnsharedSpec,
    #[serde(default)]
    pub rng_seed: u64,
}

impl CorrelatedPairSpec {
    pub fn validate(&self) -> Result<()> {
        self.core.validate()?;
        check_rho(self.rho)?;
        for u in [&self.unshared_g, &self.unshared_g2] {
            self.profile(u, &mut rng::stream(0, 0))?;
        }
        Ok(())
    }

    /// Edge-probability profile of one graph: the core followed by
    /// `unshared.count` extra vertices.
    fn profile(&self, unshared: &UnsharedSpec, rng: &mut Rng) -> Result<Profile> {
        match &self.core {
            CoreModel::Sbm(sbm) => {
                if unshared.positions.is_some() {
                    return Err(Error::InvalidParameter("latent positions given for an SBM core".into()));
                }
                let k = sbm.k();
                let lambda = match &unshared.lambda {
                    None => sbm.lambda.clone(),
                    Some(ext) => {
                        validate_lambda(ext, ext.len())?;
                        if ext.len() < k || (0..k).any(|i| ext[i][..k] != sbm.lambda[i][..]) {
                            return Err(Error::InvalidParameter(
                                "extended lambda must contain the core lambda as its upper-left block".into(),
                            ));
                        }
                        ext.clone()
                    }
                };
                let mut blocks = sbm.block_assignment();
                match &unshared.blocks {
                    Some(b) => {
                        if b.len() != unshared.count || b.iter().any(|&x| x >= lambda.len()) {
                            return Err(Error::InvalidParameter("unshared block list has wrong length or range".into()));
                        }
                        blocks.extend_from_slice(b);
                    }
                    None => {
                        let total = lambda.len();
                        blocks.extend((0..unshared.count).map(|_| rng.gen_range(0..total)));
                    }
                }
                Ok(Profile::Sbm { blocks, lambda })
            }
            CoreModel::Rdpg(rdpg) => {
                if unshared.lambda.is_some() || unshared.blocks.is_some() {
                    return Err(Error::InvalidParameter("block parameters given for an RDPG core".into()));
                }
                let mut positions = rdpg.positions.clone();
                match &unshared.positions {
                    Some(y) => {
                        if y.len() != unshared.count {
                            return Err(Error::InvalidParameter("unshared positions have wrong length".into()));
                        }
                        validate_positions(y, &rdpg.positions)?;
                        positions.extend(y.iter().cloned());
                    }
                    None => {
                        if unshared.count > 0 && rdpg.n() == 0 {
                            return Err(Error::InvalidParameter("cannot copy positions from an empty core".into()));
                        }
                        for _ in 0..unshared.count {
                            let src = rng.gen_range(0..rdpg.n());
                            positions.push(rdpg.positions[src].clone());
                        }
                    }
                }
                Ok(Profile::Rdpg { positions })
            }
        }
    }
}

enum Profile {
    Sbm { blocks: Vec<usize>, lambda: Vec<Vec<f64>> },
    Rdpg { positions: Vec<Vec<f64>> },
}

impl Profile {
    fn prob(&self, i: usize, j: usize) -> f64 {
        match self {
            Profile::Sbm { blocks, lambda } => lambda[blocks[i]][blocks[j]],
            Profile::Rdpg { positions } => dot(&positions[i], &positions[j]).clamp(0.0, 1.0),
        }
    }

    fn blocks(&self) -> Option<Vec<usize>> {
        match self {
            Profile::Sbm { blocks, .. } => Some(blocks.clone()),
            Profile::Rdpg { .. } => None,
        }
    }
}

/// A sampled pair with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub g: Graph,
    pub g2: Graph,
    /// `(label in g, label in g2)` for every shared vertex, in core order.
    pub truth: Vec<(String, String)>,
    /// Designated vertex of interest and its counterpart.
    pub voi: (String, String),
    /// Shared vertices other than the vertex of interest.
    pub seed_pool: Vec<(String, String)>,
    /// Block of each vertex by internal index (SBM models only).
    pub g_blocks: Option<Vec<usize>>,
    pub g2_blocks: Option<Vec<usize>>,
}

impl LabeledPair {
    /// `count` seed pairs drawn uniformly without replacement from the pool.
    pub fn choose_seeds(&self, count: usize, rng: &mut Rng) -> Result<Vec<(String, String)>> {
        if count > self.seed_pool.len() {
            return Err(Error::InvalidParameter(format!(
                "{count} seeds requested but only {} shared vertices are available",
                self.seed_pool.len()
            )));
        }
        let picks = index::sample(rng, self.seed_pool.len(), count);
        Ok(picks.iter().map(|i| self.seed_pool[i].clone()).collect())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Correlated pair of Bernoulli(`p`) indicators with correlation `rho`.
///
/// `A ~ Bern(p)`, then `A' | A=1 ~ Bern(p + ρ(1−p))` and
/// `A' | A=0 ~ Bern(p(1−ρ))`.
pub fn sample_correlated_bernoulli_pair(p: f64, rho: f64, rng: &mut Rng) -> Result<(bool, bool)> {
    check_prob(p)?;
    check_rho(rho)?;
    Ok(correlated_pair(p, rho, rng))
}

#[inline]
fn correlated_pair(p: f64, rho: f64, rng: &mut Rng) -> (bool, bool) {
    let a = rng.gen::<f64>() < p;
    let conditional = if a { p + rho * (1.0 - p) } else { p * (1.0 - rho) };
    (a, rng.gen::<f64>() < conditional)
}

/// Shuffles the vertices of a second graph and labels them `w{k}` by
/// position. Returns the graph and each original vertex's new label.
fn shuffled_graph(n: usize, edges: &[(usize, usize)], rng: &mut Rng) -> (Graph, Vec<String>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut position = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let labels: Vec<String> = (0..n).map(|k| format!("w{k}")).collect();
    let g = Graph::from_edges(labels, edges.iter().map(|&(u, v)| (position[u], position[v])))
        .expect("generated labels are unique and indices in range");
    let new_labels = (0..n).map(|v| format!("w{}", position[v])).collect();
    (g, new_labels)
}

fn first_labels(core: usize, extra: usize) -> Vec<String> {
    (0..core).map(|i| format!("v{i}")).chain((0..extra).map(|j| format!("u{j}"))).collect()
}

fn finish_pair(
    g: Graph,
    g2: Graph,
    truth: Vec<(String, String)>,
    rng: &mut Rng,
    g_blocks: Option<Vec<usize>>,
    g2_blocks: Option<Vec<usize>>,
) -> Result<LabeledPair> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("pair has no shared vertices".into()));
    }
    let x = rng.gen_range(0..truth.len());
    let voi = truth[x].clone();
    let seed_pool = truth.iter().enumerate().filter(|&(i, _)| i != x).map(|(_, p)| p.clone()).collect();
    Ok(LabeledPair { g, g2, truth, voi, seed_pool, g_blocks, g2_blocks })
}

fn permute_blocks(blocks: Option<Vec<usize>>, new_labels: &[String]) -> Option<Vec<usize>> {
    blocks.map(|b| {
        let mut out = vec![0; b.len()];
        for (v, label) in new_labels.iter().enumerate() {
            let k: usize = label[1..].parse().expect("generated label");
            out[k] = b[v];
        }
        out
    })
}

/// Samples a pair from `spec`, drawing from the stream keyed by `spec.rng_seed`.
pub fn sample_pair(spec: &CorrelatedPairSpec) -> Result<LabeledPair> {
    sample_pair_with(spec, &mut rng::stream(spec.rng_seed, 0))
}

/// [`sample_pair`] with an explicit random stream.
pub fn sample_pair_with(spec: &CorrelatedPairSpec, rng: &mut Rng) -> Result<LabeledPair> {
    spec.validate()?;
    let n = spec.core.n();
    let (m, m2) = (spec.unshared_g.count, spec.unshared_g2.count);
    let prof = spec.profile(&spec.unshared_g, rng)?;
    let prof2 = spec.profile(&spec.unshared_g2, rng)?;

    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = correlated_pair(prof.prob(i, j), spec.rho, rng);
            if a {
                e1.push((i, j));
            }
            if b {
                e2.push((i, j));
            }
        }
    }
    for (prof, extra, edges) in [(&prof, m, &mut e1), (&prof2, m2, &mut e2)] {
        for u in n..n + extra {
            for v in 0..u {
                if rng.gen::<f64>() < prof.prob(u, v) {
                    edges.push((v, u));
                }
            }
        }
    }

    let g = Graph::from_edges(first_labels(n, m), e1).expect("generated labels are unique");
    let (g2, new_labels) = shuffled_graph(n + m2, &e2, rng);
    let truth = (0..n).map(|i| (format!("v{i}"), new_labels[i].clone())).collect();
    let g2_blocks = permute_blocks(prof2.blocks(), &new_labels);
    finish_pair(g, g2, truth, rng, prof.blocks(), g2_blocks)
}

/// Number of shared vertices for ratio `r` on `n` vertices: `⌈r·n⌉`.
pub fn ratio_core_size(r: f64, n: usize) -> usize {
    // guard against 0.3·300 = 90.00000000000001
    ((r * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// `G ~ SBM` on all of `core`'s vertices; a uniformly random `⌈r·N⌉`-subset
/// is shared, and the second graph is drawn ρ-correlated with the first
/// graph's induced subgraph on that subset.
pub fn sample_ratio_pair(core: &SbmSpec, r: f64, rho: f64, rng: &mut Rng) -> Result<LabeledPair> {
    core.validate()?;
    check_rho(rho)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("ratio must lie in (0, 1], got {r}")));
    }
    let n = core.n();
    let blocks = core.block_assignment();
    let shared_count = ratio_core_size(r, n);
    if shared_count == 0 {
        return Err(Error::InvalidParameter("ratio leaves no shared vertices".into()));
    }

    let mut adjacent = vec![false; n * n];
    let mut e1 = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < core.lambda[blocks[i]][blocks[j]] {
                adjacent[i * n + j] = true;
                e1.push((i, j));
            }
        }
    }
    let mut shared: Vec<usize> = index::sample(rng, n, shared_count).into_vec();
    shared.sort_unstable();

    let mut e2 = Vec::new();
    for (a, &i) in shared.iter().enumerate() {
        for (b, &j) in shared.iter().enumerate().skip(a + 1) {
            let p = core.lambda[blocks[i]][blocks[j]];
            let conditional = if adjacent[i * n + j] { p + rho * (1.0 - p) } else { p * (1.0 - rho) };
            if rng.gen::<f64>() < conditional {
                e2.push((a, b));
            }
        }
    }

    let g = Graph::from_edges(first_labels(n, 0), e1).expect("generated labels are unique");
    let (g2, new_labels) = shuffled_graph(shared_count, &e2, rng);
    let truth = shared.iter().enumerate().map(|(a, &i)| (format!("v{i}"), new_labels[a].clone())).collect();
    let shared_blocks = Some(shared.iter().map(|&i| blocks[i]).collect());
    let g2_blocks = permute_blocks(shared_blocks, &new_labels);
    finish_pair(g, g2, truth, rng, Some(blocks), g2_blocks)
}

/// Samples a single graph from an SBM (no partner).
pub fn sample_sbm(spec: &SbmSpec, rng: &mut Rng) -> Result<Graph> {
    spec.validate()?;
    let n = spec.n();
    let blocks = spec.block_assignment();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < spec.lambda[blocks[i]][blocks[j]] {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::from_edges(first_labels(n, 0), edges).expect("generated labels are unique"))
}

/// Edge density between (or within, when `a == b`) two blocks.
pub fn block_density(g: &Graph, blocks: &[usize], a: usize, b: usize) -> f64 {
    let n = g.n_vertices();
    let (mut pairs, mut edges) = (0u64, 0u64);
    for i in 0..n {
        for j in (i + 1)..n {
            let (bi, bj) = (blocks[i], blocks[j]);
            if (bi == a && bj == b) || (bi == b && bj == a) {
                pairs += 1;
                if g.has_edge(i, j) {
                    edges += 1;
                }
            }
        }
    }
    if pairs == 0 {
        0.0
    } else {
        edges as f64 / pairs as f64
    }
}
