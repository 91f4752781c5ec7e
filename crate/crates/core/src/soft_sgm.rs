//! Soft seeded graph matching: independent Frank-Wolfe restarts from
//! randomized doubly stochastic starts, averaged into a soft correspondence.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency_matrix, reorder_seeds_first, Graph, SeedMap};
use crate::rng::{self, Rng};
use crate::sgm::{frank_wolfe_blocks, objective_f, pad_and_center, Blocks, DoublyStochastic};

/// Prefix of synthetic labels given to padding vertices.
pub const PAD_PREFIX: &str = "⊥";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SoftSgmConfig {
    pub restarts: usize,
    /// Starts are `βQ + (1−β)·barycenter` with `β ~ Uniform(0, gamma)`.
    pub gamma: f64,
    /// Relative stopping tolerance; a run stops once `|Δf| ≤ eps·max(1, |f(P0)|)`.
    pub eps: f64,
    pub max_iter: usize,
    pub rng_seed: u64,
}

impl Default for SoftSgmConfig {
    fn default() -> Self {
        SoftSgmConfig { restarts: 100, gamma: 0.1, eps: 1e-6, max_iter: 100, rng_seed: 0 }
    }
}

impl SoftSgmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Random perturbation of the barycenter toward a uniform permutation.
pub fn random_start(dim: usize, gamma: f64, rng: &mut Rng) -> DoublyStochastic {
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(rng);
    let beta = if gamma > 0.0 { rng.gen::<f64>() * gamma } else { 0.0 };
    let mut p = Array2::from_elem((dim, dim), (1.0 - beta) / dim as f64);
    for (r, &c) in perm.iter().enumerate() {
        p[[r, c]] += beta;
    }
    DoublyStochastic::new(p).expect("convex combination of doubly stochastic matrices")
}

/// Soft correspondence between the non-seed vertices of two graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMatch {
    /// `p[[i, j]]`: fraction of restarts matching row `i` to column `j`.
    pub p: Array2<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub row_is_pad: Vec<bool>,
    pub col_is_pad: Vec<bool>,
    pub seeds: SeedMap,
    pub config: SoftSgmConfig,
    pub restart_iterations: Vec<usize>,
}

/// Candidate scores for one row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowScores {
    pub candidates: Vec<(String, f64)>,
    /// Mass on padding columns (no counterpart in the second graph).
    pub pad_mass: f64,
}

impl SoftMatch {
    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().zip(&self.row_is_pad).position(|(l, &pad)| !pad && l == label)
    }

    /// Per-row mass on padding columns.
    pub fn pad_mass(&self) -> Vec<f64> {
        self.p
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(&self.col_is_pad).filter(|(_, &pad)| pad).fold(0.0, |acc, (x, _)| acc + x))
            .collect()
    }

    pub fn to_record(&self) -> SoftMatchRecord {
        SoftMatchRecord {
            schema_version: SCHEMA_VERSION,
            config: self.config,
            seeds: self.seeds.pairs().to_vec(),
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            row_is_pad: self.row_is_pad.clone(),
            col_is_pad: self.col_is_pad.clone(),
            p: self.p.iter().copied().collect(),
            pad_mass: self.pad_mass(),
            restart_iterations: self.restart_iterations.clone(),
        }
    }

    pub fn from_record(rec: SoftMatchRecord) -> Result<SoftMatch> {
        let (r, c) = (rec.row_labels.len(), rec.col_labels.len());
        if rec.row_is_pad.len() != r || rec.col_is_pad.len() != c {
            return Err(Error::Dimension("pad flags do not match label counts".into()));
        }
        let p = Array2::from_shape_vec((r, c), rec.p).map_err(|e| Error::Dimension(e.to_string()))?;
        Ok(SoftMatch {
            p,
            row_labels: rec.row_labels,
            col_labels: rec.col_labels,
            row_is_pad: rec.row_is_pad,
            col_is_pad: rec.col_is_pad,
            seeds: SeedMap::new(rec.seeds)?,
            config: rec.config,
            restart_iterations: rec.restart_iterations,
        })
    }
}

pub const SCHEMA_VERSION: u32 = 1;

/// JSON layout of a [`SoftMatch`]; `p` is row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SoftMatchRecord {
    pub schema_version: u32,
    pub config: SoftSgmConfig,
    pub seeds: Vec<(String, String)>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub row_is_pad: Vec<bool>,
    pub col_is_pad: Vec<bool>,
    pub p: Vec<f64>,
    pub pad_mass: Vec<f64>,
    pub restart_iterations: Vec<usize>,
}

fn free_labels(g: &Graph, s: usize, size: usize) -> (Vec<String>, Vec<bool>) {
    let mut labels: Vec<String> = g.labels()[s..].to_vec();
    let mut is_pad = vec![false; labels.len()];
    for k in 0..size - g.n_vertices() {
        labels.push(format!("{PAD_PREFIX}{k}"));
        is_pad.push(true);
    }
    (labels, is_pad)
}

/// Soft-matches `g` to `g2` given the seed correspondence.
pub fn soft_sgm(g: &Graph, g2: &Graph, seeds: &SeedMap, cfg: &SoftSgmConfig) -> Result<SoftMatch> {
    cfg.validate()?;
    if g.n_vertices() == 0 || g2.n_vertices() == 0 {
        return Err(Error::EmptyInput("cannot match an empty graph".into()));
    }
    let (g, g2, s) = reorder_seeds_first(g, g2, seeds)?;
    let pair = pad_and_center(adjacency_matrix(&g).view(), adjacency_matrix(&g2).view(), s)?;
    let blocks = Blocks::from_pair(&pair);
    let m = blocks.free_dim();
    let (row_labels, row_is_pad) = free_labels(&g, s, pair.size());
    let (col_labels, col_is_pad) = free_labels(&g2, s, pair.size());

    let runs: Vec<(Vec<usize>, usize)> = if m == 0 {
        Vec::new()
    } else {
        (0..cfg.restarts)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::stream(cfg.rng_seed, i as u64);
                let p0 = random_start(m, cfg.gamma, &mut rng);
                let f0 = objective_f(&blocks, p0.view())?;
                let eps = cfg.eps * f0.abs().max(1.0);
                let run = frank_wolfe_blocks(&blocks, p0, eps, cfg.max_iter, |_, _, _| {})?;
                Ok((run.permutation, run.iterations))
            })
            .collect::<Result<_>>()?
    };

    let mut counts = Array2::<u32>::zeros((m, m));
    for (perm, _) in &runs {
        for (r, &c) in perm.iter().enumerate() {
            counts[[r, c]] += 1;
        }
    }
    let restarts = cfg.restarts as f64;
    Ok(SoftMatch {
        p: counts.mapv(|c| c as f64 / restarts),
        row_labels,
        col_labels,
        row_is_pad,
        col_is_pad,
        seeds: seeds.clone(),
        config: *cfg,
        restart_iterations: runs.iter().map(|r| r.1).collect(),
    })
}

/// Scores of every real candidate column for `voi`, plus pad mass.
pub fn score_row(m: &SoftMatch, voi: &str) -> Result<RowScores> {
    if m.seeds.contains_left(voi) {
        return Err(Error::InvalidParameter(format!("`{voi}` is a seed, not a matchable vertex")));
    }
    let row = m.row_index(voi).ok_or_else(|| Error::UnknownLabel(voi.to_owned()))?;
    let mut candidates = Vec::new();
    let mut pad_mass = 0.0;
    for (j, (label, &pad)) in m.col_labels.iter().zip(&m.col_is_pad).enumerate() {
        if pad {
            pad_mass += m.p[[row, j]];
        } else {
            candidates.push((label.clone(), m.p[[row, j]]));
        }
    }
    Ok(RowScores { candidates, pad_mass })
}
