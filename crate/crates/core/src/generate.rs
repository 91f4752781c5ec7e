//! Writing sampled pairs to disk: two edge lists, a truth CSV, a seed file
//! and a JSON manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{save_edge_list, SeedMap};
use crate::models::{block_density, sample_pair_with, sample_ratio_pair, CoreModel, CorrelatedPairSpec, LabeledPair, UnsharedSpec};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub core: CoreModel,
    pub rho: f64,
    #[serde(default)]
    pub unshared_g: UnsharedSpec,
    #[serde(default)]
    pub unshared_g2: UnsharedSpec,
    #[serde(default)]
    pub rng_seed: u64,
    /// Seed pairs to draw from the shared vertices into `seeds.txt`.
    #[serde(default)]
    pub seeds: usize,
    /// Share only a `⌈ratio·N⌉` random subset of an SBM core.
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl GenerateConfig {
    pub fn from_toml(text: &str) -> Result<GenerateConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn pair_spec(&self) -> CorrelatedPairSpec {
        CorrelatedPairSpec {
            core: self.core.clone(),
            rho: self.rho,
            unshared_g: self.unshared_g.clone(),
            unshared_g2: self.unshared_g2.clone(),
            rng_seed: self.rng_seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub density: f64,
    /// Row-major `k × k` block densities (SBM only).
    pub block_densities: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerateManifest {
    pub schema_version: u32,
    pub config: GenerateConfig,
    pub voi: (String, String),
    pub shared: usize,
    pub g: GraphSummary,
    pub g2: GraphSummary,
    pub files: Vec<String>,
}

fn summarize(g: &crate::graph::Graph, blocks: Option<&Vec<usize>>) -> GraphSummary {
    let block_densities = blocks.map(|b| {
        let k = b.iter().copied().max().map_or(0, |m| m + 1);
        (0..k).map(|i| (0..k).map(|j| block_density(g, b, i, j)).collect()).collect()
    });
    GraphSummary { vertices: g.n_vertices(), edges: g.n_edges(), density: g.density(), block_densities }
}

/// Samples the configured pair.
pub fn sample(cfg: &GenerateConfig) -> Result<LabeledPair> {
    let mut r = rng::stream(cfg.rng_seed, 0);
    match (cfg.ratio, &cfg.core) {
        (None, _) => sample_pair_with(&cfg.pair_spec(), &mut r),
        (Some(ratio), CoreModel::Sbm(sbm)) => {
            if cfg.unshared_g.count > 0 || cfg.unshared_g2.count > 0 {
                return Err(Error::Config("ratio mode does not take unshared vertex specs".into()));
            }
            sample_ratio_pair(sbm, ratio, cfg.rho, &mut r)
        }
        (Some(_), CoreModel::Rdpg(_)) => Err(Error::Config("ratio mode needs an SBM core".into())),
    }
}

/// Samples and writes `g.edges`, `g2.edges`, `truth.csv`, `seeds.txt`,
/// `voi.txt` and `manifest.json` into `dir`.
pub fn generate(cfg: &GenerateConfig, dir: &Path) -> Result<GenerateManifest> {
    let pair = sample(cfg)?;
    let mut seed_rng = rng::stream(cfg.rng_seed, 1);
    let seeds = SeedMap::new(pair.choose_seeds(cfg.seeds, &mut seed_rng)?)?;

    fs::create_dir_all(dir)?;
    save_edge_list(&pair.g, BufWriter::new(File::create(dir.join("g.edges"))?))?;
    save_edge_list(&pair.g2, BufWriter::new(File::create(dir.join("g2.edges"))?))?;
    let mut truth = csv::Writer::from_path(dir.join("truth.csv"))?;
    truth.write_record(["label_g", "label_g2"])?;
    for (a, b) in &pair.truth {
        truth.write_record([a, b])?;
    }
    truth.flush()?;
    seeds.write(BufWriter::new(File::create(dir.join("seeds.txt"))?))?;
    fs::write(dir.join("voi.txt"), format!("{} {}\n", pair.voi.0, pair.voi.1))?;

    let manifest = GenerateManifest {
        schema_version: crate::experiment::SCHEMA_VERSION,
        config: cfg.clone(),
        voi: pair.voi.clone(),
        shared: pair.truth.len(),
        g: summarize(&pair.g, pair.g_blocks.as_ref()),
        g2: summarize(&pair.g2, pair.g2_blocks.as_ref()),
        files: ["g.edges", "g2.edges", "truth.csv", "seeds.txt", "voi.txt", "manifest.json"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
