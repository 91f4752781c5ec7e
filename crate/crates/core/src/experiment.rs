//! Monte Carlo studies: seed-count sweeps, size-ratio sweeps, the
//! localized-seed-count study, and batch nomination over user files.
//!
//! Every replicate draws from its own random sub-stream keyed by
//! `(rng_seed, grid point, replicate)`, and rows are emitted in
//! `(grid point, replicate)` order, so output files depend only on the
//! config. Wall-clock times go to a separate file for the same reason.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{load_edge_list, read_pairs, Graph, Hops, SeedMap};
use crate::models::{sample_pair_with, sample_ratio_pair, sample_sbm, CoreModel, CorrelatedPairSpec, SbmSpec, UnsharedSpec};
use crate::nomination::{evaluate_tau, localize_seeds, nominate, Nomination, VnConfig};
use crate::rng::{self, grid_stream};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SeedSweep,
    RatioSweep,
    #[serde(alias = "neighborhood-study")]
    Neighborhood,
    CustomNominate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SeedSweep => "seed-sweep",
            ExperimentKind::RatioSweep => "ratio-sweep",
            ExperimentKind::Neighborhood => "neighborhood",
            ExperimentKind::CustomNominate => "custom-nominate",
        }
    }
}

/// Swept values. Unset lists take per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub rho: Option<Vec<f64>>,
    /// Seeds drawn per replicate (seed counts for the neighborhood study).
    pub seeds: Option<Vec<usize>>,
    pub ratio: Option<Vec<f64>>,
    pub h: Option<Vec<Hops>>,
}

/// Inputs for batch nomination over user-supplied files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomSpec {
    pub graph: PathBuf,
    pub graph2: PathBuf,
    pub seeds: PathBuf,
    #[serde(default)]
    pub truth: Option<PathBuf>,
    /// Vertices to nominate for; defaults to every non-seed vertex with a
    /// known counterpart in the truth file.
    #[serde(default)]
    pub vois: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: Option<SbmSpec>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub vnmatch: VnConfig,
    #[serde(default)]
    pub custom: Option<CustomSpec>,
    /// Keep every nomination list (written under `lists/`).
    #[serde(default)]
    pub save_lists: bool,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_replicates() -> usize {
    100
}

/// The three-block matrix used for the seed and ratio sweeps.
pub fn sweep_lambda() -> Vec<Vec<f64>> {
    vec![vec![0.7, 0.3, 0.4], vec![0.3, 0.7, 0.3], vec![0.4, 0.3, 0.7]]
}

/// Sparse assortative matrix used for the neighborhood study.
pub fn neighborhood_lambda() -> Vec<Vec<f64>> {
    (0..3).map(|i| (0..3).map(|j| if i == j { 0.4 } else { 0.05 }).collect()).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        Self::load_as(path, None)
    }

    /// Like [`ExperimentConfig::load`], but checks `kind` against the given
    /// one, or fills it in when the file leaves it out. Relative paths in
    /// `[custom]` are taken from the config file's directory.
    pub fn load_as(path: &Path, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path)?;
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(kind) = kind {
            match table.get("kind").cloned() {
                Some(k) => {
                    let found: ExperimentKind = k.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
                    if found != kind {
                        return Err(Error::Config(format!("config is for `{}`, not `{}`", found.name(), kind.name())));
                    }
                }
                None => {
                    table.insert("kind".into(), toml::Value::String(kind.name().into()));
                }
            }
        }
        let mut cfg: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let (Some(custom), Some(base)) = (cfg.custom.as_mut(), path.parent()) {
            for p in [&mut custom.graph, &mut custom.graph2, &mut custom.seeds] {
                *p = base.join(&*p);
            }
            if let Some(t) = custom.truth.as_mut() {
                *t = base.join(&*t);
            }
        }
        Ok(cfg)
    }

    /// Fills every unset field with its experiment-specific default.
    pub fn resolved(&self) -> ExperimentConfig {
        let mut c = self.clone();
        let model = match self.kind {
            ExperimentKind::Neighborhood => SbmSpec::equal_blocks(3, 100, neighborhood_lambda()),
            _ => SbmSpec::equal_blocks(3, 100, sweep_lambda()),
        };
        c.model.get_or_insert(model);
        let g = &mut c.grid;
        match self.kind {
            ExperimentKind::SeedSweep => {
                g.rho.get_or_insert_with(|| vec![0.6]);
                g.seeds.get_or_insert_with(|| (1..=10).collect());
            }
            ExperimentKind::RatioSweep => {
                g.rho.get_or_insert_with(|| vec![0.6]);
                g.seeds.get_or_insert_with(|| vec![4]);
                g.ratio.get_or_insert_with(|| (0..16).map(|i| 0.25 + 0.05 * i as f64).collect());
            }
            ExperimentKind::Neighborhood => {
                g.seeds.get_or_insert_with(|| vec![10, 20, 30]);
                g.h.get_or_insert_with(|| (1..=5).map(Hops::Finite).collect());
            }
            ExperimentKind::CustomNominate => {}
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        let c = self.resolved();
        let nonempty = |name: &str, len: Option<usize>| match len {
            Some(0) => Err(Error::Config(format!("grid.{name} is empty"))),
            _ => Ok(()),
        };
        nonempty("rho", c.grid.rho.as_ref().map(Vec::len))?;
        nonempty("seeds", c.grid.seeds.as_ref().map(Vec::len))?;
        nonempty("ratio", c.grid.ratio.as_ref().map(Vec::len))?;
        nonempty("h", c.grid.h.as_ref().map(Vec::len))?;
        if let Some(m) = &c.model {
            m.validate()?;
        }
        if c.kind == ExperimentKind::CustomNominate && c.custom.is_none() {
            return Err(Error::Config("custom-nominate needs a [custom] section".into()));
        }
        if c.kind != ExperimentKind::Neighborhood {
            c.vnmatch.validate()?;
        }
        Ok(())
    }

    /// Grid points in output order.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let c = self.resolved();
        let g = &c.grid;
        let mut out = Vec::new();
        match c.kind {
            ExperimentKind::SeedSweep => {
                for &rho in g.rho.as_deref().unwrap_or_default() {
                    for &seeds in g.seeds.as_deref().unwrap_or_default() {
                        out.push(GridPoint { rho: Some(rho), ratio: None, seeds, h: c.vnmatch.h, voi: None });
                    }
                }
            }
            ExperimentKind::RatioSweep => {
                for &rho in g.rho.as_deref().unwrap_or_default() {
                    for &seeds in g.seeds.as_deref().unwrap_or_default() {
                        for &ratio in g.ratio.as_deref().unwrap_or_default() {
                            out.push(GridPoint { rho: Some(rho), ratio: Some(ratio), seeds, h: c.vnmatch.h, voi: None });
                        }
                    }
                }
            }
            ExperimentKind::Neighborhood => {
                for &seeds in g.seeds.as_deref().unwrap_or_default() {
                    for &h in g.h.as_deref().unwrap_or_default() {
                        out.push(GridPoint { rho: None, ratio: None, seeds, h, voi: None });
                    }
                }
            }
            ExperimentKind::CustomNominate => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub rho: Option<f64>,
    pub ratio: Option<f64>,
    pub seeds: usize,
    pub h: Hops,
    pub voi: Option<String>,
}

/// Replicate outcome category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    /// Nominated and the counterpart was a candidate.
    Ok,
    /// Nominated but the counterpart was not among the candidates.
    Absent,
    /// No seed within `h` of the vertex of interest.
    Stop,
    /// Neighborhood study rows (no matching performed).
    Counted,
}

mod na {
    use super::*;

    pub fn serialize<S: Serializer, T: Serialize>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) => x.serialize(s),
            None => s.serialize_str("NA"),
        }
    }

    pub fn deserialize<'de, D, T>(d: D) -> std::result::Result<Option<T>, D::Error>
    where
        D: Deserializer<'de>,
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "NA" | "" => Ok(None),
            other => other.parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub experiment: String,
    pub grid_index: usize,
    pub replicate: usize,
    #[serde(with = "na")]
    pub rho: Option<f64>,
    #[serde(with = "na")]
    pub ratio: Option<f64>,
    pub seeds: usize,
    pub h: String,
    pub ell: String,
    pub s_x: usize,
    pub status: RowStatus,
    pub voi: String,
    pub truth: String,
    #[serde(with = "na")]
    pub rank: Option<f64>,
    #[serde(with = "na")]
    pub tau: Option<f64>,
    #[serde(with = "na")]
    pub candidate_count: Option<usize>,
    #[serde(with = "na")]
    pub gx_size: Option<usize>,
    #[serde(with = "na")]
    pub g2x_size: Option<usize>,
}

/// Per-grid-point aggregate; a pure function of the result rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub schema_version: u32,
    pub experiment: String,
    pub grid_index: usize,
    #[serde(with = "na")]
    pub rho: Option<f64>,
    #[serde(with = "na")]
    pub ratio: Option<f64>,
    pub seeds: usize,
    pub h: String,
    pub replicates: usize,
    /// Rows with a τ value.
    pub n_tau: usize,
    pub na_rate: f64,
    pub stop_count: usize,
    #[serde(with = "na")]
    pub mean_tau: Option<f64>,
    /// `2 · sd / √n_tau`
    #[serde(with = "na")]
    pub tau_2se: Option<f64>,
    pub mean_s_x: f64,
    pub s_x_2se: f64,
}

/// Wall-clock time of one replicate (kept out of the deterministic outputs).
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub grid_index: usize,
    pub replicate: usize,
    pub seconds: f64,
}

/// A kept nomination together with the truth it is evaluated against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedList {
    pub grid_index: usize,
    pub replicate: usize,
    pub truth: String,
    pub nomination: Nomination,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub lists: Vec<SavedList>,
    pub timings: Vec<Timing>,
}

fn mean_and_2se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 2.0 * var.sqrt() / n.sqrt())
}

/// Groups rows by grid point (in order of first appearance) and aggregates.
pub fn aggregate(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(usize, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|(g, _)| *g == r.grid_index) {
            Some((_, v)) => v.push(r),
            None => groups.push((r.grid_index, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(grid_index, members)| {
            let first = members[0];
            let taus: Vec<f64> = members.iter().filter_map(|r| r.tau).collect();
            let sxs: Vec<f64> = members.iter().map(|r| r.s_x as f64).collect();
            let (mean_tau, tau_2se) = if taus.is_empty() {
                (None, None)
            } else {
                let (m, se) = mean_and_2se(&taus);
                (Some(m), Some(se))
            };
            let (mean_s_x, s_x_2se) = mean_and_2se(&sxs);
            let matched = members.iter().filter(|r| r.status != RowStatus::Counted).count();
            SummaryRow {
                schema_version: SCHEMA_VERSION,
                experiment: first.experiment.clone(),
                grid_index,
                rho: first.rho,
                ratio: first.ratio,
                seeds: first.seeds,
                h: first.h.clone(),
                replicates: members.len(),
                n_tau: taus.len(),
                na_rate: if matched == 0 { 0.0 } else { (matched - taus.len()) as f64 / matched as f64 },
                stop_count: members.iter().filter(|r| r.status == RowStatus::Stop).count(),
                mean_tau,
                tau_2se,
                mean_s_x,
                s_x_2se,
            }
        })
        .collect()
}

struct ReplicateOutput {
    rows: Vec<ResultRow>,
    lists: Vec<SavedList>,
    seconds: f64,
}

fn nomination_row(
    cfg: &ExperimentConfig,
    grid_index: usize,
    replicate: usize,
    point: &GridPoint,
    voi: &str,
    truth: &str,
    nomination: &Nomination,
) -> ResultRow {
    let mut row = ResultRow {
        schema_version: SCHEMA_VERSION,
        experiment: cfg.kind.name().to_owned(),
        grid_index,
        replicate,
        rho: point.rho,
        ratio: point.ratio,
        seeds: point.seeds,
        h: cfg.vnmatch.h.to_string(),
        ell: cfg.vnmatch.ell.to_string(),
        s_x: 0,
        status: RowStatus::Stop,
        voi: voi.to_owned(),
        truth: truth.to_owned(),
        rank: None,
        tau: None,
        candidate_count: None,
        gx_size: None,
        g2x_size: None,
    };
    if let Nomination::Nominated(list) = nomination {
        let t = evaluate_tau(list, truth);
        row.s_x = list.s_x;
        row.status = if t.tau.is_some() { RowStatus::Ok } else { RowStatus::Absent };
        row.rank = t.rank;
        row.tau = t.tau;
        row.candidate_count = Some(list.candidate_count);
        row.gx_size = Some(list.gx_size);
        row.g2x_size = Some(list.g2x_size);
    }
    row
}

fn run_matching_replicate(cfg: &ExperimentConfig, grid_index: usize, point: &GridPoint, replicate: usize) -> Result<ReplicateOutput> {
    let start = Instant::now();
    let model = cfg.model.as_ref().expect("resolved config has a model");
    let mut rng = rng::stream(cfg.rng_seed, grid_stream(grid_index, replicate));
    let rho = point.rho.expect("sweep grid points carry rho");
    let pair = match point.ratio {
        Some(r) => sample_ratio_pair(model, r, rho, &mut rng)?,
        None => {
            let spec = CorrelatedPairSpec {
                core: CoreModel::Sbm(model.clone()),
                rho,
                unshared_g: UnsharedSpec::none(),
                unshared_g2: UnsharedSpec::none(),
                rng_seed: 0,
            };
            sample_pair_with(&spec, &mut rng)?
        }
    };
    let seeds = SeedMap::new(pair.choose_seeds(point.seeds, &mut rng)?)?;
    let mut vn = cfg.vnmatch;
    vn.soft.rng_seed = rng.gen();
    let nomination = nominate(&pair.g, &pair.g2, &seeds, &pair.voi.0, &vn)?;
    let row = nomination_row(cfg, grid_index, replicate, point, &pair.voi.0, &pair.voi.1, &nomination);
    let lists = if cfg.save_lists {
        vec![SavedList { grid_index, replicate, truth: pair.voi.1.clone(), nomination }]
    } else {
        Vec::new()
    };
    Ok(ReplicateOutput { rows: vec![row], lists, seconds: start.elapsed().as_secs_f64() })
}

/// One graph and one seed set per `(seed count, replicate)`, counted at
/// every `h` of the grid.
fn run_neighborhood_replicate(
    cfg: &ExperimentConfig,
    points: &[(usize, GridPoint)],
    seed_group: usize,
    replicate: usize,
) -> Result<ReplicateOutput> {
    let start = Instant::now();
    let model = cfg.model.as_ref().expect("resolved config has a model");
    let mut rng = rng::stream(cfg.rng_seed, grid_stream(seed_group, replicate));
    let g = sample_sbm(model, &mut rng)?;
    let count = points[0].1.seeds;
    if count + 1 > g.n_vertices() {
        return Err(Error::Config(format!("{count} seeds plus a vertex of interest exceed {} vertices", g.n_vertices())));
    }
    let picks = index::sample(&mut rng, g.n_vertices(), count + 1).into_vec();
    let voi = g.label(picks[0]).to_owned();
    let seeds = SeedMap::new(picks[1..].iter().map(|&i| (g.label(i).to_owned(), g.label(i).to_owned())).collect())?;
    let mut rows = Vec::new();
    for (grid_index, point) in points {
        let s_x = localize_seeds(&g, &seeds, &voi, point.h)?.len();
        rows.push(ResultRow {
            schema_version: SCHEMA_VERSION,
            experiment: cfg.kind.name().to_owned(),
            grid_index: *grid_index,
            replicate,
            rho: None,
            ratio: None,
            seeds: count,
            h: point.h.to_string(),
            ell: point.h.to_string(),
            s_x,
            status: RowStatus::Counted,
            voi: voi.clone(),
            truth: voi.clone(),
            rank: None,
            tau: None,
            candidate_count: None,
            gx_size: None,
            g2x_size: None,
        });
    }
    Ok(ReplicateOutput { rows, lists: Vec::new(), seconds: start.elapsed().as_secs_f64() })
}

fn read_graph(path: &Path) -> Result<Graph> {
    Ok(load_edge_list(BufReader::new(File::open(path)?))?.graph)
}

/// Reads a truth CSV (`label_g,label_g2`, optional header).
pub fn read_truth(path: &Path) -> Result<Vec<(String, String)>> {
    let pairs = read_pairs(BufReader::new(File::open(path)?))?;
    Ok(pairs.into_iter().filter(|(a, b)| !(a == "label_g" && b == "label_g2")).collect())
}

fn run_custom(cfg: &ExperimentConfig) -> Result<Vec<ReplicateOutput>> {
    let custom = cfg.custom.as_ref().expect("validated");
    let g = read_graph(&custom.graph)?;
    let g2 = read_graph(&custom.graph2)?;
    let seeds = SeedMap::read(BufReader::new(File::open(&custom.seeds)?))?;
    let truth = match &custom.truth {
        Some(p) => read_truth(p)?,
        None => Vec::new(),
    };
    let vois: Vec<String> = match &custom.vois {
        Some(v) => v.clone(),
        None => truth.iter().filter(|(a, _)| !seeds.contains_left(a) && g.index_of(a).is_some()).map(|(a, _)| a.clone()).collect(),
    };
    if vois.is_empty() {
        return Err(Error::Config("no vertices of interest (give custom.vois or a truth file)".into()));
    }
    let tasks: Vec<(usize, usize)> =
        (0..vois.len()).flat_map(|v| (0..cfg.replicates).map(move |r| (v, r))).collect();
    tasks
        .par_iter()
        .map(|&(grid_index, replicate)| {
            let start = Instant::now();
            let voi = &vois[grid_index];
            let truth_label = truth.iter().find(|(a, _)| a == voi).map(|(_, b)| b.clone()).unwrap_or_default();
            let mut rng = rng::stream(cfg.rng_seed, grid_stream(grid_index, replicate));
            let mut vn = cfg.vnmatch;
            vn.soft.rng_seed = rng.gen();
            let nomination = nominate(&g, &g2, &seeds, voi, &vn)?;
            let point = GridPoint { rho: None, ratio: None, seeds: seeds.len(), h: vn.h, voi: Some(voi.clone()) };
            let row = nomination_row(cfg, grid_index, replicate, &point, voi, &truth_label, &nomination);
            let lists = if cfg.save_lists {
                vec![SavedList { grid_index, replicate, truth: truth_label, nomination }]
            } else {
                Vec::new()
            };
            Ok(ReplicateOutput { rows: vec![row], lists, seconds: start.elapsed().as_secs_f64() })
        })
        .collect()
}

/// Runs the experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let work = || -> Result<Vec<ReplicateOutput>> {
        match cfg.kind {
            ExperimentKind::CustomNominate => run_custom(&cfg),
            ExperimentKind::Neighborhood => {
                let points: Vec<(usize, GridPoint)> = cfg.grid_points().into_iter().enumerate().collect();
                let counts = cfg.grid.seeds.clone().unwrap_or_default();
                let groups: Vec<Vec<(usize, GridPoint)>> = counts
                    .iter()
                    .map(|&c| points.iter().filter(|(_, p)| p.seeds == c).cloned().collect())
                    .collect();
                let tasks: Vec<(usize, usize)> =
                    (0..groups.len()).flat_map(|g| (0..cfg.replicates).map(move |r| (g, r))).collect();
                tasks.par_iter().map(|&(g, r)| run_neighborhood_replicate(&cfg, &groups[g], g, r)).collect()
            }
            _ => {
                let points = cfg.grid_points();
                let tasks: Vec<(usize, usize)> =
                    (0..points.len()).flat_map(|g| (0..cfg.replicates).map(move |r| (g, r))).collect();
                tasks.par_iter().map(|&(g, r)| run_matching_replicate(&cfg, g, &points[g], r)).collect()
            }
        }
    };
    let outputs = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let mut rows = Vec::new();
    let mut lists = Vec::new();
    let mut timings = Vec::new();
    for out in outputs {
        if let Some(first) = out.rows.first() {
            timings.push(Timing { grid_index: first.grid_index, replicate: first.replicate, seconds: out.seconds });
        }
        rows.extend(out.rows);
        lists.extend(out.lists);
    }
    rows.sort_by_key(|r| (r.grid_index, r.replicate));
    let summary = aggregate(&rows);
    Ok(ExperimentOutput { config: cfg, rows, summary, lists, timings })
}

fn write_csv<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for item in items {
        w.serialize(item)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    generator: String,
    config: &'a ExperimentConfig,
    rows: usize,
    grid_points: usize,
}

/// Writes `results.csv`, `summary.csv`, `manifest.json` and `timings.csv`
/// (plus `lists/*.json` when lists were kept). Returns the files written.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    let summary = dir.join("summary.csv");
    let manifest = dir.join("manifest.json");
    let timings = dir.join("timings.csv");
    write_csv(&results, &out.rows)?;
    write_csv(&summary, &out.summary)?;
    write_csv(&timings, &out.timings)?;
    let m = Manifest {
        schema_version: SCHEMA_VERSION,
        generator: format!("vnsgm {}", env!("CARGO_PKG_VERSION")),
        config: &out.config,
        rows: out.rows.len(),
        grid_points: out.summary.len(),
    };
    fs::write(&manifest, serde_json::to_string_pretty(&m)?)?;
    let mut written = vec![results, summary, manifest, timings];
    if !out.lists.is_empty() {
        let lists_dir = dir.join("lists");
        fs::create_dir_all(&lists_dir)?;
        for l in &out.lists {
            let p = lists_dir.join(format!("g{:04}_r{:04}.json", l.grid_index, l.replicate));
            fs::write(&p, serde_json::to_string_pretty(l)?)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Reads `results.csv` back.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_grids() {
        let cfg = ExperimentConfig::from_toml("kind = \"seed-sweep\"").unwrap();
        let r = cfg.resolved();
        assert_eq!(r.grid.seeds.as_deref(), Some(&(1..=10).collect::<Vec<_>>()[..]));
        assert_eq!(r.model.unwrap().lambda, sweep_lambda());
        assert_eq!(cfg.replicates, 100);
        assert_eq!(cfg.grid_points().len(), 10);
    }

    #[test]
    fn ratio_grid_default() {
        let cfg = ExperimentConfig::from_toml("kind = \"ratio-sweep\"").unwrap();
        let pts = cfg.grid_points();
        assert_eq!(pts.len(), 16);
        assert!((pts[0].ratio.unwrap() - 0.25).abs() < 1e-12);
        assert!((pts[15].ratio.unwrap() - 1.0).abs() < 1e-12);
        assert!(pts.iter().all(|p| p.seeds == 4));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml("kind = \"bogus\"").is_err());
        let empty = ExperimentConfig::from_toml("kind = \"seed-sweep\"\n[grid]\nseeds = []").unwrap();
        assert!(empty.validate().is_err());
        let zero = ExperimentConfig::from_toml("kind = \"seed-sweep\"\nreplicates = 0").unwrap();
        assert!(zero.validate().is_err());
        let custom = ExperimentConfig::from_toml("kind = \"custom-nominate\"").unwrap();
        assert!(custom.validate().is_err());
    }

    #[test]
    fn nested_sections_parse() {
        let text = r#"
kind = "neighborhood"
rng_seed = 5
replicates = 3

[grid]
seeds = [10]
h = [1, 2, "inf"]

[vnmatch]
h = 2
ell = 3

[vnmatch.soft]
restarts = 7
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.vnmatch.soft.restarts, 7);
        assert_eq!(cfg.vnmatch.soft.gamma, 0.1);
        assert_eq!(cfg.vnmatch.ell, Hops::Finite(3));
        assert_eq!(cfg.grid.h.as_ref().unwrap()[2], Hops::Infinite);
    }

    #[test]
    fn aggregate_handles_na() {
        let base = ResultRow {
            schema_version: 1,
            experiment: "seed-sweep".into(),
            grid_index: 0,
            replicate: 0,
            rho: Some(0.6),
            ratio: None,
            seeds: 3,
            h: "2".into(),
            ell: "2".into(),
            s_x: 3,
            status: RowStatus::Ok,
            voi: "v0".into(),
            truth: "w0".into(),
            rank: Some(1.0),
            tau: Some(0.0),
            candidate_count: Some(10),
            gx_size: Some(11),
            g2x_size: Some(13),
        };
        let rows = vec![
            base.clone(),
            ResultRow { replicate: 1, tau: Some(0.5), ..base.clone() },
            ResultRow { replicate: 2, tau: None, rank: None, status: RowStatus::Absent, ..base.clone() },
        ];
        let s = aggregate(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].n_tau, 2);
        assert!((s[0].na_rate - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s[0].mean_tau, Some(0.25));
        let sd = (0.125f64).sqrt();
        assert!((s[0].tau_2se.unwrap() - 2.0 * sd / 2f64.sqrt()).abs() < 1e-12);
    }
}
