use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vnsgm::experiment::{self, ExperimentConfig, ExperimentKind};
use vnsgm::generate::{self, GenerateConfig};
use vnsgm::graph::{load_edge_list, Graph, Hops, SeedMap};
use vnsgm::{evaluate_tau, nominate, soft_sgm, Error, Nomination, SoftSgmConfig, VnConfig};

const EXIT_STOP: u8 = 2;

#[derive(Parser)]
#[command(name = "vnsgm", version, about = "Seeded graph matching and local vertex nomination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a correlated graph pair and write it to disk
    Generate {
        /// TOML description of the model, rho and seed count
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank candidates in the second graph for one vertex of the first
    Nominate {
        #[command(flatten)]
        inputs: PairInputs,
        /// Vertex of interest, a label of the first graph
        #[arg(long)]
        voi: String,
        /// Truth CSV (label_g,label_g2); reports the normalized rank
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Seeds within this many hops of the vertex are used (`inf` for all)
        #[arg(long, default_value = "2")]
        h: Hops,
        /// Radius of the matched neighborhoods around those seeds
        #[arg(long, default_value = "2")]
        ell: Hops,
        #[command(flatten)]
        soft: SoftArgs,
        /// Write the ranked list as CSV here (stdout otherwise)
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the full nomination record as JSON here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Soft-match two whole graphs
    Match {
        #[command(flatten)]
        inputs: PairInputs,
        #[command(flatten)]
        soft: SoftArgs,
        /// Write the soft match as JSON here (stdout otherwise)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study
    Experiment {
        #[command(subcommand)]
        kind: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Normalized rank against rho and seed count
    SeedSweep(ExperimentArgs),
    /// Normalized rank against the fraction of shared vertices
    RatioSweep(ExperimentArgs),
    /// Local seed counts against the hop limit h
    Neighborhood(ExperimentArgs),
    /// Nominations over graphs read from files
    CustomNominate(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config; omitted keys take the study's defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
}

#[derive(Args)]
struct PairInputs {
    /// Edge list of the first graph
    #[arg(long)]
    g: PathBuf,
    /// Edge list of the second graph
    #[arg(long)]
    g2: PathBuf,
    /// Seed file: one `label_g label_g2` pair per line
    #[arg(long)]
    seeds: PathBuf,
}

#[derive(Args)]
struct SoftArgs {
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
}

impl SoftArgs {
    fn config(&self) -> SoftSgmConfig {
        SoftSgmConfig {
            restarts: self.restarts,
            gamma: self.gamma,
            eps: self.eps,
            max_iter: self.max_iter,
            rng_seed: self.rng_seed,
        }
    }
}

fn read_graph(path: &Path) -> vnsgm::Result<Graph> {
    let loaded = load_edge_list(BufReader::new(File::open(path)?))?;
    let r = loaded.report;
    if r.self_loops_dropped > 0 || r.duplicate_edges_collapsed > 0 {
        eprintln!(
            "{}: dropped {} self-loops, collapsed {} duplicate edges",
            path.display(),
            r.self_loops_dropped,
            r.duplicate_edges_collapsed
        );
    }
    Ok(loaded.graph)
}

fn load_inputs(inputs: &PairInputs) -> vnsgm::Result<(Graph, Graph, SeedMap)> {
    let g = read_graph(&inputs.g)?;
    let g2 = read_graph(&inputs.g2)?;
    let seeds = SeedMap::read(BufReader::new(File::open(&inputs.seeds)?))?;
    Ok((g, g2, seeds))
}

fn write_or_stdout(path: Option<&Path>, bytes: &[u8]) -> vnsgm::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn run(cli: Cli) -> vnsgm::Result<u8> {
    match cli.command {
        Command::Generate { config, out } => {
            let cfg = GenerateConfig::from_toml(&fs::read_to_string(&config)?)?;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| Error::Config("no output directory (use --out or output_dir)".into()))?;
            let m = generate::generate(&cfg, &dir)?;
            println!("wrote {} ({} shared vertices, voi {} -> {})", dir.display(), m.shared, m.voi.0, m.voi.1);
            for (name, s) in [("g", &m.g), ("g2", &m.g2)] {
                println!("{name}: {} vertices, {} edges, density {:.4}", s.vertices, s.edges, s.density);
                if let Some(b) = &s.block_densities {
                    for row in b {
                        let cells: Vec<String> = row.iter().map(|x| format!("{x:.4}")).collect();
                        println!("  {}", cells.join(" "));
                    }
                }
            }
            Ok(0)
        }
        Command::Nominate { inputs, voi, truth, h, ell, soft, csv, json } => {
            let (g, g2, seeds) = load_inputs(&inputs)?;
            let cfg = VnConfig { h, ell, soft: soft.config() };
            let nomination = nominate(&g, &g2, &seeds, &voi, &cfg)?;
            let truth_label = match &truth {
                Some(p) => experiment::read_truth(p)?.into_iter().find(|(a, _)| *a == voi).map(|(_, b)| b),
                None => None,
            };
            if let Some(p) = &json {
                let tau = match (&nomination, &truth_label) {
                    (Nomination::Nominated(l), Some(t)) => Some(evaluate_tau(l, t)),
                    _ => None,
                };
                let record = serde_json::json!({
                    "schema_version": experiment::SCHEMA_VERSION,
                    "nomination": nomination,
                    "truth": truth_label,
                    "tau": tau,
                });
                fs::write(p, serde_json::to_string_pretty(&record)?)?;
            }
            match &nomination {
                Nomination::NoLocalSeeds { voi, h } => {
                    write_or_stdout(csv.as_deref(), b"rank,label,score\n")?;
                    eprintln!("STOP: no seed within {h} hops of {voi}");
                    Ok(EXIT_STOP)
                }
                Nomination::Nominated(list) => {
                    let mut buf = Vec::new();
                    list.write_csv(&mut buf)?;
                    write_or_stdout(csv.as_deref(), &buf)?;
                    eprintln!(
                        "s_x={} |V_x|={} |V'_x|={} candidates={}",
                        list.s_x, list.gx_size, list.g2x_size, list.candidate_count
                    );
                    match (&truth, &truth_label) {
                        (Some(_), Some(t)) => {
                            let r = evaluate_tau(list, t);
                            match (r.rank, r.tau) {
                                (Some(rank), Some(tau)) => eprintln!("truth={t} rank={rank} tau={tau}"),
                                _ => eprintln!("truth={t} rank=NA tau=NA (not a candidate)"),
                            }
                        }
                        (Some(_), None) => eprintln!("truth file has no entry for {voi}; tau=NA"),
                        _ => {}
                    }
                    Ok(0)
                }
            }
        }
        Command::Match { inputs, soft, out } => {
            let (g, g2, seeds) = load_inputs(&inputs)?;
            let m = soft_sgm(&g, &g2, &seeds, &soft.config())?;
            write_or_stdout(out.as_deref(), serde_json::to_string_pretty(&m.to_record())?.as_bytes())?;
            Ok(0)
        }
        Command::Experiment { kind } => {
            let (kind, args) = match kind {
                ExperimentCommand::SeedSweep(a) => (ExperimentKind::SeedSweep, a),
                ExperimentCommand::RatioSweep(a) => (ExperimentKind::RatioSweep, a),
                ExperimentCommand::Neighborhood(a) => (ExperimentKind::Neighborhood, a),
                ExperimentCommand::CustomNominate(a) => (ExperimentKind::CustomNominate, a),
            };
            let mut cfg = match &args.config {
                Some(path) => ExperimentConfig::load_as(path, Some(kind))?,
                None => ExperimentConfig::from_toml(&format!("kind = \"{}\"", kind.name()))?,
            };
            if let Some(r) = args.replicates {
                cfg.replicates = r;
            }
            if let Some(s) = args.rng_seed {
                cfg.rng_seed = s;
            }
            let dir = args
                .out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| Error::Config("no output directory (use --out or output_dir)".into()))?;
            let output = experiment::run_experiment(&cfg)?;
            experiment::write_outputs(&output, &dir)?;
            for s in &output.summary {
                let tau = s.mean_tau.map_or("NA".to_string(), |t| format!("{t:.4}"));
                let se = s.tau_2se.map_or("NA".to_string(), |t| format!("{t:.4}"));
                println!(
                    "grid {:>3} rho={} ratio={} seeds={} h={}: mean_tau={} ±{} mean_s_x={:.2} na_rate={:.3}",
                    s.grid_index,
                    s.rho.map_or("-".into(), |x| x.to_string()),
                    s.ratio.map_or("-".into(), |x| format!("{x:.2}")),
                    s.seeds,
                    s.h,
                    tau,
                    se,
                    s.mean_s_x,
                    s.na_rate
                );
            }
            println!("wrote {}", dir.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
