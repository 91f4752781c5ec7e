//! Local vertex nomination: find the seeds near a vertex of interest, match
//! the ℓ-neighborhoods of those seeds in both graphs, and rank the second
//! graph's candidates by soft-match score.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, neighborhood, Graph, Hops, SeedMap, VertexSet};
use crate::soft_sgm::{score_row, soft_sgm, SoftSgmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VnConfig {
    /// Seeds within `h` hops of the vertex of interest are used.
    pub h: Hops,
    /// Radius of the matched neighborhoods around those seeds.
    pub ell: Hops,
    pub soft: SoftSgmConfig,
}

impl Default for VnConfig {
    fn default() -> Self {
        VnConfig { h: Hops::Finite(2), ell: Hops::Finite(2), soft: SoftSgmConfig::default() }
    }
}

impl VnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h == Hops::Finite(0) {
            return Err(Error::InvalidParameter("h must be at least 1".into()));
        }
        if self.ell < self.h {
            return Err(Error::InvalidParameter(format!("ell ({}) must be >= h ({})", self.ell, self.h)));
        }
        self.soft.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub score: f64,
}

/// Ranked candidates in the second graph for one vertex of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NominationList {
    pub voi: String,
    /// Sorted by decreasing score, ties by label.
    pub candidates: Vec<Candidate>,
    pub local_seeds: SeedMap,
    pub s_x: usize,
    pub gx_size: usize,
    pub g2x_size: usize,
    pub candidate_count: usize,
    /// Row mass on padding columns.
    pub pad_mass: f64,
    pub config: VnConfig,
}

/// Outcome of [`nominate`]: a list, or a stop because no seed lies within
/// `h` of the vertex of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Nomination {
    Nominated(NominationList),
    NoLocalSeeds { voi: String, h: Hops },
}

impl Nomination {
    pub fn list(&self) -> Option<&NominationList> {
        match self {
            Nomination::Nominated(l) => Some(l),
            Nomination::NoLocalSeeds { .. } => None,
        }
    }
}

/// Expected rank of the true counterpart under uniform tie-breaking and its
/// normalized version; both `None` when the truth is not a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauResult {
    pub rank: Option<f64>,
    pub tau: Option<f64>,
    pub candidate_count: usize,
}

/// Seed pairs whose first-graph vertex is within `h` hops of `voi`.
pub fn localize_seeds(g: &Graph, seeds: &SeedMap, voi: &str, h: Hops) -> Result<SeedMap> {
    let x = g.require(voi)?;
    if seeds.contains_left(voi) {
        return Err(Error::InvalidParameter(format!("vertex of interest `{voi}` is a seed")));
    }
    for (a, _) in seeds.pairs() {
        g.require(a)?;
    }
    let near = neighborhood(g, &VertexSet::new([x]), h)?;
    Ok(seeds.filter_left(|a| near.contains(g.index_of(a).expect("checked above"))))
}

/// Ranks the second graph's vertices as counterparts of `voi`.
pub fn nominate(g: &Graph, g2: &Graph, seeds: &SeedMap, voi: &str, cfg: &VnConfig) -> Result<Nomination> {
    cfg.validate()?;
    let local = localize_seeds(g, seeds, voi, cfg.h)?;
    if local.is_empty() {
        return Ok(Nomination::NoLocalSeeds { voi: voi.to_owned(), h: cfg.h });
    }
    let resolved = local.resolve(g, g2)?;
    let around = neighborhood(g, &VertexSet::new(resolved.iter().map(|p| p.0)), cfg.ell)?;
    let around2 = neighborhood(g2, &VertexSet::new(resolved.iter().map(|p| p.1)), cfg.ell)?;
    if !around.contains(g.require(voi)?) {
        return Err(Error::VoiOutsideNeighborhood(voi.to_owned()));
    }
    let gx = induced_subgraph(g, &around)?;
    let g2x = induced_subgraph(g2, &around2)?;
    let soft = soft_sgm(&gx, &g2x, &local, &cfg.soft)?;
    let row = score_row(&soft, voi)?;

    let mut candidates: Vec<Candidate> =
        row.candidates.into_iter().map(|(label, score)| Candidate { label, score }).collect();
    candidates.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then_with(|| a.label.cmp(&b.label)));

    Ok(Nomination::Nominated(NominationList {
        voi: voi.to_owned(),
        candidate_count: g2x.n_vertices() - local.len(),
        s_x: local.len(),
        gx_size: gx.n_vertices(),
        g2x_size: g2x.n_vertices(),
        local_seeds: local,
        candidates,
        pad_mass: row.pad_mass,
        config: *cfg,
    }))
}

/// Normalized rank `((rank − 1) / (|C| − 1)) ∨ 0`, with `rank` the expected
/// position of `truth` when equal scores are ordered uniformly at random.
/// A single candidate gives 0.
pub fn evaluate_tau(nl: &NominationList, truth: &str) -> TauResult {
    let candidate_count = nl.candidates.len();
    let Some(target) = nl.candidates.iter().find(|c| c.label == truth).map(|c| c.score) else {
        return TauResult { rank: None, tau: None, candidate_count };
    };
    let greater = nl.candidates.iter().filter(|c| c.score > target).count();
    let tied = nl.candidates.iter().filter(|c| c.score == target).count();
    let rank = greater as f64 + (tied as f64 + 1.0) / 2.0;
    let tau = if candidate_count <= 1 { 0.0 } else { ((rank - 1.0) / (candidate_count as f64 - 1.0)).max(0.0) };
    TauResult { rank: Some(rank), tau: Some(tau), candidate_count }
}

impl NominationList {
    /// `rank,label,score` with 1-based presentation rank.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rank", "label", "score"])?;
        for (i, c) in self.candidates.iter().enumerate() {
            out.write_record([(i + 1).to_string(), c.label.clone(), c.score.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;

    fn list(scores: &[(&str, f64)]) -> NominationList {
        NominationList {
            voi: "x".into(),
            candidates: scores.iter().map(|&(l, s)| Candidate { label: l.into(), score: s }).collect(),
            local_seeds: SeedMap::empty(),
            s_x: 0,
            gx_size: 0,
            g2x_size: 0,
            candidate_count: scores.len(),
            pad_mass: 0.0,
            config: VnConfig::default(),
        }
    }

    #[test]
    fn tau_first_place() {
        let scores: Vec<(String, f64)> = (0..10).map(|i| (format!("c{i}"), 1.0 - i as f64 * 0.05)).collect();
        let refs: Vec<(&str, f64)> = scores.iter().map(|(l, s)| (l.as_str(), *s)).collect();
        let t = evaluate_tau(&list(&refs), "c0");
        assert_eq!(t.rank, Some(1.0));
        assert_eq!(t.tau, Some(0.0));
    }

    #[test]
    fn tau_all_tied() {
        let labels: Vec<String> = (0..11).map(|i| format!("c{i}")).collect();
        let refs: Vec<(&str, f64)> = labels.iter().map(|l| (l.as_str(), 0.25)).collect();
        let t = evaluate_tau(&list(&refs), "c3");
        assert_eq!(t.rank, Some(6.0));
        assert_eq!(t.tau, Some(0.5));
    }

    #[test]
    fn tau_absent_and_single() {
        let l = list(&[("a", 0.5), ("b", 0.5)]);
        assert_eq!(evaluate_tau(&l, "zz").tau, None);
        let single = list(&[("a", 0.2)]);
        assert_eq!(evaluate_tau(&single, "a").tau, Some(0.0));
    }

    #[test]
    fn config_rules() {
        let mut c = VnConfig::default();
        assert!(c.validate().is_ok());
        c.h = Hops::Finite(0);
        assert!(c.validate().is_err());
        c.h = Hops::Finite(3);
        c.ell = Hops::Finite(2);
        assert!(c.validate().is_err());
        c.ell = Hops::Infinite;
        assert!(c.validate().is_ok());
    }

    fn star() -> Graph {
        // seed s1 adjacent to x; iso is isolated
        load_edge_list("x s1\ns1 y\ny s2\nz z2\n".as_bytes()).unwrap().graph
    }

    #[test]
    fn localize_examples() {
        let g = star();
        let seeds = SeedMap::new(vec![("s1".into(), "s1".into()), ("s2".into(), "s2".into())]).unwrap();
        let near = localize_seeds(&g, &seeds, "x", Hops::Finite(1)).unwrap();
        assert_eq!(near.pairs(), [("s1".to_string(), "s1".to_string())]);
        assert_eq!(localize_seeds(&g, &seeds, "x", Hops::Finite(3)).unwrap().len(), 2);
        assert!(localize_seeds(&g, &seeds, "z", Hops::Finite(5)).unwrap().is_empty());
        assert!(localize_seeds(&g, &seeds, "s1", Hops::Finite(1)).is_err());
        assert!(localize_seeds(&g, &seeds, "nope", Hops::Finite(1)).is_err());
    }

    #[test]
    fn nominate_stops_without_local_seeds() {
        let g = star();
        let seeds = SeedMap::new(vec![("s1".into(), "s1".into())]).unwrap();
        let out = nominate(&g, &g, &seeds, "z", &VnConfig::default()).unwrap();
        assert!(matches!(out, Nomination::NoLocalSeeds { .. }));
        assert!(out.list().is_none());
    }

    #[test]
    fn csv_output() {
        let l = list(&[("b", 0.75), ("a", 0.25)]);
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "rank,label,score\n1,b,0.75\n2,a,0.25\n");
    }
}
