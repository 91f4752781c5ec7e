//! Simple undirected graphs with stable external labels.
//!
//! A [`Graph`] owns a dense internal index space `0..n` and a label for every
//! index. Adjacency is stored sparsely (sorted neighbor lists); dense matrices
//! are only materialized on demand through [`adjacency_matrix`], which the
//! matcher calls on the (small) neighborhoods it extracts.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Simple undirected graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    n_edges: usize,
}

/// Counters for input normalization performed while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NormalizationReport {
    pub self_loops_dropped: usize,
    pub duplicate_edges_collapsed: usize,
}

/// Incremental graph construction. Self-loops and repeated edges are
/// dropped and counted rather than rejected.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: HashSet<(usize, usize)>,
    order: Vec<(usize, usize)>,
    report: NormalizationReport,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `label`, registering it if unseen.
    pub fn vertex(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    /// Adds a vertex that must not exist yet.
    pub fn add_vertex(&mut self, label: &str) -> Result<usize> {
        if self.index.contains_key(label) {
            return Err(Error::InvalidParameter(format!("duplicate vertex label `{label}`")));
        }
        Ok(self.vertex(label))
    }

    pub fn add_edge_by_label(&mut self, a: &str, b: &str) {
        let u = self.vertex(a);
        let v = self.vertex(b);
        self.push_edge(u, v);
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.labels.len();
        for index in [u, v] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        self.push_edge(u, v);
        Ok(())
    }

    fn push_edge(&mut self, u: usize, v: usize) {
        if u == v {
            self.report.self_loops_dropped += 1;
            return;
        }
        let key = (u.min(v), u.max(v));
        if self.edges.insert(key) {
            self.order.push(key);
        } else {
            self.report.duplicate_edges_collapsed += 1;
        }
    }

    pub fn report(&self) -> NormalizationReport {
        self.report
    }

    pub fn build(self) -> Graph {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for &(u, v) in &self.order {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { labels: self.labels, index: self.index, adj, n_edges: self.order.len() }
    }
}

impl Graph {
    /// Builds a graph from labels and index pairs. Loops and duplicates are
    /// normalized away.
    pub fn from_edges<I>(labels: Vec<String>, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut b = GraphBuilder::new();
        for l in &labels {
            b.add_vertex(l)?;
        }
        for (u, v) in edges {
            b.add_edge(u, v)?;
        }
        Ok(b.build())
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Like [`Graph::index_of`] but errors on unknown labels.
    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, ordered by `u` then `v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Edge count divided by the number of vertex pairs.
    pub fn density(&self) -> f64 {
        let n = self.n_vertices() as f64;
        if n < 2.0 {
            0.0
        } else {
            self.n_edges as f64 / (n * (n - 1.0) / 2.0)
        }
    }

    /// New graph whose vertex `i` is this graph's vertex `order[i]`.
    /// `order` must be a permutation of `0..n`.
    pub fn permuted(&self, order: &[usize]) -> Result<Graph> {
        let n = self.n_vertices();
        if order.len() != n {
            return Err(Error::Dimension(format!("order has {} entries, graph has {n}", order.len())));
        }
        let mut inverse = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n {
                return Err(Error::IndexOutOfRange { index: old, n });
            }
            if inverse[old] != usize::MAX {
                return Err(Error::InvalidParameter(format!("index {old} repeated in order")));
            }
            inverse[old] = new;
        }
        let labels = order.iter().map(|&o| self.labels[o].clone()).collect();
        Graph::from_edges(labels, self.edges().map(|(u, v)| (inverse[u], inverse[v])))
    }
}

/// A set of internal vertex indices, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn all(g: &Graph) -> Self {
        VertexSet((0..g.n_vertices()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    fn check(&self, g: &Graph) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= g.n_vertices() => {
                Err(Error::IndexOutOfRange { index: max, n: g.n_vertices() })
            }
            _ => Ok(()),
        }
    }
}

/// Hop bound for neighborhoods: a finite path length or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hops {
    Finite(u32),
    Infinite,
}

impl Hops {
    fn limit(self) -> u32 {
        match self {
            Hops::Finite(h) => h,
            Hops::Infinite => u32::MAX,
        }
    }
}

impl From<u32> for Hops {
    fn from(h: u32) -> Self {
        Hops::Finite(h)
    }
}

impl fmt::Display for Hops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hops::Finite(h) => write!(f, "{h}"),
            Hops::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Hops {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Hops::Infinite),
            other => other
                .parse::<u32>()
                .map(Hops::Finite)
                .map_err(|_| Error::InvalidParameter(format!("bad hop count `{s}`"))),
        }
    }
}

impl Serialize for Hops {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Hops::Finite(h) => s.serialize_u32(*h),
            Hops::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Hops {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) => Ok(Hops::Finite(h)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Known one-to-one correspondence between seed vertices of two graphs,
/// stored as `(label in G, label in G')` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeedMap {
    pairs: Vec<(String, String)>,
}

impl SeedMap {
    /// Checks injectivity in both coordinates.
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self> {
        let mut left = HashSet::new();
        let mut right = HashSet::new();
        for (a, b) in &pairs {
            if !left.insert(a.as_str()) {
                return Err(Error::InvalidSeeds(format!("`{a}` seeded twice in first graph")));
            }
            if !right.insert(b.as_str()) {
                return Err(Error::InvalidSeeds(format!("`{b}` seeded twice in second graph")));
            }
        }
        Ok(SeedMap { pairs })
    }

    pub fn empty() -> Self {
        SeedMap::default()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn contains_left(&self, label: &str) -> bool {
        self.pairs.iter().any(|(a, _)| a == label)
    }

    pub fn contains_right(&self, label: &str) -> bool {
        self.pairs.iter().any(|(_, b)| b == label)
    }

    /// Sub-map keeping pairs whose first-graph label satisfies `keep`.
    pub fn filter_left<F: Fn(&str) -> bool>(&self, keep: F) -> SeedMap {
        SeedMap { pairs: self.pairs.iter().filter(|(a, _)| keep(a)).cloned().collect() }
    }

    /// Internal index pairs, erroring on the first label missing from its graph.
    pub fn resolve(&self, g: &Graph, g2: &Graph) -> Result<Vec<(usize, usize)>> {
        self.pairs.iter().map(|(a, b)| Ok((g.require(a)?, g2.require(b)?))).collect()
    }

    /// Parses a seed file: two tokens per line, `#` comments ignored.
    pub fn read<R: BufRead>(reader: R) -> Result<SeedMap> {
        let pairs = read_pairs(reader)?;
        SeedMap::new(pairs)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (a, b) in &self.pairs {
            writeln!(w, "{a} {b}")?;
        }
        Ok(())
    }
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    if line.contains(',') {
        let mut parts = line.split(',');
        let a = parts.next()?.trim();
        let b = parts.next()?.trim();
        if parts.next().is_some() || a.is_empty() || b.is_empty() {
            return None;
        }
        Some((a, b))
    } else {
        let mut parts = line.split_whitespace();
        let a = parts.next()?;
        let b = parts.next()?;
        if parts.next().is_some() {
            return None;
        }
        Some((a, b))
    }
}

/// Reads two-token lines (whitespace or a single comma), skipping blank and
/// `#` lines.
pub(crate) fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (a, b) = split_pair(t).ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected two vertex labels, got `{t}`"),
        })?;
        out.push((a.to_owned(), b.to_owned()));
    }
    Ok(out)
}

/// Result of parsing an edge list.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub report: NormalizationReport,
}

/// Parses an edge list. Vertex order is first-appearance order.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let pairs = read_pairs(reader)?;
    if pairs.is_empty() {
        return Err(Error::EmptyInput("edge list has no edges".into()));
    }
    let mut b = GraphBuilder::new();
    for (x, y) in &pairs {
        b.add_edge_by_label(x, y);
    }
    let report = b.report();
    Ok(LoadedGraph { graph: b.build(), report })
}

/// Writes one `u v` line per edge. Isolated vertices are not representable.
pub fn save_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    for l in g.labels() {
        if l.is_empty() || l.starts_with('#') || l.contains(',') || l.contains(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!("label `{l}` cannot be written to an edge list")));
        }
    }
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", g.label(u), g.label(v))?;
    }
    Ok(())
}

/// Subgraph induced on `t`; vertices keep their labels, in ascending
/// original-index order.
pub fn induced_subgraph(g: &Graph, t: &VertexSet) -> Result<Graph> {
    if t.is_empty() {
        return Err(Error::InvalidParameter("induced subgraph of an empty vertex set".into()));
    }
    t.check(g)?;
    let mut position = HashMap::with_capacity(t.len());
    for (new, old) in t.iter().enumerate() {
        position.insert(old, new);
    }
    let labels = t.iter().map(|v| g.label(v).to_owned()).collect();
    let edges = t.iter().flat_map(|u| {
        let position = &position;
        g.neighbors(u)
            .iter()
            .filter(move |&&v| v > u)
            .filter_map(move |v| position.get(v).map(|&pv| (position[&u], pv)))
    });
    Graph::from_edges(labels, edges.collect::<Vec<_>>())
}

/// All vertices within `h` hops of some member of `seeds` (seeds included).
pub fn neighborhood(g: &Graph, seeds: &VertexSet, h: Hops) -> Result<VertexSet> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("neighborhood of an empty seed set".into()));
    }
    seeds.check(g)?;
    let limit = h.limit();
    let mut dist = vec![u32::MAX; g.n_vertices()];
    let mut queue = VecDeque::new();
    for s in seeds.iter() {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        if dist[u] >= limit {
            continue;
        }
        for &v in g.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    Ok(VertexSet(dist.iter().enumerate().filter(|(_, &d)| d != u32::MAX).map(|(i, _)| i).collect()))
}

/// Dense symmetric 0/1 adjacency matrix with zero diagonal.
pub fn adjacency_matrix(g: &Graph) -> Array2<f64> {
    let n = g.n_vertices();
    let mut m = Array2::zeros((n, n));
    for (u, v) in g.edges() {
        m[[u, v]] = 1.0;
        m[[v, u]] = 1.0;
    }
    m
}

/// Relabels both graphs internally so seed pair `i` sits at index `i` in
/// each. Non-seed vertices keep their relative order; labels are unchanged.
pub fn reorder_seeds_first(g: &Graph, g2: &Graph, seeds: &SeedMap) -> Result<(Graph, Graph, usize)> {
    let resolved = seeds.resolve(g, g2)?;
    let order_for = |graph: &Graph, seeded: Vec<usize>| -> Vec<usize> {
        let mut is_seed = vec![false; graph.n_vertices()];
        for &s in &seeded {
            is_seed[s] = true;
        }
        let mut order = seeded;
        order.extend((0..graph.n_vertices()).filter(|&v| !is_seed[v]));
        order
    };
    let o1 = order_for(g, resolved.iter().map(|p| p.0).collect());
    let o2 = order_for(g2, resolved.iter().map(|p| p.1).collect());
    Ok((g.permuted(&o1)?, g2.permuted(&o2)?, resolved.len()))
}
