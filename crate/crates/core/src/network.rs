//! Co-authorship graphs over publication windows and the per-node
//! structural measures: degree centrality, weighted degree (plain and
//! per-co-author), clustering coefficient, and Brandes betweenness.
//!
//! Edges are undirected with positive integer weights (co-publication
//! counts). Shortest paths ignore weights; weights only feed weighted
//! degree.

use crate::corpus::Corpus;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Undirected weighted co-authorship graph over a year window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoauthorGraph {
    /// Sorted author ids; node index = position.
    nodes: Vec<String>,
    /// Adjacency: per node, (neighbor index, weight), ascending by neighbor.
    adjacency: Vec<Vec<(usize, u32)>>,
    pub window: (i32, i32),
}

impl CoauthorGraph {
    /// Builds the graph over all publications inside `window`: nodes are all
    /// authors of those publications, edge weight counts shared papers.
    /// Duplicate author entries on one paper are deduplicated.
    pub fn build(corpus: &Corpus, window: (i32, i32)) -> Self {
        let mut node_set: BTreeSet<&str> = BTreeSet::new();
        let mut weights: BTreeMap<(&str, &str), u32> = BTreeMap::new();
        for record in corpus.publications_in(window) {
            let authors: BTreeSet<&str> =
                record.authors.iter().map(|a| a.author_id.as_str()).collect();
            for &a in &authors {
                node_set.insert(a);
            }
            let list: Vec<&str> = authors.into_iter().collect();
            for i in 0..list.len() {
                for j in (i + 1)..list.len() {
                    *weights.entry((list[i], list[j])).or_insert(0) += 1;
                }
            }
        }
        let nodes: Vec<String> = node_set.into_iter().map(str::to_string).collect();
        let index: BTreeMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (&(u, v), &w) in &weights {
            let (ui, vi) = (index[u], index[v]);
            adjacency[ui].push((vi, w));
            adjacency[vi].push((ui, w));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        CoauthorGraph {
            nodes,
            adjacency,
            window,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, author_id: &str) -> Option<usize> {
        self.nodes
            .binary_search_by(|n| n.as_str().cmp(author_id))
            .ok()
    }

    pub fn contains(&self, author_id: &str) -> bool {
        self.node_index(author_id).is_some()
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        self.adjacency[idx].len()
    }

    /// Edge weight between two node indices, if the edge exists.
    pub fn weight_between(&self, u: usize, v: usize) -> Option<u32> {
        self.adjacency[u]
            .binary_search_by(|&(n, _)| n.cmp(&v))
            .ok()
            .map(|pos| self.adjacency[u][pos].1)
    }

    /// Unique edges (u < v) with weights, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    fn require(&self, author_id: &str) -> Result<usize, NetworkError> {
        self.node_index(author_id)
            .ok_or_else(|| NetworkError::UnknownNode(author_id.to_string()))
    }

    /// deg(v) / (n - 1); 0 for a singleton graph.
    pub fn degree_centrality(&self, author_id: &str) -> Result<f64, NetworkError> {
        let idx = self.require(author_id)?;
        if self.nodes.len() < 2 {
            return Ok(0.0);
        }
        Ok(self.degree_of(idx) as f64 / (self.nodes.len() - 1) as f64)
    }

    /// Sum of incident edge weights; `normalized` divides by the number of
    /// distinct co-authors (0 for an isolated node in either mode).
    pub fn weighted_degree(&self, author_id: &str, normalized: bool) -> Result<f64, NetworkError> {
        let idx = self.require(author_id)?;
        let deg = self.degree_of(idx);
        if deg == 0 {
            return Ok(0.0);
        }
        let sum: f64 = self.adjacency[idx].iter().map(|&(_, w)| f64::from(w)).sum();
        Ok(if normalized { sum / deg as f64 } else { sum })
    }

    /// Realized fraction of edges among a node's neighbors; 0 when deg < 2.
    pub fn clustering_coefficient(&self, author_id: &str) -> Result<f64, NetworkError> {
        let idx = self.require(author_id)?;
        Ok(self.clustering_by_index(idx))
    }

    fn clustering_by_index(&self, idx: usize) -> f64 {
        let neighbors: Vec<usize> = self.adjacency[idx].iter().map(|&(n, _)| n).collect();
        let deg = neighbors.len();
        if deg < 2 {
            return 0.0;
        }
        let mut links = 0usize;
        for i in 0..deg {
            for j in (i + 1)..deg {
                if self.weight_between(neighbors[i], neighbors[j]).is_some() {
                    links += 1;
                }
            }
        }
        links as f64 / (deg * (deg - 1) / 2) as f64
    }

    /// Brandes betweenness over unweighted shortest paths, normalized by
    /// (n-1)(n-2)/2 with the full-graph n (unreachable pairs contribute 0).
    pub fn betweenness_centrality(&self) -> BTreeMap<String, f64> {
        let n = self.nodes.len();
        let mut scores = vec![0.0f64; n];
        if n > 2 {
            let mut sigma = vec![0.0f64; n];
            let mut dist = vec![-1i64; n];
            let mut delta = vec![0.0f64; n];
            let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut stack: Vec<usize> = Vec::with_capacity(n);
            let mut queue: VecDeque<usize> = VecDeque::new();

            for source in 0..n {
                for v in 0..n {
                    sigma[v] = 0.0;
                    dist[v] = -1;
                    delta[v] = 0.0;
                    predecessors[v].clear();
                }
                stack.clear();
                queue.clear();
                sigma[source] = 1.0;
                dist[source] = 0;
                queue.push_back(source);
                while let Some(v) = queue.pop_front() {
                    stack.push(v);
                    for &(w, _) in &self.adjacency[v] {
                        if dist[w] < 0 {
                            dist[w] = dist[v] + 1;
                            queue.push_back(w);
                        }
                        if dist[w] == dist[v] + 1 {
                            sigma[w] += sigma[v];
                            predecessors[w].push(v);
                        }
                    }
                }
                while let Some(w) = stack.pop() {
                    for &v in &predecessors[w] {
                        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                    }
                    if w != source {
                        scores[w] += delta[w];
                    }
                }
            }
            // Each unordered pair was counted from both endpoints.
            let norm = ((n - 1) * (n - 2)) as f64;
            for s in &mut scores {
                *s /= norm;
            }
        }
        self.nodes
            .iter()
            .cloned()
            .zip(scores)
            .collect()
    }

    /// Edge-list CSV `u,v,weight` plus an isolated-nodes file.
    pub fn export(&self, edges_path: &Path, isolated_path: &Path) -> Result<(), NetworkError> {
        let io_err = |p: &Path, source: std::io::Error| NetworkError::Io {
            path: p.display().to_string(),
            source,
        };
        let mut w = std::fs::File::create(edges_path).map_err(|e| io_err(edges_path, e))?;
        writeln!(w, "u,v,weight").map_err(|e| io_err(edges_path, e))?;
        for (u, v, weight) in self.edges() {
            writeln!(w, "{},{},{}", self.nodes[u], self.nodes[v], weight)
                .map_err(|e| io_err(edges_path, e))?;
        }
        let mut iso = std::fs::File::create(isolated_path).map_err(|e| io_err(isolated_path, e))?;
        for (i, node) in self.nodes.iter().enumerate() {
            if self.adjacency[i].is_empty() {
                writeln!(iso, "{node}").map_err(|e| io_err(isolated_path, e))?;
            }
        }
        Ok(())
    }
}

/// The five structural measures for one author, plus the raw degree used in
/// group-comparison reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub author_id: String,
    pub degree: usize,
    pub degree_centrality: f64,
    pub weighted_degree: f64,
    pub weighted_degree_normalized: f64,
    pub clustering_coefficient: f64,
    pub betweenness_centrality: f64,
}

impl NodeMetrics {
    pub fn isolated(author_id: &str) -> Self {
        NodeMetrics {
            author_id: author_id.to_string(),
            degree: 0,
            degree_centrality: 0.0,
            weighted_degree: 0.0,
            weighted_degree_normalized: 0.0,
            clustering_coefficient: 0.0,
            betweenness_centrality: 0.0,
        }
    }
}

/// Computes all metrics for the given authors from one graph. Authors absent
/// from the graph get all-zero (isolated) metrics.
pub fn node_metrics(
    graph: &CoauthorGraph,
    authors: &[String],
) -> Result<BTreeMap<String, NodeMetrics>, NetworkError> {
    let betweenness = graph.betweenness_centrality();
    let mut out = BTreeMap::new();
    for author in authors {
        let metrics = match graph.node_index(author) {
            None => NodeMetrics::isolated(author),
            Some(idx) => NodeMetrics {
                author_id: author.clone(),
                degree: graph.degree_of(idx),
                degree_centrality: graph.degree_centrality(author)?,
                weighted_degree: graph.weighted_degree(author, false)?,
                weighted_degree_normalized: graph.weighted_degree(author, true)?,
                clustering_coefficient: graph.clustering_coefficient(author)?,
                betweenness_centrality: betweenness[author],
            },
        };
        out.insert(author.clone(), metrics);
    }
    Ok(out)
}

/// Metrics export: CSV with author_id and the five measures (plus raw degree).
pub fn export_metrics(
    metrics: &BTreeMap<String, NodeMetrics>,
    path: &Path,
) -> Result<(), NetworkError> {
    let io_err = |source: std::io::Error| NetworkError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = std::fs::File::create(path).map_err(io_err)?;
    writeln!(
        w,
        "author_id,degree,degree_centrality,weighted_degree,weighted_degree_normalized,clustering_coefficient,betweenness_centrality"
    )
    .map_err(io_err)?;
    for m in metrics.values() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            m.author_id,
            m.degree,
            m.degree_centrality,
            m.weighted_degree,
            m.weighted_degree_normalized,
            m.clustering_coefficient,
            m.betweenness_centrality
        )
        .map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Brute-force reference implementations for small graphs: all-pairs BFS
    //! shortest-path enumeration for betweenness, and direct neighbor
    //! enumeration for the local measures.

    use super::CoauthorGraph;
    use std::collections::VecDeque;

    /// Counts, for every unordered pair (s, t), the shortest s-t paths and
    /// how many pass through each interior node, by depth-capped DFS over
    /// BFS distance levels.
    pub fn betweenness_bruteforce(graph: &CoauthorGraph) -> Vec<f64> {
        let n = graph.node_count();
        let mut scores = vec![0.0f64; n];
        if n <= 2 {
            return scores;
        }
        // dist[s][v] by BFS.
        let mut dist = vec![vec![-1i64; n]; n];
        for s in 0..n {
            let mut queue = VecDeque::new();
            dist[s][s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &graph.adjacency[v] {
                    if dist[s][w] < 0 {
                        dist[s][w] = dist[s][v] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        for s in 0..n {
            for t in (s + 1)..n {
                if dist[s][t] < 0 {
                    continue;
                }
                let mut paths: Vec<Vec<usize>> = Vec::new();
                let mut current = vec![s];
                enumerate_paths(graph, &dist[s], t, &mut current, &mut paths);
                let total = paths.len() as f64;
                for path in &paths {
                    for &v in &path[1..path.len() - 1] {
                        scores[v] += 1.0 / total;
                    }
                }
            }
        }
        let norm = ((n - 1) * (n - 2)) as f64 / 2.0;
        for s in &mut scores {
            *s /= norm;
        }
        scores
    }

    fn enumerate_paths(
        graph: &CoauthorGraph,
        dist: &[i64],
        target: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *current.last().unwrap();
        if v == target {
            out.push(current.clone());
            return;
        }
        for &(w, _) in &graph.adjacency[v] {
            if dist[w] == dist[v] + 1 {
                current.push(w);
                enumerate_paths(graph, dist, target, current, out);
                current.pop();
            }
        }
    }
}
