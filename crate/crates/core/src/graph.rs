//! Multiplex graph storage, text ingestion and induced-subgraph degree tracking.
//!
//! Node and layer identifiers found in input files may be sparse; they are
//! densified (in ascending order of the original ID) so adjacency, degrees and
//! weights can live in flat arrays. The original IDs are retained for output.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense node index, `0..num_nodes`.
pub type NodeId = usize;
/// Dense layer index, `0..num_layers`.
pub type LayerId = usize;

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Drop `u u` lines instead of rejecting the file.
    pub drop_self_loops: bool,
}

/// Load summary emitted alongside every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub layers: usize,
    pub edges: usize,
    pub dedup_dropped: usize,
}

/// Immutable multiplex graph: shared node set, one simple undirected graph
/// per layer, and a nonnegative weight for every (node, layer) pair.
#[derive(Debug, Clone)]
pub struct MultiplexGraph {
    num_nodes: usize,
    num_layers: usize,
    // per layer CSR: offsets has num_nodes + 1 entries
    offsets: Vec<Vec<usize>>,
    targets: Vec<Vec<NodeId>>,
    // row-major num_nodes x num_layers
    weights: Vec<f64>,
    node_ids: Vec<u64>,
    layer_ids: Vec<u64>,
    layer_labels: Vec<Option<String>>,
    num_edges: usize,
    dedup_dropped: usize,
    self_loops_dropped: usize,
}

impl MultiplexGraph {
    /// Builds a graph over dense IDs. Duplicate edges (in either direction)
    /// are merged; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(num_nodes: usize, num_layers: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, LayerId)>,
    {
        let mut per_layer: Vec<Vec<(NodeId, NodeId)>> = vec![Vec::new(); num_layers];
        for (u, v, l) in edges {
            if u >= num_nodes {
                return Err(Error::UnknownNode(u as u64));
            }
            if v >= num_nodes {
                return Err(Error::UnknownNode(v as u64));
            }
            if l >= num_layers {
                return Err(Error::UnknownLayer(l as u64));
            }
            if u == v {
                return Err(Error::SelfLoop {
                    line: 0,
                    node: u as u64,
                    layer: l as u64,
                });
            }
            per_layer[l].push((u.min(v), u.max(v)));
        }
        Ok(Self::assemble(
            num_nodes,
            num_layers,
            per_layer,
            (0..num_nodes as u64).collect(),
            (0..num_layers as u64).collect(),
            0,
        ))
    }

    fn assemble(
        num_nodes: usize,
        num_layers: usize,
        mut per_layer: Vec<Vec<(NodeId, NodeId)>>,
        node_ids: Vec<u64>,
        layer_ids: Vec<u64>,
        self_loops_dropped: usize,
    ) -> Self {
        let mut offsets = Vec::with_capacity(num_layers);
        let mut targets = Vec::with_capacity(num_layers);
        let mut num_edges = 0;
        let mut dedup_dropped = 0;
        for edges in per_layer.iter_mut() {
            edges.sort_unstable();
            let before = edges.len();
            edges.dedup();
            dedup_dropped += before - edges.len();
            num_edges += edges.len();

            let mut degree = vec![0usize; num_nodes];
            for &(u, v) in edges.iter() {
                degree[u] += 1;
                degree[v] += 1;
            }
            let mut off = Vec::with_capacity(num_nodes + 1);
            off.push(0);
            for d in &degree {
                off.push(off.last().unwrap() + d);
            }
            let mut cursor = off.clone();
            let mut tgt = vec![0; off[num_nodes]];
            for &(u, v) in edges.iter() {
                tgt[cursor[u]] = v;
                cursor[u] += 1;
                tgt[cursor[v]] = u;
                cursor[v] += 1;
            }
            for v in 0..num_nodes {
                tgt[off[v]..off[v + 1]].sort_unstable();
            }
            offsets.push(off);
            targets.push(tgt);
        }
        MultiplexGraph {
            num_nodes,
            num_layers,
            offsets,
            targets,
            weights: vec![1.0; num_nodes * num_layers],
            node_ids,
            layer_ids,
            layer_labels: vec![None; num_layers],
            num_edges,
            dedup_dropped,
            self_loops_dropped,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    /// Total number of undirected edges summed over layers.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn layer_edge_count(&self, layer: LayerId) -> usize {
        self.targets[layer].len() / 2
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            nodes: self.num_nodes,
            layers: self.num_layers,
            edges: self.num_edges,
            dedup_dropped: self.dedup_dropped,
        }
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.num_nodes
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId, layer: LayerId) -> &[NodeId] {
        let off = &self.offsets[layer];
        &self.targets[layer][off[v]..off[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: NodeId, layer: LayerId) -> u32 {
        let off = &self.offsets[layer];
        (off[v + 1] - off[v]) as u32
    }

    pub fn degree_vector(&self, v: NodeId) -> Vec<u32> {
        (0..self.num_layers).map(|l| self.degree(v, l)).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId, layer: LayerId) -> bool {
        self.neighbors(u, layer).binary_search(&v).is_ok()
    }

    /// Per-layer weights `w(v, ·)`.
    #[inline]
    pub fn weights(&self, v: NodeId) -> &[f64] {
        &self.weights[v * self.num_layers..(v + 1) * self.num_layers]
    }

    pub fn weight(&self, v: NodeId, layer: LayerId) -> f64 {
        self.weights[v * self.num_layers + layer]
    }

    /// True when every weight equals 1.0.
    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Layer-level weight: the mean of `w(u, layer)` over all nodes.
    pub fn layer_weight(&self, layer: LayerId) -> f64 {
        if self.num_nodes == 0 {
            return 1.0;
        }
        let total: f64 = (0..self.num_nodes).map(|v| self.weight(v, layer)).sum();
        total / self.num_nodes as f64
    }

    pub fn original_node_id(&self, v: NodeId) -> u64 {
        self.node_ids[v]
    }

    pub fn original_layer_id(&self, l: LayerId) -> u64 {
        self.layer_ids[l]
    }

    pub fn dense_node_id(&self, original: u64) -> Option<NodeId> {
        self.node_ids.binary_search(&original).ok()
    }

    pub fn dense_layer_id(&self, original: u64) -> Option<LayerId> {
        self.layer_ids.binary_search(&original).ok()
    }

    pub fn layer_label(&self, l: LayerId) -> String {
        match &self.layer_labels[l] {
            Some(label) => label.clone(),
            None => self.layer_ids[l].to_string(),
        }
    }

    pub fn with_layer_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.num_layers {
            return Err(Error::DimensionMismatch {
                expected: self.num_layers,
                got: labels.len(),
            });
        }
        self.layer_labels = labels.into_iter().map(Some).collect();
        Ok(self)
    }

    /// Replaces all node–layer weights (row-major, node by layer).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.num_nodes * self.num_layers {
            return Err(Error::DimensionMismatch {
                expected: self.num_nodes * self.num_layers,
                got: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::NegativeWeight { line: 0, weight: w });
        }
        self.weights = weights;
        Ok(self)
    }

    /// Sets `w(u, ℓ) = layer_weights[ℓ]` for every node.
    pub fn with_broadcast_weights(self, layer_weights: &[f64]) -> Result<Self> {
        if layer_weights.len() != self.num_layers {
            return Err(Error::DimensionMismatch {
                expected: self.num_layers,
                got: layer_weights.len(),
            });
        }
        let n = self.num_nodes;
        let weights = (0..n).flat_map(|_| layer_weights.iter().copied()).collect();
        self.with_weights(weights)
    }

    /// Maps dense node IDs back to file IDs.
    pub fn original_ids(&self, nodes: &[NodeId]) -> Vec<u64> {
        nodes.iter().map(|&v| self.node_ids[v]).collect()
    }

    /// Writes the graph as a `layer src dst` edge list using original IDs.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for l in 0..self.num_layers {
            for u in 0..self.num_nodes {
                for &v in self.neighbors(u, l) {
                    if u < v {
                        let _ = writeln!(
                            out,
                            "{} {} {}",
                            self.layer_ids[l], self.node_ids[u], self.node_ids[v]
                        );
                    }
                }
            }
        }
        out
    }
}

fn parse_u64(token: &str, line: usize) -> Result<u64> {
    token.parse::<u64>().map_err(|_| Error::Parse {
        line,
        message: format!("expected a nonnegative integer, got {token:?}"),
    })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, trimmed.split_whitespace().collect()))
        }
    })
}

/// Parses `layer src dst` lines.
pub fn parse_edge_list(text: &str, options: &ParseOptions) -> Result<MultiplexGraph> {
    let mut raw = Vec::new();
    let mut self_loops = 0;
    for (line, tokens) in data_lines(text) {
        if tokens.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected \"layer src dst\", got {} fields", tokens.len()),
            });
        }
        let layer = parse_u64(tokens[0], line)?;
        let src = parse_u64(tokens[1], line)?;
        let dst = parse_u64(tokens[2], line)?;
        if src == dst {
            if options.drop_self_loops {
                self_loops += 1;
                continue;
            }
            return Err(Error::SelfLoop {
                line,
                node: src,
                layer,
            });
        }
        raw.push((layer, src, dst));
    }
    if raw.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let node_ids: Vec<u64> = raw
        .iter()
        .flat_map(|&(_, s, d)| [s, d])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let layer_ids: Vec<u64> = raw
        .iter()
        .map(|&(l, _, _)| l)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut per_layer = vec![Vec::new(); layer_ids.len()];
    for (l, s, d) in raw {
        let l = layer_ids.binary_search(&l).unwrap();
        let s = node_ids.binary_search(&s).unwrap();
        let d = node_ids.binary_search(&d).unwrap();
        per_layer[l].push((s.min(d), s.max(d)));
    }
    Ok(MultiplexGraph::assemble(
        node_ids.len(),
        layer_ids.len(),
        per_layer,
        node_ids,
        layer_ids,
        self_loops,
    ))
}

pub fn load_edge_list(path: impl AsRef<Path>, options: &ParseOptions) -> Result<MultiplexGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text, options)
}

/// Parses a weight file against `graph`. Lines are either `node layer weight`
/// or `layer weight` (broadcast to every node); the two forms may not be mixed.
/// Pairs that are not mentioned keep weight 1.0.
pub fn parse_weights(text: &str, graph: MultiplexGraph) -> Result<MultiplexGraph> {
    let layers = graph.num_layers();
    let mut weights = vec![1.0; graph.num_nodes() * layers];
    let mut form: Option<usize> = None;
    for (line, tokens) in data_lines(text) {
        match form {
            None => form = Some(tokens.len()),
            Some(f) if f != tokens.len() && (tokens.len() == 2 || tokens.len() == 3) => {
                return Err(Error::MixedWeightForms { line })
            }
            _ => {}
        }
        let weight_token = *tokens.last().unwrap();
        let weight: f64 = weight_token.parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid weight {weight_token:?}"),
        })?;
        if !weight.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("invalid weight {weight_token:?}"),
            });
        }
        if weight < 0.0 {
            return Err(Error::NegativeWeight { line, weight });
        }
        match tokens.len() {
            2 => {
                let l = parse_u64(tokens[0], line)?;
                let l = graph.dense_layer_id(l).ok_or(Error::UnknownLayer(l))?;
                for v in 0..graph.num_nodes() {
                    weights[v * layers + l] = weight;
                }
            }
            3 => {
                let v = parse_u64(tokens[0], line)?;
                let l = parse_u64(tokens[1], line)?;
                let v = graph.dense_node_id(v).ok_or(Error::UnknownNode(v))?;
                let l = graph.dense_layer_id(l).ok_or(Error::UnknownLayer(l))?;
                weights[v * layers + l] = weight;
            }
            n => {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "expected \"node layer weight\" or \"layer weight\", got {n} fields"
                    ),
                })
            }
        }
    }
    graph.with_weights(weights)
}

pub fn load_weights(path: impl AsRef<Path>, graph: MultiplexGraph) -> Result<MultiplexGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_weights(&text, graph)
}

/// Mutable induced-subgraph state used by every peeling routine.
///
/// Invariant: for every alive `v` and layer `ℓ`, `degree(v, ℓ)` equals the
/// number of alive neighbors of `v` in `ℓ`. The base graph is never mutated.
#[derive(Debug, Clone)]
pub struct SubgraphView<'g> {
    graph: &'g MultiplexGraph,
    alive: Vec<bool>,
    alive_count: usize,
    degrees: Vec<u32>,
    removed: Vec<NodeId>,
}

impl<'g> SubgraphView<'g> {
    /// View induced by `seed`. Duplicate seed entries are ignored.
    pub fn new<I>(graph: &'g MultiplexGraph, seed: I) -> Result<Self>
    where
        I: IntoIterator<Item = NodeId>,
    {
        let n = graph.num_nodes();
        let layers = graph.num_layers();
        let mut alive = vec![false; n];
        let mut alive_count = 0;
        for v in seed {
            if v >= n {
                return Err(Error::UnknownNode(v as u64));
            }
            if !alive[v] {
                alive[v] = true;
                alive_count += 1;
            }
        }
        let mut degrees = vec![0u32; n * layers];
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            for l in 0..layers {
                degrees[v * layers + l] =
                    graph.neighbors(v, l).iter().filter(|&&u| alive[u]).count() as u32;
            }
        }
        Ok(SubgraphView {
            graph,
            alive,
            alive_count,
            degrees,
            removed: Vec::new(),
        })
    }

    /// View over every node of the graph.
    pub fn full(graph: &'g MultiplexGraph) -> Self {
        let n = graph.num_nodes();
        let layers = graph.num_layers();
        let mut degrees = vec![0u32; n * layers];
        for v in 0..n {
            for l in 0..layers {
                degrees[v * layers + l] = graph.degree(v, l);
            }
        }
        SubgraphView {
            graph,
            alive: vec![true; n],
            alive_count: n,
            degrees,
            removed: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g MultiplexGraph {
        self.graph
    }

    #[inline]
    pub fn is_alive(&self, v: NodeId) -> bool {
        self.alive[v]
    }

    pub fn len(&self) -> usize {
        self.alive_count
    }

    pub fn is_empty(&self) -> bool {
        self.alive_count == 0
    }

    /// Induced degree vector of `v` (meaningful only while `v` is alive).
    #[inline]
    pub fn degrees(&self, v: NodeId) -> &[u32] {
        let layers = self.graph.num_layers();
        &self.degrees[v * layers..(v + 1) * layers]
    }

    pub fn alive_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter_map(|(v, &a)| a.then_some(v))
    }

    /// Alive nodes in ascending order.
    pub fn members(&self) -> Vec<NodeId> {
        self.alive_nodes().collect()
    }

    /// Nodes removed so far, in removal order.
    pub fn removal_log(&self) -> &[NodeId] {
        &self.removed
    }

    /// Number of edges of `layer` inside the view.
    pub fn layer_edge_count(&self, layer: LayerId) -> usize {
        let layers = self.graph.num_layers();
        let twice: u64 = self
            .alive_nodes()
            .map(|v| self.degrees[v * layers + layer] as u64)
            .sum();
        (twice / 2) as usize
    }

    /// Removes `v` and reports every `(neighbor, layer)` degree decrement.
    pub fn remove_node(&mut self, v: NodeId) -> Result<Vec<(NodeId, LayerId)>> {
        let mut touched = Vec::new();
        self.remove_node_with(v, |u, l| touched.push((u, l)))?;
        Ok(touched)
    }

    /// Like [`remove_node`](Self::remove_node) but streams decrements to a callback.
    pub fn remove_node_with<F>(&mut self, v: NodeId, mut on_decrement: F) -> Result<()>
    where
        F: FnMut(NodeId, LayerId),
    {
        if v >= self.alive.len() || !self.alive[v] {
            return Err(Error::NotAlive(v));
        }
        self.alive[v] = false;
        self.alive_count -= 1;
        self.removed.push(v);
        let layers = self.graph.num_layers();
        for l in 0..layers {
            for &u in self.graph.neighbors(v, l) {
                if self.alive[u] {
                    self.degrees[u * layers + l] -= 1;
                    on_decrement(u, l);
                }
            }
        }
        Ok(())
    }
}

/// Convenience wrapper for [`SubgraphView::new`].
pub fn make_view<'g, I>(graph: &'g MultiplexGraph, seed: I) -> Result<SubgraphView<'g>>
where
    I: IntoIterator<Item = NodeId>,
{
    SubgraphView::new(graph, seed)
}
