//! Layer-weighted FirmCores.
//!
//! A node belongs to the `(k, λ)`-WFirmCore when the layers in which it has
//! at least `k` neighbors inside the core carry a cumulative weight (its own
//! weights) of at least `λ`. Cores are nested in both `k` and `λ`, which lets
//! the decomposition for `λ_i` start from the indices found for `λ_{i-1}`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::core_engine::{k_score_peel, ScvIndex};
use crate::error::{Error, Result};
use crate::graph::{MultiplexGraph, NodeId, SubgraphView};
use crate::summarizer::{quantize, top_lambda_weighted, Summarizer};

/// Strictly increasing, nonnegative λ values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct LambdaSet(Vec<f64>);

impl LambdaSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidLambdaSet("λ set is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidLambdaSet(format!("invalid λ {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLambdaSet(format!(
                "λ values must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(LambdaSet(values))
    }

    /// Sorts and deduplicates (on the summary grid) before validating.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| quantize(*a) == quantize(*b));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Wcore_λ(v)` for every node and every λ of a [`LambdaSet`].
#[derive(Debug, Clone)]
pub struct WcoreTable {
    lambdas: LambdaSet,
    // wcore[i][v] for λ_i
    wcore: Vec<Vec<u32>>,
}

impl WcoreTable {
    pub fn lambdas(&self) -> &LambdaSet {
        &self.lambdas
    }

    /// Wcore values of every node for the `i`-th λ.
    pub fn row(&self, lambda_index: usize) -> &[u32] {
        &self.wcore[lambda_index]
    }

    pub fn wcore(&self, v: NodeId, lambda_index: usize) -> u32 {
        self.wcore[lambda_index][v]
    }

    pub fn lambda_index(&self, lambda: f64) -> Option<usize> {
        let key = quantize(lambda);
        self.lambdas
            .values()
            .iter()
            .position(|&l| quantize(l) == key)
    }

    /// `{v : Wcore_λ(v) >= k}` in ascending order.
    pub fn core(&self, k: u32, lambda_index: usize) -> Vec<NodeId> {
        self.wcore[lambda_index]
            .iter()
            .enumerate()
            .filter_map(|(v, &c)| (c >= k).then_some(v))
            .collect()
    }

    /// Distinct Wcore values present for the `i`-th λ, ascending.
    pub fn levels(&self, lambda_index: usize) -> Vec<u32> {
        let mut levels = self.wcore[lambda_index].clone();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    /// `node,lambda,wcore` rows.
    pub fn to_csv(&self, graph: &MultiplexGraph) -> String {
        let mut out = String::from("node,lambda,wcore\n");
        for v in graph.nodes() {
            for (i, lambda) in self.lambdas.values().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    graph.original_node_id(v),
                    lambda,
                    self.wcore[i][v]
                );
            }
        }
        out
    }

    /// Lattice-style JSON: one entry per distinct `(k, λ)` core.
    pub fn report(&self, graph: &MultiplexGraph) -> WcoreReport {
        let mut cores = Vec::new();
        for (i, &lambda) in self.lambdas.values().iter().enumerate() {
            for k in self.levels(i) {
                let members = self.core(k, i);
                cores.push(WcoreCoreReport {
                    lambda,
                    scv: ScvIndex::from_ints(&[k]),
                    size: members.len(),
                    members: graph.original_ids(&members),
                });
            }
        }
        WcoreReport {
            summarizer: "wtop".to_string(),
            lambdas: self.lambdas.values().to_vec(),
            cores,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WcoreCoreReport {
    pub lambda: f64,
    pub scv: ScvIndex,
    pub size: usize,
    pub members: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WcoreReport {
    pub summarizer: String,
    pub lambdas: Vec<f64>,
    pub cores: Vec<WcoreCoreReport>,
}

/// The `(k, λ)`-WFirmCore, computed as a plain S-core peel with the
/// weighted Top-λ summarizer.
pub fn wfirmcore_at(graph: &MultiplexGraph, k: u32, lambda: f64) -> Result<Vec<NodeId>> {
    let s = Summarizer::weighted_top_lambda(lambda, graph.num_layers())?;
    let all: Vec<NodeId> = graph.nodes().collect();
    k_score_peel(graph, &all, &s, &ScvIndex::from_ints(&[k]))
}

/// Bucket peeling over every λ of `lambdas`, seeding each λ with the
/// previous λ's indices as upper bounds.
pub fn wfirmcore_decompose(graph: &MultiplexGraph, lambdas: &LambdaSet) -> WcoreTable {
    let mut wcore: Vec<Vec<u32>> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas.values() {
        let row = decompose_one(graph, lambda, wcore.last().map(Vec::as_slice));
        wcore.push(row);
    }
    WcoreTable {
        lambdas: lambdas.clone(),
        wcore,
    }
}

fn decompose_one(graph: &MultiplexGraph, lambda: f64, upper: Option<&[u32]>) -> Vec<u32> {
    let n = graph.num_nodes();
    let mut view = SubgraphView::full(graph);
    let mut index: Vec<u32> = (0..n)
        .map(|v| {
            let top = top_lambda_weighted(view.degrees(v), graph.weights(v), lambda);
            match upper {
                Some(cap) => top.min(cap[v]),
                None => top,
            }
        })
        .collect();
    let max_index = index.iter().copied().max().unwrap_or(0) as usize;
    // lazy buckets: stale entries are skipped when popped
    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); max_index + 1];
    for v in (0..n).rev() {
        buckets[index[v] as usize].push(v);
    }
    let mut result = vec![0u32; n];
    let mut touched = Vec::new();
    for k in 0..=max_index {
        while let Some(v) = buckets[k].pop() {
            if !view.is_alive(v) || index[v] as usize != k {
                continue;
            }
            result[v] = k as u32;
            touched.clear();
            view.remove_node_with(v, |u, _| touched.push(u))
                .expect("bucketed node is alive");
            touched.sort_unstable();
            touched.dedup();
            for &u in &touched {
                if index[u] as usize <= k {
                    continue;
                }
                let top = top_lambda_weighted(view.degrees(u), graph.weights(u), lambda);
                let updated = top.min(index[u]).max(k as u32);
                if updated != index[u] {
                    index[u] = updated;
                    buckets[updated as usize].push(u);
                }
            }
        }
    }
    result
}

/// Temporal span-core preset: weights `w(·, ℓ) = 2^ℓ` (layers in temporal
/// order) and one λ per window of `delta` consecutive layers. Because the
/// weights are distinct powers of two, each λ can only be reached by the
/// layers of its own window.
pub fn span_core_lambda_set(
    graph: &MultiplexGraph,
    delta: usize,
) -> Result<(LambdaSet, MultiplexGraph)> {
    let layers = graph.num_layers();
    if delta == 0 || delta > layers {
        return Err(Error::InvalidParameter(format!(
            "span length {delta} must be in 1..={layers}"
        )));
    }
    if layers > 52 {
        return Err(Error::InvalidParameter(
            "span-core weights 2^ℓ are exact only up to 52 layers".into(),
        ));
    }
    let weights: Vec<f64> = (0..layers).map(|l| (1u64 << l) as f64).collect();
    let lambdas = (0..=layers - delta)
        .map(|start| weights[start..start + delta].iter().sum())
        .collect();
    let weighted = graph.clone().with_broadcast_weights(&weights)?;
    Ok((LambdaSet::new(lambdas)?, weighted))
}
