//! S-core peeling, maximal SCV indices and full lattice decomposition.
//!
//! All threshold comparisons go through [`quantize`]: a node satisfies a
//! threshold vector `k` when `quantize(S(deg)_i) >= quantize(k_i)` for every
//! coordinate. Raising a coordinate by one quantum therefore means "strictly
//! greater than", which is how child thresholds are formed during
//! decomposition.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MultiplexGraph, NodeId, SubgraphView};
use crate::summarizer::{quantize, Summarizer};

/// A `d`-dimensional core threshold vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ScvIndex(Vec<f64>);

impl ScvIndex {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidThreshold(format!(
                "threshold entries must be finite and nonnegative, got {v}"
            )));
        }
        Ok(ScvIndex(values))
    }

    pub fn zeros(dim: usize) -> Self {
        ScvIndex(vec![0.0; dim])
    }

    pub fn from_ints(values: &[u32]) -> Self {
        ScvIndex(values.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Quantized comparison key.
    pub fn key(&self) -> Vec<i64> {
        self.0.iter().map(|&v| quantize(v)).collect()
    }

    /// `self >= other` componentwise.
    pub fn dominates(&self, other: &ScvIndex) -> bool {
        self.key().iter().zip(other.key()).all(|(a, b)| *a >= b)
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// One distinct S-core, stored under its maximal SCV index.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    pub scv: ScvIndex,
    /// Ascending dense node IDs.
    pub members: Vec<NodeId>,
    /// Indices (into the owning lattice) of the cores this one was peeled from.
    pub parents: Vec<usize>,
}

fn violates(keys: &[i64], thresholds: &[i64]) -> bool {
    keys.iter().zip(thresholds).any(|(k, t)| k < t)
}

/// Per-node summary cache for the alive nodes of a view.
struct SummaryCache {
    dim: usize,
    values: Vec<f64>,
    keys: Vec<i64>,
}

impl SummaryCache {
    fn new(view: &SubgraphView<'_>, s: &Summarizer) -> Self {
        let n = view.graph().num_nodes();
        let dim = s.dim();
        let mut cache = SummaryCache {
            dim,
            values: vec![0.0; n * dim],
            keys: vec![0; n * dim],
        };
        for v in view.alive_nodes() {
            cache.refresh(view, s, v);
        }
        cache
    }

    fn refresh(&mut self, view: &SubgraphView<'_>, s: &Summarizer, v: NodeId) {
        let range = v * self.dim..(v + 1) * self.dim;
        s.eval_into(
            view.degrees(v),
            view.graph().weights(v),
            &mut self.values[range.clone()],
        );
        for i in range {
            self.keys[i] = quantize(self.values[i]);
        }
    }

    fn keys(&self, v: NodeId) -> &[i64] {
        &self.keys[v * self.dim..(v + 1) * self.dim]
    }

    fn values(&self, v: NodeId) -> &[f64] {
        &self.values[v * self.dim..(v + 1) * self.dim]
    }

    /// Componentwise minimum over the alive nodes; `None` on an empty view.
    fn minimum(&self, view: &SubgraphView<'_>) -> Option<ScvIndex> {
        let mut min: Option<Vec<f64>> = None;
        for v in view.alive_nodes() {
            let vals = self.values(v);
            match &mut min {
                None => min = Some(vals.to_vec()),
                Some(m) => {
                    for (a, &b) in m.iter_mut().zip(vals) {
                        if b < *a {
                            *a = b;
                        }
                    }
                }
            }
        }
        min.map(ScvIndex)
    }
}

/// Peels `view` in place until every alive node meets `thresholds`
/// (quantized keys). Violators are removed smallest node ID first.
fn peel_in_place(view: &mut SubgraphView<'_>, s: &Summarizer, thresholds: &[i64]) -> SummaryCache {
    let mut cache = SummaryCache::new(view, s);
    let n = view.graph().num_nodes();
    let mut queued = vec![false; n];
    let mut heap = BinaryHeap::new();
    for v in view.alive_nodes() {
        if violates(cache.keys(v), thresholds) {
            queued[v] = true;
            heap.push(Reverse(v));
        }
    }
    let mut touched = Vec::new();
    while let Some(Reverse(v)) = heap.pop() {
        touched.clear();
        view.remove_node_with(v, |u, _| touched.push(u))
            .expect("queued nodes are alive");
        touched.sort_unstable();
        touched.dedup();
        for &u in &touched {
            if queued[u] {
                continue;
            }
            cache.refresh(view, s, u);
            if violates(cache.keys(u), thresholds) {
                queued[u] = true;
                heap.push(Reverse(u));
            }
        }
    }
    cache
}

fn check_dim(s: &Summarizer, k: &ScvIndex) -> Result<()> {
    if k.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: k.dim(),
        });
    }
    Ok(())
}

/// The `k`-S-core inside `seed`: the unique maximal `H ⊆ seed` whose members
/// all satisfy `S(deg^H(v), w_v) >= k`. Returned in ascending order.
pub fn k_score_peel(
    graph: &MultiplexGraph,
    seed: &[NodeId],
    s: &Summarizer,
    k: &ScvIndex,
) -> Result<Vec<NodeId>> {
    check_dim(s, k)?;
    let mut view = SubgraphView::new(graph, seed.iter().copied())?;
    peel_in_place(&mut view, s, &k.key());
    Ok(view.members())
}

/// `[min_{u ∈ members} S(deg^members(u))_i]_i`.
pub fn maximal_scv(graph: &MultiplexGraph, members: &[NodeId], s: &Summarizer) -> Result<ScvIndex> {
    let view = SubgraphView::new(graph, members.iter().copied())?;
    SummaryCache::new(&view, s)
        .minimum(&view)
        .ok_or(Error::EmptyNodeSet)
}

/// Peels `view` to `base` and then sweeps coordinate `axis` upward, emitting
/// every distinct core along the way (outermost first) with the threshold
/// that produced it.
fn axis_sweep(
    mut view: SubgraphView<'_>,
    s: &Summarizer,
    base: &[i64],
    axis: usize,
) -> Vec<(Vec<i64>, ScvIndex, Vec<NodeId>)> {
    let mut thresholds = base.to_vec();
    let mut cache = peel_in_place(&mut view, s, &thresholds);
    let dim = s.dim();
    let n = view.graph().num_nodes();

    // bucket keys are quantized summary values, so real-valued summaries work
    let mut buckets: BTreeMap<i64, BTreeSet<NodeId>> = BTreeMap::new();
    for v in view.alive_nodes() {
        buckets.entry(cache.keys(v)[axis]).or_default().insert(v);
    }

    let mut chain = Vec::new();
    let mut queued = vec![false; n];
    let mut touched = Vec::new();
    while !view.is_empty() {
        let scv = cache.minimum(&view).expect("non-empty view");
        chain.push((thresholds.clone(), scv, view.members()));

        let (&lowest, _) = buckets.iter().next().expect("alive nodes are bucketed");
        thresholds[axis] = lowest + 1;
        let mut heap: BinaryHeap<Reverse<NodeId>> = BinaryHeap::new();
        for v in buckets.remove(&lowest).unwrap_or_default() {
            queued[v] = true;
            heap.push(Reverse(v));
        }
        while let Some(Reverse(v)) = heap.pop() {
            touched.clear();
            view.remove_node_with(v, |u, _| touched.push(u))
                .expect("queued nodes are alive");
            touched.sort_unstable();
            touched.dedup();
            for &u in &touched {
                if queued[u] {
                    continue;
                }
                let old = cache.keys(u)[axis];
                cache.refresh(&view, s, u);
                let new = cache.keys(u)[axis];
                if violates(cache.keys(u), &thresholds) {
                    if let Some(b) = buckets.get_mut(&old) {
                        b.remove(&u);
                        if b.is_empty() {
                            buckets.remove(&old);
                        }
                    }
                    queued[u] = true;
                    heap.push(Reverse(u));
                } else if new != old {
                    if let Some(b) = buckets.get_mut(&old) {
                        b.remove(&u);
                        if b.is_empty() {
                            buckets.remove(&old);
                        }
                    }
                    buckets.entry(new).or_default().insert(u);
                }
            }
        }
    }
    debug_assert!(dim > axis);
    chain
}

/// All distinct cores obtained by raising coordinate `axis` (0-based) of `k`
/// while keeping the other coordinates fixed. The chain is strictly nested,
/// outermost first; each entry carries its maximal SCV index.
pub fn dfs_path(
    graph: &MultiplexGraph,
    seed: &[NodeId],
    s: &Summarizer,
    k: &ScvIndex,
    axis: usize,
) -> Result<Vec<Core>> {
    check_dim(s, k)?;
    if axis >= s.dim() {
        return Err(Error::InvalidParameter(format!(
            "dimension index {axis} out of range for d = {}",
            s.dim()
        )));
    }
    let view = SubgraphView::new(graph, seed.iter().copied())?;
    let chain = axis_sweep(view, s, &k.key(), axis);
    Ok(chain
        .into_iter()
        .enumerate()
        .map(|(i, (_, scv, members))| Core {
            scv,
            members,
            parents: if i == 0 { vec![] } else { vec![i - 1] },
        })
        .collect())
}

/// Limits for [`decompose`]; the lattice can be exponential in `d`.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Maximum number of peels (lattice states) to run.
    pub max_states: usize,
    pub time_limit: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_states: 1_000_000,
            time_limit: None,
        }
    }
}

/// Every distinct non-empty S-core of a graph, keyed by maximal SCV index.
#[derive(Debug, Clone)]
pub struct CoreLattice {
    summarizer: String,
    dim: usize,
    num_nodes: usize,
    cores: Vec<Core>,
    index: BTreeMap<Vec<i64>, usize>,
    membership: Vec<Vec<usize>>,
    complete: bool,
    states: usize,
}

impl CoreLattice {
    fn build(
        summarizer: String,
        dim: usize,
        num_nodes: usize,
        found: Vec<Core>,
        complete: bool,
        states: usize,
    ) -> Self {
        // order cores by key so output is independent of discovery order
        let mut order: Vec<usize> = (0..found.len()).collect();
        let keys: Vec<Vec<i64>> = found.iter().map(|c| c.scv.key()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let mut remap = vec![0; found.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut cores: Vec<Core> = Vec::with_capacity(found.len());
        let mut slots: Vec<Option<Core>> = found.into_iter().map(Some).collect();
        for &old in &order {
            let mut core = slots[old].take().unwrap();
            let mut parents: Vec<usize> = core.parents.iter().map(|&p| remap[p]).collect();
            parents.sort_unstable();
            parents.dedup();
            core.parents = parents;
            cores.push(core);
        }
        let index = cores
            .iter()
            .enumerate()
            .map(|(i, c)| (c.scv.key(), i))
            .collect();
        let mut membership = vec![Vec::new(); num_nodes];
        for (i, core) in cores.iter().enumerate() {
            for &v in &core.members {
                membership[v].push(i);
            }
        }
        CoreLattice {
            summarizer,
            dim,
            num_nodes,
            cores,
            index,
            membership,
            complete,
            states,
        }
    }

    /// Builds a lattice from externally supplied cores (no validation of the
    /// S-core property is performed).
    pub fn from_cores(summarizer: &str, dim: usize, num_nodes: usize, cores: Vec<Core>) -> Self {
        Self::build(summarizer.to_string(), dim, num_nodes, cores, true, 0)
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn summarizer(&self) -> &str {
        &self.summarizer
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Number of peels the decomposition ran.
    pub fn states(&self) -> usize {
        self.states
    }

    pub fn get(&self, scv: &ScvIndex) -> Option<&Core> {
        self.index.get(&scv.key()).map(|&i| &self.cores[i])
    }

    /// Cores containing `v`.
    pub fn cores_containing(&self, v: NodeId) -> impl Iterator<Item = &Core> + '_ {
        self.membership[v].iter().map(move |&i| &self.cores[i])
    }

    /// The `k`-S-core reconstructed from the lattice: the union of every
    /// stored core whose maximal SCV dominates `k`.
    pub fn core_at(&self, k: &ScvIndex) -> Vec<NodeId> {
        let key = k.key();
        let mut members = BTreeSet::new();
        for core in &self.cores {
            if core.scv.key().iter().zip(&key).all(|(a, b)| a >= b) {
                members.extend(core.members.iter().copied());
            }
        }
        members.into_iter().collect()
    }

    /// Pareto-maximal SCV indices. Fails on an incomplete lattice.
    pub fn skyline(&self) -> Result<Vec<ScvIndex>> {
        if !self.complete {
            return Err(Error::IncompleteLattice);
        }
        let all: Vec<ScvIndex> = self.cores.iter().map(|c| c.scv.clone()).collect();
        Ok(pareto_maximal(&all))
    }

    pub fn report(&self, graph: &MultiplexGraph) -> LatticeReport {
        let cores = self
            .cores
            .iter()
            .map(|c| CoreReport {
                scv: c.scv.clone(),
                size: c.members.len(),
                members: graph.original_ids(&c.members),
                parents: c
                    .parents
                    .iter()
                    .map(|&p| self.cores[p].scv.clone())
                    .collect(),
            })
            .collect();
        LatticeReport {
            summarizer: self.summarizer.clone(),
            cores,
            skyline: self.skyline().ok(),
            complete: self.complete,
            states: self.states,
        }
    }

    /// `node,scv...` rows, one per (node, containing core) pair.
    pub fn membership_csv(&self, graph: &MultiplexGraph) -> String {
        let mut out = String::from("node");
        for i in 0..self.dim {
            let _ = write!(out, ",scv{i}");
        }
        out.push('\n');
        for v in 0..self.num_nodes {
            for core in self.cores_containing(v) {
                let _ = write!(out, "{}", graph.original_node_id(v));
                for x in core.scv.values() {
                    let _ = write!(out, ",{x}");
                }
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoreReport {
    pub scv: ScvIndex,
    pub size: usize,
    pub members: Vec<u64>,
    pub parents: Vec<ScvIndex>,
}

/// JSON form of a lattice.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeReport {
    pub summarizer: String,
    pub cores: Vec<CoreReport>,
    /// `None` when the lattice is incomplete.
    pub skyline: Option<Vec<ScvIndex>>,
    pub complete: bool,
    pub states: usize,
}

/// Indices not dominated by any other (`>=` everywhere, `>` somewhere).
/// Output is sorted by key and deduplicated.
pub fn pareto_maximal(indices: &[ScvIndex]) -> Vec<ScvIndex> {
    let mut keyed: Vec<(Vec<i64>, &ScvIndex)> = indices.iter().map(|k| (k.key(), k)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed
        .iter()
        .filter(|(k, _)| {
            !keyed
                .iter()
                .any(|(o, _)| o != k && o.iter().zip(k).all(|(a, b)| a >= b))
        })
        .map(|(_, s)| (*s).clone())
        .collect()
}

pub fn skyline(lattice: &CoreLattice) -> Result<Vec<ScvIndex>> {
    lattice.skyline()
}

/// Full S-core decomposition.
///
/// Explores thresholds: a threshold `t` whose core `C` has maximal SCV `m`
/// spawns the children `t` with coordinate `i` raised to `m_i + quantum`.
/// Every threshold `k >= t` with a different core dominates one of them, so
/// the search reaches every core. Pending thresholds are processed by
/// increasing key sum, so all generating states are known when a threshold
/// is peeled, and the peel starts from the intersection of their cores. A
/// state whose core was already expanded from a smaller threshold is not
/// expanded again. The per-axis chains from the root come from one sweep each.
pub fn decompose(graph: &MultiplexGraph, s: &Summarizer, budget: Budget) -> CoreLattice {
    let started = Instant::now();
    let n = graph.num_nodes();
    let d = s.dim();
    let label = s.to_string();
    if n == 0 {
        return CoreLattice::build(label, d, n, Vec::new(), true, 0);
    }

    let mut cores: Vec<Core> = Vec::new();
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    // thresholds each core has been expanded from
    let mut expanded: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut pending: BTreeMap<(i128, Vec<i64>), BTreeSet<usize>> = BTreeMap::new();
    let mut states = 0usize;
    let mut complete = true;

    // registers a peeled state and queues its children if it is new
    let mut visit = |cores: &mut Vec<Core>,
                     expanded: &mut Vec<Vec<Vec<i64>>>,
                     pending: &mut BTreeMap<(i128, Vec<i64>), BTreeSet<usize>>,
                     seen: &mut BTreeSet<Vec<i64>>,
                     threshold: Vec<i64>,
                     scv: ScvIndex,
                     members: Vec<NodeId>,
                     parents: Vec<usize>| {
        seen.insert(threshold.clone());
        let key = scv.key();
        let idx = match index.get(&key) {
            Some(&i) => {
                debug_assert_eq!(cores[i].members, members);
                cores[i]
                    .parents
                    .extend(parents.into_iter().filter(|&p| p != i));
                i
            }
            None => {
                cores.push(Core {
                    scv,
                    members,
                    parents,
                });
                expanded.push(Vec::new());
                index.insert(key.clone(), cores.len() - 1);
                cores.len() - 1
            }
        };
        let covered = expanded[idx]
            .iter()
            .any(|t| t.iter().zip(&threshold).all(|(a, b)| a <= b));
        if covered {
            return;
        }
        for axis in 0..key.len() {
            let mut child = threshold.clone();
            child[axis] = key[axis] + 1;
            if seen.contains(&child) {
                continue;
            }
            let sum: i128 = child.iter().map(|&x| x as i128).sum();
            pending.entry((sum, child)).or_default().insert(idx);
        }
        expanded[idx].push(threshold);
    };

    let zeros = vec![0i64; d];
    let root_view = SubgraphView::full(graph);
    let root_scv = SummaryCache::new(&root_view, s)
        .minimum(&root_view)
        .expect("non-empty graph");
    visit(
        &mut cores,
        &mut expanded,
        &mut pending,
        &mut seen,
        zeros.clone(),
        root_scv,
        root_view.members(),
        Vec::new(),
    );
    states += 1;

    for axis in 0..d {
        let chain = axis_sweep(SubgraphView::full(graph), s, &zeros, axis);
        let mut prev = 0;
        for (threshold, scv, members) in chain.into_iter().skip(1) {
            states += 1;
            let key = scv.key();
            let parents = vec![prev];
            visit(
                &mut cores,
                &mut expanded,
                &mut pending,
                &mut seen,
                threshold.clone(),
                scv,
                members,
                parents,
            );
            pending.remove(&(threshold.iter().map(|&x| x as i128).sum(), threshold));
            prev = index_of(&cores, &key);
        }
    }

    while let Some(((_, threshold), parents)) = pending.pop_first() {
        if seen.contains(&threshold) {
            continue;
        }
        if states >= budget.max_states
            || budget
                .time_limit
                .is_some_and(|limit| started.elapsed() > limit)
        {
            complete = false;
            break;
        }
        states += 1;
        let mut parent_iter = parents.iter();
        let first = *parent_iter.next().expect("children have a parent");
        let mut seed: Vec<NodeId> = cores[first].members.clone();
        for &p in parent_iter {
            let other = &cores[p].members;
            seed.retain(|v| other.binary_search(v).is_ok());
        }
        let mut view = SubgraphView::new(graph, seed).expect("seed nodes come from the graph");
        let cache = peel_in_place(&mut view, s, &threshold);
        match cache.minimum(&view) {
            Some(scv) => visit(
                &mut cores,
                &mut expanded,
                &mut pending,
                &mut seen,
                threshold,
                scv,
                view.members(),
                parents.into_iter().collect(),
            ),
            None => {
                seen.insert(threshold);
            }
        }
    }

    CoreLattice::build(label, d, n, cores, complete, states)
}

fn index_of(cores: &[Core], key: &[i64]) -> usize {
    cores
        .iter()
        .position(|c| c.scv.key() == key)
        .expect("core was just inserted")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::g1;

    fn ids(g: &MultiplexGraph, originals: &[u64]) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = originals
            .iter()
            .map(|&o| g.dense_node_id(o).unwrap())
            .collect();
        v.sort_unstable();
        v
    }

    fn all(g: &MultiplexGraph) -> Vec<NodeId> {
        g.nodes().collect()
    }

    #[test]
    fn peel_examples_on_g1() {
        let g = g1();
        let sum = Summarizer::sum(2);
        assert_eq!(
            k_score_peel(&g, &all(&g), &sum, &ScvIndex::from_ints(&[2])).unwrap(),
            all(&g)
        );
        assert!(k_score_peel(&g, &all(&g), &sum, &ScvIndex::from_ints(&[3]))
            .unwrap()
            .is_empty());
        assert_eq!(
            k_score_peel(&g, &all(&g), &Summarizer::identity(2), &ScvIndex::zeros(2)).unwrap(),
            all(&g)
        );
        let mm = Summarizer::minmax(2);
        assert!(
            k_score_peel(&g, &all(&g), &mm, &ScvIndex::from_ints(&[1, 2]))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn peel_dimension_mismatch() {
        let g = g1();
        let err = k_score_peel(&g, &all(&g), &Summarizer::minmax(2), &ScvIndex::zeros(1));
        assert!(matches!(
            err,
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn maximal_scv_examples() {
        let g = g1();
        let mm = Summarizer::minmax(2);
        assert_eq!(
            maximal_scv(&g, &all(&g), &mm).unwrap().values(),
            &[1.0, 1.0]
        );
        assert_eq!(
            maximal_scv(&g, &ids(&g, &[1, 2, 3]), &mm).unwrap().values(),
            &[0.0, 2.0]
        );
        assert_eq!(
            maximal_scv(&g, &ids(&g, &[4]), &Summarizer::sum(2))
                .unwrap()
                .values(),
            &[0.0]
        );
        assert!(matches!(
            maximal_scv(&g, &[], &mm),
            Err(Error::EmptyNodeSet)
        ));
    }

    #[test]
    fn dfs_path_examples() {
        let g = g1();
        let top1 = Summarizer::top_lambda(1, 2).unwrap();
        let chain = dfs_path(&g, &all(&g), &top1, &ScvIndex::zeros(1), 0).unwrap();
        let members: Vec<_> = chain.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![all(&g), ids(&g, &[1, 2, 3])]);
        assert_eq!(chain[0].scv.values(), &[1.0]);
        assert_eq!(chain[1].scv.values(), &[2.0]);

        let mm = Summarizer::minmax(2);
        let chain = dfs_path(&g, &all(&g), &mm, &ScvIndex::zeros(2), 1).unwrap();
        let members: Vec<_> = chain.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![all(&g), ids(&g, &[1, 2, 3])]);

        assert!(dfs_path(&g, &[], &mm, &ScvIndex::zeros(2), 0)
            .unwrap()
            .is_empty());
        assert!(dfs_path(&g, &all(&g), &mm, &ScvIndex::zeros(2), 2).is_err());
    }

    #[test]
    fn decompose_g1_minmax() {
        let g = g1();
        let lattice = decompose(&g, &Summarizer::minmax(2), Budget::default());
        assert!(lattice.is_complete());
        let got: Vec<(Vec<f64>, Vec<NodeId>)> = lattice
            .cores()
            .iter()
            .map(|c| (c.scv.values().to_vec(), c.members.clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                (vec![0.0, 2.0], ids(&g, &[1, 2, 3])),
                (vec![1.0, 1.0], all(&g)),
            ]
        );
        let sky = lattice.skyline().unwrap();
        assert_eq!(sky.len(), 2);
    }

    #[test]
    fn decompose_g1_top1() {
        let g = g1();
        let lattice = decompose(
            &g,
            &Summarizer::top_lambda(1, 2).unwrap(),
            Budget::default(),
        );
        let got: Vec<(f64, usize)> = lattice
            .cores()
            .iter()
            .map(|c| (c.scv.values()[0], c.members.len()))
            .collect();
        assert_eq!(got, vec![(1.0, 4), (2.0, 3)]);
        // the inner core was peeled from the outer one
        assert_eq!(lattice.cores()[1].parents, vec![0]);
    }

    #[test]
    fn edgeless_graph_has_single_zero_core() {
        let g = MultiplexGraph::from_edges(3, 2, []).unwrap();
        let lattice = decompose(&g, &Summarizer::sum(2), Budget::default());
        assert_eq!(lattice.len(), 1);
        assert_eq!(lattice.cores()[0].scv.values(), &[0.0]);
        assert_eq!(lattice.cores()[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn skyline_examples() {
        let k = |v: &[u32]| ScvIndex::from_ints(v);
        let sky = pareto_maximal(&[k(&[1, 1]), k(&[0, 2])]);
        assert_eq!(sky, vec![k(&[0, 2]), k(&[1, 1])]);
        let sky = pareto_maximal(&[k(&[1, 1]), k(&[2, 1]), k(&[2, 2])]);
        assert_eq!(sky, vec![k(&[2, 2])]);
        let single = CoreLattice::from_cores(
            "sum",
            1,
            2,
            vec![Core {
                scv: k(&[3]),
                members: vec![0, 1],
                parents: vec![],
            }],
        );
        assert_eq!(single.skyline().unwrap(), vec![k(&[3])]);
    }

    #[test]
    fn incomplete_lattice_has_no_skyline() {
        let g = g1();
        let budget = Budget {
            max_states: 1,
            time_limit: None,
        };
        let lattice = decompose(&g, &Summarizer::identity(2), budget);
        assert!(!lattice.is_complete());
        assert!(matches!(lattice.skyline(), Err(Error::IncompleteLattice)));
    }

    #[test]
    fn core_at_reconstructs_peels() {
        let g = g1();
        let s = Summarizer::identity(2);
        let lattice = decompose(&g, &s, Budget::default());
        for a in 0..4u32 {
            for b in 0..3u32 {
                let k = ScvIndex::from_ints(&[a, b]);
                assert_eq!(
                    lattice.core_at(&k),
                    k_score_peel(&g, &all(&g), &s, &k).unwrap()
                );
            }
        }
    }

    #[test]
    fn real_valued_summaries_decompose() {
        let g = g1();
        let spec = r#"stat:{"groups":[[0,1]],"families":["powerlaw"]}"#;
        let s = Summarizer::parse(spec, 2).unwrap();
        let lattice = decompose(&g, &s, Budget::default());
        assert!(lattice.is_complete());
        for core in lattice.cores() {
            assert_eq!(
                maximal_scv(&g, &core.members, &s).unwrap().key(),
                core.scv.key()
            );
            assert_eq!(
                k_score_peel(&g, &all(&g), &s, &core.scv).unwrap(),
                core.members
            );
        }
    }
}
