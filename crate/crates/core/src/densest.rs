//! Multiplex densest subgraph: density objectives, the WFirmCore based
//! approximation and its guarantee constants.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{LayerId, MultiplexGraph, NodeId, SubgraphView};
use crate::summarizer::{quantize, WEIGHT_TOLERANCE};
use crate::wfirmcore::{wfirmcore_decompose, LambdaSet};

/// Grid used to deduplicate subset sums of weights.
pub const SUBSET_SUM_QUANTUM: f64 = 1e-6;

/// Upper bound on the number of distinct subset sums kept.
pub const SUBSET_SUM_CAP: usize = 10_000;

/// Node subsets of up to this many nodes get an exact single-layer densest.
pub const EXACT_SINGLE_LAYER_LIMIT: usize = 15;

/// Distinct sums over non-empty subsets of at most `max_size` elements of
/// `weights`, ascending, deduplicated on a 1e-6 grid. Sums are admitted size
/// by size, so when `cap` fires the sums of smaller subsets are kept. The
/// flag reports truncation.
pub fn subset_sums(weights: &[f64], max_size: usize, cap: usize) -> (Vec<f64>, bool) {
    let grid = |x: f64| (x / SUBSET_SUM_QUANTUM).round() as i64;
    let max_size = max_size.min(weights.len());
    // by_size[s]: distinct sums of exactly s distinct elements
    let mut by_size: Vec<BTreeMap<i64, f64>> = vec![BTreeMap::new(); max_size + 1];
    by_size[0].insert(0, 0.0);
    for &w in weights {
        for s in (1..=max_size).rev() {
            let additions: Vec<(i64, f64)> = by_size[s - 1]
                .values()
                .map(|&base| (grid(base + w), base + w))
                .collect();
            for (key, value) in additions {
                by_size[s].entry(key).or_insert(value);
            }
        }
    }
    let mut kept: BTreeMap<i64, f64> = BTreeMap::new();
    let mut truncated = false;
    'sizes: for sums in by_size.iter().skip(1) {
        for (&key, &value) in sums {
            if kept.contains_key(&key) {
                continue;
            }
            if kept.len() >= cap {
                truncated = true;
                break 'sizes;
            }
            kept.insert(key, value);
        }
    }
    (kept.into_values().collect(), truncated)
}

/// Which node term the "new" objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermForm {
    /// Unweighted Top-λ degree times λ^β, λ from the node's own subset sums.
    #[default]
    TopLambda,
    /// Same, but λ ranges over the union of every node's subset sums.
    GlobalPhi,
    /// `min_{ℓ∈L̂} deg_ℓ·w(u,ℓ) · (Σ_{ℓ∈L̂} w(u,ℓ))^β` maximized over L̂.
    Eq3Literal,
}

/// Precomputed λ candidates for node terms.
#[derive(Debug, Clone)]
pub struct PhiTable {
    form: TermForm,
    per_node: Vec<Vec<f64>>,
    global: Vec<f64>,
    truncated: bool,
}

impl PhiTable {
    pub fn new(graph: &MultiplexGraph, form: TermForm) -> Self {
        let layers = graph.num_layers();
        let mut truncated = false;
        let mut per_node: Vec<Vec<f64>> = Vec::with_capacity(graph.num_nodes());
        let mut cache: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        for v in graph.nodes() {
            let key: Vec<i64> = graph.weights(v).iter().map(|&w| quantize(w)).collect();
            if let Some(&prev) = cache.get(&key) {
                let copy = per_node[prev].clone();
                per_node.push(copy);
                continue;
            }
            let (sums, t) = subset_sums(graph.weights(v), layers, SUBSET_SUM_CAP);
            truncated |= t;
            cache.insert(key, v);
            per_node.push(sums);
        }
        let global = if form == TermForm::GlobalPhi {
            let mut all: BTreeMap<i64, f64> = BTreeMap::new();
            for sums in &per_node {
                for &s in sums {
                    all.entry((s / SUBSET_SUM_QUANTUM).round() as i64)
                        .or_insert(s);
                }
            }
            all.into_values().collect()
        } else {
            Vec::new()
        };
        PhiTable {
            form,
            per_node,
            global,
            truncated,
        }
    }

    pub fn form(&self) -> TermForm {
        self.form
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Candidate λ values for `v`, ascending.
    pub fn phi(&self, v: NodeId) -> &[f64] {
        match self.form {
            TermForm::GlobalPhi => &self.global,
            _ => &self.per_node[v],
        }
    }

    /// `(value, best λ)` for a node with induced degree vector `deg`.
    pub fn term(&self, v: NodeId, deg: &[u32], w: &[f64], beta: f64) -> (f64, f64) {
        match self.form {
            TermForm::Eq3Literal => eq3_term(deg, w, beta),
            _ => top_lambda_term(deg, w, self.phi(v), beta),
        }
    }
}

/// max over λ ∈ `phi` of Top-λ(deg, w)·λ^β. Ties keep the smaller λ.
///
/// Layers are scanned by decreasing degree: for every prefix with weight
/// `W` the best λ is the largest candidate not above `W`, and the Top-λ value
/// is at least the prefix's smallest degree.
fn top_lambda_term(deg: &[u32], w: &[f64], phi: &[f64], beta: f64) -> (f64, f64) {
    let mut order: Vec<usize> = (0..deg.len()).collect();
    order.sort_unstable_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    let mut best = (0.0, phi.first().copied().unwrap_or(0.0));
    let mut cumulative = 0.0;
    for &l in &order {
        cumulative += w[l];
        if deg[l] == 0 {
            break;
        }
        let reachable = phi.partition_point(|&x| x <= cumulative + WEIGHT_TOLERANCE);
        let Some(&lambda) = reachable.checked_sub(1).and_then(|i| phi.get(i)) else {
            continue;
        };
        // λ must still need this layer or Top-λ would be larger; either way
        // deg[l]·λ^β is attained or beaten by an earlier prefix
        let value = deg[l] as f64 * lambda.powf(beta);
        if value > best.0 {
            best = (value, lambda);
        }
    }
    best
}

fn eq3_term(deg: &[u32], w: &[f64], beta: f64) -> (f64, f64) {
    let product = |l: usize| deg[l] as f64 * w[l];
    let mut order: Vec<usize> = (0..deg.len()).collect();
    order.sort_unstable_by(|&a, &b| product(b).total_cmp(&product(a)).then(a.cmp(&b)));
    let mut best = (0.0, 0.0);
    let mut cumulative = 0.0;
    for &l in &order {
        cumulative += w[l];
        let value = product(l) * cumulative.powf(beta);
        if value > best.0 {
            best = (value, cumulative);
        }
    }
    best
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "β must be positive, got {beta}"
        )))
    }
}

fn subset_view<'g>(graph: &'g MultiplexGraph, subset: &[NodeId]) -> Result<SubgraphView<'g>> {
    if subset.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    SubgraphView::new(graph, subset.iter().copied())
}

/// Term of `u` inside `subset` with per-node λ candidates.
pub fn node_density_term(
    graph: &MultiplexGraph,
    subset: &[NodeId],
    u: NodeId,
    beta: f64,
) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let view = subset_view(graph, subset)?;
    if u >= graph.num_nodes() || !view.is_alive(u) {
        return Err(Error::InvalidParameter(format!(
            "node {u} is not in the subset"
        )));
    }
    let (phi, _) = subset_sums(graph.weights(u), graph.num_layers(), SUBSET_SUM_CAP);
    Ok(top_lambda_term(
        view.degrees(u),
        graph.weights(u),
        &phi,
        beta,
    ))
}

/// Mean node term over `subset`.
pub fn our_density(graph: &MultiplexGraph, subset: &[NodeId], beta: f64) -> Result<f64> {
    our_density_with(
        graph,
        subset,
        beta,
        &PhiTable::new(graph, TermForm::TopLambda),
    )
}

pub fn our_density_with(
    graph: &MultiplexGraph,
    subset: &[NodeId],
    beta: f64,
    phi: &PhiTable,
) -> Result<f64> {
    check_beta(beta)?;
    let view = subset_view(graph, subset)?;
    Ok(view_density(&view, beta, phi))
}

fn view_density(view: &SubgraphView<'_>, beta: f64, phi: &PhiTable) -> f64 {
    let graph = view.graph();
    let total: f64 = view
        .alive_nodes()
        .map(|v| phi.term(v, view.degrees(v), graph.weights(v), beta).0)
        .sum();
    total / view.len() as f64
}

/// Best layer-subset density: the min per-layer edge density times |L̂|^β.
pub fn ml_density(graph: &MultiplexGraph, subset: &[NodeId], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let view = subset_view(graph, subset)?;
    Ok(view_ml_density(&view, beta))
}

fn view_ml_density(view: &SubgraphView<'_>, beta: f64) -> f64 {
    let graph = view.graph();
    let size = view.len() as f64;
    let mut densities: Vec<f64> = (0..graph.num_layers())
        .map(|l| view.layer_edge_count(l) as f64 / size)
        .collect();
    densities.sort_unstable_by(|a, b| b.total_cmp(a));
    densities
        .iter()
        .enumerate()
        .map(|(i, &d)| d * ((i + 1) as f64).powf(beta))
        .fold(0.0, f64::max)
}

/// Weighted fraction of node pairs joined, with layer weights taken as the
/// mean node weight of each layer.
pub fn edge_density(graph: &MultiplexGraph, subset: &[NodeId]) -> Result<f64> {
    let view = subset_view(graph, subset)?;
    view_edge_density(&view)
        .ok_or_else(|| Error::InvalidParameter("edge density needs at least two nodes".into()))
}

fn view_edge_density(view: &SubgraphView<'_>) -> Option<f64> {
    let graph = view.graph();
    let size = view.len();
    if size < 2 {
        return None;
    }
    let pairs = (size * (size - 1) / 2) as f64;
    let mut weighted = 0.0;
    let mut total_weight = 0.0;
    for l in 0..graph.num_layers() {
        let wl = graph.layer_weight(l);
        weighted += wl * view.layer_edge_count(l) as f64;
        total_weight += wl;
    }
    if total_weight == 0.0 {
        return Some(0.0);
    }
    Some(weighted / (total_weight * pairs))
}

/// Objective maximized by [`wfc_approx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    New,
    Ml,
    Edge,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "new" => Ok(Objective::New),
            "ml" => Ok(Objective::Ml),
            "edge" => Ok(Objective::Edge),
            other => Err(Error::InvalidParameter(format!(
                "unknown density objective {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ApproxOptions {
    pub objective: Objective,
    pub form: TermForm,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeTerm {
    pub node: u64,
    pub lambda: f64,
    pub term: f64,
}

/// Densities of one subset. `subset` holds original node IDs.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub subset: Vec<u64>,
    pub size: usize,
    pub rho_new: f64,
    pub rho_ml: f64,
    pub rho_edge: Option<f64>,
    pub alpha: usize,
    pub beta: f64,
    pub objective: Objective,
    pub term_form: TermForm,
    pub candidates: usize,
    pub truncated: bool,
    pub per_node_terms: Vec<NodeTerm>,
    #[serde(skip)]
    pub members: Vec<NodeId>,
}

impl DensityReport {
    /// Evaluates every density of `members` (dense IDs).
    pub fn evaluate(
        graph: &MultiplexGraph,
        members: &[NodeId],
        beta: f64,
        phi: &PhiTable,
    ) -> Result<Self> {
        check_beta(beta)?;
        let view = subset_view(graph, members)?;
        let members = view.members();
        let per_node_terms = members
            .iter()
            .map(|&v| {
                let (term, lambda) = phi.term(v, view.degrees(v), graph.weights(v), beta);
                NodeTerm {
                    node: graph.original_node_id(v),
                    lambda,
                    term,
                }
            })
            .collect();
        Ok(DensityReport {
            subset: graph.original_ids(&members),
            size: members.len(),
            rho_new: view_density(&view, beta, phi),
            rho_ml: view_ml_density(&view, beta),
            rho_edge: view_edge_density(&view),
            alpha: graph.num_layers(),
            beta,
            objective: Objective::New,
            term_form: phi.form(),
            candidates: 0,
            truncated: phi.truncated(),
            per_node_terms,
            members,
        })
    }

    pub fn terms_csv(&self) -> String {
        let mut out = String::from("node,lambda,term\n");
        for t in &self.per_node_terms {
            out.push_str(&format!("{},{},{}\n", t.node, t.lambda, t.term));
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    density: f64,
    members: Vec<NodeId>,
}

/// Higher density first, then fewer nodes, then lexicographically smaller.
fn better(a: &Candidate, b: &Candidate) -> bool {
    match quantize(a.density).cmp(&quantize(b.density)) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a.members.len(), &a.members) < (b.members.len(), &b.members),
    }
}

fn objective_value(
    view: &SubgraphView<'_>,
    objective: Objective,
    beta: f64,
    phi: &PhiTable,
) -> Option<f64> {
    match objective {
        Objective::New => Some(view_density(view, beta, phi)),
        Objective::Ml => Some(view_ml_density(view, beta)),
        Objective::Edge => view_edge_density(view),
    }
}

/// Best nested core over the λ values of one chunk.
fn best_in_chunk(
    graph: &MultiplexGraph,
    lambdas: &LambdaSet,
    beta: f64,
    options: &ApproxOptions,
    phi: &PhiTable,
) -> Option<Candidate> {
    let table = wfirmcore_decompose(graph, lambdas);
    let mut best: Option<Candidate> = None;
    for i in 0..lambdas.len() {
        let row = table.row(i);
        let mut order: Vec<NodeId> = graph.nodes().collect();
        order.sort_by_key(|&v| (row[v], v));
        let mut view = SubgraphView::full(graph);
        let mut next = 0;
        for k in table.levels(i) {
            while next < order.len() && row[order[next]] < k {
                view.remove_node(order[next])
                    .expect("each node removed once");
                next += 1;
            }
            if view.is_empty() {
                break;
            }
            let Some(density) = objective_value(&view, options.objective, beta, phi) else {
                continue;
            };
            let mut members = order[next..].to_vec();
            members.sort_unstable();
            let candidate = Candidate { density, members };
            if best.as_ref().is_none_or(|b| better(&candidate, b)) {
                best = Some(candidate);
            }
        }
    }
    best
}

/// Candidate λ values: distinct sums of at most `alpha` of a node's layer
/// weights, pooled over nodes. When the pool exceeds the cap the smallest
/// values are kept. The flag reports truncation.
pub fn candidate_lambdas(graph: &MultiplexGraph, alpha: usize) -> (Vec<f64>, bool) {
    let mut pooled: BTreeMap<i64, f64> = BTreeMap::new();
    let mut truncated = false;
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    for v in graph.nodes() {
        let key: Vec<i64> = graph.weights(v).iter().map(|&w| quantize(w)).collect();
        if !seen.insert(key) {
            continue;
        }
        let (sums, t) = subset_sums(graph.weights(v), alpha, SUBSET_SUM_CAP);
        truncated |= t;
        for s in sums {
            pooled
                .entry((s / SUBSET_SUM_QUANTUM).round() as i64)
                .or_insert(s);
        }
    }
    let mut values: Vec<f64> = pooled.into_values().collect();
    if values.len() > SUBSET_SUM_CAP {
        truncated = true;
        values.truncate(SUBSET_SUM_CAP);
    }
    (values, truncated)
}

/// WFirmCore based approximation of the densest multiplex subgraph.
pub fn wfc_approx(
    graph: &MultiplexGraph,
    alpha: usize,
    beta: f64,
    options: &ApproxOptions,
) -> Result<DensityReport> {
    check_beta(beta)?;
    let layers = graph.num_layers();
    if alpha == 0 || alpha > layers {
        return Err(Error::InvalidParameter(format!(
            "α must be in 1..={layers}, got {alpha}"
        )));
    }
    if graph.num_nodes() == 0 {
        return Err(Error::EmptyNodeSet);
    }
    let phi = PhiTable::new(graph, options.form);
    let (lambdas, truncated) = candidate_lambdas(graph, alpha);
    let threads = rayon::current_num_threads().max(1);
    let chunk = lambdas.len().div_ceil(threads).max(1);
    let best = lambdas
        .par_chunks(chunk)
        .filter_map(|part| {
            let set = LambdaSet::new(part.to_vec()).expect("sorted distinct candidates");
            best_in_chunk(graph, &set, beta, options, &phi)
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a });
    let best = best.ok_or_else(|| {
        Error::InvalidParameter("no candidate subset has the required size".into())
    })?;
    let mut report = DensityReport::evaluate(graph, &best.members, beta, &phi)?;
    report.alpha = alpha;
    report.objective = options.objective;
    report.candidates = lambdas.len();
    report.truncated = truncated || phi.truncated();
    Ok(report)
}

/// Constants of the approximation bound.
#[derive(Debug, Clone, Serialize)]
pub struct GuaranteeConstants {
    pub omega: f64,
    pub mu_star: u32,
    /// True when μ* came from greedy peeling instead of exhaustive search.
    pub mu_star_approximate: bool,
    pub densest_layer: Option<LayerId>,
    pub densest_layer_average_degree: f64,
    pub psi: f64,
    pub alpha: usize,
    pub beta: f64,
    pub factor: f64,
}

/// Densest subgraph of one layer by average degree: `(members, 2|E|/|S|)`.
/// Exhaustive below [`EXACT_SINGLE_LAYER_LIMIT`] nodes, greedy peeling above.
/// Ties prefer fewer nodes, then lexicographically smaller sets.
pub fn densest_single_layer(graph: &MultiplexGraph, layer: LayerId) -> (Vec<NodeId>, f64, bool) {
    let n = graph.num_nodes();
    if n < EXACT_SINGLE_LAYER_LIMIT {
        let adj: Vec<u32> = graph
            .nodes()
            .map(|v| {
                graph
                    .neighbors(v, layer)
                    .iter()
                    .fold(0u32, |m, &u| m | 1 << u)
            })
            .collect();
        let mut best: Option<(Vec<NodeId>, u64, u64)> = None; // members, 2|E|, |S|
        for mask in 1u32..(1u32 << n) {
            let twice: u64 = (0..n)
                .filter(|&v| mask >> v & 1 == 1)
                .map(|v| (adj[v] & mask).count_ones() as u64)
                .sum();
            let size = mask.count_ones() as u64;
            let members: Vec<NodeId> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            let replace = match &best {
                None => true,
                Some((bm, bt, bs)) => match (twice * bs).cmp(&(bt * size)) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => (members.len(), &members) < (bm.len(), bm),
                },
            };
            if replace {
                best = Some((members, twice, size));
            }
        }
        let (members, twice, size) = best.unwrap_or((Vec::new(), 0, 1));
        return (members, twice as f64 / size as f64, false);
    }
    // greedy peeling: drop a minimum-degree node, remember the best prefix
    let mut degree: Vec<u32> = graph.nodes().map(|v| graph.degree(v, layer)).collect();
    let mut queue: BTreeSet<(u32, NodeId)> = graph.nodes().map(|v| (degree[v], v)).collect();
    let mut alive = vec![true; n];
    let mut edges = graph.layer_edge_count(layer) as u64;
    let mut removed: Vec<NodeId> = Vec::with_capacity(n);
    // best: (2|E|, |S|, number of removals)
    let mut best = (2 * edges, n as u64, 0usize);
    while queue.len() > 1 {
        let (d, v) = queue.pop_first().expect("queue is non-empty");
        alive[v] = false;
        removed.push(v);
        edges -= d as u64;
        for &u in graph.neighbors(v, layer) {
            if alive[u] {
                queue.remove(&(degree[u], u));
                degree[u] -= 1;
                queue.insert((degree[u], u));
            }
        }
        let size = queue.len() as u64;
        if 2 * edges * best.1 >= best.0 * size {
            best = (2 * edges, size, removed.len());
        }
    }
    let gone: BTreeSet<NodeId> = removed[..best.2].iter().copied().collect();
    let members = graph.nodes().filter(|v| !gone.contains(v)).collect();
    (members, best.0 as f64 / best.1 as f64, true)
}

pub fn guarantee_constants(
    graph: &MultiplexGraph,
    alpha: usize,
    beta: f64,
) -> Result<GuaranteeConstants> {
    check_beta(beta)?;
    let omega = graph
        .nodes()
        .map(|v| graph.weights(v).iter().sum::<f64>())
        .fold(0.0, f64::max);

    let mut densest: Option<(LayerId, Vec<NodeId>, f64)> = None;
    let mut approximate = false;
    for l in 0..graph.num_layers() {
        let (members, avg, approx) = densest_single_layer(graph, l);
        approximate |= approx;
        let replace = match &densest {
            None => true,
            Some((_, bm, bavg)) => {
                quantize(avg) > quantize(*bavg)
                    || (quantize(avg) == quantize(*bavg)
                        && (members.len(), &members) < (bm.len(), bm))
            }
        };
        if replace {
            densest = Some((l, members, avg));
        }
    }
    let (densest_layer, mu_star, avg) = match &densest {
        Some((l, members, avg)) if !members.is_empty() => {
            let view = SubgraphView::new(graph, members.iter().copied())?;
            let mu = members
                .iter()
                .map(|&v| view.degrees(v)[*l])
                .min()
                .unwrap_or(0);
            (Some(*l), mu, *avg)
        }
        _ => (None, 0, 0.0),
    };

    let (candidates, _) = candidate_lambdas(graph, graph.num_layers());
    let non_empty = |lambda: f64| {
        let set = LambdaSet::new(vec![lambda]).expect("single finite λ");
        let table = wfirmcore_decompose(graph, &set);
        table.row(0).iter().any(|&c| c >= mu_star)
    };
    // non-emptiness is monotone in λ: find the last candidate that passes
    let passing = candidates.partition_point(|&lambda| non_empty(lambda));
    let psi = passing.checked_sub(1).map_or(0.0, |i| candidates[i]);

    let factor = if omega > 0.0 {
        (alpha as f64).min(psi).powf(beta) / (2.0 * omega.powf(beta))
    } else {
        0.0
    };
    Ok(GuaranteeConstants {
        omega,
        mu_star,
        mu_star_approximate: approximate,
        densest_layer,
        densest_layer_average_degree: avg,
        psi,
        alpha,
        beta,
        factor,
    })
}
