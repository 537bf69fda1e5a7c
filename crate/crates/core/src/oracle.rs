//! Exhaustive reference implementations for small graphs.
//!
//! Everything here enumerates node subsets (in Gray-code order, updating
//! induced degrees one node at a time) and never calls the peeling code, so
//! the engines can be checked against definitions rather than against
//! themselves.

use std::cmp::Ordering;

use crate::core_engine::ScvIndex;
use crate::densest::PhiTable;
use crate::densest::TermForm;
use crate::engagement::{is_equilibrium, StrategyProfile};
use crate::error::{Error, Result};
use crate::graph::{LayerId, MultiplexGraph, NodeId};
use crate::summarizer::{quantize, Summarizer, WEIGHT_TOLERANCE};

#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_nodes: usize,
    /// Cap on enumerated profiles for equilibrium search (`2^(|V|·|L|)`).
    pub max_subsets: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: 14,
            max_subsets: 1 << 20,
        }
    }
}

impl OracleBudget {
    fn check(&self, graph: &MultiplexGraph) -> Result<()> {
        let n = graph.num_nodes();
        if n > self.max_nodes || n >= 31 {
            return Err(Error::OracleBudget {
                nodes: n,
                limit: self.max_nodes.min(30),
            });
        }
        Ok(())
    }
}

/// Calls `visit(mask, degrees)` for every subset of nodes, where `degrees`
/// is the row-major induced degree table (entries of non-members count
/// their neighbors inside the subset). The empty set comes first.
fn for_each_subset<F>(graph: &MultiplexGraph, budget: &OracleBudget, mut visit: F) -> Result<()>
where
    F: FnMut(u32, &[u32]),
{
    budget.check(graph)?;
    let n = graph.num_nodes();
    let layers = graph.num_layers();
    let mut deg = vec![0u32; n * layers];
    let mut mask = 0u32;
    visit(mask, &deg);
    for i in 1u32..(1u32 << n) {
        let flip = i.trailing_zeros() as usize;
        let adding = mask & (1 << flip) == 0;
        mask ^= 1 << flip;
        for l in 0..layers {
            for &u in graph.neighbors(flip, l) {
                let d = &mut deg[u * layers + l];
                if adding {
                    *d += 1;
                } else {
                    *d -= 1;
                }
            }
        }
        visit(mask, &deg);
    }
    Ok(())
}

fn members_of(mask: u64, n: usize) -> Vec<NodeId> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Largest subset whose members all satisfy `pred(node, induced degrees)`:
/// the union of every feasible subset.
fn brute_fixed_point<P>(
    graph: &MultiplexGraph,
    budget: &OracleBudget,
    mut pred: P,
) -> Result<Vec<NodeId>>
where
    P: FnMut(NodeId, &[u32]) -> bool,
{
    let n = graph.num_nodes();
    let layers = graph.num_layers();
    let mut union = 0u32;
    for_each_subset(graph, budget, |mask, deg| {
        if mask & !union == 0 {
            return;
        }
        let feasible = (0..n)
            .filter(|&v| mask >> v & 1 == 1)
            .all(|v| pred(v, &deg[v * layers..(v + 1) * layers]));
        if feasible {
            union |= mask;
        }
    })?;
    Ok(members_of(union as u64, n))
}

/// The k-S-core by definition: the union of all subsets in which every
/// member's summary is componentwise at least `k`.
pub fn brute_core(graph: &MultiplexGraph, s: &Summarizer, k: &ScvIndex) -> Result<Vec<NodeId>> {
    if k.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: k.dim(),
        });
    }
    let threshold = k.key();
    let mut out = vec![0.0; s.dim()];
    brute_fixed_point(graph, &OracleBudget::default(), |v, deg| {
        s.eval_into(deg, graph.weights(v), &mut out);
        out.iter().zip(&threshold).all(|(&x, &t)| quantize(x) >= t)
    })
}

/// Minimum summary vector of every non-empty subset, for answering many
/// threshold queries against one graph.
#[derive(Debug, Clone)]
pub struct BruteCoreTable {
    num_nodes: usize,
    entries: Vec<(u32, Vec<i64>)>,
}

impl BruteCoreTable {
    pub fn new(graph: &MultiplexGraph, s: &Summarizer) -> Result<Self> {
        let n = graph.num_nodes();
        let layers = graph.num_layers();
        let d = s.dim();
        let mut entries = Vec::new();
        let mut out = vec![0.0; d];
        for_each_subset(graph, &OracleBudget::default(), |mask, deg| {
            if mask == 0 {
                return;
            }
            let mut min = vec![i64::MAX; d];
            for v in (0..n).filter(|&v| mask >> v & 1 == 1) {
                s.eval_into(
                    &deg[v * layers..(v + 1) * layers],
                    graph.weights(v),
                    &mut out,
                );
                for (m, &x) in min.iter_mut().zip(&out) {
                    *m = (*m).min(quantize(x));
                }
            }
            entries.push((mask, min));
        })?;
        Ok(BruteCoreTable {
            num_nodes: n,
            entries,
        })
    }

    pub fn core(&self, k: &ScvIndex) -> Vec<NodeId> {
        let threshold = k.key();
        let union = self
            .entries
            .iter()
            .filter(|(_, min)| min.iter().zip(&threshold).all(|(m, t)| m >= t))
            .fold(0u32, |acc, (mask, _)| acc | mask);
        members_of(union as u64, self.num_nodes)
    }

    /// Distinct minimum summary vectors, i.e. every threshold at which some
    /// subset is tight.
    pub fn observed_thresholds(&self) -> Vec<Vec<i64>> {
        let mut all: Vec<Vec<i64>> = self.entries.iter().map(|(_, m)| m.clone()).collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Multilayer core: degree at least `k[ℓ]` in every layer ℓ.
pub fn brute_ml_core(graph: &MultiplexGraph, k: &[u32]) -> Result<Vec<NodeId>> {
    if k.len() != graph.num_layers() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_layers(),
            got: k.len(),
        });
    }
    brute_fixed_point(graph, &OracleBudget::default(), |_, deg| {
        deg.iter().zip(k).all(|(d, t)| d >= t)
    })
}

/// FirmCore: degree at least `k` in at least `lambda` layers.
pub fn brute_firmcore(graph: &MultiplexGraph, k: u32, lambda: usize) -> Result<Vec<NodeId>> {
    brute_fixed_point(graph, &OracleBudget::default(), |_, deg| {
        deg.iter().filter(|&&d| d >= k).count() >= lambda
    })
}

/// CoreCube: degree at least `k` in every layer of `layers`.
pub fn brute_corecube(graph: &MultiplexGraph, layers: &[LayerId], k: u32) -> Result<Vec<NodeId>> {
    if let Some(&l) = layers.iter().find(|&&l| l >= graph.num_layers()) {
        return Err(Error::UnknownLayer(l as u64));
    }
    brute_fixed_point(graph, &OracleBudget::default(), |_, deg| {
        layers.iter().all(|&l| deg[l] >= k)
    })
}

/// WFirmCore: the layers where the node has degree at least `k` weigh at
/// least `lambda` in total (and at least one such layer exists).
pub fn brute_wcore(graph: &MultiplexGraph, k: u32, lambda: f64) -> Result<Vec<NodeId>> {
    brute_fixed_point(graph, &OracleBudget::default(), |v, deg| {
        if k == 0 {
            return true;
        }
        let w = graph.weights(v);
        let mut any = false;
        let mut total = 0.0;
        for (l, &d) in deg.iter().enumerate() {
            if d >= k {
                any = true;
                total += w[l];
            }
        }
        any && total >= lambda - WEIGHT_TOLERANCE
    })
}

/// Exact densest subset for the mean node-term objective. Ties prefer fewer
/// nodes, then the lexicographically smaller set.
pub fn brute_densest(graph: &MultiplexGraph, beta: f64) -> Result<(Vec<NodeId>, f64)> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "β must be positive, got {beta}"
        )));
    }
    let n = graph.num_nodes();
    if n == 0 {
        return Err(Error::EmptyNodeSet);
    }
    let layers = graph.num_layers();
    let phi = PhiTable::new(graph, TermForm::TopLambda);
    // best: (density key, density, members)
    let mut best: Option<(i64, f64, Vec<NodeId>)> = None;
    for_each_subset(graph, &OracleBudget::default(), |mask, deg| {
        if mask == 0 {
            return;
        }
        let members = members_of(mask as u64, n);
        let total: f64 = members
            .iter()
            .map(|&v| {
                phi.term(
                    v,
                    &deg[v * layers..(v + 1) * layers],
                    graph.weights(v),
                    beta,
                )
                .0
            })
            .sum();
        let density = total / members.len() as f64;
        let key = quantize(density);
        let replace = match &best {
            None => true,
            Some((bk, _, bm)) => match key.cmp(bk) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => (members.len(), &members) < (bm.len(), bm),
            },
        };
        if replace {
            best = Some((key, density, members));
        }
    })?;
    let (_, density, members) = best.expect("at least one non-empty subset");
    Ok((members, density))
}

/// Densest subset of a single layer by average degree `2|E|/|S|`, with the
/// same tie-break as [`brute_densest`]; returns the minimum induced degree
/// inside it as the third value.
pub fn brute_densest_single_layer(
    graph: &MultiplexGraph,
    layer: LayerId,
) -> Result<(Vec<NodeId>, f64, u32)> {
    if layer >= graph.num_layers() {
        return Err(Error::UnknownLayer(layer as u64));
    }
    let n = graph.num_nodes();
    let layers = graph.num_layers();
    let mut best: Option<(u64, u64, Vec<NodeId>, u32)> = None; // 2|E|, |S|, members, min degree
    for_each_subset(graph, &OracleBudget::default(), |mask, deg| {
        if mask == 0 {
            return;
        }
        let members = members_of(mask as u64, n);
        let degrees = members.iter().map(|&v| deg[v * layers + layer]);
        let twice: u64 = degrees.clone().map(u64::from).sum();
        let min = degrees.min().unwrap_or(0);
        let size = members.len() as u64;
        let replace = match &best {
            None => true,
            Some((bt, bs, bm, _)) => match (twice * bs).cmp(&(bt * size)) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => (members.len(), &members) < (bm.len(), bm),
            },
        };
        if replace {
            best = Some((twice, size, members, min));
        }
    })?;
    match best {
        Some((twice, size, members, min)) => Ok((members, twice as f64 / size as f64, min)),
        None => Err(Error::EmptyNodeSet),
    }
}

/// μ*: minimum degree inside the densest single-layer subgraph over all
/// layers (ties: fewer nodes, smaller set, lower layer).
pub fn brute_mu_star(graph: &MultiplexGraph) -> Result<u32> {
    let mut best: Option<(i64, Vec<NodeId>, u32)> = None;
    for l in 0..graph.num_layers() {
        let (members, avg, min) = brute_densest_single_layer(graph, l)?;
        let key = quantize(avg);
        let replace = match &best {
            None => true,
            Some((bk, bm, _)) => {
                key > *bk || (key == *bk && (members.len(), &members) < (bm.len(), bm))
            }
        };
        if replace {
            best = Some((key, members, min));
        }
    }
    Ok(best.map_or(0, |(_, _, min)| min))
}

/// Every equilibrium of the engagement game over all per-(node, layer)
/// profiles.
pub fn brute_equilibria(
    graph: &MultiplexGraph,
    k: &[u32],
    budget: &OracleBudget,
) -> Result<Vec<StrategyProfile>> {
    let n = graph.num_nodes();
    let layers = graph.num_layers();
    let bits = n * layers;
    if bits >= 63 || (1u64 << bits) as usize > budget.max_subsets {
        return Err(Error::OracleBudget {
            nodes: n,
            limit: budget.max_subsets,
        });
    }
    let mut found = Vec::new();
    for mask in 0u64..(1u64 << bits) {
        let flags = (0..bits).map(|i| mask >> i & 1 == 1).collect();
        let profile = StrategyProfile::from_flags(n, layers, flags)?;
        if is_equilibrium(graph, &profile, k)? {
            found.push(profile);
        }
    }
    Ok(found)
}
