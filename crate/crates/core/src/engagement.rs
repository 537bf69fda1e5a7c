//! User engagement game on multiplex networks.
//!
//! Every user either stays engaged or drops out. An engaged user `v` earns
//! `u_ℓ(v) = |engaged neighbors of v in ℓ| − k_ℓ` in each layer; a dropped
//! user earns 0. A user stays only if no layer leaves it with a negative
//! utility, and a dropped user rejoins only if every layer would pay it
//! strictly more than staying out. The largest equilibrium engages exactly
//! the multilayer `k`-core.

use serde::Serialize;

use crate::core_engine::{k_score_peel, CoreLattice, ScvIndex};
use crate::error::{Error, Result};
use crate::graph::{LayerId, MultiplexGraph, NodeId};
use crate::summarizer::Summarizer;

/// Per-(node, layer) engagement decisions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    num_layers: usize,
    engaged: Vec<bool>,
}

impl StrategyProfile {
    pub fn all_engaged(num_nodes: usize, num_layers: usize) -> Self {
        StrategyProfile {
            num_layers,
            engaged: vec![true; num_nodes * num_layers],
        }
    }

    pub fn all_dropped(num_nodes: usize, num_layers: usize) -> Self {
        StrategyProfile {
            num_layers,
            engaged: vec![false; num_nodes * num_layers],
        }
    }

    /// Users in `engaged_users` take part in every layer, the rest in none.
    pub fn from_users(num_nodes: usize, num_layers: usize, engaged_users: &[NodeId]) -> Self {
        let mut profile = Self::all_dropped(num_nodes, num_layers);
        for &v in engaged_users {
            for l in 0..num_layers {
                profile.set(v, l, true);
            }
        }
        profile
    }

    /// Row-major `num_nodes × num_layers` flags.
    pub fn from_flags(num_nodes: usize, num_layers: usize, engaged: Vec<bool>) -> Result<Self> {
        if engaged.len() != num_nodes * num_layers {
            return Err(Error::DimensionMismatch {
                expected: num_nodes * num_layers,
                got: engaged.len(),
            });
        }
        Ok(StrategyProfile {
            num_layers,
            engaged,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.engaged.len().checked_div(self.num_layers).unwrap_or(0)
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn is_engaged(&self, v: NodeId, l: LayerId) -> bool {
        self.engaged[v * self.num_layers + l]
    }

    pub fn set(&mut self, v: NodeId, l: LayerId, engaged: bool) {
        self.engaged[v * self.num_layers + l] = engaged;
    }

    pub fn engaged_layers(&self, v: NodeId) -> usize {
        self.row(v).iter().filter(|&&e| e).count()
    }

    pub fn row(&self, v: NodeId) -> &[bool] {
        &self.engaged[v * self.num_layers..(v + 1) * self.num_layers]
    }

    /// Number of engaged (node, layer) pairs.
    pub fn engaged_pairs(&self) -> usize {
        self.engaged.iter().filter(|&&e| e).count()
    }

    /// True when every pair engaged in `other` is engaged here too.
    pub fn contains(&self, other: &StrategyProfile) -> bool {
        self.engaged.len() == other.engaged.len()
            && self
                .engaged
                .iter()
                .zip(&other.engaged)
                .all(|(&a, &b)| a || !b)
    }

    /// Users engaged in every layer, ascending.
    pub fn engaged_users(&self) -> Vec<NodeId> {
        (0..self.num_nodes())
            .filter(|&v| self.row(v).iter().all(|&e| e))
            .collect()
    }
}

fn check_dims(graph: &MultiplexGraph, profile: &StrategyProfile, k: &[u32]) -> Result<()> {
    let layers = graph.num_layers();
    if k.len() != layers {
        return Err(Error::DimensionMismatch {
            expected: layers,
            got: k.len(),
        });
    }
    if profile.num_layers() != layers || profile.num_nodes() != graph.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_nodes() * layers,
            got: profile.engaged.len(),
        });
    }
    Ok(())
}

fn engaged_neighbors(
    graph: &MultiplexGraph,
    profile: &StrategyProfile,
    v: NodeId,
    l: LayerId,
) -> i64 {
    graph
        .neighbors(v, l)
        .iter()
        .filter(|&&u| profile.is_engaged(u, l))
        .count() as i64
}

/// `u_ℓ(v)` for every node and layer; 0 where `v` is not engaged.
pub fn utilities(
    graph: &MultiplexGraph,
    profile: &StrategyProfile,
    k: &[u32],
) -> Result<Vec<Vec<i64>>> {
    check_dims(graph, profile, k)?;
    Ok(graph
        .nodes()
        .map(|v| {
            (0..graph.num_layers())
                .map(|l| {
                    if profile.is_engaged(v, l) {
                        engaged_neighbors(graph, profile, v, l) - k[l] as i64
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect())
}

/// A profitable deviation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Deviation {
    /// Engaged user with a negative utility in `layer`.
    Drop {
        node: NodeId,
        layer: LayerId,
        utility: i64,
    },
    /// Dropped user whose smallest utility after rejoining would be `gain > 0`.
    Join { node: NodeId, gain: i64 },
    /// User engaged in some layers only.
    Mixed { node: NodeId },
}

/// Checks the profile for profitable deviations; returns the first one found
/// (smallest node, then smallest layer) or `None` at an equilibrium.
pub fn equilibrium_violation(
    graph: &MultiplexGraph,
    profile: &StrategyProfile,
    k: &[u32],
) -> Result<Option<Deviation>> {
    check_dims(graph, profile, k)?;
    let layers = graph.num_layers();
    for v in graph.nodes() {
        let engaged = profile.engaged_layers(v);
        if engaged == layers {
            for (l, &cost) in k.iter().enumerate() {
                let utility = engaged_neighbors(graph, profile, v, l) - cost as i64;
                if utility < 0 {
                    return Ok(Some(Deviation::Drop {
                        node: v,
                        layer: l,
                        utility,
                    }));
                }
            }
        } else if engaged == 0 {
            let gain = (0..layers)
                .map(|l| engaged_neighbors(graph, profile, v, l) - k[l] as i64)
                .min();
            if let Some(gain) = gain.filter(|&g| g > 0) {
                return Ok(Some(Deviation::Join { node: v, gain }));
            }
        } else {
            return Ok(Some(Deviation::Mixed { node: v }));
        }
    }
    Ok(None)
}

pub fn is_equilibrium(
    graph: &MultiplexGraph,
    profile: &StrategyProfile,
    k: &[u32],
) -> Result<bool> {
    Ok(equilibrium_violation(graph, profile, k)?.is_none())
}

/// Engages exactly the multilayer `k`-core, in every layer.
pub fn max_equilibrium(graph: &MultiplexGraph, k: &[u32]) -> Result<StrategyProfile> {
    let layers = graph.num_layers();
    if k.len() != layers {
        return Err(Error::DimensionMismatch {
            expected: layers,
            got: k.len(),
        });
    }
    let all: Vec<NodeId> = graph.nodes().collect();
    let core = k_score_peel(
        graph,
        &all,
        &Summarizer::identity(layers),
        &ScvIndex::from_ints(k),
    )?;
    Ok(StrategyProfile::from_users(
        graph.num_nodes(),
        layers,
        &core,
    ))
}

/// Per-node engagement level: the largest L1 norm over the SCV indices of
/// the cores that contain the node.
#[derive(Debug, Clone, Serialize)]
pub struct EngagementScore {
    pub tau: Vec<f64>,
}

pub fn engagement_tau(lattice: &CoreLattice, u: NodeId) -> Result<f64> {
    if !lattice.is_complete() {
        return Err(Error::IncompleteLattice);
    }
    if u >= lattice.num_nodes() {
        return Err(Error::UnknownNode(u as u64));
    }
    Ok(lattice
        .cores_containing(u)
        .map(|c| c.scv.l1_norm())
        .fold(0.0, f64::max))
}

pub fn engagement_scores(lattice: &CoreLattice) -> Result<EngagementScore> {
    if !lattice.is_complete() {
        return Err(Error::IncompleteLattice);
    }
    let mut tau = vec![0.0f64; lattice.num_nodes()];
    for core in lattice.cores() {
        let norm = core.scv.l1_norm();
        for &v in &core.members {
            tau[v] = tau[v].max(norm);
        }
    }
    Ok(EngagementScore { tau })
}

/// One row of a departure curve: nodes whose τ falls in
/// `[tau_bucket, tau_bucket + width)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepartureBucket {
    pub tau_bucket: f64,
    pub nodes: usize,
    pub departed: usize,
    pub departure_rate: f64,
}

/// Departure rate per τ bucket, ascending. Nodes without a label are
/// ignored; empty buckets are omitted.
pub fn departure_curve(
    tau: &[f64],
    departed: &[Option<bool>],
    width: f64,
) -> Result<Vec<DepartureBucket>> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bucket width must be positive, got {width}"
        )));
    }
    if tau.len() != departed.len() {
        return Err(Error::DimensionMismatch {
            expected: tau.len(),
            got: departed.len(),
        });
    }
    let mut counts: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for (&t, label) in tau.iter().zip(departed) {
        let Some(gone) = label else { continue };
        let bucket = (t / width + 1e-9).floor() as i64;
        let entry = counts.entry(bucket).or_default();
        entry.0 += 1;
        entry.1 += usize::from(*gone);
    }
    Ok(counts
        .into_iter()
        .map(|(bucket, (nodes, gone))| DepartureBucket {
            tau_bucket: bucket as f64 * width,
            nodes,
            departed: gone,
            departure_rate: gone as f64 / nodes as f64,
        })
        .collect())
}

/// Parses `node,departed` rows (0 or 1) into per-node labels.
pub fn parse_departures(text: &str, graph: &MultiplexGraph) -> Result<Vec<Option<bool>>> {
    let mut labels = vec![None; graph.num_nodes()];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("node")) {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let (node, flag) = line
            .split_once(',')
            .ok_or_else(|| parse_err("expected `node,departed`".into()))?;
        let node: u64 = node
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad node id {node:?}")))?;
        let flag = match flag.trim() {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(format!("departed must be 0 or 1, got {other:?}"))),
        };
        let v = graph.dense_node_id(node).ok_or(Error::UnknownNode(node))?;
        labels[v] = Some(flag);
    }
    Ok(labels)
}
