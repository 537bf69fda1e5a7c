#![allow(dead_code)]

use mscore::{MultiplexGraph, NodeId};
use rand::Rng;

pub const G1: &str = "0 1 2\n0 1 3\n0 2 3\n0 3 4\n1 1 2\n1 3 4\n";

pub fn g1() -> MultiplexGraph {
    mscore::parse_edge_list(G1, &Default::default()).unwrap()
}

/// Erdős–Rényi layer by layer.
pub fn random_graph(rng: &mut impl Rng, n: usize, layers: usize, p: f64) -> MultiplexGraph {
    let mut edges = Vec::new();
    for l in 0..layers {
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v, l));
                }
            }
        }
    }
    MultiplexGraph::from_edges(n, layers, edges).unwrap()
}

/// Per-(node, layer) weights drawn from `choices`.
pub fn random_weights(
    rng: &mut impl Rng,
    graph: MultiplexGraph,
    choices: &[f64],
) -> MultiplexGraph {
    let count = graph.num_nodes() * graph.num_layers();
    let weights = (0..count)
        .map(|_| choices[rng.gen_range(0..choices.len())])
        .collect();
    graph.with_weights(weights).unwrap()
}

pub fn max_degree(graph: &MultiplexGraph) -> u32 {
    graph
        .nodes()
        .flat_map(|v| graph.degree_vector(v))
        .max()
        .unwrap_or(0)
}

pub fn all_nodes(graph: &MultiplexGraph) -> Vec<NodeId> {
    graph.nodes().collect()
}
