mod common;

use common::{all_nodes, g1, random_graph, random_weights};
use mscore::densest::densest_single_layer;
use mscore::oracle::{brute_core, brute_densest, brute_mu_star};
use mscore::{
    decompose, dfs_path, engagement_scores, guarantee_constants, k_score_peel, ml_density,
    node_density_term, our_density, skyline, wfc_approx, wfirmcore_decompose, ApproxOptions,
    Budget, LambdaSet, MultiplexGraph, NodeId, ScvIndex, Summarizer,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_from(seed: u64, max_nodes: usize, max_layers: usize) -> MultiplexGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_nodes);
    let layers = rng.gen_range(1..=max_layers);
    let p = rng.gen_range(0.15..0.7);
    random_graph(&mut rng, n, layers, p)
}

fn summarizer_for(choice: u8, layers: usize) -> Summarizer {
    let spec = match choice % 6 {
        0 => "identity".to_string(),
        1 => "sum".to_string(),
        2 => "minmax".to_string(),
        3 => format!("top:{}", layers),
        4 => "order:1".to_string(),
        _ => {
            let all: Vec<String> = (0..layers).map(|l| l.to_string()).collect();
            format!(
                r#"stat:{{"groups":[[{}]],"families":["powerlaw"]}}"#,
                all.join(",")
            )
        }
    };
    Summarizer::parse(&spec, layers).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn lattice_cores_are_fixed_points(seed in any::<u64>(), choice in any::<u8>()) {
        let g = graph_from(seed, 9, 3);
        let s = summarizer_for(choice, g.num_layers());
        let lattice = decompose(&g, &s, Budget::default());
        prop_assert!(lattice.is_complete());
        for core in lattice.cores() {
            prop_assert_eq!(&brute_core(&g, &s, &core.scv).unwrap(), &core.members);
            for &p in &core.parents {
                let parent = &lattice.cores()[p];
                prop_assert!(core.members.iter().all(|v| parent.members.contains(v)));
            }
        }
    }

    #[test]
    fn skyline_is_pareto_front(seed in any::<u64>(), choice in any::<u8>()) {
        let g = graph_from(seed, 9, 3);
        let s = summarizer_for(choice, g.num_layers());
        let lattice = decompose(&g, &s, Budget::default());
        let front = skyline(&lattice).unwrap();
        for core in lattice.cores() {
            prop_assert!(front.iter().any(|f| f.dominates(&core.scv)));
        }
        for a in &front {
            prop_assert!(front.iter().all(|b| b == a || !b.dominates(a)));
        }
    }

    #[test]
    fn decompose_is_deterministic(seed in any::<u64>(), choice in any::<u8>()) {
        let g = graph_from(seed, 10, 3);
        let s = summarizer_for(choice, g.num_layers());
        let a = serde_json::to_string(&decompose(&g, &s, Budget::default()).report(&g)).unwrap();
        let b = serde_json::to_string(&decompose(&g, &s, Budget::default()).report(&g)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dfs_path_is_nested(seed in any::<u64>(), choice in any::<u8>()) {
        let g = graph_from(seed, 12, 3);
        let s = summarizer_for(choice, g.num_layers());
        let all = all_nodes(&g);
        for axis in 0..s.dim() {
            let chain = dfs_path(&g, &all, &s, &ScvIndex::zeros(s.dim()), axis).unwrap();
            for pair in chain.windows(2) {
                prop_assert!(pair[1].members.len() < pair[0].members.len());
                prop_assert!(pair[1].members.iter().all(|v| pair[0].members.contains(v)));
                prop_assert!(pair[1].scv.values()[axis] > pair[0].scv.values()[axis]);
            }
        }
    }

    #[test]
    fn tau_grows_with_edges(seed in any::<u64>(), extra in 1usize..6) {
        let g = graph_from(seed, 9, 2);
        let s = Summarizer::top_lambda(1, g.num_layers()).unwrap();
        let before = engagement_scores(&decompose(&g, &s, Budget::default())).unwrap().tau;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let n = g.num_nodes();
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for l in 0..g.num_layers() {
            for u in g.nodes() {
                edges.extend(g.neighbors(u, l).iter().filter(|&&v| v > u).map(|&v| (u, v, l)));
            }
        }
        if n >= 2 {
            for _ in 0..extra {
                let u = rng.gen_range(0..n);
                let v = (u + rng.gen_range(1..n)) % n;
                edges.push((u, v, rng.gen_range(0..g.num_layers())));
            }
        }
        let h = MultiplexGraph::from_edges(n, g.num_layers(), edges).unwrap();
        let after = engagement_scores(&decompose(&h, &s, Budget::default())).unwrap().tau;
        for v in 0..n {
            prop_assert!(after[v] >= before[v]);
        }
    }

    #[test]
    fn tau_bounds_every_containing_core(seed in any::<u64>(), choice in any::<u8>()) {
        let g = graph_from(seed, 9, 3);
        let s = summarizer_for(choice, g.num_layers());
        let lattice = decompose(&g, &s, Budget::default());
        let tau = engagement_scores(&lattice).unwrap().tau;
        for v in g.nodes() {
            let norms: Vec<f64> = lattice.cores_containing(v).map(|c| c.scv.l1_norm()).collect();
            prop_assert!(norms.iter().all(|&x| x <= tau[v]));
            prop_assert!(norms.is_empty() || norms.contains(&tau[v]));
        }
    }

    #[test]
    fn wcore_is_anti_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = graph_from(seed, 20, 4);
        let g = random_weights(&mut rng, g, &[0.5, 1.0, 2.0, 3.0]);
        let lambdas = LambdaSet::new(vec![0.0, 0.5, 1.0, 2.5, 4.0, 7.0]).unwrap();
        let table = wfirmcore_decompose(&g, &lambdas);
        for i in 1..lambdas.len() {
            for v in g.nodes() {
                prop_assert!(table.wcore(v, i) <= table.wcore(v, i - 1));
            }
        }
    }

    #[test]
    fn dominance_where_it_is_provable(seed in any::<u64>(), low_beta in any::<bool>()) {
        // holds for every |L| when β <= 1/2, and for |L| <= 3 when β = 1
        let g = graph_from(seed, 12, if low_beta { 6 } else { 3 });
        let beta = if low_beta { 0.5 } else { 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let mut subset: Vec<NodeId> = g.nodes().filter(|_| rng.gen_bool(0.6)).collect();
        if subset.is_empty() {
            subset.push(0);
        }
        let ours = our_density(&g, &subset, beta).unwrap();
        let ml = ml_density(&g, &subset, beta).unwrap();
        prop_assert!(ours >= ml - 1e-9, "ours {} ml {}", ours, ml);
    }

    #[test]
    fn density_grows_with_beta(seed in any::<u64>()) {
        let g = graph_from(seed, 10, 3);
        let all = all_nodes(&g);
        let low = our_density(&g, &all, 0.5).unwrap();
        let high = our_density(&g, &all, 2.0).unwrap();
        // unit weights: every best λ is at least 1
        prop_assert!(high >= low - 1e-9);
    }

    #[test]
    fn single_layer_term_is_degree(seed in any::<u64>(), beta in 0.1f64..3.0) {
        let g = graph_from(seed, 10, 1);
        let all = all_nodes(&g);
        for v in g.nodes() {
            let (value, lambda) = node_density_term(&g, &all, v, beta).unwrap();
            prop_assert_eq!(value, g.degree(v, 0) as f64);
            prop_assert_eq!(lambda, 1.0);
        }
    }

    #[test]
    fn single_layer_approx_is_half_optimal(seed in any::<u64>()) {
        let g = graph_from(seed, 11, 1);
        let report = wfc_approx(&g, 1, 1.0, &ApproxOptions::default()).unwrap();
        let (_, optimum) = brute_densest(&g, 1.0).unwrap();
        prop_assert!(report.rho_new >= optimum / 2.0 - 1e-9);
    }

    #[test]
    fn mu_star_matches_oracle(seed in any::<u64>()) {
        let g = graph_from(seed, 10, 3);
        let c = guarantee_constants(&g, g.num_layers(), 1.0).unwrap();
        prop_assert_eq!(c.mu_star, brute_mu_star(&g).unwrap());
        prop_assert!(c.factor >= 0.0 && c.factor <= 1.0);
        prop_assert!(c.factor >= 1.0 / (2.0 * g.num_layers() as f64) - 1e-12 || c.mu_star == 0 || c.psi < 1.0);
    }

    #[test]
    fn peel_equals_oracle(seed in any::<u64>(), choice in any::<u8>(), k in 0u32..6) {
        let g = graph_from(seed, 10, 3);
        let s = summarizer_for(choice, g.num_layers());
        let t = ScvIndex::from_ints(&vec![k; s.dim()]);
        prop_assert_eq!(
            k_score_peel(&g, &all_nodes(&g), &s, &t).unwrap(),
            brute_core(&g, &s, &t).unwrap()
        );
    }
}

#[test]
fn approx_on_g1_is_optimal() {
    let g = g1();
    let report = wfc_approx(&g, 2, 1.0, &ApproxOptions::default()).unwrap();
    let (members, optimum) = brute_densest(&g, 1.0).unwrap();
    assert_eq!(report.members, members);
    assert_eq!(report.rho_new, optimum);
}

#[test]
fn greedy_and_exact_single_layer_agree_on_cliques() {
    let mut edges = Vec::new();
    for u in 0..6 {
        for v in u + 1..6 {
            edges.push((u, v, 0));
        }
    }
    edges.push((6, 0, 0));
    let g = MultiplexGraph::from_edges(7, 1, edges).unwrap();
    let (members, avg, approx) = densest_single_layer(&g, 0);
    assert!(!approx);
    assert_eq!(members, vec![0, 1, 2, 3, 4, 5]);
    assert_eq!(avg, 5.0);
}
