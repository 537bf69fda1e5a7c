//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use common::{all_nodes, max_degree, random_graph, random_weights};
use mscore::oracle::{
    brute_corecube, brute_densest, brute_equilibria, brute_firmcore, brute_wcore, BruteCoreTable,
    OracleBudget,
};
use mscore::{
    decompose, departure_curve, engagement_scores, guarantee_constants, is_equilibrium,
    k_score_peel, max_equilibrium, maximal_scv, ml_density, our_density, wfc_approx, wfirmcore_at,
    wfirmcore_decompose, ApproxOptions, Budget, CoreLattice, LambdaSet, MultiplexGraph, NodeId,
    ScvIndex, Summarizer,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Small random instances shared by criteria 2, 3 and 5.
fn small_instances() -> Vec<MultiplexGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..200)
        .map(|_| {
            let n = rng.gen_range(1..=10);
            let layers = rng.gen_range(1..=3);
            random_graph(&mut rng, n, layers, 0.3)
        })
        .collect()
}

fn layer_subsets(layers: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << layers))
        .map(|m| (0..layers).filter(|&l| m >> l & 1 == 1).collect())
        .collect()
}

fn criterion_1() -> Outcome {
    let s = Summarizer::minmax(3);
    let a = s.eval(&[4, 4, 2], &[1.0; 3]).map_err(|e| e.to_string())?;
    let b = s.eval(&[3, 3, 3], &[1.0; 3]).map_err(|e| e.to_string())?;
    ensure(a == vec![2.0, 4.0] && b == vec![3.0, 3.0], || {
        format!("got {a:?} and {b:?}")
    })?;
    Ok("minmax(4,4,2)=(2,4), minmax(3,3,3)=(3,3)".into())
}

/// Every lattice built in criterion 2, for criterion 3.
struct Built {
    graph: MultiplexGraph,
    summarizer: Summarizer,
    lattice: CoreLattice,
}

fn criterion_2(instances: &[MultiplexGraph], built: &mut Vec<Built>) -> Outcome {
    let mut queries = 0usize;
    for (i, g) in instances.iter().enumerate() {
        let layers = g.num_layers();
        let top = max_degree(g);

        let identity = Summarizer::identity(layers);
        let lattice = decompose(g, &identity, Budget::default());
        ensure(lattice.is_complete(), || {
            format!("instance {i}: incomplete lattice")
        })?;
        let table = BruteCoreTable::new(g, &identity).map_err(|e| e.to_string())?;
        let mut k = vec![0u32; layers];
        loop {
            let scv = ScvIndex::from_ints(&k);
            let got = lattice.core_at(&scv);
            let want = table.core(&scv);
            ensure(got == want, || {
                format!("instance {i}: identity k={k:?} got {got:?} want {want:?}")
            })?;
            queries += 1;
            // odometer over [0, top]^layers
            let mut pos = 0;
            while pos < layers && k[pos] == top {
                k[pos] = 0;
                pos += 1;
            }
            if pos == layers {
                break;
            }
            k[pos] += 1;
        }
        built.push(Built {
            graph: g.clone(),
            summarizer: identity,
            lattice,
        });

        for lambda in 1..=layers {
            let s = Summarizer::top_lambda(lambda, layers).unwrap();
            let lattice = decompose(g, &s, Budget::default());
            for kk in 0..=top + 1 {
                let got = lattice.core_at(&ScvIndex::from_ints(&[kk]));
                let want = brute_firmcore(g, kk, lambda).map_err(|e| e.to_string())?;
                ensure(got == want, || {
                    format!("instance {i}: top:{lambda} k={kk} got {got:?} want {want:?}")
                })?;
                queries += 1;
            }
            built.push(Built {
                graph: g.clone(),
                summarizer: s,
                lattice,
            });
        }

        for subset in layer_subsets(layers) {
            let s = Summarizer::subset(subset.clone(), layers).unwrap();
            let lattice = decompose(g, &s, Budget::default());
            for kk in 0..=top + 1 {
                let got = lattice.core_at(&ScvIndex::from_ints(&[kk]));
                let want = brute_corecube(g, &subset, kk).map_err(|e| e.to_string())?;
                ensure(got == want, || {
                    format!("instance {i}: subset {subset:?} k={kk} got {got:?} want {want:?}")
                })?;
                queries += 1;
            }
            built.push(Built {
                graph: g.clone(),
                summarizer: s,
                lattice,
            });
        }
    }
    Ok(format!(
        "{} graphs, {queries} threshold queries agree with exhaustive search",
        instances.len()
    ))
}

fn criterion_3(built: &[Built]) -> Outcome {
    let mut cores = 0usize;
    for (i, b) in built.iter().enumerate() {
        let all = all_nodes(&b.graph);
        for core in b.lattice.cores() {
            let scv =
                maximal_scv(&b.graph, &core.members, &b.summarizer).map_err(|e| e.to_string())?;
            ensure(scv == core.scv, || {
                format!("lattice {i}: stored {:?} recomputed {:?}", core.scv, scv)
            })?;
            let again = k_score_peel(&b.graph, &all, &b.summarizer, &core.scv)
                .map_err(|e| e.to_string())?;
            ensure(again == core.members, || {
                format!("lattice {i}: re-peel at {:?} differs", core.scv)
            })?;
            cores += 1;
        }
    }
    Ok(format!(
        "{cores} cores: maximal SCV and re-peel reproduce the stored core"
    ))
}

/// Removes violating nodes in a random order until none is left.
fn random_order_peel(
    rng: &mut impl Rng,
    g: &MultiplexGraph,
    s: &Summarizer,
    k: &ScvIndex,
) -> Vec<NodeId> {
    let mut alive: BTreeSet<NodeId> = g.nodes().collect();
    let thresholds = k.key();
    loop {
        let violating: Vec<NodeId> = alive
            .iter()
            .copied()
            .filter(|&v| {
                let deg: Vec<u32> = (0..g.num_layers())
                    .map(|l| {
                        g.neighbors(v, l)
                            .iter()
                            .filter(|u| alive.contains(u))
                            .count() as u32
                    })
                    .collect();
                let summary = s.eval(&deg, g.weights(v)).unwrap();
                summary
                    .iter()
                    .zip(&thresholds)
                    .any(|(&x, &t)| mscore::summarizer::quantize(x) < t)
            })
            .collect();
        let Some(&v) = violating.choose(rng) else {
            return alive.into_iter().collect();
        };
        alive.remove(&v);
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..500 {
        let n = rng.gen_range(2..=14);
        let layers = rng.gen_range(1..=4);
        let g = {
            let p = rng.gen_range(0.2..0.6);
            random_graph(&mut rng, n, layers, p)
        };
        let spec = match rng.gen_range(0..5) {
            0 => "identity".to_string(),
            1 => "sum".to_string(),
            2 => "minmax".to_string(),
            3 => format!("top:{}", rng.gen_range(1..=layers)),
            _ => "wsum".to_string(),
        };
        let s = Summarizer::parse(&spec, layers).unwrap();
        let top = max_degree(&g);
        let high: Vec<u32> = (0..s.dim())
            .map(|_| rng.gen_range(0..=top.max(1)))
            .collect();
        let low: Vec<u32> = high.iter().map(|&h| rng.gen_range(0..=h)).collect();
        let (kh, kl) = (ScvIndex::from_ints(&high), ScvIndex::from_ints(&low));
        let all = all_nodes(&g);
        let inner = k_score_peel(&g, &all, &s, &kh).unwrap();
        let outer = k_score_peel(&g, &all, &s, &kl).unwrap();
        ensure(inner.iter().all(|v| outer.contains(v)), || {
            format!("trial {trial}: {spec} core{high:?} not inside core{low:?}")
        })?;
        let shuffled = random_order_peel(&mut rng, &g, &s, &kh);
        ensure(shuffled == inner, || {
            format!("trial {trial}: {spec} removal order changed the core")
        })?;
    }
    Ok("500 trials: nested cores, removal order irrelevant".into())
}

fn criterion_5(instances: &[MultiplexGraph]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checks = 0usize;
    for (i, g) in instances.iter().enumerate() {
        let g = random_weights(&mut rng, g.clone(), &[1.0, 5.0, 10.0]);
        let size = rng.gen_range(1..=5);
        let max_total = 10.0 * g.num_layers() as f64;
        let mut values: Vec<f64> = (0..size)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    [1.0, 5.0, 6.0, 10.0, 11.0, 15.0, 20.0][rng.gen_range(0..7)]
                } else {
                    rng.gen_range(0.0..=max_total + 1.0)
                }
            })
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let lambdas = LambdaSet::new(values).unwrap();
        let table = wfirmcore_decompose(&g, &lambdas);
        let top = max_degree(&g);
        for (j, &lambda) in lambdas.values().iter().enumerate() {
            for k in 0..=top + 1 {
                let got = table.core(k, j);
                let want = brute_wcore(&g, k, lambda).map_err(|e| e.to_string())?;
                ensure(got == want, || {
                    format!("instance {i}: (k={k}, λ={lambda}) got {got:?} want {want:?}")
                })?;
                let direct = wfirmcore_at(&g, k, lambda).map_err(|e| e.to_string())?;
                ensure(direct == want, || {
                    format!("instance {i}: single (k={k}, λ={lambda}) differs")
                })?;
                checks += 1;
            }
            if j > 0 {
                let anti = g
                    .nodes()
                    .all(|v| table.wcore(v, j) <= table.wcore(v, j - 1));
                ensure(anti, || {
                    format!(
                        "instance {i}: Wcore grew from λ={} to λ={lambda}",
                        lambdas.values()[j - 1]
                    )
                })?;
            }
        }
    }
    Ok(format!(
        "{checks} (k, λ) pairs agree with exhaustive search; anti-monotone in λ"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::INFINITY;
    let mut violations: Vec<String> = Vec::new();
    let mut by_beta = [0usize; 3];
    for trial in 0..1000 {
        let n = rng.gen_range(1..=12);
        let layers = rng.gen_range(1..=4);
        let mut g = {
            let p = rng.gen_range(0.1..0.8);
            random_graph(&mut rng, n, layers, p)
        };
        if trial % 2 == 1 {
            g = random_weights(&mut rng, g, &[1.0, 5.0, 10.0]);
        }
        let mut subset: Vec<NodeId> = g.nodes().filter(|_| rng.gen_bool(0.6)).collect();
        if subset.is_empty() {
            subset.push(rng.gen_range(0..n));
        }
        let b = rng.gen_range(0..3);
        let beta = [0.5, 1.0, 2.0][b];
        let ours = our_density(&g, &subset, beta).unwrap();
        let ml = ml_density(&g, &subset, beta).unwrap();
        worst = worst.min(ours - ml);
        if ours < ml - 1e-9 {
            by_beta[b] += 1;
            violations.push(format!(
                "trial {trial}: ours {ours:.3} < ml {ml:.3} (β={beta}, |L|={layers}, |S|={})",
                subset.len()
            ));
        }
    }
    ensure(violations.is_empty(), || {
        format!(
            "{} of 1000 triples violate (β=0.5: {}, β=1: {}, β=2: {}); first: {}",
            violations.len(),
            by_beta[0],
            by_beta[1],
            by_beta[2],
            violations[0]
        )
    })?;
    Ok(format!("1000 triples, min(ours - ml) = {worst:.3}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut csv = String::from("graph,nodes,layers,unit_weights,approx,optimum,ratio,factor\n");
    let mut min_ratio = f64::INFINITY;
    for i in 0..100 {
        let n = rng.gen_range(2..=12);
        let layers = rng.gen_range(1..=3);
        let unit = i % 2 == 0;
        let mut g = {
            let p = rng.gen_range(0.2..0.7);
            random_graph(&mut rng, n, layers, p)
        };
        if !unit {
            g = random_weights(&mut rng, g, &[1.0, 5.0, 10.0]);
        }
        let report =
            wfc_approx(&g, layers, 1.0, &ApproxOptions::default()).map_err(|e| e.to_string())?;
        let constants = guarantee_constants(&g, layers, 1.0).map_err(|e| e.to_string())?;
        let (_, optimum) = brute_densest(&g, 1.0).map_err(|e| e.to_string())?;
        let ratio = if optimum > 0.0 {
            report.rho_new / optimum
        } else {
            1.0
        };
        min_ratio = min_ratio.min(ratio);
        let _ = writeln!(
            csv,
            "{i},{n},{layers},{unit},{},{optimum},{ratio},{}",
            report.rho_new, constants.factor
        );
        ensure(report.rho_new >= constants.factor * optimum - 1e-9, || {
            format!(
                "graph {i}: {} < {} × {optimum}",
                report.rho_new, constants.factor
            )
        })?;
        if unit {
            ensure(ratio >= 1.0 / (2.0 * layers as f64) - 1e-9, || {
                format!("graph {i}: unit-weight ratio {ratio} below 1/(2|L|)")
            })?;
        }
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("approx_ratio.csv");
    std::fs::write(&path, csv).map_err(|e| e.to_string())?;
    Ok(format!(
        "100 graphs, min empirical ratio {min_ratio:.3}; ratios in {}",
        path.display()
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let budget = OracleBudget::default();
    let mut equilibria = 0usize;
    for i in 0..200 {
        let n = rng.gen_range(1..=8);
        let layers = rng.gen_range(1..=2);
        let g = {
            let p = rng.gen_range(0.2..0.7);
            random_graph(&mut rng, n, layers, p)
        };
        let k: Vec<u32> = (0..layers).map(|_| rng.gen_range(0..=3)).collect();
        let best = max_equilibrium(&g, &k).map_err(|e| e.to_string())?;
        ensure(is_equilibrium(&g, &best, &k).unwrap(), || {
            format!("graph {i}: k={k:?} not an equilibrium")
        })?;
        let all = brute_equilibria(&g, &k, &budget).map_err(|e| e.to_string())?;
        equilibria += all.len();
        for p in &all {
            let strict_superset = p.contains(&best) && p != &best;
            ensure(!strict_superset, || {
                format!("graph {i}: k={k:?} a larger equilibrium exists")
            })?;
        }
    }
    Ok(format!(
        "200 graphs, {equilibria} equilibria enumerated, none strictly larger"
    ))
}

/// Temporal snapshots as layers: a dense core group that stays, a middle
/// tier attached to it, and a sparse periphery.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (community, middle, periphery) = (20usize, 20usize, 60usize);
    let n = community + middle + periphery;
    let snapshots = 4;
    let mut edges = Vec::new();
    for l in 0..snapshots {
        for u in 0..community {
            for v in u + 1..community {
                if rng.gen_bool(0.7) {
                    edges.push((u, v, l));
                }
            }
        }
        for m in community..community + middle {
            for _ in 0..4 {
                edges.push((m, rng.gen_range(0..community), l));
            }
        }
        for p in community + middle..n {
            if rng.gen_bool(0.5) {
                edges.push((p, rng.gen_range(0..n), l));
            }
        }
    }
    edges.retain(|&(u, v, _)| u != v);
    let g = MultiplexGraph::from_edges(n, snapshots, edges).map_err(|e| e.to_string())?;
    let lattice = decompose(
        &g,
        &Summarizer::top_lambda(1, snapshots).unwrap(),
        Budget::default(),
    );
    let tau = engagement_scores(&lattice).map_err(|e| e.to_string())?.tau;
    // departures planted by tier: every periphery node, every other middle node
    let departed: Vec<Option<bool>> = (0..n)
        .map(|v| Some(v >= community + middle || (v >= community && v % 2 == 0)))
        .collect();
    let curve = departure_curve(&tau, &departed, 2.0).map_err(|e| e.to_string())?;
    let rates: Vec<String> = curve
        .iter()
        .map(|b| format!("{}:{:.2}", b.tau_bucket, b.departure_rate))
        .collect();
    let monotone = curve
        .windows(2)
        .all(|w| w[1].departure_rate <= w[0].departure_rate);
    ensure(monotone && curve.len() >= 3, || {
        format!("curve {}", rates.join(" "))
    })?;
    Ok(format!("departure rate by τ bucket: {}", rates.join(" ")))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let layers = 4;
    let mut points = Vec::new();
    for &edges in &[10_000usize, 30_000, 100_000, 300_000, 1_000_000] {
        let n = edges / 8;
        let list: Vec<(usize, usize, usize)> = (0..edges)
            .map(|_| {
                let u = rng.gen_range(0..n);
                let mut v = rng.gen_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                (u, v, rng.gen_range(0..layers))
            })
            .collect();
        let g = MultiplexGraph::from_edges(n, layers, list).map_err(|e| e.to_string())?;
        let s = Summarizer::sum(layers);
        let all = all_nodes(&g);
        let k = ScvIndex::from_ints(&[16]);
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let start = Instant::now();
            let core = k_score_peel(&g, &all, &s, &k).map_err(|e| e.to_string())?;
            best = best.min(start.elapsed().as_secs_f64());
            std::hint::black_box(core);
        }
        points.push((g.num_edges() as f64, best));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = cov / var;
    let timings: Vec<String> = points
        .iter()
        .map(|(e, t)| format!("{e:.0}:{:.1}ms", t * 1e3))
        .collect();
    ensure(slope <= 1.3, || {
        format!("slope {slope:.2} ({})", timings.join(" "))
    })?;
    Ok(format!("log-log slope {slope:.2} ({})", timings.join(" ")))
}

fn main() {
    let instances = small_instances();
    let mut built = Vec::new();
    let mut failed = 0;
    let mut report = |id: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL {id:>2} {name}: {detail}");
        }
    };
    report(1, "summarizer values", criterion_1());
    report(
        2,
        "special-case equivalences",
        criterion_2(&instances, &mut built),
    );
    report(3, "maximal SCV round trip", criterion_3(&built));
    report(4, "hierarchy and uniqueness", criterion_4());
    report(5, "WFirmCore decomposition", criterion_5(&instances));
    report(6, "density dominance", criterion_6());
    report(7, "approximation guarantee", criterion_7());
    report(8, "engagement equilibrium", criterion_8());
    report(9, "departure curve", criterion_9());
    report(10, "peel scaling", criterion_10());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
