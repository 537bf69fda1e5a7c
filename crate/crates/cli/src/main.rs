use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use mscore::densest::{GuaranteeConstants, Objective, TermForm};
use mscore::engagement::{parse_departures, DepartureBucket};
use mscore::oracle::{brute_core, brute_densest, brute_wcore};
use mscore::summarizer::SummarizerSpec;
use mscore::wfirmcore::WcoreCoreReport;
use mscore::{
    decompose, departure_curve, engagement_scores, guarantee_constants, load_edge_list,
    load_weights, max_equilibrium, span_core_lambda_set, wfc_approx, wfirmcore_decompose,
    ApproxOptions, Budget, DensityReport, Error, LambdaSet, MultiplexGraph, ParseOptions, ScvIndex,
    Summarizer,
};

/// S-core decomposition, weighted FirmCores, densest multiplex subgraphs and
/// engagement scores for multiplex networks.
///
/// Edge lists hold one `layer src dst` triple per line; `#` starts a comment.
/// Weight files hold `node layer weight` or `layer weight` lines.
/// Artifacts go to stdout (or --out), logs to stderr.
#[derive(Debug, Parser)]
#[command(name = "mscore", version)]
struct Cli {
    /// Multiplex edge list.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,

    /// Per-(node, layer) or per-layer weights; defaults to 1 everywhere.
    #[arg(long, global = true)]
    weights: Option<PathBuf>,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Skip `u u` lines instead of rejecting the file.
    #[arg(long, global = true)]
    drop_self_loops: bool,

    /// More log output on stderr; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full S-core lattice for a summarizer.
    Decompose(DecomposeArgs),
    /// WFirmCore indices for a set of λ values.
    Wfirmcore(WfirmcoreArgs),
    /// Approximate densest multiplex subgraph.
    Densest(DensestArgs),
    /// Maximal engagement equilibrium and τ engagement scores.
    Engagement(EngagementArgs),
    /// Exhaustive reference answers for small graphs.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Per-layer degree distribution summaries.
    Stats,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Stop after this many peels and report a partial lattice.
    #[arg(long, default_value_t = 1_000_000)]
    max_states: usize,

    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        let time_limit = match self.time_limit {
            Some(t) if !(t.is_finite() && t > 0.0) => bail!("--time-limit must be positive"),
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        Ok(Budget {
            max_states: self.max_states,
            time_limit,
        })
    }
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// identity, sum, wsum, minmax, top:λ, wtop:λ, subset:0,2, order:1,3 or
    /// stat:@spec.json
    #[arg(long)]
    summarizer: String,

    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug, Args)]
#[command(group(
    ArgGroup::new("lambdas")
        .required(true)
        .args(["lambda_set", "span_core"])
))]
struct WfirmcoreArgs {
    /// Comma-separated λ values, e.g. "1,2,11,20".
    #[arg(long)]
    lambda_set: Option<String>,

    /// Span-core preset over windows of Δ consecutive layers.
    #[arg(long, value_name = "DELTA")]
    span_core: Option<usize>,

    /// Report only the k-WFirmCore for each λ; needs --lambda-set.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DensityArg {
    New,
    Ml,
    Edge,
}

#[derive(Debug, Args)]
struct DensestArgs {
    /// Largest layer-subset size for candidate λ values (default min(|L|, 10)).
    #[arg(long)]
    alpha: Option<usize>,

    #[arg(long, default_value_t = 1.0)]
    beta: f64,

    /// Objective used to pick the best candidate core.
    #[arg(long, value_enum, default_value_t = DensityArg::New)]
    density: DensityArg,

    /// Node term as the minimum weighted degree times total weight.
    #[arg(long, conflicts_with = "global_phi")]
    eq3_literal: bool,

    /// Let every node use λ values from the union of all nodes' subset sums.
    #[arg(long)]
    global_phi: bool,
}

#[derive(Debug, Args)]
struct EngagementArgs {
    /// Per-layer engagement costs, e.g. "1,1".
    #[arg(long)]
    k: Option<String>,

    /// Compute τ scores from the lattice of --summarizer.
    #[arg(long)]
    tau: bool,

    #[arg(long, default_value = "top:1")]
    summarizer: String,

    /// `node,departed` file (0 or 1); adds a departure-rate table. Implies --tau.
    #[arg(long)]
    departures: Option<PathBuf>,

    #[arg(long, default_value_t = 1.0)]
    bucket_width: f64,

    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// k-S-core by subset enumeration.
    Core {
        #[arg(long)]
        summarizer: String,
        /// Threshold vector, e.g. "1,2".
        #[arg(long)]
        k: String,
    },
    /// Exact densest subset for the node-term objective.
    Densest {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// (k, λ)-WFirmCore by subset enumeration.
    Wcore {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        lambda: f64,
    },
}

/// Command failure with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::IncompleteLattice) => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        anyhow::Error::from(error).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(anyhow::anyhow!("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Decompose(args) => run_decompose(cli, args),
        Command::Wfirmcore(args) => run_wfirmcore(cli, args),
        Command::Densest(args) => run_densest(cli, args),
        Command::Engagement(args) => run_engagement(cli, args),
        Command::Oracle(cmd) => run_oracle(cli, cmd),
        Command::Stats => run_stats(cli),
    }
}

fn load_graph(cli: &Cli) -> Result<MultiplexGraph> {
    let path = cli.graph.as_ref().context("--graph is required")?;
    let options = ParseOptions {
        drop_self_loops: cli.drop_self_loops,
    };
    let mut graph = load_edge_list(path, &options)?;
    if let Some(weights) = &cli.weights {
        graph = load_weights(weights, graph)?;
    }
    let summary = graph.summary();
    eprintln!("{}", serde_json::to_string(&summary)?);
    if summary.dedup_dropped > 0 {
        info!("{} duplicate edges merged", summary.dedup_dropped);
    }
    if graph.self_loops_dropped() > 0 {
        info!("{} self-loops dropped", graph.self_loops_dropped());
    }
    Ok(graph)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn parse_u32_list(text: &str, what: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .with_context(|| format!("invalid {what} {t:?}"))
        })
        .collect()
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .with_context(|| format!("invalid {what} {t:?}"))
        })
        .collect()
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        bail!("--beta must be positive, got {beta}");
    }
    Ok(())
}

fn run_decompose(cli: &Cli, args: &DecomposeArgs) -> Result<u8, Failure> {
    let spec: SummarizerSpec = args.summarizer.parse()?;
    let budget = args.budget.budget()?;
    let graph = load_graph(cli)?;
    let s = Summarizer::new(spec, graph.num_layers())?;
    let lattice = decompose(&graph, &s, budget);
    info!("{} cores from {} peels", lattice.len(), lattice.states());
    let text = match cli.format {
        Format::Json => to_json(&lattice.report(&graph))?,
        Format::Csv => lattice.membership_csv(&graph),
    };
    emit(cli, &text)?;
    if lattice.is_complete() {
        Ok(0)
    } else {
        warn!("budget exhausted; the lattice is partial");
        Ok(2)
    }
}

fn run_wfirmcore(cli: &Cli, args: &WfirmcoreArgs) -> Result<u8, Failure> {
    let lambdas = match &args.lambda_set {
        Some(text) => Some(LambdaSet::from_unsorted(parse_f64_list(text, "λ")?)?),
        None => None,
    };
    if args.k.is_some() && lambdas.is_none() {
        return Err(anyhow::anyhow!("--k needs an explicit --lambda-set").into());
    }
    if args.span_core == Some(0) {
        return Err(anyhow::anyhow!("--span-core must be at least 1").into());
    }
    let mut graph = load_graph(cli)?;
    let lambdas = match (lambdas, args.span_core) {
        (Some(l), _) => l,
        (None, Some(delta)) => {
            let (l, weighted) = span_core_lambda_set(&graph, delta)?;
            graph = weighted;
            l
        }
        (None, None) => unreachable!("clap requires one of the λ sources"),
    };
    let table = wfirmcore_decompose(&graph, &lambdas);
    let text = match (args.k, cli.format) {
        (None, Format::Json) => to_json(&table.report(&graph))?,
        (None, Format::Csv) => table.to_csv(&graph),
        (Some(k), format) => {
            let mut report = table.report(&graph);
            report.cores = lambdas
                .values()
                .iter()
                .enumerate()
                .map(|(i, &lambda)| {
                    let members = table.core(k, i);
                    WcoreCoreReport {
                        lambda,
                        scv: ScvIndex::from_ints(&[k]),
                        size: members.len(),
                        members: graph.original_ids(&members),
                    }
                })
                .collect();
            match format {
                Format::Json => to_json(&report)?,
                Format::Csv => {
                    let mut out = String::from("node,lambda,wcore\n");
                    for (i, &lambda) in lambdas.values().iter().enumerate() {
                        for v in table.core(k, i) {
                            let _ = writeln!(
                                out,
                                "{},{},{}",
                                graph.original_node_id(v),
                                lambda,
                                table.wcore(v, i)
                            );
                        }
                    }
                    out
                }
            }
        }
    };
    emit(cli, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct DensestOutput {
    #[serde(flatten)]
    report: DensityReport,
    constants: GuaranteeConstants,
}

fn run_densest(cli: &Cli, args: &DensestArgs) -> Result<u8, Failure> {
    check_beta(args.beta)?;
    if args.alpha == Some(0) {
        return Err(anyhow::anyhow!("--alpha must be at least 1").into());
    }
    let graph = load_graph(cli)?;
    let alpha = args.alpha.unwrap_or(graph.num_layers().min(10));
    let options = ApproxOptions {
        objective: match args.density {
            DensityArg::New => Objective::New,
            DensityArg::Ml => Objective::Ml,
            DensityArg::Edge => Objective::Edge,
        },
        form: if args.eq3_literal {
            TermForm::Eq3Literal
        } else if args.global_phi {
            TermForm::GlobalPhi
        } else {
            TermForm::TopLambda
        },
    };
    let report = wfc_approx(&graph, alpha, args.beta, &options)?;
    if report.truncated {
        warn!("candidate λ set was truncated");
    }
    let text = match cli.format {
        Format::Json => {
            let constants = guarantee_constants(&graph, alpha, args.beta)?;
            to_json(&DensestOutput { report, constants })?
        }
        Format::Csv => report.terms_csv(),
    };
    emit(cli, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct EngagementRow {
    node: u64,
    tau: Option<f64>,
    engaged_layers: Option<usize>,
}

#[derive(Serialize)]
struct EngagementOutput {
    k: Option<Vec<u32>>,
    summarizer: Option<String>,
    engaged_users: Option<usize>,
    nodes: Vec<EngagementRow>,
    departures: Option<Vec<DepartureBucket>>,
}

fn run_engagement(cli: &Cli, args: &EngagementArgs) -> Result<u8, Failure> {
    let k = args
        .k
        .as_deref()
        .map(|text| parse_u32_list(text, "k"))
        .transpose()?;
    let want_tau = args.tau || args.departures.is_some();
    if k.is_none() && !want_tau {
        return Err(anyhow::anyhow!("nothing to do: pass --k, --tau or --departures").into());
    }
    let spec: SummarizerSpec = args.summarizer.parse()?;
    let budget = args.budget.budget()?;
    if !(args.bucket_width.is_finite() && args.bucket_width > 0.0) {
        return Err(anyhow::anyhow!("--bucket-width must be positive").into());
    }
    let graph = load_graph(cli)?;

    let profile = match &k {
        Some(k) => Some(max_equilibrium(&graph, k)?),
        None => None,
    };
    let tau = if want_tau {
        let s = Summarizer::new(spec, graph.num_layers())?;
        let lattice = decompose(&graph, &s, budget);
        Some(engagement_scores(&lattice)?.tau)
    } else {
        None
    };
    let departures = match (&args.departures, &tau) {
        (Some(path), Some(tau)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let labels = parse_departures(&text, &graph)?;
            Some(departure_curve(tau, &labels, args.bucket_width)?)
        }
        _ => None,
    };
    let nodes: Vec<EngagementRow> = graph
        .nodes()
        .map(|v| EngagementRow {
            node: graph.original_node_id(v),
            tau: tau.as_ref().map(|t| t[v]),
            engaged_layers: profile.as_ref().map(|p| p.engaged_layers(v)),
        })
        .collect();
    let text = match cli.format {
        Format::Json => to_json(&EngagementOutput {
            k,
            summarizer: want_tau.then(|| args.summarizer.clone()),
            engaged_users: profile.as_ref().map(|p| p.engaged_users().len()),
            nodes,
            departures,
        })?,
        Format::Csv => {
            let cell = |x: Option<String>| x.unwrap_or_default();
            let mut out = String::from("node,tau,engaged_layers\n");
            for row in &nodes {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    row.node,
                    cell(row.tau.map(|t| t.to_string())),
                    cell(row.engaged_layers.map(|e| e.to_string()))
                );
            }
            if let Some(curve) = &departures {
                out.push_str("\ntau_bucket,departure_rate\n");
                for b in curve {
                    let _ = writeln!(out, "{},{}", b.tau_bucket, b.departure_rate);
                }
            }
            out
        }
    };
    emit(cli, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct OracleOutput {
    query: &'static str,
    size: usize,
    members: Vec<u64>,
    density: Option<f64>,
}

fn run_oracle(cli: &Cli, cmd: &OracleCommand) -> Result<u8, Failure> {
    let output = match cmd {
        OracleCommand::Core { summarizer, k } => {
            let spec: SummarizerSpec = summarizer.parse()?;
            let k = parse_f64_list(k, "threshold")?;
            let graph = load_graph(cli)?;
            let s = Summarizer::new(spec, graph.num_layers())?;
            let members = brute_core(&graph, &s, &ScvIndex::new(k)?)?;
            OracleOutput {
                query: "core",
                size: members.len(),
                members: graph.original_ids(&members),
                density: None,
            }
        }
        OracleCommand::Densest { beta } => {
            check_beta(*beta)?;
            let graph = load_graph(cli)?;
            let (members, density) = brute_densest(&graph, *beta)?;
            OracleOutput {
                query: "densest",
                size: members.len(),
                members: graph.original_ids(&members),
                density: Some(density),
            }
        }
        OracleCommand::Wcore { k, lambda } => {
            if !(lambda.is_finite() && *lambda >= 0.0) {
                return Err(anyhow::anyhow!("--lambda must be nonnegative").into());
            }
            let graph = load_graph(cli)?;
            let members = brute_wcore(&graph, *k, *lambda)?;
            OracleOutput {
                query: "wcore",
                size: members.len(),
                members: graph.original_ids(&members),
                density: None,
            }
        }
    };
    let text = match cli.format {
        Format::Json => to_json(&output)?,
        Format::Csv => {
            let mut out = String::from("node\n");
            for v in &output.members {
                let _ = writeln!(out, "{v}");
            }
            out
        }
    };
    emit(cli, &text)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct LayerStats {
    layer: u64,
    label: String,
    edges: usize,
    mean_degree: f64,
    degree_variance: f64,
    max_degree: u32,
    /// Discrete power-law MLE with `x_min = 1`; `None` without edges.
    tail_exponent: Option<f64>,
}

#[derive(Debug, Serialize)]
struct StatsOutput {
    nodes: usize,
    layers: usize,
    edges: usize,
    dedup_dropped: usize,
    per_layer: Vec<LayerStats>,
}

fn layer_stats(graph: &MultiplexGraph, layer: usize) -> LayerStats {
    let n = graph.num_nodes().max(1) as f64;
    let degrees: Vec<u32> = graph.nodes().map(|v| graph.degree(v, layer)).collect();
    let mean = degrees.iter().map(|&d| d as f64).sum::<f64>() / n;
    let variance = degrees
        .iter()
        .map(|&d| (d as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    let positive: Vec<f64> = degrees
        .iter()
        .filter(|&&d| d > 0)
        .map(|&d| d as f64)
        .collect();
    let log_sum: f64 = positive.iter().map(|d| (d / 0.5).ln()).sum();
    let tail_exponent =
        (!positive.is_empty() && log_sum > 0.0).then(|| 1.0 + positive.len() as f64 / log_sum);
    LayerStats {
        layer: graph.original_layer_id(layer),
        label: graph.layer_label(layer),
        edges: graph.layer_edge_count(layer),
        mean_degree: mean,
        degree_variance: variance,
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        tail_exponent,
    }
}

fn run_stats(cli: &Cli) -> Result<u8, Failure> {
    let graph = load_graph(cli)?;
    let summary = graph.summary();
    let per_layer: Vec<LayerStats> = (0..graph.num_layers())
        .map(|l| layer_stats(&graph, l))
        .collect();
    let text = match cli.format {
        Format::Json => to_json(&StatsOutput {
            nodes: summary.nodes,
            layers: summary.layers,
            edges: summary.edges,
            dedup_dropped: summary.dedup_dropped,
            per_layer,
        })?,
        Format::Csv => {
            let mut out =
                String::from("layer,edges,mean_degree,degree_variance,max_degree,tail_exponent\n");
            for s in &per_layer {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    s.layer,
                    s.edges,
                    s.mean_degree,
                    s.degree_variance,
                    s.max_degree,
                    s.tail_exponent.map(|t| t.to_string()).unwrap_or_default()
                );
            }
            out
        }
    };
    emit(cli, &text)?;
    Ok(0)
}
