//! Summarized cores (S-cores) of multiplex networks.
//!
//! The crate covers ingestion of multi-layer edge lists, pluggable degree
//! summarizers, S-core peeling and full lattice decomposition, layer-weighted
//! FirmCores, the multiplex densest-subgraph objective with its WFirmCore
//! based approximation, and a per-layer user engagement game. The [`oracle`]
//! module holds exhaustive reference implementations for small graphs.

pub mod core_engine;
pub mod densest;
pub mod engagement;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod summarizer;
pub mod wfirmcore;

pub use core_engine::{
    decompose, dfs_path, k_score_peel, maximal_scv, skyline, Budget, Core, CoreLattice, ScvIndex,
};
pub use densest::{
    edge_density, guarantee_constants, ml_density, node_density_term, our_density, wfc_approx,
    ApproxOptions, DensityReport, GuaranteeConstants, Objective, TermForm,
};
pub use engagement::{
    departure_curve, engagement_scores, engagement_tau, equilibrium_violation, is_equilibrium,
    max_equilibrium, utilities, Deviation, EngagementScore, StrategyProfile,
};
pub use error::{Error, Result};
pub use graph::{
    load_edge_list, load_weights, make_view, parse_edge_list, parse_weights, GraphSummary, LayerId,
    MultiplexGraph, NodeId, ParseOptions, SubgraphView,
};
pub use summarizer::{top_lambda_weighted, PartitionSpec, Summarizer, SummarizerSpec};
pub use wfirmcore::{
    span_core_lambda_set, wfirmcore_at, wfirmcore_decompose, LambdaSet, WcoreTable,
};
