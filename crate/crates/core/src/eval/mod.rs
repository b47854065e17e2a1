//! Metrics and analyses of fitted models and transition matrices.

mod branch;
mod metrics;
mod sinkhorn;

pub use branch::{
    chance_parent_accuracy, influence_ranking, numerical_rank, parent_recovery, predicted_parent, structure_stats,
    BranchReport, StructureStats, RANK_TOL, SUPPORT_TOL,
};
pub use metrics::{ell, next_type_accuracy, MetricsReport, TypeAccuracy};
pub use sinkhorn::{sinkhorn_baseline, SinkhornOutput};
