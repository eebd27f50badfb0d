//! Graph Max Shift: clustering a graph by hill-climbing on its degree landscape.
//!
//! Every node repeatedly moves to the neighbor (itself included) of highest
//! degree, ties going to the larger node id. Nodes whose paths end at the same
//! node form a cluster, and clusters whose end nodes lie within `tau` hops of
//! each other are merged.
//!
//! On an epsilon-neighborhood graph built from a point sample this is exactly
//! medoid Max Shift with a flat kernel of bandwidth epsilon, so the crate also
//! ships the continuous-side machinery used to check it: Gaussian mixtures with
//! analytic derivatives, flat-kernel density estimates, gradient-flow basin
//! assignment and clustering-agreement metrics.
//!
//! Node ids are 0-based in the Rust API. All file formats are 1-based.

pub mod algorithm;
pub mod baselines;
pub mod density;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod geometry;
pub mod graph;
mod par;
mod union_find;

pub use algorithm::{
    cluster, cluster_multihop, cluster_weighted, hill_climb, hill_climb_multihop, Clustering,
    MergeParams, Path, ShiftClustering,
};
pub use density::{GaussianMixture, ModeSet};
pub use error::{Error, Result};
pub use evaluation::AgreementReport;
pub use geometry::{build_geometric_graph, build_weighted_graph, PointSet, WeightedGraph};
pub use graph::{DegreeProfile, Graph, HopDistance};
