//! Multi-view hierarchical ensemble clustering.
//!
//! Views are clustered with agglomerative linkage, fused across views into a
//! co-association affinity, re-clustered and combined by consensus. Linkage
//! method combinations can be selected automatically with silhouette as the
//! objective.
//!
//! Modules, bottom-up:
//! - [`types`]: views, distance/affinity matrices, labelings, method ids
//! - [`preprocess`]: CSV ingestion, missing-value filtering, k-NN imputation,
//!   variance selection, z-scoring
//! - [`hclust`]: linkage for eight methods, dendrogram cutting
//! - [`fusion`]: shared-partition fusion into a co-association affinity
//! - [`consensus`]: evidence-accumulation consensus
//! - [`metrics`]: silhouette, ARI, NMI, best-k, log-rank test
//! - [`optimizer`]: exhaustive / genetic search over method combinations
//! - [`graph`]: arbitrary layered view/ensemble graphs
//! - [`pipeline`]: the pair and per-view ensemble workflows

pub mod consensus;
pub mod error;
pub mod fusion;
pub mod graph;
pub mod hclust;
pub mod metrics;
pub mod optimizer;
pub mod par;
pub mod pipeline;
pub mod preprocess;
pub mod seed;
pub mod types;

pub use error::{Error, Result};
pub use par::Execution;
pub use types::{
    affinity_to_distance, AffinityMatrix, DistanceMatrix, Labeling, MethodId, ViewMatrix,
};
