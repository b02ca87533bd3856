//! Graph preprocessing: ingestion, PCA compression, approximate
//! personalized PageRank neighbourhoods, input assembly and splitting.

mod dataset;
mod encode;
mod pca;
mod ppr;
mod split;

pub use dataset::{load_dataset, Graph};
pub use encode::{assemble_input, block_offsets, build_samples, normalize_features, FeatureNormalization, NodeSample};
pub use pca::{pca_fit, pca_fit_with, pca_transform, PcaModel, PcaSolver};
pub use ppr::{ppr_push, ppr_topk, PprApprox};
pub use split::split;

use serde::{Deserialize, Serialize};

use crate::Result;

/// Parameters of the full preprocessing pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepParams {
    /// Compressed feature dimension.
    pub d: usize,
    /// Rows per sample (target plus top-ranked neighbours).
    pub k: usize,
    /// PPR restart probability.
    pub alpha: f64,
    /// PPR residual threshold.
    pub epsilon: f64,
    pub normalization: FeatureNormalization,
}

impl Default for PrepParams {
    fn default() -> Self {
        PrepParams {
            d: 100,
            k: 5,
            alpha: 0.15,
            epsilon: 1e-4,
            normalization: FeatureNormalization::Global,
        }
    }
}

/// PCA model plus one [`NodeSample`] per node, in node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub pca: PcaModel,
    pub samples: Vec<NodeSample>,
}

/// Fits PCA on all node features, normalises the compressed features, and
/// assembles a sample for every node.
pub fn prepare(graph: &Graph, params: &PrepParams, seed: u64) -> Result<Prepared> {
    let pca = pca_fit(graph.features(), params.d, seed)?;
    let compressed = pca_transform(&pca, graph.features())?;
    let normalized = normalize_features(&compressed, params.normalization);
    let samples = build_samples(graph, &normalized, params)?;
    Ok(Prepared { pca, samples })
}
