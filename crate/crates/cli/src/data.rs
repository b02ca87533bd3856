//! Preprocessed sample store and its view as training data.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use holograph::field::{ComplexField, GridSpec};
use holograph::graphprep::{assemble_input, load_dataset, prepare, split, Graph, NodeSample, PcaModel, PrepParams};
use holograph::training::SampleSource;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::write_json;

pub const STORE_FILE: &str = "samples.json";
const STORE_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub nodes: usize,
    pub edges: usize,
    pub features: usize,
    pub classes: usize,
}

impl DatasetSummary {
    pub fn of(graph: &Graph) -> Self {
        DatasetSummary {
            nodes: graph.num_nodes(),
            edges: graph.num_edges(),
            features: graph.feature_dim(),
            classes: graph.num_classes(),
        }
    }
}

/// Everything the optical model needs from the graph: one sample per node,
/// the fitted PCA and the train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStore {
    pub format: u32,
    pub dataset_path: String,
    pub dataset: DatasetSummary,
    pub seed: u64,
    pub params: PrepParams,
    pub test_size: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub pca: PcaModel,
    pub samples: Vec<NodeSample>,
}

impl SampleStore {
    pub fn num_classes(&self) -> usize {
        self.dataset.classes
    }

    /// Whether this store was produced from the same inputs as `cfg` asks for.
    fn matches(&self, cfg: &RunConfig) -> bool {
        self.format == STORE_FORMAT
            && self.dataset_path == cfg.dataset.to_string_lossy()
            && self.seed == cfg.seed
            && self.params == cfg.prep_params()
            && self.test_size == cfg.test_size
    }
}

pub fn load_graph(cfg: &RunConfig) -> Result<Graph> {
    load_dataset(&cfg.dataset).with_context(|| format!("loading dataset {}", cfg.dataset.display()))
}

/// Runs the preprocessing pipeline on an already loaded graph.
pub fn build_store_from(graph: &Graph, cfg: &RunConfig, params: &PrepParams) -> Result<SampleStore> {
    if graph.num_classes() < 2 {
        bail!("dataset has fewer than two classes");
    }
    if params.d > graph.feature_dim().min(graph.num_nodes()) {
        bail!(
            "d = {} exceeds min(nodes, features) = {}",
            params.d,
            graph.feature_dim().min(graph.num_nodes())
        );
    }
    let prepared = prepare(graph, params, cfg.seed)?;
    let (train, test) = split(graph.num_nodes(), cfg.test_size, cfg.seed)?;
    Ok(SampleStore {
        format: STORE_FORMAT,
        dataset_path: cfg.dataset.to_string_lossy().into_owned(),
        dataset: DatasetSummary::of(graph),
        seed: cfg.seed,
        params: params.clone(),
        test_size: cfg.test_size,
        train,
        test,
        pca: prepared.pca,
        samples: prepared.samples,
    })
}

pub fn build_store(cfg: &RunConfig) -> Result<SampleStore> {
    let graph = load_graph(cfg)?;
    build_store_from(&graph, cfg, &cfg.prep_params())
}

pub fn store_path(cfg: &RunConfig) -> std::path::PathBuf {
    cfg.out_dir.join(STORE_FILE)
}

pub fn write_store(path: &Path, store: &SampleStore) -> Result<()> {
    write_json(path, store)
}

pub fn read_store(path: &Path) -> Result<SampleStore> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing sample store {}", path.display()))
}

/// Reuses the store in the output directory when it was built from the same
/// dataset, seed and preprocessing parameters; otherwise rebuilds it.
pub fn load_or_build_store(cfg: &RunConfig) -> Result<SampleStore> {
    let path = store_path(cfg);
    if path.is_file() {
        if let Ok(store) = read_store(&path) {
            if store.matches(cfg) {
                return Ok(store);
            }
        }
    }
    build_store(cfg)
}

/// Node samples rendered as input fields on demand.
pub struct EncodedSamples<'a> {
    pub samples: &'a [NodeSample],
    pub grid: GridSpec,
    pub score_on_phase: bool,
}

impl SampleSource for EncodedSamples<'_> {
    fn len(&self) -> usize {
        self.samples.len()
    }

    fn field(&self, index: usize) -> holograph::Result<ComplexField> {
        assemble_input(&self.samples[index], &self.grid, self.score_on_phase)
    }

    fn label(&self, index: usize) -> usize {
        self.samples[index].label
    }
}
