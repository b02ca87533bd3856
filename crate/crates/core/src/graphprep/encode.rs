use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Graph;
use super::ppr::ppr_topk;
use super::PrepParams;
use crate::field::{ComplexField, GridSpec};
use crate::{Error, Result};

/// How compressed (signed) features are mapped to amplitudes in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureNormalization {
    /// One min-max over every compressed feature of every node.
    #[default]
    Global,
    /// Min-max over each node's own feature vector.
    PerNode,
}

/// Min-max scaling to `[0, 1]`. A constant range maps to zero.
pub fn normalize_features(x: &DMatrix<f64>, mode: FeatureNormalization) -> DMatrix<f64> {
    let scale = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    match mode {
        FeatureNormalization::Global => {
            let lo = x.min();
            let hi = x.max();
            x.map(|v| scale(v, lo, hi))
        }
        FeatureNormalization::PerNode => {
            let mut out = x.clone();
            for mut row in out.row_iter_mut() {
                let lo = row.min();
                let hi = row.max();
                row.apply(|v| *v = scale(*v, lo, hi));
            }
            out
        }
    }
}

/// Input block for one target node: the target and its top-ranked
/// neighbours, one row each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSample {
    pub target: usize,
    pub label: usize,
    pub k: usize,
    pub d: usize,
    /// Node id of every filled row; shorter than `k` when padded.
    pub selected: Vec<usize>,
    /// `k x d` row-major amplitudes in `[0, 1]`; padded rows are zero.
    pub rows: Vec<f64>,
    /// PPR score of every row, zero for padded rows.
    pub scores: Vec<f64>,
}

impl NodeSample {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }
}

/// One [`NodeSample`] per node, in node order.
pub fn build_samples(graph: &Graph, normalized: &DMatrix<f64>, params: &PrepParams) -> Result<Vec<NodeSample>> {
    if normalized.nrows() != graph.num_nodes() {
        return Err(Error::invalid("feature rows do not match the node count"));
    }
    let (k, d) = (params.k, normalized.ncols());
    (0..graph.num_nodes())
        .into_par_iter()
        .map(|target| {
            let (ids, ppr) = ppr_topk(graph, target, params.alpha, params.epsilon, k)?;
            let mut rows = vec![0.0; k * d];
            let mut scores = vec![0.0; k];
            for (slot, (&node, &score)) in ids.iter().zip(&ppr).enumerate() {
                for (c, v) in normalized.row(node).iter().enumerate() {
                    rows[slot * d + c] = *v;
                }
                scores[slot] = score;
            }
            Ok(NodeSample {
                target,
                label: graph.label(target),
                k,
                d,
                selected: ids,
                rows,
                scores,
            })
        })
        .collect()
}

/// Top-left corner of a `k x d` block centred on an `n x n` grid.
pub fn block_offsets(n: usize, k: usize, d: usize) -> (usize, usize) {
    ((n - k) / 2, (n - d) / 2)
}

/// Zero-padded complex input field: feature values on the amplitude, and
/// either zero phase or `(pi/2) * score` along each node's row.
pub fn assemble_input(sample: &NodeSample, grid: &GridSpec, encode_score_on_phase: bool) -> Result<ComplexField> {
    let n = grid.n;
    if sample.k > n || sample.d > n {
        return Err(Error::invalid(format!(
            "{}x{} input block does not fit a {n}x{n} grid",
            sample.k, sample.d
        )));
    }
    if sample.rows.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("input amplitudes must lie in [0, 1]"));
    }
    let (row0, col0) = block_offsets(n, sample.k, sample.d);
    let mut field = ComplexField::zeros(*grid);
    for r in 0..sample.k {
        let phase = if encode_score_on_phase {
            FRAC_PI_2 * sample.scores[r]
        } else {
            0.0
        };
        let phasor = Complex64::cis(phase);
        for (c, &a) in sample.row(r).iter().enumerate() {
            field.set(row0 + r, col0 + c, phasor * a);
        }
    }
    Ok(field)
}
