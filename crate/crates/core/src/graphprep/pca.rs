use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{stream, Stream};
use crate::{Error, Result};

/// Centred linear projection onto the top principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Column means of the training features.
    pub mean: Vec<f64>,
    /// `D x d` matrix with orthonormal columns, stored column-major.
    pub components: Vec<f64>,
    pub input_dim: usize,
    pub d: usize,
    /// Variance captured by each component, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn components_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.input_dim, self.d, &self.components)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaSolver {
    /// Full symmetric eigendecomposition of the covariance matrix.
    Dense,
    /// Seeded randomized subspace iteration followed by Rayleigh-Ritz.
    Randomized { oversample: usize, iterations: usize },
}

/// Dense eigensolver up to this many features, randomized above.
const DENSE_LIMIT: usize = 1024;

/// Chooses the dense solver for small feature dimensions and randomized
/// subspace iteration otherwise.
pub fn pca_fit(features: &DMatrix<f64>, d: usize, seed: u64) -> Result<PcaModel> {
    let solver = if features.ncols() <= DENSE_LIMIT {
        PcaSolver::Dense
    } else {
        PcaSolver::Randomized {
            oversample: 20,
            iterations: 12,
        }
    };
    pca_fit_with(features, d, solver, seed)
}

pub fn pca_fit_with(features: &DMatrix<f64>, d: usize, solver: PcaSolver, seed: u64) -> Result<PcaModel> {
    let (rows, dim) = features.shape();
    if d == 0 || d > rows.min(dim) {
        return Err(Error::invalid(format!(
            "PCA dimension {d} must lie in [1, min({rows}, {dim})]"
        )));
    }
    let mean: DVector<f64> = features.row_mean().transpose();
    let mut centred = features.clone();
    for mut row in centred.row_iter_mut() {
        row -= mean.transpose();
    }
    let denom = (rows.max(2) - 1) as f64;
    let (vectors, values) = match solver {
        PcaSolver::Dense => {
            let cov = centred.tr_mul(&centred) / denom;
            top_eigenpairs(cov, d)
        }
        PcaSolver::Randomized { oversample, iterations } => {
            randomized(&centred, d, oversample, iterations, denom, seed)
        }
    };
    let mut components = vectors;
    fix_signs(&mut components);
    Ok(PcaModel {
        mean: mean.iter().copied().collect(),
        components: components.as_slice().to_vec(),
        input_dim: dim,
        d,
        explained_variance: values,
    })
}

/// Eigenvectors of the `d` largest eigenvalues, largest first.
fn top_eigenpairs(sym: DMatrix<f64>, d: usize) -> (DMatrix<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let order = &order[..d];
    let vectors = eig.eigenvectors.select_columns(order.iter());
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    (vectors, values)
}

fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

fn randomized(
    centred: &DMatrix<f64>,
    d: usize,
    oversample: usize,
    iterations: usize,
    denom: f64,
    seed: u64,
) -> (DMatrix<f64>, Vec<f64>) {
    let dim = centred.ncols();
    let width = (d + oversample).min(dim).min(centred.nrows().max(d));
    let mut rng = stream(seed, Stream::Pca);
    let start = DMatrix::from_fn(dim, width, |_, _| StandardNormal.sample(&mut rng));
    let mut basis = orthonormalize(start);
    for _ in 0..iterations {
        let projected = centred * &basis;
        basis = orthonormalize(centred.tr_mul(&projected));
    }
    // Rayleigh-Ritz on the captured subspace.
    let projected = centred * &basis;
    let small = projected.tr_mul(&projected) / denom;
    let (ritz, values) = top_eigenpairs(small, d);
    (basis * ritz, values)
}

/// Makes the largest-magnitude entry of every column positive so results
/// do not depend on the eigensolver's sign choice.
fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// `(X - mean) * components`.
pub fn pca_transform(model: &PcaModel, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if features.ncols() != model.input_dim {
        return Err(Error::invalid(format!(
            "features have {} columns, PCA model expects {}",
            features.ncols(),
            model.input_dim
        )));
    }
    let mut centred = features.clone();
    let mean = DVector::from_column_slice(&model.mean);
    for mut row in centred.row_iter_mut() {
        row -= mean.transpose();
    }
    Ok(centred * model.components_matrix())
}
