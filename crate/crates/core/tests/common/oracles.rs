//! Independent reference implementations used by the graph tests and the
//! acceptance suite. Deliberately plain: dense `Vec<Vec<f64>>`, no nalgebra.
#![allow(dead_code)]

use holograph::graphprep::Graph;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cyclic Jacobi eigensolver for a symmetric matrix. Returns eigenvalues
/// sorted descending and the matching eigenvectors as columns.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vectors)
}

/// Sample covariance (divisor V - 1) of a row-per-observation matrix.
pub fn covariance(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = x.len();
    let dim = x[0].len();
    let mean: Vec<f64> = (0..dim)
        .map(|c| x.iter().map(|r| r[c]).sum::<f64>() / rows as f64)
        .collect();
    let mut cov = vec![vec![0.0; dim]; dim];
    for r in x {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= (rows - 1) as f64;
        }
    }
    cov
}

/// Sine of the largest principal angle between the column spans of two
/// `dim x d` matrices with orthonormal columns, bounded above by the
/// Frobenius norm of `(I - B B^T) A`.
pub fn subspace_sine(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let dim = a.len();
    let d = a[0].len();
    let mut total = 0.0;
    for j in 0..d {
        let col: Vec<f64> = (0..dim).map(|i| a[i][j]).collect();
        let mut resid = col.clone();
        for k in 0..b[0].len() {
            let dot: f64 = (0..dim).map(|i| b[i][k] * col[i]).sum();
            for i in 0..dim {
                resid[i] -= dot * b[i][k];
            }
        }
        total += resid.iter().map(|v| v * v).sum::<f64>();
    }
    total.sqrt()
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

/// Exact personalized PageRank by power iteration on the walk
/// `pi <- alpha e_s + (1 - alpha) pi D^-1 A`. Nodes without neighbours keep
/// their own mass.
pub fn dense_ppr(adjacency: &[Vec<usize>], target: usize, alpha: f64) -> Vec<f64> {
    let n = adjacency.len();
    let mut pi = vec![0.0; n];
    pi[target] = 1.0;
    for _ in 0..2000 {
        let mut next = vec![0.0; n];
        next[target] += alpha;
        for u in 0..n {
            let mass = (1.0 - alpha) * pi[u];
            if adjacency[u].is_empty() {
                next[u] += mass;
            } else {
                let share = mass / adjacency[u].len() as f64;
                for &v in &adjacency[u] {
                    next[v] += share;
                }
            }
        }
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-16 {
            break;
        }
    }
    pi
}

/// Erdos-Renyi style graph with `nodes` nodes and edge probability `p`,
/// one-dimensional unit features and zero labels.
pub fn random_graph(nodes: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            if rng.random::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    Graph::new(nodes, &edges, DMatrix::from_element(nodes, 1, 1.0), vec![0; nodes]).unwrap()
}

pub fn adjacency_of(graph: &Graph) -> Vec<Vec<usize>> {
    (0..graph.num_nodes()).map(|i| graph.neighbors(i).to_vec()).collect()
}

/// Reference top-k: target first, then other positive-score nodes by
/// descending exact score.
pub fn exact_topk(scores: &[f64], target: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..scores.len()).filter(|&i| i != target && scores[i] > 0.0).collect();
    others.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ids = vec![target];
    ids.extend(others.into_iter().take(k - 1));
    ids
}
