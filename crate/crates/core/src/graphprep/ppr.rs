use std::collections::VecDeque;

use super::dataset::Graph;
use crate::{Error, Result};

/// Estimate and residual vectors left by the push algorithm.
///
/// Invariant: `exact = estimate + sum_u residual[u] * ppr(u, .)`, so the
/// two vectors together always carry unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PprApprox {
    pub estimate: Vec<f64>,
    pub residual: Vec<f64>,
}

fn check(graph: &Graph, target: usize, alpha: f64, epsilon: f64) -> Result<()> {
    if target >= graph.num_nodes() {
        return Err(Error::invalid(format!(
            "target {target} out of range for {} nodes",
            graph.num_nodes()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Forward push for personalized PageRank with restart probability
/// `alpha`. Terminates once every residual is below `epsilon * degree`,
/// which bounds the per-node error by `epsilon * degree(node)`.
///
/// A node without neighbours keeps its mass: its residual moves straight
/// into the estimate.
pub fn ppr_push(graph: &Graph, target: usize, alpha: f64, epsilon: f64) -> Result<PprApprox> {
    check(graph, target, alpha, epsilon)?;
    let n = graph.num_nodes();
    let mut estimate = vec![0.0; n];
    let mut residual = vec![0.0; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    residual[target] = 1.0;
    queue.push_back(target);
    queued[target] = true;
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        let deg = graph.degree(u);
        let r = residual[u];
        if deg == 0 {
            estimate[u] += r;
            residual[u] = 0.0;
            continue;
        }
        if r < epsilon * deg as f64 {
            continue;
        }
        estimate[u] += alpha * r;
        residual[u] = 0.0;
        let share = (1.0 - alpha) * r / deg as f64;
        for &v in graph.neighbors(u) {
            residual[v] += share;
            let dv = graph.degree(v);
            if !queued[v] && (dv == 0 || residual[v] >= epsilon * dv as f64) {
                queued[v] = true;
                queue.push_back(v);
            }
        }
    }
    Ok(PprApprox { estimate, residual })
}

/// The `k` highest-scoring nodes for `target`, target first, then the rest
/// by descending score (ties by node id). Nodes with zero score are never
/// selected, so fewer than `k` ids come back when few nodes are reachable.
pub fn ppr_topk(graph: &Graph, target: usize, alpha: f64, epsilon: f64, k: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let approx = ppr_push(graph, target, alpha, epsilon)?;
    let mut others: Vec<usize> = approx
        .estimate
        .iter()
        .enumerate()
        .filter(|&(i, &s)| i != target && s > 0.0)
        .map(|(i, _)| i)
        .collect();
    others.sort_by(|&a, &b| approx.estimate[b].total_cmp(&approx.estimate[a]).then(a.cmp(&b)));
    let mut ids = Vec::with_capacity(k);
    ids.push(target);
    ids.extend(others.into_iter().take(k - 1));
    let scores = ids.iter().map(|&i| approx.estimate[i]).collect();
    Ok((ids, scores))
}
