use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::{Error, ParseErrorKind, Result};

/// Undirected, unweighted attributed graph with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    features: DMatrix<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are symmetrised, duplicates
    /// collapsed and self-loops dropped.
    pub fn new(num_nodes: usize, edges: &[(usize, usize)], features: DMatrix<f64>, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != num_nodes || labels.len() != num_nodes {
            return Err(Error::invalid(format!(
                "{num_nodes} nodes but {} feature rows and {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("features must be finite"));
        }
        let mut sets = vec![BTreeSet::new(); num_nodes];
        for &(a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::invalid(format!("edge ({a}, {b}) references a missing node")));
            }
            if a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Graph {
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            features,
            labels,
            num_classes,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    /// Sub-graph on the nodes for which `keep` is true, renumbered densely in
    /// their original order.
    fn retain(&self, keep: &[bool]) -> Graph {
        let mut new_id = vec![usize::MAX; self.num_nodes()];
        let mut kept = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_id[i] = kept.len();
                kept.push(i);
            }
        }
        let adjacency = kept
            .iter()
            .map(|&i| {
                self.adjacency[i]
                    .iter()
                    .filter(|&&j| keep[j])
                    .map(|&j| new_id[j])
                    .collect()
            })
            .collect();
        let features = self.features.select_rows(kept.iter());
        let labels = kept.iter().map(|&i| self.labels[i]).collect();
        Graph {
            adjacency,
            features,
            labels,
            num_classes: self.num_classes,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(fs::read_to_string(path)?)
}

fn parse_err(path: &Path, line: usize, kind: ParseErrorKind, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        kind,
        message: message.into(),
    }
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Reads `features.csv`, `labels.csv` and `edges.tsv` from `dir`.
///
/// Node count comes from `features.csv`. Nodes without edges or with an
/// all-zero feature row are removed (repeatedly, since removing a node can
/// isolate a neighbour) and the rest renumbered in order.
pub fn load_dataset(dir: &Path) -> Result<Graph> {
    let features_path = dir.join("features.csv");
    let labels_path = dir.join("labels.csv");
    let edges_path = dir.join("edges.tsv");
    let features_text = read(&features_path)?;
    let labels_text = read(&labels_path)?;
    let edges_text = read(&edges_path)?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (line, text) in lines(&features_text) {
        let row: Vec<f64> = text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(&features_path, line, ParseErrorKind::Malformed, e.to_string()))?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(
                &features_path,
                line,
                ParseErrorKind::Malformed,
                "non-finite feature",
            ));
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(parse_err(
                    &features_path,
                    line,
                    ParseErrorKind::RaggedFeatures,
                    format!("expected {d} values, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    let num_nodes = rows.len();
    let dim = dim.unwrap_or(0);

    let mut labels = Vec::with_capacity(num_nodes);
    let mut last_line = 0;
    for (line, text) in lines(&labels_text) {
        last_line = line;
        let v: i64 = text.parse().map_err(|_| {
            parse_err(
                &labels_path,
                line,
                ParseErrorKind::Malformed,
                format!("bad label '{text}'"),
            )
        })?;
        if v < 0 || v > u32::MAX as i64 {
            return Err(parse_err(
                &labels_path,
                line,
                ParseErrorKind::LabelOutOfRange,
                format!("label {v} out of range"),
            ));
        }
        labels.push(v as usize);
    }
    if labels.len() != num_nodes {
        return Err(parse_err(
            &labels_path,
            last_line,
            ParseErrorKind::RowCountMismatch,
            format!("{} labels for {num_nodes} feature rows", labels.len()),
        ));
    }

    let mut edges = Vec::new();
    for (line, text) in lines(&edges_text) {
        let ids: Vec<&str> = text.split_whitespace().collect();
        if ids.len() != 2 {
            return Err(parse_err(
                &edges_path,
                line,
                ParseErrorKind::Malformed,
                "expected two node ids",
            ));
        }
        let mut pair = [0usize; 2];
        for (slot, t) in pair.iter_mut().zip(&ids) {
            let v: i64 = t.parse().map_err(|_| {
                parse_err(
                    &edges_path,
                    line,
                    ParseErrorKind::Malformed,
                    format!("bad node id '{t}'"),
                )
            })?;
            if v < 0 || v as usize >= num_nodes {
                return Err(parse_err(
                    &edges_path,
                    line,
                    ParseErrorKind::NodeIdOutOfRange,
                    format!("node id {v} outside [0, {num_nodes})"),
                ));
            }
            *slot = v as usize;
        }
        edges.push((pair[0], pair[1]));
    }

    let features = DMatrix::from_fn(num_nodes, dim, |r, c| rows[r][c]);
    let mut graph = Graph::new(num_nodes, &edges, features, labels)?;
    loop {
        let keep: Vec<bool> = (0..graph.num_nodes())
            .map(|i| graph.degree(i) > 0 && graph.features.row(i).iter().any(|&v| v != 0.0))
            .collect();
        if keep.iter().all(|&k| k) {
            break;
        }
        graph = graph.retain(&keep);
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_dir(features: &str, labels: &str, edges: &str) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("features.csv"), features).unwrap();
        fs::write(dir.path().join("labels.csv"), labels).unwrap();
        fs::write(dir.path().join("edges.tsv"), edges).unwrap();
        dir
    }

    #[test]
    fn two_node_toy() {
        let dir = write_dir("1,0\n0,1\n", "0\n1\n", "0\t1\n");
        let g = load_dataset(dir.path()).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
        assert_eq!(g.num_classes(), 2);
    }

    #[test]
    fn duplicate_and_reversed_edges_collapse() {
        let dir = write_dir("1\n1\n1\n", "0\n0\n1\n", "0 1\n1 0\n0 1\n1 2\n2 2\n");
        let g = load_dataset(dir.path()).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(2), &[1]);
    }

    #[test]
    fn isolated_and_featureless_nodes_are_dropped() {
        // node 1 has no edges, node 3 has zero features; node 2 then only
        // links to 3 and becomes isolated too.
        let dir = write_dir("1\n2\n3\n0\n5\n", "0\n1\n2\n0\n1\n", "0 4\n2 3\n");
        let g = load_dataset(dir.path()).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.labels(), &[0, 1]);
        assert_eq!(g.features()[(1, 0)], 5.0);
    }

    #[test]
    fn distinct_errors_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::MissingFile(_))));

        let dir = write_dir("1\n1\n", "0\n1\n", "0 1\n0 5\n");
        match load_dataset(dir.path()) {
            Err(Error::Parse { line, kind, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(kind, ParseErrorKind::NodeIdOutOfRange);
            }
            other => panic!("{other:?}"),
        }

        let dir = write_dir("1\n1\n", "0\n-3\n", "0 1\n");
        match load_dataset(dir.path()) {
            Err(Error::Parse { line, kind, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(kind, ParseErrorKind::LabelOutOfRange);
            }
            other => panic!("{other:?}"),
        }

        let dir = write_dir("1,2\n1\n", "0\n1\n", "0 1\n");
        match load_dataset(dir.path()) {
            Err(Error::Parse { line, kind, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(kind, ParseErrorKind::RaggedFeatures);
            }
            other => panic!("{other:?}"),
        }

        let dir = write_dir("1\n1\n", "0\n", "0 1\n");
        assert!(matches!(
            load_dataset(dir.path()),
            Err(Error::Parse {
                kind: ParseErrorKind::RowCountMismatch,
                ..
            })
        ));
    }
}
