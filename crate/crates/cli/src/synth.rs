//! Synthetic two-community dataset for end-to-end sanity runs.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use holograph::rng::{stream, Stream};
use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};

use crate::output::write_atomic;

/// Shape of the generated graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub clique_size: usize,
    /// Random edges between the two cliques.
    pub cross_edges: usize,
    /// Feature dimension; the first half is the class-0 prototype, the second
    /// half class 1.
    pub features: usize,
    pub noise_std: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            clique_size: 50,
            cross_edges: 6,
            features: 16,
            noise_std: 0.2,
        }
    }
}

/// Generated dataset files, as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthFiles {
    pub features: String,
    pub labels: String,
    pub edges: String,
}

pub fn generate(spec: &SynthSpec, seed: u64) -> SynthFiles {
    let mut rng = stream(seed, Stream::Synth);
    let m = spec.clique_size;
    let mut edges = String::new();
    for base in [0, m] {
        for a in 0..m {
            for b in a + 1..m {
                let _ = writeln!(edges, "{}\t{}", base + a, base + b);
            }
        }
    }
    let cross = sample(&mut rng, m * m, spec.cross_edges.min(m * m));
    let mut cross: Vec<usize> = cross.into_vec();
    cross.sort_unstable();
    for c in cross {
        let _ = writeln!(edges, "{}\t{}", c / m, m + c % m);
    }

    let noise = Normal::new(0.0, spec.noise_std).expect("noise std is finite and non-negative");
    let half = spec.features / 2;
    let mut features = String::new();
    let mut labels = String::new();
    for node in 0..2 * m {
        let class = node / m;
        let _ = writeln!(labels, "{class}");
        let row: Vec<String> = (0..spec.features)
            .map(|j| {
                let on = (j < half) == (class == 0);
                let v = if on { 1.0 } else { 0.0 } + noise.sample(&mut rng);
                format!("{v:.6}")
            })
            .collect();
        features.push_str(&row.join(","));
        features.push('\n');
    }
    SynthFiles {
        features,
        labels,
        edges,
    }
}

pub fn write(dir: &Path, files: &SynthFiles) -> Result<()> {
    write_atomic(&dir.join("features.csv"), files.features.as_bytes())?;
    write_atomic(&dir.join("labels.csv"), files.labels.as_bytes())?;
    write_atomic(&dir.join("edges.tsv"), files.edges.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let spec = SynthSpec::default();
        let a = generate(&spec, 3);
        assert_eq!(a, generate(&spec, 3));
        assert_ne!(a.features, generate(&spec, 4).features);
        assert_eq!(a.labels.lines().count(), 100);
        assert_eq!(a.edges.lines().count(), 2 * 1225 + 6);
        assert!(a.features.lines().all(|l| l.split(',').count() == 16));
    }
}
