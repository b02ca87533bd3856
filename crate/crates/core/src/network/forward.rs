use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;

use super::skip::SkipChannel;
use crate::field::{
    detect, intensity, ComplexField, DetectorLayout, GridSpec, Intensity, Padding, PhaseMask, Propagator, Transfer,
};
use crate::{Error, Result};

/// Topology and parameters of a diffractive network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub grid: GridSpec,
    /// One mask per diffractive layer; layer `i` (1-based) uses `masks[i - 1]`.
    pub masks: Vec<PhaseMask>,
    pub skips: Vec<SkipChannel>,
    pub detector: DetectorLayout,
    /// Number of leading layers treated as feature aggregation. Informational.
    pub feature_layers: usize,
    pub padding: Padding,
}

impl NetworkConfig {
    pub fn new(
        grid: GridSpec,
        masks: Vec<PhaseMask>,
        skips: Vec<SkipChannel>,
        detector: DetectorLayout,
    ) -> Result<Self> {
        let feature_layers = masks.len() / 2;
        let cfg = NetworkConfig {
            grid,
            masks,
            skips,
            detector,
            feature_layers,
            padding: Padding::None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn num_layers(&self) -> usize {
        self.masks.len()
    }

    pub fn num_classes(&self) -> usize {
        self.detector.num_classes()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let l = self.masks.len();
        if l == 0 {
            return Err(Error::invalid("network needs at least one layer"));
        }
        if self.masks.iter().any(|m| m.grid() != &self.grid) {
            return Err(Error::invalid("all masks must share the network grid"));
        }
        let mut seen = HashSet::new();
        for s in &self.skips {
            if s.from >= s.to || s.to > l {
                return Err(Error::invalid(format!("skip {s} is invalid for a {l}-layer network")));
            }
            if !seen.insert((s.from, s.to)) {
                return Err(Error::invalid(format!("duplicate skip {s}")));
            }
        }
        self.detector.validate_for(self.grid.n)?;
        Ok(())
    }
}

/// Result of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Detector-plane intensity.
    pub intensity: Intensity,
    /// `taps[0]` is the input field; `taps[i]` the field right after layer
    /// `i`'s modulation. `taps[L]` is the field at the detector.
    pub taps: Vec<ComplexField>,
}

impl ForwardPass {
    pub fn output(&self) -> &ComplexField {
        self.taps.last().expect("forward pass always has the input tap")
    }
}

/// A validated [`NetworkConfig`] with propagation state prepared for repeated
/// forward passes. Immutable; safe to share between threads.
#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    propagator: Propagator,
    /// Transfer functions keyed by hop count (1 = one layer distance).
    transfers: BTreeMap<usize, Transfer>,
    phasors: Vec<Vec<Complex64>>,
    incoming: Vec<Vec<SkipChannel>>,
}

impl Network {
    pub fn new(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let propagator = Propagator::new(config.grid, config.padding);
        let mut transfers = BTreeMap::new();
        let z = config.grid.layer_distance;
        for hops in std::iter::once(1).chain(config.skips.iter().map(SkipChannel::hops)) {
            if let std::collections::btree_map::Entry::Vacant(e) = transfers.entry(hops) {
                e.insert(propagator.transfer(hops as f64 * z)?);
            }
        }
        let phasors = config.masks.iter().map(PhaseMask::phasors).collect();
        let mut incoming = vec![Vec::new(); config.num_layers() + 1];
        for s in &config.skips {
            incoming[s.to].push(*s);
        }
        Ok(Network {
            config,
            propagator,
            transfers,
            phasors,
            incoming,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn into_config(self) -> NetworkConfig {
        self.config
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn transfer(&self, hops: usize) -> &Transfer {
        &self.transfers[&hops]
    }

    pub fn phasors(&self, layer: usize) -> &[Complex64] {
        &self.phasors[layer - 1]
    }

    /// Skip channels merging into the input of `layer`, in config order.
    pub fn incoming(&self, layer: usize) -> &[SkipChannel] {
        &self.incoming[layer]
    }

    /// Replaces the phase of every mask, keeping the topology.
    pub fn set_thetas(&mut self, thetas: &[Vec<f64>]) -> Result<()> {
        if thetas.len() != self.config.masks.len() {
            return Err(Error::invalid("wrong number of mask arrays"));
        }
        for (i, t) in thetas.iter().enumerate() {
            let mask = PhaseMask::from_theta(self.config.grid, t.clone())?;
            self.phasors[i] = mask.phasors();
            self.config.masks[i] = mask;
        }
        Ok(())
    }

    pub fn forward(&self, input: &ComplexField) -> Result<ForwardPass> {
        if input.grid() != &self.config.grid {
            return Err(Error::invalid("input field grid does not match network grid"));
        }
        let l = self.config.num_layers();
        let mut taps: Vec<ComplexField> = Vec::with_capacity(l + 1);
        taps.push(input.clone());
        for layer in 1..=l {
            let mut merged = taps[layer - 1].clone();
            let skips = self.incoming(layer);
            if !skips.is_empty() {
                let branches: Vec<ComplexField> = skips
                    .iter()
                    .map(|s| self.propagator.apply(&taps[s.from], self.transfer(s.hops())))
                    .collect();
                merge_into(&mut merged, &branches);
            }
            let mut out = self.propagator.apply(&merged, self.transfer(1));
            for (v, w) in out.values_mut().iter_mut().zip(self.phasors(layer)) {
                *v *= w;
            }
            if !out.is_finite() {
                return Err(Error::Numeric {
                    layer,
                    message: "forward field is not finite".into(),
                });
            }
            taps.push(out);
        }
        let intensity = intensity(taps.last().expect("at least one layer"));
        Ok(ForwardPass { intensity, taps })
    }

    pub fn detector_sums(&self, input: &ComplexField) -> Result<Vec<f64>> {
        let pass = self.forward(input)?;
        detect(&pass.intensity, &self.config.detector)
    }

    pub fn predict(&self, input: &ComplexField) -> Result<usize> {
        Ok(argmax(&self.detector_sums(input)?))
    }
}

/// Equal-weight complex mean of `mainline` and `branches`, written into
/// `mainline`. Computed as a running mean so that merging identical fields
/// returns the field unchanged.
pub(crate) fn merge_into(mainline: &mut ComplexField, branches: &[ComplexField]) {
    for (i, b) in branches.iter().enumerate() {
        let count = (i + 2) as f64;
        for (m, v) in mainline.values_mut().iter_mut().zip(b.values()) {
            *m += (v - *m) / count;
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn forward(config: &NetworkConfig, input: &ComplexField) -> Result<ForwardPass> {
    Network::new(config.clone())?.forward(input)
}

pub fn predict(config: &NetworkConfig, input: &ComplexField) -> Result<usize> {
    Network::new(config.clone())?.predict(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> GridSpec {
        GridSpec::new(8, 36e-6, 532e-9, 0.05).unwrap()
    }

    #[test]
    fn merging_identical_fields_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = ComplexField::random_unit(grid(), &mut rng);
        for m in 1..6 {
            let mut merged = f.clone();
            merge_into(&mut merged, &vec![f.clone(); m]);
            assert_eq!(merged, f);
        }
    }

    #[test]
    fn merging_zero_halves_the_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = ComplexField::random_unit(grid(), &mut rng);
        let mut merged = f.clone();
        merge_into(&mut merged, &[ComplexField::zeros(grid())]);
        for (a, b) in merged.values().iter().zip(f.values()) {
            assert_eq!(*a, b / 2.0);
        }
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
        assert_eq!(argmax(&[0.0, 0.0, 5.0]), 2);
    }

    #[test]
    fn config_validation() {
        let g = grid();
        let det = DetectorLayout::uniform(8, 2, 2).unwrap();
        let masks = vec![PhaseMask::zeros(g); 3];
        assert!(NetworkConfig::new(g, masks.clone(), vec![SkipChannel { from: 0, to: 4 }], det.clone()).is_err());
        let dup = vec![SkipChannel { from: 0, to: 2 }, SkipChannel { from: 0, to: 2 }];
        assert!(NetworkConfig::new(g, masks.clone(), dup, det.clone()).is_err());
        let other = GridSpec::new(4, 36e-6, 532e-9, 0.05).unwrap();
        assert!(NetworkConfig::new(g, vec![PhaseMask::zeros(other)], vec![], det.clone()).is_err());
        assert!(NetworkConfig::new(g, masks, vec![SkipChannel { from: 1, to: 3 }], det).is_ok());
    }
}
