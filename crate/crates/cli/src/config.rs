//! Run configuration: one TOML file with a fixed key set.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use holograph::field::{DetectorLayout, GridSpec, Padding};
use holograph::graphprep::{FeatureNormalization, PrepParams};
use holograph::network::{SkipChannel, SkipSetup};
use holograph::training::{HyperParams, Readout};
use serde::{Deserialize, Serialize};

/// A configuration value that violates a constraint.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Every setting of an experiment. Missing keys take the defaults of the
/// Cora-ML setup; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory holding `features.csv`, `labels.csv` and `edges.tsv`.
    pub dataset: PathBuf,

    pub n: usize,
    /// Pixel pitch in metres.
    pub pitch: f64,
    /// Wavelength in metres.
    pub wavelength: f64,
    /// Distance between consecutive planes in metres.
    pub layer_distance: f64,
    pub padding: Padding,

    /// Compressed feature dimension.
    pub d: usize,
    /// Nodes per sample, target included.
    pub k: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub normalization: FeatureNormalization,
    pub encode_score_on_phase: bool,

    pub num_layers: usize,
    pub feature_layers: usize,
    pub skip_setup: SkipSetup,
    /// Side length in pixels of each square detector region.
    pub detector_side: usize,
    pub readout: Readout,

    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub deterministic: bool,

    pub test_size: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: PathBuf::from("data/cora_ml"),
            n: 200,
            pitch: 36e-6,
            wavelength: 532e-9,
            layer_distance: 0.2794,
            padding: Padding::None,
            d: 100,
            k: 5,
            alpha: 0.15,
            epsilon: 1e-4,
            normalization: FeatureNormalization::Global,
            encode_score_on_phase: false,
            num_layers: 6,
            feature_layers: 3,
            skip_setup: SkipSetup::Numbered(2),
            detector_side: 20,
            readout: Readout::Raw,
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            epochs: 500,
            batch_size: 32,
            deterministic: false,
            test_size: 1000,
            seed: 0,
            out_dir: PathBuf::from("runs/cora_ml"),
        }
    }
}

pub const PRESETS: [&str; 4] = ["cora_ml", "citeseer", "amazon_photo", "synthetic"];

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let base = RunConfig::default();
        Ok(match name {
            "cora_ml" => base,
            "citeseer" => RunConfig {
                dataset: "data/citeseer".into(),
                out_dir: "runs/citeseer".into(),
                ..base
            },
            "amazon_photo" => RunConfig {
                dataset: "data/amazon_photo".into(),
                out_dir: "runs/amazon_photo".into(),
                d: 70,
                ..base
            },
            "synthetic" => RunConfig {
                dataset: "data/synthetic".into(),
                out_dir: "runs/synthetic".into(),
                n: 64,
                layer_distance: 0.05,
                d: 8,
                detector_side: 8,
                epochs: 50,
                batch_size: 16,
                test_size: 30,
                ..base
            },
            other => bail!("unknown preset '{other}'; expected one of {}", PRESETS.join(", ")),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn dump(&self) -> String {
        toml::to_string(self).expect("RunConfig always serialises")
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.n, self.pitch, self.wavelength, self.layer_distance)?)
    }

    pub fn prep_params(&self) -> PrepParams {
        PrepParams {
            d: self.d,
            k: self.k,
            alpha: self.alpha,
            epsilon: self.epsilon,
            normalization: self.normalization,
        }
    }

    pub fn hyper(&self) -> HyperParams {
        HyperParams {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            adam_eps: self.adam_eps,
            epochs: self.epochs,
            batch_size: self.batch_size,
            deterministic: self.deterministic,
            readout: self.readout,
        }
    }

    pub fn skips(&self) -> Result<Vec<SkipChannel>> {
        Ok(self.skip_setup.channels()?)
    }

    /// Checks everything that can be checked without the dataset.
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|e| ConfigError(format!("{e:#}")).into())
    }

    fn check(&self) -> Result<()> {
        self.grid()?;
        if self.k == 0 || self.d == 0 {
            bail!("k and d must be at least 1");
        }
        if self.k > self.n || self.d > self.n {
            bail!(
                "a {}x{} input block does not fit a {}x{} grid",
                self.k,
                self.d,
                self.n,
                self.n
            );
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1)");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            bail!("epsilon must be positive");
        }
        if self.num_layers == 0 {
            bail!("num_layers must be at least 1");
        }
        if self.feature_layers > self.num_layers {
            bail!(
                "feature_layers ({}) exceeds num_layers ({})",
                self.feature_layers,
                self.num_layers
            );
        }
        for s in self.skips()? {
            if s.to > self.num_layers {
                bail!("skip {s} ends beyond layer {}", self.num_layers);
            }
        }
        if self.detector_side == 0 || self.detector_side > self.n {
            bail!("detector_side must lie in [1, n]");
        }
        self.hyper().validate()?;
        if self.epochs == 0 {
            bail!("epochs must be at least 1");
        }
        Ok(())
    }

    /// Detector layout for `classes` classes; fails if the regions do not fit.
    pub fn detector(&self, classes: usize) -> Result<DetectorLayout> {
        DetectorLayout::uniform(self.n, classes, self.detector_side)
            .with_context(|| format!("placing {classes} detector regions of side {}", self.detector_side))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_system() {
        let c = RunConfig::default();
        assert_eq!((c.n, c.d, c.k, c.num_layers, c.feature_layers), (200, 100, 5, 6, 3));
        assert_eq!(c.wavelength, 532e-9);
        assert_eq!(c.layer_distance, 0.2794);
        assert_eq!(
            c.skips().unwrap(),
            vec![
                SkipChannel::new(0, 4).unwrap(),
                SkipChannel::new(0, 5).unwrap(),
                SkipChannel::new(0, 6).unwrap()
            ]
        );
        assert_eq!(c.test_size, 1000);
        assert_eq!(RunConfig::preset("amazon_photo").unwrap().d, 70);
        for p in PRESETS {
            RunConfig::preset(p).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn dump_parse_round_trip() {
        let mut c = RunConfig::preset("synthetic").unwrap();
        c.readout = Readout::Normalized { scale: 12.5 };
        c.skip_setup = "0-4,1-5".parse().unwrap();
        c.padding = Padding::Double;
        c.pitch = 3.3e-5;
        let back = RunConfig::parse(&c.dump()).unwrap();
        assert_eq!(back, c);
        assert_eq!(RunConfig::parse(&back.dump()).unwrap().dump(), c.dump());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = RunConfig::parse("n = 64\nlearning_rate = 0.1\n").unwrap_err();
        assert!(format!("{err:#}").contains("learning_rate"));
    }

    #[test]
    fn partial_file_takes_defaults() {
        let c = RunConfig::parse("d = 70\nskip_setup = 6\nreadout = \"raw\"\n").unwrap();
        assert_eq!(c.d, 70);
        assert_eq!(c.skip_setup, SkipSetup::Numbered(6));
        assert_eq!(c.k, 5);
        let c = RunConfig::parse("skip_setup = \"none\"\n").unwrap();
        assert!(c.skips().unwrap().is_empty());
        assert!(RunConfig::parse("skip_setup = 9\n").is_err());
    }

    #[test]
    fn validation_catches_misfits() {
        let bad = RunConfig {
            d: 300,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            num_layers: 3,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            lr: -1.0,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
