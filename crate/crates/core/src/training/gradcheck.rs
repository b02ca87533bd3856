use rand::seq::index::sample;
use rand::Rng;

use super::backward::backward;
use super::loss::{loss_with_gradient, Readout};
use crate::field::{detect, ComplexField, DetectorLayout, GridSpec, PhaseMask};
use crate::network::{Network, NetworkConfig, SkipChannel};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

/// Small network on which analytic gradients are compared to central
/// finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckConfig {
    pub grid: GridSpec,
    pub layers: usize,
    pub skips: Vec<SkipChannel>,
    pub classes: usize,
    pub detector_side: usize,
    /// Number of mask pixels to check.
    pub samples: usize,
    pub step: f64,
    /// Start from all-zero masks instead of random phases.
    pub zero_masks: bool,
    /// Energy of the random input field.
    pub input_energy: f64,
    pub readout: Readout,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    /// 16x16 grid, two layers, one skip from the input to layer 2, two
    /// detector regions, 64 sampled parameters and a 1e-6 step.
    fn default() -> Self {
        GradCheckConfig {
            grid: GridSpec {
                n: 16,
                pitch: 36e-6,
                wavelength: 532e-9,
                layer_distance: 0.02,
            },
            layers: 2,
            skips: vec![SkipChannel { from: 0, to: 2 }],
            classes: 2,
            detector_side: 4,
            samples: 64,
            step: 1e-6,
            zero_masks: false,
            input_energy: 16.0,
            readout: Readout::Raw,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckEntry {
    /// 1-based layer index.
    pub layer: usize,
    pub pixel: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
    pub max_rel_err: f64,
    pub median_rel_err: f64,
    /// Magnitude below which errors are measured in absolute terms.
    pub floor: f64,
}

/// Smallest denominator for the relative error.
pub const REL_ERR_FLOOR: f64 = 1e-6;

/// Central differences of a loss `l` lose about `EPSILON * |l| / step` to
/// cancellation per ulp of forward-pass rounding. Gradients within this
/// many noise units of zero are compared on an absolute scale instead.
const NOISE_UNITS: f64 = 1e6;

/// Denominator floor for a check whose base loss is `loss`.
pub fn error_floor(loss: f64, step: f64) -> f64 {
    REL_ERR_FLOOR.max(NOISE_UNITS * f64::EPSILON * loss.abs() / step)
}

/// `|a - fd| / max(|a|, |fd|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

fn sample_loss(net: &Network, input: &ComplexField, target: usize, readout: Readout) -> Result<f64> {
    let pass = net.forward(input)?;
    let sums = detect(&pass.intensity, &net.config().detector)?;
    Ok(loss_with_gradient(&sums, target, readout)?.0.loss)
}

pub fn grad_check(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    if !(cfg.step.is_finite() && cfg.step > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let mut rng = stream(cfg.seed, Stream::GradCheck);
    let grid = cfg.grid;
    let masks: Vec<PhaseMask> = (0..cfg.layers)
        .map(|_| {
            if cfg.zero_masks {
                PhaseMask::zeros(grid)
            } else {
                PhaseMask::random(grid, &mut rng)
            }
        })
        .collect();
    let detector = DetectorLayout::uniform(grid.n, cfg.classes, cfg.detector_side)?;
    let config = NetworkConfig::new(grid, masks, cfg.skips.clone(), detector)?;
    let mut input = ComplexField::random_unit(grid, &mut rng);
    input.scale(cfg.input_energy.sqrt());
    let target = rng.random_range(0..cfg.classes);

    let net = Network::new(config)?;
    let grads = backward(&net, &input, target, cfg.readout)?;

    let total = cfg.layers * grid.len();
    let count = cfg.samples.min(total);
    let mut picks: Vec<usize> = sample(&mut rng, total, count).into_vec();
    picks.sort_unstable();

    let floor = error_floor(grads.report.loss, cfg.step);
    let base: Vec<Vec<f64>> = net.config().masks.iter().map(|m| m.theta().to_vec()).collect();
    let mut probe = net.clone();
    let mut entries = Vec::with_capacity(count);
    for flat in picks {
        let (li, pixel) = (flat / grid.len(), flat % grid.len());
        let mut thetas = base.clone();
        thetas[li][pixel] = base[li][pixel] + cfg.step;
        probe.set_thetas(&thetas)?;
        let up = sample_loss(&probe, &input, target, cfg.readout)?;
        thetas[li][pixel] = base[li][pixel] - cfg.step;
        probe.set_thetas(&thetas)?;
        let down = sample_loss(&probe, &input, target, cfg.readout)?;
        let numeric = (up - down) / (2.0 * cfg.step);
        let analytic = grads.layers[li][pixel];
        entries.push(GradCheckEntry {
            layer: li + 1,
            pixel,
            analytic,
            numeric,
            rel_err: relative_error(analytic, numeric, floor),
        });
    }
    let mut errs: Vec<f64> = entries.iter().map(|e| e.rel_err).collect();
    errs.sort_by(f64::total_cmp);
    let max_rel_err = errs.last().copied().unwrap_or(0.0);
    let median_rel_err = if errs.is_empty() {
        0.0
    } else if errs.len() % 2 == 1 {
        errs[errs.len() / 2]
    } else {
        0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2])
    };
    Ok(GradCheckReport {
        entries,
        max_rel_err,
        median_rel_err,
        floor,
    })
}
