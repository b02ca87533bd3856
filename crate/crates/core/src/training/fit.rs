use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{step, TrainState};
use super::backward::batch_gradient;
use super::loss::Readout;
use crate::field::{ComplexField, GridSpec, PhaseMask};
use crate::network::{Network, NetworkConfig};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

pub const METRICS_HEADER: &str = "epoch,train_loss,train_acc,test_acc";

/// Labelled input fields addressed by index.
pub trait SampleSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn field(&self, index: usize) -> Result<ComplexField>;

    fn label(&self, index: usize) -> usize;
}

impl SampleSource for [(ComplexField, usize)] {
    fn len(&self) -> usize {
        <[_]>::len(self)
    }

    fn field(&self, index: usize) -> Result<ComplexField> {
        Ok(self[index].0.clone())
    }

    fn label(&self, index: usize) -> usize {
        self[index].1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Sum per-sample gradients in a fixed order.
    pub deterministic: bool,
    pub readout: Readout,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            epochs: 500,
            batch_size: 32,
            deterministic: true,
            readout: Readout::Raw,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(Error::invalid(format!("learning rate must be >= 0, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("Adam betas must lie in [0, 1)"));
        }
        if !(self.adam_eps.is_finite() && self.adam_eps > 0.0) {
            return Err(Error::invalid("Adam epsilon must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be >= 1"));
        }
        if let Readout::Normalized { scale } = self.readout {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::invalid("readout scale must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub config: NetworkConfig,
    pub state: TrainState,
    pub history: Vec<EpochMetrics>,
}

/// Seeded i.i.d. uniform phases on `[0, 2pi)` for `layers` masks.
pub fn init_masks(grid: GridSpec, layers: usize, seed: u64) -> Vec<PhaseMask> {
    let mut rng = stream(seed, Stream::Init);
    (0..layers).map(|_| PhaseMask::random(grid, &mut rng)).collect()
}

/// Accuracy of `net` on `ids` and the per-sample predictions.
pub fn evaluate(net: &Network, data: &(impl SampleSource + ?Sized), ids: &[usize]) -> Result<(f64, Vec<usize>)> {
    let preds: Vec<usize> = ids
        .par_iter()
        .map(|&i| net.predict(&data.field(i)?))
        .collect::<Result<_>>()?;
    let correct = ids.iter().zip(&preds).filter(|(&i, &p)| data.label(i) == p).count();
    let acc = if ids.is_empty() {
        f64::NAN
    } else {
        correct as f64 / ids.len() as f64
    };
    Ok((acc, preds))
}

/// Mini-batch Adam training.
///
/// Each epoch visits the training ids in a seeded shuffled order. The
/// reported train loss and accuracy are averaged over the epoch using the
/// parameters in effect when each batch was evaluated; test accuracy uses
/// the parameters at the end of the epoch. `on_epoch` runs after every
/// epoch.
pub fn fit(
    config: NetworkConfig,
    data: &(impl SampleSource + ?Sized),
    train: &[usize],
    test: &[usize],
    hyper: HyperParams,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<FitOutcome> {
    if train.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if let Some(&bad) = train.iter().chain(test).find(|&&i| i >= data.len()) {
        return Err(Error::invalid(format!("sample index {bad} out of range")));
    }
    let mut state = TrainState::new(&config, seed, hyper.clone())?;
    let mut net = Network::new(config)?;
    let mut order_rng = stream(seed, Stream::BatchOrder);
    let mut order = train.to_vec();
    let mut history = Vec::with_capacity(hyper.epochs);
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<(ComplexField, usize)> = chunk
                .iter()
                .map(|&i| Ok((data.field(i)?, data.label(i))))
                .collect::<Result<_>>()?;
            let (grads, reports) = batch_gradient(&net, &batch, hyper.readout, hyper.deterministic)?;
            for (r, (_, label)) in reports.iter().zip(&batch) {
                loss_sum += r.loss;
                correct += usize::from(r.predicted == *label);
            }
            step(&mut state, &grads)?;
            net.set_thetas(&state.masks)?;
        }
        state.epoch = epoch;
        let (test_acc, _) = evaluate(&net, data, test)?;
        let metrics = EpochMetrics {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            train_acc: correct as f64 / train.len() as f64,
            test_acc,
        };
        on_epoch(&metrics);
        history.push(metrics);
    }
    Ok(FitOutcome {
        config: net.into_config(),
        state,
        history,
    })
}

/// Metrics table with header `epoch,train_loss,train_acc,test_acc`.
/// Floats use the shortest representation that parses back to the same
/// value.
pub fn metrics_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for m in history {
        let _ = writeln!(out, "{},{},{},{}", m.epoch, m.train_loss, m.train_acc, m.test_acc);
    }
    out
}

pub fn write_metrics_csv(path: &Path, history: &[EpochMetrics]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, metrics_csv(history))?;
    fs::rename(&tmp, path)?;
    Ok(())
}
