use rayon::prelude::*;

use super::loss::{loss_with_gradient, LossReport, Readout};
use crate::field::{detect, ComplexField};
use crate::network::Network;
use crate::{Error, Result};

/// Gradient of the loss with respect to every mask pixel, one array per
/// layer, plus the loss report of the forward pass that produced it.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Vec<f64>>,
    pub report: LossReport,
}

fn check_finite(field: &ComplexField, layer: usize) -> Result<()> {
    if field.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric {
            layer,
            message: "backward cotangent is not finite".into(),
        })
    }
}

fn add_into(acc: &mut Option<ComplexField>, value: ComplexField) {
    match acc {
        Some(a) => {
            for (x, y) in a.values_mut().iter_mut().zip(value.values()) {
                *x += y;
            }
        }
        None => *acc = Some(value),
    }
}

/// Reverse-mode gradient of the softmax-MSE loss for one sample.
///
/// Cotangents are carried as `dl/dRe f + i dl/dIm f`. With that convention
/// the adjoint of multiplying by a constant `c` is multiplying by `conj(c)`,
/// the adjoint of a propagation is propagation with the conjugate transfer
/// function, `|f|^2` sends a real cotangent `g` to `2 g f`, and for
/// `s = u e^{i theta}` the phase gradient is `Im(conj(s) * g_s)`.
pub fn backward(net: &Network, input: &ComplexField, target: usize, readout: Readout) -> Result<Gradients> {
    let cfg = net.config();
    let n = cfg.grid.n;
    let l = cfg.num_layers();
    let pass = net.forward(input)?;
    let sums = detect(&pass.intensity, &cfg.detector)?;
    let (report, dsums) = loss_with_gradient(&sums, target, readout)?;

    let out = pass.output();
    let mut cot = ComplexField::zeros(cfg.grid);
    for (c, region) in cfg.detector.regions().iter().enumerate() {
        let scale = 2.0 * dsums[c];
        for row in region.row0..region.row0 + region.height {
            for col in region.col0..region.col0 + region.width {
                let i = row * n + col;
                cot.values_mut()[i] = scale * out.values()[i];
            }
        }
    }

    let mut from_skips: Vec<Option<ComplexField>> = vec![None; l + 1];
    let mut grads = vec![Vec::new(); l];
    let prop = net.propagator();
    for layer in (1..=l).rev() {
        if let Some(extra) = from_skips[layer].take() {
            for (x, y) in cot.values_mut().iter_mut().zip(extra.values()) {
                *x += y;
            }
        }
        check_finite(&cot, layer)?;
        let s = &pass.taps[layer];
        grads[layer - 1] = s
            .values()
            .iter()
            .zip(cot.values())
            .map(|(sv, g)| (sv.conj() * g).im)
            .collect();
        for (g, w) in cot.values_mut().iter_mut().zip(net.phasors(layer)) {
            *g *= w.conj();
        }
        let mut merged = prop.apply_adjoint(&cot, net.transfer(1));
        let incoming = net.incoming(layer);
        if !incoming.is_empty() {
            merged.scale(1.0 / (incoming.len() + 1) as f64);
            for skip in incoming {
                // the input plane carries no parameters
                if skip.from > 0 {
                    let back = prop.apply_adjoint(&merged, net.transfer(skip.hops()));
                    add_into(&mut from_skips[skip.from], back);
                }
            }
        }
        cot = merged;
    }
    if grads.iter().flatten().any(|g| !g.is_finite()) {
        return Err(Error::Numeric {
            layer: 0,
            message: "phase gradient is not finite".into(),
        });
    }
    Ok(Gradients { layers: grads, report })
}

/// Mean gradient over a batch, plus the per-sample loss reports in batch
/// order.
///
/// With `deterministic` set, per-sample gradients are summed in batch order,
/// so the result does not depend on thread scheduling. Otherwise rayon's
/// reduction tree decides the order and results may differ in the last bits.
pub fn batch_gradient(
    net: &Network,
    samples: &[(ComplexField, usize)],
    readout: Readout,
    deterministic: bool,
) -> Result<(Vec<Vec<f64>>, Vec<LossReport>)> {
    if samples.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let l = net.config().num_layers();
    let len = net.config().grid.len();
    let zero = || vec![vec![0.0; len]; l];
    let accumulate = |mut acc: Vec<Vec<f64>>, g: &[Vec<f64>]| {
        for (a, b) in acc.iter_mut().zip(g) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        acc
    };
    let per_sample: Vec<Gradients> = samples
        .par_iter()
        .map(|(f, t)| backward(net, f, *t, readout))
        .collect::<Result<_>>()?;
    let mut total = if deterministic {
        per_sample.iter().fold(zero(), |acc, g| accumulate(acc, &g.layers))
    } else {
        per_sample
            .par_iter()
            .fold(zero, |acc, g| accumulate(acc, &g.layers))
            .reduce(zero, |a, b| accumulate(a, &b))
    };
    let reports = per_sample.into_iter().map(|g| g.report).collect();
    let inv = 1.0 / samples.len() as f64;
    for layer in &mut total {
        for v in layer.iter_mut() {
            *v *= inv;
        }
    }
    Ok((total, reports))
}
